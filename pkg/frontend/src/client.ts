/**
 * WebSocket client of the bridge's /ws endpoint.
 *
 * Inbound lines feed the TelemetryStore; outbound lines come from the
 * CommandStream's send callback. While the socket is down send() returns
 * false and the stream drops commands (the server hovers on its own).
 */

import type { TelemetryStore } from "./telemetry.js";

/** The WebSocket surface used here, so tests can substitute a stub. */
export interface SocketLike {
  readyState: number;
  send(data: string): void;
  close(): void;
  onopen: ((ev: unknown) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

const OPEN = 1;

export type BridgeStatus = "connecting" | "open" | "closed";

export interface BridgeClientOptions {
  reconnectMs?: number;
  now?: () => number;
  factory?: SocketFactory;
}

export class BridgeClient {
  status: BridgeStatus = "closed";

  private socket: SocketLike | null = null;
  private stopped = false;
  private retry: ReturnType<typeof setTimeout> | null = null;
  private readonly reconnectMs: number;
  private readonly now: () => number;
  private readonly factory: SocketFactory;

  constructor(
    readonly url: string,
    private readonly store: TelemetryStore,
    opts: BridgeClientOptions = {},
  ) {
    this.reconnectMs = opts.reconnectMs ?? 1000;
    this.now = opts.now ?? Date.now;
    this.factory =
      opts.factory ?? ((u: string) => new WebSocket(u) as unknown as SocketLike);
  }

  connect(): void {
    this.stopped = false;
    this.open();
  }

  close(): void {
    this.stopped = true;
    if (this.retry !== null) clearTimeout(this.retry);
    this.retry = null;
    this.socket?.close();
    this.socket = null;
    this.status = "closed";
  }

  /** CommandStream send hook; false while the link is down. */
  send = (text: string): boolean => {
    if (this.socket === null || this.socket.readyState !== OPEN) return false;
    this.socket.send(text);
    return true;
  };

  private open(): void {
    this.status = "connecting";
    const sock = this.factory(this.url);
    this.socket = sock;
    sock.onopen = () => {
      this.status = "open";
    };
    sock.onmessage = (ev) => {
      if (typeof ev.data === "string") this.store.ingest(ev.data, this.now());
    };
    sock.onerror = () => {
      // onclose follows; reconnect is handled there.
    };
    sock.onclose = () => {
      if (this.socket !== sock) return;
      this.socket = null;
      this.status = this.stopped ? "closed" : "connecting";
      if (!this.stopped)
        this.retry = setTimeout(() => this.open(), this.reconnectMs);
    };
  }
}
