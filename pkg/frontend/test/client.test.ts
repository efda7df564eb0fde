import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { BridgeClient, type SocketLike } from "../src/client.js";
import { TelemetryStore } from "../src/telemetry.js";

class FakeSocket implements SocketLike {
  readyState = 0; // CONNECTING
  sent: string[] = [];
  onopen: ((ev: unknown) => void) | null = null;
  onclose: ((ev: unknown) => void) | null = null;
  onerror: ((ev: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;

  send(data: string) {
    this.sent.push(data);
  }
  close() {
    this.readyState = 3;
    this.onclose?.({});
  }

  serverOpen() {
    this.readyState = 1;
    this.onopen?.({});
  }
  serverSend(data: string) {
    this.onmessage?.({ data });
  }
  serverDrop() {
    this.readyState = 3;
    this.onclose?.({});
  }
}

describe("BridgeClient", () => {
  let sockets: FakeSocket[];
  let store: TelemetryStore;
  let client: BridgeClient;

  beforeEach(() => {
    vi.useFakeTimers();
    sockets = [];
    store = new TelemetryStore();
    client = new BridgeClient("ws://127.0.0.1:8642/ws", store, {
      reconnectMs: 250,
      factory: () => {
        const s = new FakeSocket();
        sockets.push(s);
        return s;
      },
    });
  });
  afterEach(() => {
    client.close();
    vi.useRealTimers();
  });

  it("refuses to send until the socket is open", () => {
    client.connect();
    expect(client.send("x")).toBe(false);
    sockets[0]!.serverOpen();
    expect(client.status).toBe("open");
    expect(client.send("x")).toBe(true);
    expect(sockets[0]!.sent).toEqual(["x"]);
  });

  it("feeds inbound lines to the store", () => {
    client.connect();
    sockets[0]!.serverOpen();
    sockets[0]!.serverSend(
      JSON.stringify({
        type: "telemetry",
        version: 1,
        t: 0.5,
        p: [0, 0, 1],
        v: [0, 0, 0],
        yaw: 0,
        clearance: 2.0,
      }),
    );
    expect(store.t).toBe(0.5);
    sockets[0]!.serverSend("junk");
    expect(store.malformed).toBe(1);
  });

  it("reconnects after a drop, and stops once closed", () => {
    client.connect();
    sockets[0]!.serverOpen();
    sockets[0]!.serverDrop();
    expect(client.status).toBe("connecting");
    vi.advanceTimersByTime(250);
    expect(sockets).toHaveLength(2);
    sockets[1]!.serverOpen();
    expect(client.status).toBe("open");

    client.close();
    expect(client.status).toBe("closed");
    vi.advanceTimersByTime(10_000);
    expect(sockets).toHaveLength(2); // no zombie reconnects
  });
});
