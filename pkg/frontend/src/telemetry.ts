/**
 * Client-side view of the stream: latest pose/path/corridor, the
 * accumulated map slice, and the health flags the renderers badge.
 */

import {
  type Message,
  type PathMessage,
  type SfcMessage,
  type Vec3,
  parseMessage,
} from "./protocol.js";

export interface EventEntry {
  t: number;
  name: string;
  detail: string;
}

export const STALE_AFTER_MS = 1000;
const EVENT_RING = 50;

export class TelemetryStore {
  t: number | null = null;
  p: Vec3 = [0, 0, 0];
  v: Vec3 = [0, 0, 0];
  yaw = 0;
  clearance = Infinity;
  path: PathMessage | null = null;
  sfc: SfcMessage | null = null;
  scan: Vec3[] = [];
  events: EventEntry[] = [];
  /** "i,j,k" -> cell state (0 unknown, 1 free, 2 occupied). */
  cells = new Map<string, number>();

  malformed = 0;
  outOfOrder = 0;
  lastRxMs: number | null = null;
  lastErrorMs: number | null = null;

  private lastT = new Map<string, number>();

  /**
   * Parse and fold in one wire line. Malformed lines are skipped and
   * counted; frames older than the newest already seen for their type are
   * dropped so views never step backward in time.
   */
  ingest(text: string, nowMs: number): Message | null {
    let msg: Message;
    try {
      msg = parseMessage(text);
    } catch {
      this.malformed += 1;
      this.lastErrorMs = nowMs;
      return null;
    }
    this.lastRxMs = nowMs;
    const prev = this.lastT.get(msg.type);
    if (prev !== undefined && msg.t < prev) {
      this.outOfOrder += 1;
      return null;
    }
    this.lastT.set(msg.type, msg.t);
    this.apply(msg);
    return msg;
  }

  private apply(msg: Message): void {
    switch (msg.type) {
      case "telemetry":
        this.t = msg.t;
        this.p = msg.p;
        this.v = msg.v;
        this.yaw = msg.yaw;
        this.clearance = msg.clearance;
        break;
      case "scan":
        this.scan = msg.points;
        break;
      case "map_patch":
        for (const [cell, state] of msg.cells) {
          const key = `${cell[0]},${cell[1]},${cell[2]}`;
          if (state === 0) this.cells.delete(key);
          else this.cells.set(key, state);
        }
        break;
      case "path":
        this.path = msg;
        break;
      case "sfc":
        this.sfc = msg;
        break;
      case "event":
        this.events.push({ t: msg.t, name: msg.name, detail: msg.detail });
        if (this.events.length > EVENT_RING) this.events.shift();
        break;
      case "joy":
        // Server never sends these; fold them like any frame so replayed
        // logs piped through the store stay inspectable.
        break;
    }
  }

  /** No frame for over a second: the stream (or sim) has stalled. */
  isStale(nowMs: number): boolean {
    return this.lastRxMs !== null && nowMs - this.lastRxMs > STALE_AFTER_MS;
  }

  /** Parse error badge lingers briefly so single bad frames are visible. */
  hasRecentError(nowMs: number, windowMs = 3000): boolean {
    return this.lastErrorMs !== null && nowMs - this.lastErrorMs <= windowMs;
  }

  /** Occupied/free cells on the k-plane nearest the given altitude.
   * Cell centers sit at integer multiples of res. */
  sliceCells(z: number, res: number): Array<{ i: number; j: number; state: number }> {
    const k = Math.round(z / res);
    const out: Array<{ i: number; j: number; state: number }> = [];
    for (const [key, state] of this.cells) {
      const parts = key.split(",");
      if (Number(parts[2]) !== k) continue;
      out.push({ i: Number(parts[0]), j: Number(parts[1]), state });
    }
    return out;
  }
}
