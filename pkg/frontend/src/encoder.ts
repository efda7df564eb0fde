/**
 * Fixed-cadence command stream: one joy message every 100 ms, independent
 * of how fast input events arrive.
 */

import { dumpMessage, type JoyMessage, PROTOCOL_VERSION } from "./protocol.js";
import { type InputState, ZERO_AXES } from "./input.js";

export interface Limits {
  vMaxXY: number; // m/s
  vMaxZ: number; // m/s
  yawRateMax: number; // rad/s
}

export const DEFAULT_LIMITS: Limits = { vMaxXY: 2.0, vMaxZ: 1.0, yawRateMax: 1.0 };

/** Linear stick-to-velocity map; axes are already clamped to [-1, 1]. */
export function encodeJoystick(
  input: InputState,
  limits: Limits,
  t: number,
): JoyMessage {
  const a = input.axes;
  return {
    type: "joy",
    version: PROTOCOL_VERSION,
    t,
    v: [a.vx * limits.vMaxXY, a.vy * limits.vMaxXY, a.vz * limits.vMaxZ],
    yaw_rate: a.wyaw * limits.yawRateMax,
  };
}

export interface CommandStreamOptions {
  /** Delivers one wire line; returns false when the link is down. */
  send: (text: string) => boolean;
  limits?: Limits;
  hz?: number;
  /** Input silence after which emitted commands decay to hover, ms. */
  failsafeMs?: number;
  now?: () => number;
}

/**
 * Emits joy messages at a fixed rate from the most recent input sample.
 *
 * Ticks are scheduled against absolute deadlines (t0 + n/hz) rather than
 * chained setInterval drift, so the long-run cadence stays at hz even when
 * individual timer callbacks land late. Two fail-safes:
 *  - input silence: no update() within failsafeMs means the source died
 *    mid-deflection (unplugged pad, lost focus); commands become hover.
 *  - link down: send() returning false drops the message (the server side
 *    hovers on its own once the stream stops).
 */
export class CommandStream {
  readonly hz: number;
  readonly failsafeMs: number;
  sentCount = 0;
  droppedCount = 0;
  failsafe = false;
  lastSent: JoyMessage | null = null;

  private readonly send: (text: string) => boolean;
  private readonly limits: Limits;
  private readonly now: () => number;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private t0 = 0;
  private n = 0;
  private state: InputState = { axes: { ...ZERO_AXES }, source: "keyboard" };
  private lastInputMs: number | null = null;

  constructor(opts: CommandStreamOptions) {
    this.send = opts.send;
    this.limits = opts.limits ?? DEFAULT_LIMITS;
    this.hz = opts.hz ?? 10;
    this.failsafeMs = opts.failsafeMs ?? 500;
    this.now = opts.now ?? Date.now;
  }

  /** Latest stick sample from whichever source is active. */
  update(state: InputState): void {
    this.state = state;
    this.lastInputMs = this.now();
  }

  start(): void {
    if (this.timer !== null) return;
    this.t0 = this.now();
    this.n = 0;
    this.schedule();
  }

  stop(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
  }

  get running(): boolean {
    return this.timer !== null;
  }

  private schedule(): void {
    this.n += 1;
    const target = this.t0 + (this.n * 1000) / this.hz;
    const delay = Math.max(0, target - this.now());
    this.timer = setTimeout(() => {
      this.tick();
      this.schedule();
    }, delay);
  }

  private tick(): void {
    const nowMs = this.now();
    // Engage one period early: ticks are 1/hz apart, so requiring age >=
    // failsafeMs - period bounds the worst-case engagement latency (input
    // dying just after a tick) by failsafeMs itself.
    const cutoff = this.failsafeMs - 1000 / this.hz;
    this.failsafe =
      this.lastInputMs === null || nowMs - this.lastInputMs >= cutoff;
    const state: InputState = this.failsafe
      ? { axes: { ...ZERO_AXES }, source: this.state.source }
      : this.state;
    const msg = encodeJoystick(state, this.limits, (nowMs - this.t0) / 1000);
    if (this.send(dumpMessage(msg))) {
      this.sentCount += 1;
      this.lastSent = msg;
    } else {
      this.droppedCount += 1;
    }
  }
}
