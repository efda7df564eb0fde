/**
 * Command-stream properties: the 10 Hz cadence over 30 s of synthetic
 * input, the linear stick mapping, and the two fail-safes (input silence
 * decays to hover, a down link drops instead of queueing).
 */

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { CommandStream, DEFAULT_LIMITS, encodeJoystick } from "../src/encoder.js";
import { type InputState, ZERO_AXES } from "../src/input.js";
import { parseMessage } from "../src/protocol.js";

function stickState(partial: Partial<typeof ZERO_AXES>): InputState {
  return { axes: { ...ZERO_AXES, ...partial }, source: "keyboard" };
}

describe("encodeJoystick", () => {
  it("maps full forward deflection to the configured max", () => {
    const msg = encodeJoystick(stickState({ vx: 1 }), DEFAULT_LIMITS, 1.0);
    expect(msg.v).toEqual([DEFAULT_LIMITS.vMaxXY, 0, 0]);
    expect(msg.yaw_rate).toBe(0);
  });

  it("released sticks encode the hover request", () => {
    const msg = encodeJoystick(stickState({}), DEFAULT_LIMITS, 2.0);
    expect(msg.v).toEqual([0, 0, 0]);
    expect(msg.yaw_rate).toBe(0);
  });

  it("half deflection scales linearly", () => {
    const limits = { vMaxXY: 3.0, vMaxZ: 1.5, yawRateMax: 2.0 };
    const msg = encodeJoystick(
      stickState({ vx: 0.5, vz: -0.5, wyaw: 0.25 }),
      limits,
      0.0,
    );
    expect(msg.v[0]).toBeCloseTo(1.5, 12);
    expect(msg.v[2]).toBeCloseTo(-0.75, 12);
    expect(msg.yaw_rate).toBeCloseTo(0.5, 12);
  });
});

describe("CommandStream", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  function makeStream(overrides: { sendOk?: () => boolean } = {}) {
    const sent: string[] = [];
    const sendOk = overrides.sendOk ?? (() => true);
    const stream = new CommandStream({
      send: (text) => {
        if (!sendOk()) return false;
        sent.push(text);
        return true;
      },
    });
    return { stream, sent };
  }

  it("holds 10 +- 1 Hz over 30 s of synthetic input", () => {
    const { stream, sent } = makeStream();
    stream.start();

    // Synthetic source: 60 Hz pokes with a wiggling stick, like a rAF loop
    // feeding gamepad samples. Event rate must not leak into the cadence.
    const poke = setInterval(() => {
      stream.update(stickState({ vx: Math.sin(Date.now() / 300) }));
    }, 16);
    vi.advanceTimersByTime(30_000);
    clearInterval(poke);
    stream.stop();

    const hz = sent.length / 30;
    expect(hz).toBeGreaterThanOrEqual(9);
    expect(hz).toBeLessThanOrEqual(11);
    for (const line of sent) expect(parseMessage(line).type).toBe("joy");
  });

  it("keeps cadence even when the input source is completely idle", () => {
    const { stream, sent } = makeStream();
    stream.start();
    vi.advanceTimersByTime(30_000);
    stream.stop();
    expect(sent.length / 30).toBeGreaterThanOrEqual(9);
    expect(sent.length / 30).toBeLessThanOrEqual(11);
  });

  it("decays to hover within 0.5 s of input stream silence", () => {
    const { stream, sent } = makeStream();
    stream.start();

    const poke = setInterval(() => stream.update(stickState({ vx: 1 })), 16);
    vi.advanceTimersByTime(2_000);
    clearInterval(poke); // source dies mid-deflection
    const before = sent.length;
    vi.advanceTimersByTime(500);

    const after = sent.slice(before).map((line) => parseMessage(line));
    expect(after.length).toBeGreaterThan(0);
    // Not trigger-happy: right after silence starts the stick holds.
    const first = after[0]!;
    expect(first.type === "joy" && first.v[0]).toBeGreaterThan(0);
    // Engaged by the 0.5 s deadline.
    const last = after[after.length - 1]!;
    expect(last.type === "joy" && last.v).toEqual([0, 0, 0]);
    expect(stream.failsafe).toBe(true);

    // Deflected commands stop flowing past the fail-safe deadline.
    vi.advanceTimersByTime(1_000);
    const tail = sent.slice(before + after.length).map((l) => parseMessage(l));
    for (const msg of tail) {
      expect(msg.type === "joy" && msg.v).toEqual([0, 0, 0]);
    }
  });

  it("recovers from fail-safe when input returns", () => {
    const { stream, sent } = makeStream();
    stream.start();
    vi.advanceTimersByTime(1_000);
    expect(stream.failsafe).toBe(true);

    stream.update(stickState({ vy: -1 }));
    vi.advanceTimersByTime(200);
    stream.stop();
    const last = parseMessage(sent[sent.length - 1]!);
    expect(last.type === "joy" && last.v).toEqual([0, -DEFAULT_LIMITS.vMaxXY, 0]);
    expect(stream.failsafe).toBe(false);
  });

  it("drops commands while the link is down instead of queueing", () => {
    let up = false;
    const { stream, sent } = makeStream({ sendOk: () => up });
    stream.start();
    stream.update(stickState({ vx: 1 }));
    vi.advanceTimersByTime(1_000);
    expect(sent).toHaveLength(0);
    expect(stream.droppedCount).toBeGreaterThan(0);

    up = true;
    stream.update(stickState({ vx: 1 }));
    vi.advanceTimersByTime(1_000);
    stream.stop();
    // No burst on reconnect: only the post-recovery ticks arrive.
    expect(sent.length).toBeLessThanOrEqual(11);
    expect(sent.length).toBeGreaterThanOrEqual(9);
  });
});
