/**
 * Stick-state model and the keyboard/gamepad mappings that feed it.
 *
 * Axes follow the vehicle's yaw-aligned frame: vx forward, vy left, vz up,
 * wyaw counter-clockwise, each normalized to [-1, 1]. One source owns the
 * sticks at a time; activity on the other source steals them.
 */

export interface Axes {
  vx: number;
  vy: number;
  vz: number;
  wyaw: number;
}

export type InputSource = "keyboard" | "gamepad";

export interface InputState {
  axes: Axes;
  source: InputSource;
}

export const ZERO_AXES: Axes = { vx: 0, vy: 0, vz: 0, wyaw: 0 };

const clamp1 = (x: number) => Math.max(-1, Math.min(1, x));

export function clampAxes(a: Axes): Axes {
  return {
    vx: clamp1(a.vx),
    vy: clamp1(a.vy),
    vz: clamp1(a.vz),
    wyaw: clamp1(a.wyaw),
  };
}

export function isHover(a: Axes): boolean {
  return a.vx === 0 && a.vy === 0 && a.vz === 0 && a.wyaw === 0;
}

/** Per-key axis contributions while the key is held. */
export type KeyBindings = Record<string, Partial<Axes>>;

// Mode-2 RC layout: left stick (WASD) is throttle + rudder, right stick
// (arrows) is elevator + aileron.
export const MODE2_KEY_BINDINGS: KeyBindings = {
  KeyW: { vz: 1 },
  KeyS: { vz: -1 },
  KeyA: { wyaw: 1 },
  KeyD: { wyaw: -1 },
  ArrowUp: { vx: 1 },
  ArrowDown: { vx: -1 },
  ArrowLeft: { vy: 1 },
  ArrowRight: { vy: -1 },
};

/** Turns keydown/keyup codes into a held-key axis sum. */
export class KeyboardTracker {
  private held = new Set<string>();

  constructor(private bindings: KeyBindings = MODE2_KEY_BINDINGS) {}

  /** Returns true when the code is bound (caller should preventDefault). */
  keyDown(code: string): boolean {
    if (!(code in this.bindings)) return false;
    this.held.add(code);
    return true;
  }

  keyUp(code: string): boolean {
    if (!(code in this.bindings)) return false;
    this.held.delete(code);
    return true;
  }

  /** Window blur etc.: keyup events for held keys will never arrive. */
  releaseAll(): void {
    this.held.clear();
  }

  get active(): boolean {
    return this.held.size > 0;
  }

  axes(): Axes {
    const out = { ...ZERO_AXES };
    for (const code of this.held) {
      const part = this.bindings[code];
      if (!part) continue;
      out.vx += part.vx ?? 0;
      out.vy += part.vy ?? 0;
      out.vz += part.vz ?? 0;
      out.wyaw += part.wyaw ?? 0;
    }
    return clampAxes(out);
  }
}

export interface GamepadBindings {
  // Standard-mapping axis indices plus the sign that makes them match the
  // frame above (pads report stick-down/right as positive).
  vx: { axis: number; sign: number };
  vy: { axis: number; sign: number };
  vz: { axis: number; sign: number };
  wyaw: { axis: number; sign: number };
  deadzone: number;
}

export const MODE2_PAD_BINDINGS: GamepadBindings = {
  vz: { axis: 1, sign: -1 },
  wyaw: { axis: 0, sign: -1 },
  vx: { axis: 3, sign: -1 },
  vy: { axis: 2, sign: -1 },
  deadzone: 0.1,
};

function shapeAxis(raw: number, deadzone: number): number {
  const x = clamp1(raw);
  if (Math.abs(x) <= deadzone) return 0;
  // Rescale so the usable range still spans the full [-1, 1].
  return (Math.sign(x) * (Math.abs(x) - deadzone)) / (1 - deadzone);
}

/** Minimal slice of the Gamepad API consumed here (test-stubbable). */
export interface PadLike {
  axes: ReadonlyArray<number>;
  connected: boolean;
}

export function padAxes(
  pad: PadLike,
  bindings: GamepadBindings = MODE2_PAD_BINDINGS,
): Axes {
  const read = (b: { axis: number; sign: number }) =>
    shapeAxis(b.sign * (pad.axes[b.axis] ?? 0), bindings.deadzone);
  return {
    vx: read(bindings.vx),
    vy: read(bindings.vy),
    vz: read(bindings.vz),
    wyaw: read(bindings.wyaw),
  };
}

/**
 * Owns the exclusive-source rule: the last source with non-idle activity
 * holds the sticks, so a parked gamepad cannot mask the keyboard.
 */
export class InputHub {
  readonly keyboard: KeyboardTracker;
  private source: InputSource = "keyboard";
  private padState: Axes = { ...ZERO_AXES };

  constructor(bindings: KeyBindings = MODE2_KEY_BINDINGS) {
    this.keyboard = new KeyboardTracker(bindings);
  }

  keyEvent(code: string, down: boolean): boolean {
    const bound = down ? this.keyboard.keyDown(code) : this.keyboard.keyUp(code);
    if (bound) this.source = "keyboard";
    return bound;
  }

  pollPad(pad: PadLike | null, bindings?: GamepadBindings): void {
    if (!pad || !pad.connected) {
      this.padState = { ...ZERO_AXES };
      if (this.source === "gamepad") this.source = "keyboard";
      return;
    }
    this.padState = padAxes(pad, bindings);
    if (!isHover(this.padState)) this.source = "gamepad";
    else if (this.source === "gamepad" && this.keyboard.active)
      this.source = "keyboard";
  }

  sample(): InputState {
    const axes =
      this.source === "gamepad" ? this.padState : this.keyboard.axes();
    return { axes: clampAxes(axes), source: this.source };
  }
}
