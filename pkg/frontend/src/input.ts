// Keyboard and gamepad state reduce to one stick vector; the cadence loop
// turns a held stick into cmd messages at a fixed rate, and full neutral
// sends nothing at all. Silence is what lets the controller fall back to
// driving itself, so an idle heartbeat here would defeat the whole scheme.

import type { Limits } from "./protocol.js";

export interface Stick {
  x: number; // turn axis in [-1, 1]; positive steers clockwise on a y-down map
  y: number; // drive axis in [-1, 1]; positive is forward
}

export const NEUTRAL: Stick = { x: 0, y: 0 };

const FORWARD = new Set(["w", "arrowup"]);
const BACK = new Set(["s", "arrowdown"]);
const LEFT = new Set(["a", "arrowleft"]);
const RIGHT = new Set(["d", "arrowright"]);

function clamp(v: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, v));
}

// Opposing keys cancel. Left turns the robot counterclockwise on screen,
// which on a y-down map means negative angular velocity.
export function stickFromKeys(held: ReadonlySet<string>): Stick {
  let x = 0;
  let y = 0;
  for (const key of held) {
    if (FORWARD.has(key)) y += 1;
    else if (BACK.has(key)) y -= 1;
    else if (LEFT.has(key)) x -= 1;
    else if (RIGHT.has(key)) x += 1;
  }
  return { x: clamp(x, -1, 1), y: clamp(y, -1, 1) };
}

export const GAMEPAD_DEADZONE = 0.15;

// Standard gamepad mapping: axis 1 is negative when the stick is pushed up.
export function stickFromAxes(ax: number, ay: number): Stick {
  const x = Math.abs(ax) < GAMEPAD_DEADZONE ? 0 : clamp(ax, -1, 1);
  const y = Math.abs(ay) < GAMEPAD_DEADZONE ? 0 : clamp(-ay, -1, 1);
  return { x, y };
}

export function isNeutral(stick: Stick): boolean {
  return stick.x === 0 && stick.y === 0;
}

// Forward scales to v_max, reverse to |v_min| (reverse is slower on the
// real chair), turn to w_max.
export function cmdFromStick(stick: Stick, limits: Limits): { v: number; w: number } {
  const v = stick.y >= 0 ? stick.y * limits.v_max : -stick.y * limits.v_min;
  return { v, w: stick.x * limits.w_max };
}

export const CMD_PERIOD_MS = 100;

// Drives send timing from whatever calls update() (an interval timer or the
// animation loop). First press sends immediately, then every period while
// held; neutral or a dead socket re-arms the immediate send.
export class CommandCadence {
  private dueAt: number | null = null;

  constructor(
    private readonly send: (v: number, w: number) => void,
    private readonly periodMs: number = CMD_PERIOD_MS,
  ) {}

  update(stick: Stick, limits: Limits | null, connected: boolean, nowMs: number): void {
    if (!connected || limits === null || isNeutral(stick)) {
      this.dueAt = null;
      return;
    }
    if (this.dueAt !== null && nowMs < this.dueAt) return;
    const { v, w } = cmdFromStick(stick, limits);
    this.send(v, w);
    this.dueAt = (this.dueAt ?? nowMs) + this.periodMs;
  }
}
