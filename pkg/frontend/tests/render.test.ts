import { describe, expect, it } from "vitest";

import type { Polyline, ServerInitMessage, ServerTickMessage } from "../src/protocol.js";
import {
  BANNER_TEXT,
  COLORS,
  DISCONNECTED_TEXT,
  GAUGE_FILL,
  GAUGE_W,
  REF_STYLES,
  STALE_MS,
  STALE_TEXT,
  TRAIL_CAP,
  WAITING_TEXT,
  clamp01,
  emptyView,
  pushTrail,
  renderFrame,
  type Draw2D,
  type ViewState,
} from "../src/render.js";

// Recording 2D context: captures stroked paths with their style and every
// fillRect / fillText with the fill style active at the time.
interface StrokedPath {
  style: string;
  width: number;
  dash: number[];
  points: [number, number][];
}

class Recorder implements Draw2D {
  fillStyle: string | object = "";
  strokeStyle: string | object = "";
  lineWidth = 1;
  font = "";
  globalAlpha = 1;
  textBaseline = "";
  textAlign = "";

  strokes: StrokedPath[] = [];
  rects: { x: number; y: number; w: number; h: number; style: string }[] = [];
  texts: { text: string; style: string }[] = [];
  fills: string[] = [];
  ops = 0;

  private dash: number[] = [];
  private path: [number, number][] = [];

  save(): void {
    this.ops++;
  }
  restore(): void {
    this.ops++;
  }
  beginPath(): void {
    this.ops++;
    this.path = [];
  }
  moveTo(x: number, y: number): void {
    this.ops++;
    this.path.push([x, y]);
  }
  lineTo(x: number, y: number): void {
    this.ops++;
    this.path.push([x, y]);
  }
  closePath(): void {
    this.ops++;
  }
  stroke(): void {
    this.ops++;
    this.strokes.push({
      style: String(this.strokeStyle),
      width: this.lineWidth,
      dash: [...this.dash],
      points: [...this.path],
    });
  }
  fill(): void {
    this.ops++;
    this.fills.push(String(this.fillStyle));
  }
  arc(): void {
    this.ops++;
  }
  fillRect(x: number, y: number, w: number, h: number): void {
    this.ops++;
    this.rects.push({ x, y, w, h, style: String(this.fillStyle) });
  }
  strokeRect(): void {
    this.ops++;
  }
  setLineDash(segments: number[]): void {
    this.ops++;
    this.dash = [...segments];
  }
  fillText(text: string): void {
    this.ops++;
    this.texts.push({ text, style: String(this.fillStyle) });
  }

  pathsOf(style: string): StrokedPath[] {
    // legend swatches share the reference styles but are two-point stubs
    return this.strokes.filter((s) => s.style === style && s.points.length >= 3);
  }

  hasText(needle: string): boolean {
    return this.texts.some((t) => t.text.includes(needle));
  }
}

const MAP = ["##########", "#........#", "#........#", "#........#", "##########"].join("\n");

const INIT: ServerInitMessage = {
  type: "init",
  name: "fix",
  map: MAP,
  resolution: 0.3,
  origin: [0, 0],
  start: [0.3, 0.6, 0],
  goal: [2.4, 0.6],
  goal_tolerance: 0.3,
  mode: "shared",
  limits: { v_min: -0.3, v_max: 1.0, w_max: 1.0 },
  lambda: 0.2,
  window: 1.0,
  dt: 0.1,
  tick_hz: 20,
};

const G: Polyline = [
  [0.3, 0.6],
  [0.9, 0.6],
  [1.5, 0.75],
  [2.1, 0.75],
];
const U: Polyline = [
  [0.3, 0.6],
  [0.9, 0.45],
  [1.5, 0.45],
];
const P: Polyline = [
  [0.3, 0.6],
  [0.5, 0.6],
  [0.7, 0.62],
];

function tick(over: Partial<ServerTickMessage> = {}): ServerTickMessage {
  return {
    type: "tick",
    t: 1.0,
    pose: [0.6, 0.6, 0.1],
    u: [0.4, 0.0],
    theta: 0.0,
    k: 0,
    mode: "shared",
    goal: [2.4, 0.6],
    feasible: true,
    event: null,
    done: false,
    ref_global: G,
    ref_user: U,
    ref_blend: G, // theta 0: the wire carries the global line verbatim
    predicted: P,
    metrics: { elapsed: 1.0, length: 0.4, angle_sum: 0.05, user_effort: 3 },
    ...over,
  };
}

function view(over: Partial<ViewState> = {}): ViewState {
  return {
    ...emptyView(),
    init: INIT,
    tick: tick(),
    lastTickAtMs: 1000,
    connected: true,
    ...over,
  };
}

function render(v: ViewState, nowMs = 1000): Recorder {
  const rec = new Recorder();
  renderFrame(rec, v, nowMs, 800, 500);
  return rec;
}

describe("renderFrame polylines", () => {
  it("draws blended and global references as coincident paths when theta is 0", () => {
    const rec = render(view());
    const blend = rec.pathsOf(REF_STYLES.blend.stroke);
    const global = rec.pathsOf(REF_STYLES.global.stroke);
    expect(blend.length).toBe(1);
    expect(global.length).toBe(1);
    expect(blend[0]!.points).toEqual(global[0]!.points);
  });

  it("separates the blended path once theta pulls it toward the user", () => {
    const bent: Polyline = [
      [0.3, 0.6],
      [0.9, 0.52],
      [1.5, 0.6],
      [2.1, 0.7],
    ];
    const rec = render(view({ tick: tick({ theta: 0.5, ref_blend: bent }) }));
    const blend = rec.pathsOf(REF_STYLES.blend.stroke)[0]!;
    const global = rec.pathsOf(REF_STYLES.global.stroke)[0]!;
    expect(blend.points).not.toEqual(global.points);
  });

  it("draws all four reference styles from one tick", () => {
    const rec = render(view());
    for (const style of Object.values(REF_STYLES)) {
      expect(rec.pathsOf(style.stroke).length).toBe(1);
    }
  });

  it("skips degenerate polylines instead of throwing", () => {
    const rec = render(view({ tick: tick({ ref_user: [], predicted: [[0.3, 0.6]] }) }));
    expect(rec.pathsOf(REF_STYLES.user.stroke).length).toBe(0);
    expect(rec.pathsOf(REF_STYLES.predicted.stroke).length).toBe(0);
  });
});

describe("renderFrame banners", () => {
  it("shows one banner per event variant", () => {
    for (const [event, text] of Object.entries(BANNER_TEXT)) {
      const rec = render(view({ tick: tick({ event: event as never, done: true }) }));
      expect(rec.hasText(text), event).toBe(true);
    }
  });

  it("shows no event banner on a quiet tick", () => {
    const rec = render(view());
    for (const text of Object.values(BANNER_TEXT)) {
      expect(rec.hasText(text)).toBe(false);
    }
  });
});

describe("renderFrame hud", () => {
  it("draws the theta gauge clamped into [0, 1]", () => {
    for (const [theta, frac] of [
      [0.37, 0.37],
      [1.7, 1.0],
      [-0.4, 0.0],
    ] as const) {
      const rec = render(view({ tick: tick({ theta }) }));
      const bars = rec.rects.filter((r) => r.style === GAUGE_FILL);
      expect(bars.length).toBe(1);
      expect(bars[0]!.w).toBeCloseTo(frac * GAUGE_W, 10);
    }
  });

  it("shows the live command count", () => {
    const rec = render(view({ tick: tick({ k: 7 }) }));
    expect(rec.hasText("k = 7")).toBe(true);
  });

  it("clamp01 is the gauge law", () => {
    expect(clamp01(0.5)).toBe(0.5);
    expect(clamp01(-3)).toBe(0);
    expect(clamp01(2)).toBe(1);
  });
});

describe("renderFrame connection states", () => {
  it("overlays a telemetry warning after a second of silence", () => {
    const rec = render(view({ lastTickAtMs: 0 }), STALE_MS + 500);
    expect(rec.hasText(STALE_TEXT)).toBe(true);
  });

  it("stays quiet within the freshness window", () => {
    const rec = render(view({ lastTickAtMs: 0 }), STALE_MS - 500);
    expect(rec.hasText(STALE_TEXT)).toBe(false);
  });

  it("does not cry stale after done, where silence is by design", () => {
    const done = tick({ event: "goal_reached", done: true });
    const rec = render(view({ tick: done, lastTickAtMs: 0 }), STALE_MS + 5000);
    expect(rec.hasText(STALE_TEXT)).toBe(false);
  });

  it("tells the user when the socket is down", () => {
    const rec = render(view({ connected: false }));
    expect(rec.hasText(DISCONNECTED_TEXT)).toBe(true);
  });

  it("waits politely before the first init", () => {
    const rec = render(view({ init: null, tick: null, connected: true }));
    expect(rec.hasText(WAITING_TEXT)).toBe(true);
    const rec2 = render(view({ init: null, tick: null, connected: false }));
    expect(rec2.hasText(DISCONNECTED_TEXT)).toBe(true);
  });

  it("renders the start pose before the first tick arrives", () => {
    const rec = render(view({ tick: null }));
    expect(rec.fills).toContain(COLORS.robot);
  });
});

describe("view state upkeep", () => {
  it("caps the pose trail", () => {
    const trail: [number, number][] = [];
    for (let i = 0; i < TRAIL_CAP + 400; i++) pushTrail(trail, i, -i);
    expect(trail.length).toBe(TRAIL_CAP);
    expect(trail[trail.length - 1]).toEqual([TRAIL_CAP + 399, -(TRAIL_CAP + 399)]);
  });

  it("draws a constant amount of work per frame", () => {
    const v = view();
    const counts = new Set<number>();
    for (let i = 0; i < 50; i++) counts.add(render(v).ops);
    expect(counts.size).toBe(1);
  });
});
