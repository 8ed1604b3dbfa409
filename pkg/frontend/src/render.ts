// Immediate-mode canvas rendering. Everything drawn here comes straight out
// of the last init and tick frames received from the wire; there is no
// client-side physics and nothing is extrapolated. The drawing surface is
// injected as a minimal structural interface so tests can record calls.

import type {
  EventName,
  Polyline,
  ServerInitMessage,
  ServerTickMessage,
} from "./protocol.js";
import type { Stick } from "./input.js";

// The slice of CanvasRenderingContext2D we actually use.
export interface Draw2D {
  fillStyle: string | object;
  strokeStyle: string | object;
  lineWidth: number;
  font: string;
  globalAlpha: number;
  textBaseline: string;
  textAlign: string;
  save(): void;
  restore(): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  setLineDash(segments: number[]): void;
  fillText(text: string, x: number, y: number): void;
}

export interface ViewState {
  init: ServerInitMessage | null;
  tick: ServerTickMessage | null;
  lastTickAtMs: number;
  connected: boolean;
  stick: Stick;
  lambda: number;
  trail: [number, number][];
}

export function emptyView(): ViewState {
  return {
    init: null,
    tick: null,
    lastTickAtMs: 0,
    connected: false,
    stick: { x: 0, y: 0 },
    lambda: 0,
    trail: [],
  };
}

// Received poses only; capped so a long session cannot grow memory.
export const TRAIL_CAP = 600;

export function pushTrail(trail: [number, number][], x: number, y: number): void {
  trail.push([x, y]);
  if (trail.length > TRAIL_CAP) trail.splice(0, trail.length - TRAIL_CAP);
}

export const STALE_MS = 1000;

export interface LineStyle {
  stroke: string;
  width: number;
  dash: number[];
}

export const REF_STYLES: Record<"global" | "user" | "blend" | "predicted", LineStyle> = {
  global: { stroke: "#8a93a6", width: 2, dash: [] },
  user: { stroke: "#ffb03a", width: 2, dash: [6, 4] },
  blend: { stroke: "#ff5ca8", width: 3, dash: [] },
  predicted: { stroke: "#4dd7e8", width: 1.5, dash: [2, 3] },
};

export const LEGEND_LABELS: Record<keyof typeof REF_STYLES, string> = {
  global: "global path",
  user: "user intent",
  blend: "blended ref",
  predicted: "prediction",
};

export const BANNER_TEXT: Record<EventName, string> = {
  collision: "COLLISION",
  goal_reached: "GOAL REACHED",
  timeout: "TIMED OUT",
  planner_infeasible: "PLANNER INFEASIBLE",
};

export const BANNER_FILL: Record<EventName, string> = {
  collision: "#c0392b",
  goal_reached: "#1e8449",
  timeout: "#9c7817",
  planner_infeasible: "#9c7817",
};

export const STALE_TEXT = "NO TELEMETRY";
export const DISCONNECTED_TEXT = "DISCONNECTED, retrying";
export const WAITING_TEXT = "waiting for server";

export const COLORS = {
  bg: "#10151c",
  floor: "#1a212c",
  wall: "#3d4657",
  grid: "#232c3a",
  trail: "#33415a",
  robot: "#f5f7fa",
  goal: "#58d68d",
  text: "#c8d0dc",
  dim: "#7d8696",
  overlay: "rgba(16, 21, 28, 0.72)",
};

export const GAUGE_W = 160;
export const GAUGE_H = 12;
export const GAUGE_FILL = "#46a2ff";
export const GAUGE_BG = "#273141";

export function clamp01(x: number): number {
  return Math.min(1, Math.max(0, x));
}

// World-to-screen: uniform scale that fits the whole map with a margin.
// Map rows grow downward in y, same as canvas pixels, so no flip.
export interface Transform {
  scale: number;
  ox: number;
  oy: number;
}

export function parseMapRows(map: string): string[] {
  return map.split("\n").filter((row) => row.length > 0);
}

const MARGIN = 24;
const HUD_BAND = 72;

export function fitTransform(init: ServerInitMessage, width: number, height: number): Transform {
  const rows = parseMapRows(init.map);
  const worldW = (rows[0]?.length ?? 1) * init.resolution;
  const worldH = rows.length * init.resolution;
  const scale = Math.min(
    (width - 2 * MARGIN) / worldW,
    (height - HUD_BAND - 2 * MARGIN) / worldH,
  );
  return {
    scale,
    ox: MARGIN - (init.origin[0] - init.resolution / 2) * scale,
    oy: HUD_BAND + MARGIN - (init.origin[1] - init.resolution / 2) * scale,
  };
}

export function toScreen(tf: Transform, x: number, y: number): [number, number] {
  return [x * tf.scale + tf.ox, y * tf.scale + tf.oy];
}

export function drawPolyline(d: Draw2D, pts: Polyline, tf: Transform, style: LineStyle): void {
  if (pts.length < 2) return;
  d.strokeStyle = style.stroke;
  d.lineWidth = style.width;
  d.setLineDash(style.dash);
  d.beginPath();
  const first = pts[0]!;
  d.moveTo(...toScreen(tf, first[0], first[1]));
  for (let i = 1; i < pts.length; i++) {
    const p = pts[i]!;
    d.lineTo(...toScreen(tf, p[0], p[1]));
  }
  d.stroke();
  d.setLineDash([]);
}

function drawMap(d: Draw2D, init: ServerInitMessage, tf: Transform): void {
  const rows = parseMapRows(init.map);
  const cell = init.resolution * tf.scale;
  const [left, top] = toScreen(
    tf,
    init.origin[0] - init.resolution / 2,
    init.origin[1] - init.resolution / 2,
  );
  d.fillStyle = COLORS.floor;
  d.fillRect(left, top, (rows[0]?.length ?? 0) * cell, rows.length * cell);
  d.fillStyle = COLORS.wall;
  for (let r = 0; r < rows.length; r++) {
    const row = rows[r]!;
    for (let c = 0; c < row.length; c++) {
      if (row[c] === "#") d.fillRect(left + c * cell, top + r * cell, cell, cell);
    }
  }
}

function drawTrail(d: Draw2D, trail: [number, number][], tf: Transform): void {
  drawPolyline(d, trail, tf, { stroke: COLORS.trail, width: 2, dash: [] });
}

function drawGoal(d: Draw2D, init: ServerInitMessage, tf: Transform): void {
  const [gx, gy] = toScreen(tf, init.goal[0], init.goal[1]);
  d.strokeStyle = COLORS.goal;
  d.lineWidth = 1;
  d.setLineDash([4, 4]);
  d.beginPath();
  d.arc(gx, gy, init.goal_tolerance * tf.scale, 0, 2 * Math.PI);
  d.stroke();
  d.setLineDash([]);
  d.fillStyle = COLORS.goal;
  d.beginPath();
  d.arc(gx, gy, 4, 0, 2 * Math.PI);
  d.fill();
}

function drawRobot(d: Draw2D, pose: [number, number, number], tf: Transform): void {
  const [x, y] = toScreen(tf, pose[0], pose[1]);
  const h = pose[2];
  const r = Math.max(6, 0.2 * tf.scale);
  const tip: [number, number] = [x + r * Math.cos(h), y + r * Math.sin(h)];
  const back = h + Math.PI;
  const spread = 2.4;
  d.fillStyle = COLORS.robot;
  d.beginPath();
  d.moveTo(tip[0], tip[1]);
  d.lineTo(x + r * Math.cos(back - spread), y + r * Math.sin(back - spread));
  d.lineTo(x + r * Math.cos(back + spread), y + r * Math.sin(back + spread));
  d.closePath();
  d.fill();
}

function drawLegend(d: Draw2D, width: number): void {
  d.font = "12px system-ui, sans-serif";
  d.textBaseline = "middle";
  d.textAlign = "left";
  let y = HUD_BAND + 16;
  const x = width - 120;
  for (const key of Object.keys(REF_STYLES) as (keyof typeof REF_STYLES)[]) {
    const style = REF_STYLES[key];
    d.strokeStyle = style.stroke;
    d.lineWidth = style.width;
    d.setLineDash(style.dash);
    d.beginPath();
    d.moveTo(x, y);
    d.lineTo(x + 22, y);
    d.stroke();
    d.setLineDash([]);
    d.fillStyle = COLORS.text;
    d.fillText(LEGEND_LABELS[key], x + 28, y);
    y += 16;
  }
}

function drawHud(d: Draw2D, view: ViewState, width: number): void {
  const tick = view.tick;
  const init = view.init;
  d.fillStyle = COLORS.overlay;
  d.fillRect(0, 0, width, HUD_BAND);
  d.font = "13px system-ui, sans-serif";
  d.textBaseline = "top";
  d.textAlign = "left";

  d.fillStyle = COLORS.text;
  const name = init ? init.name : "?";
  const mode = tick ? tick.mode : init ? init.mode : "?";
  const t = tick ? tick.t.toFixed(1) : "0.0";
  d.fillText(`${name}  [${mode}]  t = ${t} s`, 12, 10);

  // theta gauge: fraction of the blended reference that follows the user
  const theta = clamp01(tick ? tick.theta : 0);
  d.fillStyle = GAUGE_BG;
  d.fillRect(12, 32, GAUGE_W, GAUGE_H);
  d.fillStyle = GAUGE_FILL;
  d.fillRect(12, 32, theta * GAUGE_W, GAUGE_H);
  d.fillStyle = COLORS.text;
  d.fillText(`θ = ${(tick ? tick.theta : 0).toFixed(2)}`, 12 + GAUGE_W + 8, 31);
  d.fillText(`k = ${tick ? tick.k : 0}`, 12 + GAUGE_W + 78, 31);

  d.fillStyle = COLORS.dim;
  const u = tick ? `u = (${tick.u[0].toFixed(2)}, ${tick.u[1].toFixed(2)})` : "u = (0.00, 0.00)";
  const feas = tick && !tick.feasible ? "  INFEASIBLE" : "";
  d.fillText(u + feas, 12, 52);
  if (tick) {
    const m = tick.metrics;
    d.fillText(
      `len ${m.length.toFixed(2)} m   angle ${m.angle_sum.toFixed(2)} rad   cmds ${m.user_effort}`,
      200,
      52,
    );
  }
}

function drawCenterBanner(d: Draw2D, text: string, fill: string, width: number, height: number): void {
  d.fillStyle = fill;
  const bw = Math.min(width - 40, 420);
  const bh = 44;
  const bx = (width - bw) / 2;
  const by = (height - bh) / 2;
  d.fillRect(bx, by, bw, bh);
  d.fillStyle = "#ffffff";
  d.font = "bold 18px system-ui, sans-serif";
  d.textAlign = "center";
  d.textBaseline = "middle";
  d.fillText(text, width / 2, by + bh / 2);
  d.textAlign = "left";
}

export function renderFrame(
  d: Draw2D,
  view: ViewState,
  nowMs: number,
  width: number,
  height: number,
): void {
  d.fillStyle = COLORS.bg;
  d.fillRect(0, 0, width, height);

  if (view.init === null) {
    d.fillStyle = COLORS.dim;
    d.font = "15px system-ui, sans-serif";
    d.textAlign = "center";
    d.textBaseline = "middle";
    d.fillText(view.connected ? WAITING_TEXT : DISCONNECTED_TEXT, width / 2, height / 2);
    d.textAlign = "left";
    return;
  }

  const tf = fitTransform(view.init, width, height);
  drawMap(d, view.init, tf);
  drawTrail(d, view.trail, tf);
  drawGoal(d, view.init, tf);

  const tick = view.tick;
  if (tick !== null) {
    drawPolyline(d, tick.ref_global, tf, REF_STYLES.global);
    drawPolyline(d, tick.ref_user, tf, REF_STYLES.user);
    drawPolyline(d, tick.predicted, tf, REF_STYLES.predicted);
    drawPolyline(d, tick.ref_blend, tf, REF_STYLES.blend);
    drawRobot(d, tick.pose, tf);
  } else {
    drawRobot(d, view.init.start, tf);
  }

  drawLegend(d, width);
  drawHud(d, view, width);

  if (tick?.event) {
    drawCenterBanner(d, BANNER_TEXT[tick.event], BANNER_FILL[tick.event], width, height);
  }

  // The server goes quiet after done on purpose; only an unexpected gap is
  // worth alarming about.
  const stale =
    view.connected && tick !== null && !tick.done && nowMs - view.lastTickAtMs > STALE_MS;
  if (stale) {
    d.fillStyle = COLORS.overlay;
    d.fillRect(0, HUD_BAND, width, 28);
    d.fillStyle = "#e8c24a";
    d.font = "bold 14px system-ui, sans-serif";
    d.fillText(STALE_TEXT, 12, HUD_BAND + 7);
  }
  if (!view.connected) {
    drawCenterBanner(d, DISCONNECTED_TEXT, "#8a3039", width, height);
  }
}
