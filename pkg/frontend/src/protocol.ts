// Wire protocol: JSON text frames over a websocket, mirroring the server's
// message shapes field for field. Parsing is defensive because a frame is
// network input; serialization is trivial because we built the object.

export type Mode = "manual" | "autonomous" | "shared";

export const MODES: readonly Mode[] = ["manual", "autonomous", "shared"];

export type EventName = "collision" | "goal_reached" | "timeout" | "planner_infeasible";

export interface Limits {
  v_min: number;
  v_max: number;
  w_max: number;
}

export interface ServerInitMessage {
  type: "init";
  name: string;
  map: string; // ASCII rows, '#' occupied '.' free, newline separated
  resolution: number;
  origin: [number, number];
  start: [number, number, number];
  goal: [number, number];
  goal_tolerance: number;
  mode: Mode;
  limits: Limits;
  lambda: number;
  window: number;
  dt: number;
  tick_hz: number;
}

export interface TickMetrics {
  elapsed: number;
  length: number;
  angle_sum: number;
  user_effort: number;
}

export type Polyline = [number, number][];

export interface ServerTickMessage {
  type: "tick";
  t: number;
  pose: [number, number, number];
  u: [number, number];
  theta: number;
  k: number;
  mode: Mode;
  goal: [number, number];
  feasible: boolean;
  event: EventName | null;
  done: boolean;
  ref_global: Polyline;
  ref_user: Polyline;
  ref_blend: Polyline;
  predicted: Polyline;
  metrics: TickMetrics;
}

export interface ServerErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage = ServerInitMessage | ServerTickMessage | ServerErrorMessage;

export type ClientMessage =
  | { type: "cmd"; v: number; w: number }
  | { type: "set_mode"; mode: Mode }
  | { type: "set_lambda"; lambda: number }
  | { type: "reset"; seed?: number; scenario?: string };

export class ProtocolError extends Error {}

function fail(why: string): never {
  throw new ProtocolError(why);
}

function num(obj: Record<string, unknown>, key: string): number {
  const v = obj[key];
  if (typeof v !== "number" || !Number.isFinite(v)) fail(`bad field ${key}`);
  return v;
}

function str(obj: Record<string, unknown>, key: string): string {
  const v = obj[key];
  if (typeof v !== "string") fail(`bad field ${key}`);
  return v;
}

function pair(obj: Record<string, unknown>, key: string): [number, number] {
  const v = obj[key];
  if (!Array.isArray(v) || v.length !== 2) fail(`bad field ${key}`);
  return [v[0] as number, v[1] as number];
}

function polyline(obj: Record<string, unknown>, key: string): Polyline {
  const v = obj[key];
  if (!Array.isArray(v)) fail(`bad field ${key}`);
  return v as Polyline;
}

function mode(obj: Record<string, unknown>, key: string): Mode {
  const v = obj[key];
  if (v !== "manual" && v !== "autonomous" && v !== "shared") fail(`bad field ${key}`);
  return v;
}

export function parseServerMessage(raw: string): ServerMessage {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    fail("frame is not JSON");
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) fail("frame is not an object");
  const obj = data as Record<string, unknown>;
  switch (obj["type"]) {
    case "init": {
      const rawLimits = obj["limits"];
      if (typeof rawLimits !== "object" || rawLimits === null) fail("bad field limits");
      const lim = rawLimits as Record<string, unknown>;
      const startRaw = obj["start"];
      if (!Array.isArray(startRaw) || startRaw.length !== 3) fail("bad field start");
      return {
        type: "init",
        name: str(obj, "name"),
        map: str(obj, "map"),
        resolution: num(obj, "resolution"),
        origin: pair(obj, "origin"),
        start: [startRaw[0] as number, startRaw[1] as number, startRaw[2] as number],
        goal: pair(obj, "goal"),
        goal_tolerance: num(obj, "goal_tolerance"),
        mode: mode(obj, "mode"),
        limits: { v_min: num(lim, "v_min"), v_max: num(lim, "v_max"), w_max: num(lim, "w_max") },
        lambda: num(obj, "lambda"),
        window: num(obj, "window"),
        dt: num(obj, "dt"),
        tick_hz: num(obj, "tick_hz"),
      };
    }
    case "tick": {
      const poseRaw = obj["pose"];
      if (!Array.isArray(poseRaw) || poseRaw.length !== 3) fail("bad field pose");
      const ev = obj["event"];
      if (
        ev !== null &&
        ev !== "collision" &&
        ev !== "goal_reached" &&
        ev !== "timeout" &&
        ev !== "planner_infeasible"
      ) {
        fail("bad field event");
      }
      const rawMetrics = obj["metrics"];
      if (typeof rawMetrics !== "object" || rawMetrics === null) fail("bad field metrics");
      const met = rawMetrics as Record<string, unknown>;
      return {
        type: "tick",
        t: num(obj, "t"),
        pose: [poseRaw[0] as number, poseRaw[1] as number, poseRaw[2] as number],
        u: pair(obj, "u"),
        theta: num(obj, "theta"),
        k: num(obj, "k"),
        mode: mode(obj, "mode"),
        goal: pair(obj, "goal"),
        feasible: obj["feasible"] === true,
        event: ev,
        done: obj["done"] === true,
        ref_global: polyline(obj, "ref_global"),
        ref_user: polyline(obj, "ref_user"),
        ref_blend: polyline(obj, "ref_blend"),
        predicted: polyline(obj, "predicted"),
        metrics: {
          elapsed: num(met, "elapsed"),
          length: num(met, "length"),
          angle_sum: num(met, "angle_sum"),
          user_effort: num(met, "user_effort"),
        },
      };
    }
    case "error":
      return { type: "error", message: str(obj, "message") };
    default:
      fail(`unknown message type ${String(obj["type"])}`);
  }
}

export function serializeClientMessage(msg: ClientMessage): string {
  return JSON.stringify(msg);
}
