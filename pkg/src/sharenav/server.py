"""Live teleop bridge: stream simulation ticks, accept user commands.

One client at a time connects over a websocket and exchanges JSON text
frames. Inbound commands are stamped with the simulation time of the tick
that consumes them, so a captured command tape replays the exact live
trajectory headlessly. The simulation advances on a wall-clock timer and
never blocks on the network: tick frames go through a latest-wins slot and
are dropped for a slow client rather than delaying the loop.
"""

from __future__ import annotations

import asyncio
import dataclasses
import json
import math
from collections import deque
from pathlib import Path

from websockets.asyncio.server import serve
from websockets.exceptions import ConnectionClosed

from .dynamics import ControlInput
from .scenario import MODES, Scenario, ScenarioInvalid, load_scenario
from .simulator import SimSession, TickRecord, angle_diff_sum, trajectory_length
from .world import serialize_map


class _Outbox:
    """Single-consumer outbound frames: control frames keep order and are
    never dropped; only the newest tick frame is retained."""

    def __init__(self):
        self._control: deque[str] = deque()
        self._tick: str | None = None
        self._wakeup = asyncio.Event()

    def put_control(self, frame: str) -> None:
        self._control.append(frame)
        self._wakeup.set()

    def put_tick(self, frame: str) -> None:
        self._tick = frame
        self._wakeup.set()

    async def get(self) -> str:
        while True:
            if self._control:
                return self._control.popleft()
            if self._tick is not None:
                frame, self._tick = self._tick, None
                return frame
            self._wakeup.clear()
            await self._wakeup.wait()


def _polyline(ref) -> list[list[float]]:
    if ref is None:
        return []
    states = ref.states if hasattr(ref, "states") else ref
    return [[s.x, s.y] for s in states]


class LiveServer:
    def __init__(self, scenario: Scenario, seed: int, tick_hz: float,
                 capture_path: str | None, scenario_path: str | None):
        if not tick_hz > 0.0:
            raise ScenarioInvalid(f"tick rate must be positive, got {tick_hz}")
        self.base = scenario
        self.seed = int(seed)
        self.tick_hz = float(tick_hz)
        self.capture_path = capture_path
        self.scenario_dir = Path(scenario_path).parent if scenario_path else None
        self.session = SimSession(scenario, seed)
        self.inbound: asyncio.Queue = asyncio.Queue()
        self.outbox = _Outbox()
        self.client = None
        self._capture_fh = open(capture_path, "w", encoding="utf-8") if capture_path else None
        self.last_tick_frame: str | None = None

    # -- simulation side ---------------------------------------------------

    async def tick_loop(self) -> None:
        loop = asyncio.get_running_loop()
        period = 1.0 / self.tick_hz
        next_deadline = loop.time() + period
        while True:
            delay = next_deadline - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
                next_deadline += period
            else:
                # Fell behind; re-anchor instead of bursting.
                next_deadline = loop.time() + period
            self._advance_one_tick()

    def _advance_one_tick(self) -> None:
        cmds: list[ControlInput] = []
        while not self.inbound.empty():
            kind, payload = self.inbound.get_nowait()
            if kind == "cmd":
                cmds.append(payload)
            elif kind == "set_mode":
                self.session.scenario = dataclasses.replace(self.session.scenario, mode=payload)
            elif kind == "set_lambda":
                self.session.scenario = dataclasses.replace(self.session.scenario, lam=payload)
            elif kind == "reset":
                self._reset(payload)
                cmds.clear()
        if self.session.done:
            return
        t_now = self.session.n * self.session.dt
        stamped = [(t_now, u) for u in cmds]
        for t_cmd, u in stamped:
            self._capture(t_cmd, u)
        rec = self.session.tick(stamped)
        frame = json.dumps(self._tick_message(rec))
        self.last_tick_frame = frame
        if self.client is not None:
            self.outbox.put_tick(frame)

    def _reset(self, payload: dict) -> None:
        scenario = self.base
        name = payload.get("scenario")
        if name:
            if self.scenario_dir is None:
                self.outbox.put_control(_error_frame("no scenario directory to reset into"))
                return
            try:
                scenario = load_scenario(self.scenario_dir / f"{name}.toml")
                scenario = dataclasses.replace(
                    scenario, user=dataclasses.replace(scenario.user, kind="silent", tape=None)
                )
            except ScenarioInvalid as exc:
                self.outbox.put_control(_error_frame(str(exc)))
                return
        seed = payload.get("seed", self.seed)
        try:
            session = SimSession(scenario, seed)
        except ScenarioInvalid as exc:
            self.outbox.put_control(_error_frame(str(exc)))
            return
        self.base = scenario
        self.seed = int(seed)
        self.session = session
        self.last_tick_frame = None
        if self._capture_fh is not None:
            self._capture_fh.close()
            self._capture_fh = open(self.capture_path, "w", encoding="utf-8")
        if self.client is not None:
            self.outbox.put_control(json.dumps(self._init_message()))

    def _capture(self, t: float, u: ControlInput) -> None:
        if self._capture_fh is not None:
            self._capture_fh.write(f"{t!r} {u.v!r} {u.w!r}\n")
            self._capture_fh.flush()

    # -- messages ----------------------------------------------------------

    def _init_message(self) -> dict:
        sc = self.session.scenario
        grid = self.session.grid
        return {
            "type": "init",
            "name": sc.name,
            "map": serialize_map(grid),
            "resolution": grid.resolution,
            "origin": [grid.origin[0], grid.origin[1]],
            "start": [sc.start.x, sc.start.y, sc.start.heading],
            "goal": [sc.goal[0], sc.goal[1]],
            "goal_tolerance": sc.goal_tolerance,
            "mode": sc.mode,
            "limits": {
                "v_min": sc.limits.v_min,
                "v_max": sc.limits.v_max,
                "w_max": sc.limits.w_max,
            },
            "lambda": sc.lam,
            "window": sc.window,
            "dt": sc.planner.dt,
            "tick_hz": self.tick_hz,
        }

    def _tick_message(self, rec: TickRecord) -> dict:
        ses = self.session
        states = [r.state for r in ses.records]
        return {
            "type": "tick",
            "t": rec.t,
            "pose": [rec.state.x, rec.state.y, rec.state.heading],
            "u": [rec.u.v, rec.u.w],
            "theta": rec.theta,
            "k": rec.k,
            "mode": rec.mode,
            "goal": [ses.scenario.goal[0], ses.scenario.goal[1]],
            "feasible": rec.feasible,
            "event": rec.event,
            "done": ses.done,
            "ref_global": _polyline(ses.last_global_ref),
            "ref_user": _polyline(ses.last_user_ref),
            "ref_blend": _polyline(ses.last_blend_ref),
            "predicted": _polyline(ses.last_predicted),
            "metrics": {
                "elapsed": rec.t,
                "length": trajectory_length(states),
                "angle_sum": angle_diff_sum(states),
                "user_effort": ses.user_effort,
            },
        }

    # -- network side --------------------------------------------------------

    async def handler(self, websocket) -> None:
        if self.client is not None:
            await websocket.send(_error_frame("busy: a client is already connected"))
            await websocket.close(1013, "busy")
            return
        self.client = websocket
        self.outbox = _Outbox()
        sender = asyncio.create_task(self._sender(websocket))
        try:
            await websocket.send(json.dumps(self._init_message()))
            if self.last_tick_frame is not None:
                await websocket.send(self.last_tick_frame)
            async for raw in websocket:
                error = self._ingest(raw)
                if error is not None:
                    await websocket.send(_error_frame(error))
        except ConnectionClosed:
            pass
        finally:
            sender.cancel()
            self.client = None

    async def _sender(self, websocket) -> None:
        try:
            while True:
                frame = await self.outbox.get()
                await websocket.send(frame)
        except (ConnectionClosed, asyncio.CancelledError):
            pass

    def _ingest(self, raw) -> str | None:
        """Parse one client frame onto the inbound queue; returns an error
        message for malformed frames (session continues either way)."""
        try:
            obj = json.loads(raw)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            return f"bad frame: {exc}"
        if not isinstance(obj, dict):
            return "bad frame: expected an object"
        kind = obj.get("type")
        if kind == "cmd":
            try:
                v = float(obj["v"])
                w = float(obj["w"])
            except (KeyError, TypeError, ValueError):
                return "cmd needs numeric v and w"
            if not (math.isfinite(v) and math.isfinite(w)):
                return "cmd needs finite v and w"
            self.inbound.put_nowait(("cmd", ControlInput(v, w)))
            return None
        if kind == "set_mode":
            mode = obj.get("mode")
            if mode not in MODES:
                return f"mode must be one of {list(MODES)}"
            self.inbound.put_nowait(("set_mode", mode))
            return None
        if kind == "set_lambda":
            try:
                lam = float(obj["lambda"])
            except (KeyError, TypeError, ValueError):
                return "set_lambda needs a numeric 'lambda'"
            if not (math.isfinite(lam) and lam > 0.0):
                return "lambda must be positive and finite"
            self.inbound.put_nowait(("set_lambda", lam))
            return None
        if kind == "reset":
            seed = obj.get("seed", self.seed)
            if not isinstance(seed, int):
                return "reset needs an integer seed"
            name = obj.get("scenario")
            if name is not None and not isinstance(name, str):
                return "reset scenario must be a string id"
            self.inbound.put_nowait(("reset", {"seed": seed, "scenario": name}))
            return None
        return f"unknown message type {kind!r}"


def _error_frame(message: str) -> str:
    return json.dumps({"type": "error", "message": message})


async def _serve_async(scenario: Scenario, host: str, port: int, tick_hz: float,
                       seed: int, capture_path: str | None, scenario_path: str | None) -> None:
    live = LiveServer(scenario, seed, tick_hz, capture_path, scenario_path)
    async with serve(live.handler, host, port):
        print(f"serving {scenario.name} on ws://{host}:{port} at {tick_hz:g} ticks/s", flush=True)
        await live.tick_loop()


def serve_forever(scenario: Scenario, host: str, port: int, tick_hz: float = 20.0,
                  seed: int = 0, capture_path: str | None = None,
                  scenario_path: str | None = None) -> None:
    """Blocking entry point; returns on KeyboardInterrupt."""
    try:
        asyncio.run(
            _serve_async(scenario, host, port, tick_hz, seed, capture_path, scenario_path)
        )
    except KeyboardInterrupt:
        pass
