"""Closed-loop scenario simulation: mode dispatch, events, and metrics.

One SimSession owns one episode. Every tick it feeds user commands into the
intent buffer, builds the reference for the active mode, runs the local
planner (or applies the raw user command in manual mode), steps the dynamics,
and checks collision and goal arrival against the raw grid. run() drives a
session to termination headlessly; the live server drives the same class one
tick at a time, so both paths share every control decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .dynamics import (
    STOP,
    ActuatorModel,
    ControlInput,
    ControlLimits,
    RobotState,
    actuator_step,
    clamp,
    step,
    wrap_angle,
)
from .global_plan import GlobalPath, GoalOccupied, NoPath, StartOccupied, plan, sample_reference
from .intent import UserCommandBuffer, blend_reference, blend_weight, user_reference
from .mpc import shift_warm_start, solve
from .scenario import Scenario, ScenarioInvalid, load_tape
from .world import OccupancyGrid, OutOfBoundsError, inflate, is_pose_free, load_map, world_to_cell

EVENT_COLLISION = "collision"
EVENT_GOAL = "goal_reached"
EVENT_TIMEOUT = "timeout"
EVENT_INFEASIBLE = "planner_infeasible"

# Consecutive infeasible ticks that trigger a global replan from the
# current pose.
REPLAN_AFTER_INFEASIBLE = 5


class EmptyTrajectory(ValueError):
    pass


@dataclass(frozen=True)
class MetricsReport:
    completion_time: float
    success: bool
    collision_count: int
    trajectory_length: float
    angle_diff_sum: float
    user_effort: int


@dataclass(frozen=True)
class TickRecord:
    """State of the loop after one tick; u is the applied (post-actuator)
    control."""

    t: float
    state: RobotState
    u: ControlInput
    theta: float
    k: int
    mode: str
    feasible: bool
    event: str | None


def tick_to_dict(rec: TickRecord) -> dict:
    """Flatten a TickRecord into the fixed tick-log field order."""
    return {
        "t": rec.t,
        "x": rec.state.x,
        "y": rec.state.y,
        "heading": rec.state.heading,
        "v": rec.u.v,
        "w": rec.u.w,
        "theta": rec.theta,
        "k": rec.k,
        "mode": rec.mode,
        "feasible": rec.feasible,
        "event": rec.event,
    }


def trajectory_length(states) -> float:
    states = list(states)
    if not states:
        raise EmptyTrajectory("no states")
    total = 0.0
    for a, b in zip(states, states[1:]):
        total += math.hypot(b.x - a.x, b.y - a.y)
    return total


def angle_diff_sum(states) -> float:
    states = list(states)
    if not states:
        raise EmptyTrajectory("no states")
    total = 0.0
    for a, b in zip(states, states[1:]):
        total += abs(wrap_angle(b.heading - a.heading))
    return total


def pursuit_user(
    state: RobotState,
    goal: tuple[float, float],
    noise: float,
    rng: np.random.Generator,
    limits: ControlLimits,
) -> ControlInput:
    """Scripted goal-seeking command: drive toward the goal bearing.

    Heading error gets Gaussian noise of std `noise`; the generator is only
    consumed when noise > 0, so the noise-free variant is a pure function.
    """
    bearing = math.atan2(goal[1] - state.y, goal[0] - state.x)
    delta = wrap_angle(bearing - state.heading)
    if noise > 0.0:
        delta = delta + noise * rng.standard_normal()
    v = limits.v_max * min(max(math.cos(delta), 0.0), 1.0)
    w = min(max(2.0 * delta, -limits.w_max), limits.w_max)
    return ControlInput(v, w)


def _tick_seed(run_seed: int, n: int) -> int:
    # Independent per-tick planner streams, stable across modes.
    return int(np.random.SeedSequence([run_seed, 1, n]).generate_state(1, np.uint64)[0])


def load_grid(scenario: Scenario) -> OccupancyGrid:
    """Raw occupancy grid for a scenario (inline text wins over map_path)."""
    if scenario.map_text is not None:
        return load_map(scenario.map_text, scenario.resolution)
    try:
        text = Path(scenario.map_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioInvalid(f"cannot read map {scenario.map_path}: {exc}") from exc
    return load_map(text, scenario.resolution)


class SimSession:
    """One seeded episode, advanced one tick per call."""

    def __init__(self, scenario: Scenario, rng_seed: int):
        self.scenario = scenario
        self.rng_seed = int(rng_seed)
        self.grid = load_grid(scenario)
        self.inflated = inflate(self.grid, scenario.footprint.radius)
        self.dt = scenario.planner.dt
        self.n_max = int(round(scenario.timeout / self.dt))
        if self.n_max < 1:
            raise ScenarioInvalid(f"timeout {scenario.timeout} shorter than one tick {self.dt}")

        try:
            start_cell = world_to_cell(self.grid, (scenario.start.x, scenario.start.y))
            goal_cell = world_to_cell(self.grid, scenario.goal)
        except OutOfBoundsError as exc:
            raise ScenarioInvalid(str(exc)) from exc
        if self.inflated.occupied(*start_cell):
            raise ScenarioInvalid(f"start cell {start_cell} occupied after inflation")
        if self.inflated.occupied(*goal_cell):
            raise ScenarioInvalid(f"goal cell {goal_cell} occupied after inflation")
        if not is_pose_free(self.grid, scenario.start, scenario.footprint):
            raise ScenarioInvalid(f"start pose {scenario.start} is in collision")

        self.path: GlobalPath | None = None
        if scenario.mode in ("autonomous", "shared"):
            try:
                self.path = plan(
                    self.inflated, (scenario.start.x, scenario.start.y), scenario.goal
                )
            except (StartOccupied, GoalOccupied, NoPath) as exc:
                raise ScenarioInvalid(f"global plan failed: {exc}") from exc

        self.user_rng = np.random.default_rng(np.random.SeedSequence([self.rng_seed, 0]))
        self.buffer = UserCommandBuffer(scenario.window)
        self.tape = (
            load_tape(scenario.user.tape)
            if scenario.mode != "autonomous" and scenario.user.kind == "tape"
            else []
        )
        self._tape_idx = 0
        self._n_emitted = 0  # pursuit emissions so far
        self.actuator = ActuatorModel(
            kp=scenario.actuator.kp,
            ki=scenario.actuator.ki,
            kd=scenario.actuator.kd,
            tau=scenario.actuator.tau,
        )
        self._achieved = STOP
        self._warm = None
        self._infeasible_streak = 0

        self.state = scenario.start
        self.n = 0
        self.user_effort = 0
        self.done = False
        self.success = False
        self.collision_count = 0
        # Reference trajectories of the latest planner tick, for telemetry.
        self.last_global_ref = None
        self.last_user_ref = None
        self.last_blend_ref = None
        self.last_predicted = None

        first = TickRecord(0.0, self.state, STOP, 0.0, 0, scenario.mode, True, None)
        if self._goal_distance(self.state) <= scenario.goal_tolerance:
            first = replace(first, event=EVENT_GOAL)
            self.done = True
            self.success = True
        self.records = [first]

    def _goal_distance(self, state: RobotState) -> float:
        gx, gy = self.scenario.goal
        return math.hypot(state.x - gx, state.y - gy)

    def _emit_user(self, t_now: float, external_cmds) -> None:
        for t_cmd, u in external_cmds:
            self.buffer.record(t_cmd, u)
            self.user_effort += 1
        spec = self.scenario.user
        if self.scenario.mode == "autonomous":
            return  # autonomous mode ignores the scripted user entirely
        if spec.kind == "pursuit":
            while t_now + 1e-12 >= self._n_emitted * spec.period:
                u = pursuit_user(
                    self.state, self.scenario.goal, spec.noise, self.user_rng,
                    self.scenario.limits,
                )
                self.buffer.record(t_now, u)
                self.user_effort += 1
                self._n_emitted += 1
        elif spec.kind == "tape":
            while self._tape_idx < len(self.tape) and self.tape[self._tape_idx][0] <= t_now + 1e-12:
                t_cmd, v, w = self.tape[self._tape_idx]
                self.buffer.record(t_cmd, ControlInput(v, w))
                self.user_effort += 1
                self._tape_idx += 1

    def tick(self, external_cmds=()) -> TickRecord:
        """Advance one control period. external_cmds: (timestamp, ControlInput)
        pairs from a live client, stamped at or before the current sim time."""
        if self.done:
            raise RuntimeError("session already terminated")
        sc = self.scenario
        t_now = self.n * self.dt
        self._emit_user(t_now, external_cmds)
        k = self.buffer.count_recent(t_now)

        if sc.mode == "manual":
            theta = 1.0
            feasible_flag = True
            latest = self.buffer.latest_command(t_now)
            u_cmd = clamp(latest, sc.limits) if latest is not None else STOP
            self.last_global_ref = self.last_user_ref = None
            self.last_blend_ref = self.last_predicted = None
        else:
            if self.path is None:
                self._replan()  # mode switched in mid-session; plan on demand
            cfg = replace(sc.planner, rng_seed=_tick_seed(self.rng_seed, self.n))
            if self.path is None:
                theta = 0.0
                feasible_flag = False
                u_cmd = STOP
                self._warm = None
                self.last_global_ref = self.last_user_ref = None
                self.last_blend_ref = self.last_predicted = None
            else:
                global_ref = sample_reference(
                    self.path, self.state, cfg.horizon, self.dt, sc.v_ref
                )
                self.last_global_ref = global_ref
                if sc.mode == "autonomous":
                    theta = 0.0
                    self.last_user_ref = None
                    ref = global_ref
                else:
                    uref = user_reference(self.state, self.buffer, t_now, cfg.horizon, self.dt)
                    self.last_user_ref = uref
                    if uref is None:
                        theta = 0.0
                        ref = global_ref
                    else:
                        theta = blend_weight(k, sc.lam).theta
                        ref = blend_reference(uref, global_ref, theta)
                self.last_blend_ref = ref
                result = solve(
                    self.state, ref, self.grid, sc.footprint, sc.weights, sc.limits, cfg,
                    self._warm,
                )
                self.last_predicted = result.predicted
                feasible_flag = result.feasible
                if result.feasible:
                    u_cmd = result.u_star[0]
                    self._warm = shift_warm_start(result.u_star)
                    self._infeasible_streak = 0
                else:
                    u_cmd = STOP
                    self._warm = None
                    self._infeasible_streak += 1
                    if self._infeasible_streak >= REPLAN_AFTER_INFEASIBLE:
                        self._replan()
                        self._infeasible_streak = 0

        if sc.actuator.enabled:
            _, self._achieved = actuator_step(self.actuator, u_cmd, self._achieved, self.dt)
            u_applied = self._achieved
        else:
            u_applied = u_cmd

        self.state = step(self.state, u_applied, self.dt)
        self.n += 1
        t_next = self.n * self.dt

        event = None
        if not is_pose_free(self.grid, self.state, sc.footprint):
            event = EVENT_COLLISION
            self.collision_count = 1
            self.done = True
        elif self._goal_distance(self.state) <= sc.goal_tolerance:
            event = EVENT_GOAL
            self.success = True
            self.done = True
        elif self.n >= self.n_max:
            event = EVENT_TIMEOUT
            self.done = True
        elif not feasible_flag:
            event = EVENT_INFEASIBLE

        rec = TickRecord(t_next, self.state, u_applied, theta, k, sc.mode, feasible_flag, event)
        self.records.append(rec)
        return rec

    def _replan(self) -> None:
        # A replan from inside the inflated region is impossible; keep the
        # old path and let the stop command hold until the user frees us.
        try:
            self.path = plan(self.inflated, (self.state.x, self.state.y), self.scenario.goal)
        except (StartOccupied, GoalOccupied, NoPath, OutOfBoundsError):
            pass

    def metrics(self) -> MetricsReport:
        states = [r.state for r in self.records]
        return MetricsReport(
            completion_time=self.records[-1].t,
            success=self.success,
            collision_count=self.collision_count,
            trajectory_length=trajectory_length(states),
            angle_diff_sum=angle_diff_sum(states),
            user_effort=self.user_effort,
        )


def run(scenario: Scenario, rng_seed: int) -> tuple[MetricsReport, list[TickRecord]]:
    """Drive one scenario to goal, collision, or timeout. Deterministic per seed."""
    session = SimSession(scenario, rng_seed)
    while not session.done:
        session.tick()
    return session.metrics(), session.records


def batch(scenarios, modes, seeds):
    """Aggregate runs per (scenario, mode) cell across seeds.

    Returns (rows, failures): rows are per-cell aggregate dicts in input
    order; failures list (scenario_name, mode, message) for cells whose runs
    could not execute. A failed cell aborts only itself.
    """
    scenarios = list(scenarios)
    modes = list(modes)
    seeds = list(seeds)
    if not scenarios or not modes or not seeds:
        raise ValueError("batch needs scenarios, modes, and seeds")
    rows = []
    failures = []
    for sc in scenarios:
        for mode in modes:
            cell = replace(sc, mode=mode)
            reports = []
            try:
                for seed in seeds:
                    report, _ = run(cell, seed)
                    reports.append(report)
            except ScenarioInvalid as exc:
                failures.append((sc.name, mode, str(exc)))
                continue
            n = len(reports)
            rows.append(
                {
                    "scenario": sc.name,
                    "mode": mode,
                    "n_runs": n,
                    "mean_time_s": sum(r.completion_time for r in reports) / n,
                    "success_rate": sum(r.success for r in reports) / n,
                    "collision_rate": sum(r.collision_count > 0 for r in reports) / n,
                    "mean_length_m": sum(r.trajectory_length for r in reports) / n,
                    "mean_angle_sum_rad": sum(r.angle_diff_sum for r in reports) / n,
                    "mean_user_effort": sum(r.user_effort for r in reports) / n,
                }
            )
    return rows, failures


REPORT_COLUMNS = (
    "scenario",
    "mode",
    "n_runs",
    "mean_time_s",
    "success_rate",
    "collision_rate",
    "mean_length_m",
    "mean_angle_sum_rad",
    "mean_user_effort",
)


def format_report(rows) -> str:
    """Render batch rows as the CSV report; float cells use fixed %.6f so
    identical runs produce byte-identical files."""
    lines = [",".join(REPORT_COLUMNS)]
    for row in rows:
        cells = [str(row["scenario"]), str(row["mode"]), str(row["n_runs"])]
        cells += [
            f"{row[c]:.6f}"
            for c in REPORT_COLUMNS[3:]
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
