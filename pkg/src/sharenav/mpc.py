"""Sampling-based receding-horizon local planner.

Each solve draws batches of control sequences around a seed (warm start or
zeros), clamps them to the control limits, rolls them out through the exact
dynamics, rejects any rollout that leaves free space, and keeps the cheapest
survivor as the next seed. The free-space constraint is hard: an infeasible
problem yields an explicit stop command, never a least-bad trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import (
    STOP,
    ControlInput,
    ControlLimits,
    RobotState,
    rollout,
    wrap_angle,
)
from .global_plan import ReferenceTrajectory
from .intent import LengthMismatch
from .world import Footprint, OccupancyGrid, pose_free_batch


class ConfigInvalid(ValueError):
    pass


class EmptySequence(ValueError):
    pass


@dataclass(frozen=True)
class CostWeights:
    """Diagonal quadratic weights: position/heading deviation and control effort."""

    q_pos: float = 1.0
    q_heading: float = 0.2
    r_v: float = 0.02
    r_w: float = 0.05

    def __post_init__(self) -> None:
        if min(self.q_pos, self.q_heading, self.r_v, self.r_w) < 0.0:
            raise ConfigInvalid(f"weights must be >= 0, got {self}")


@dataclass(frozen=True)
class PlannerConfig:
    horizon: int = 20
    dt: float = 0.1
    samples: int = 64
    iterations: int = 4
    sigma_v: float = 0.15
    sigma_w: float = 0.3
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.horizon < 1 or self.samples < 1 or self.iterations < 1:
            raise ConfigInvalid(f"horizon/samples/iterations must be >= 1, got {self}")
        if not self.dt > 0.0:
            raise ConfigInvalid(f"dt must be positive, got {self.dt}")
        if self.sigma_v < 0.0 or self.sigma_w < 0.0:
            raise ConfigInvalid(f"noise sigmas must be >= 0, got {self}")


@dataclass(frozen=True)
class PlanResult:
    """Best control sequence found; feasible=False means emergency stop."""

    u_star: tuple[ControlInput, ...]
    predicted: tuple[RobotState, ...]
    cost: float
    feasible: bool


def _as_states(seq) -> list[RobotState]:
    if isinstance(seq, ReferenceTrajectory):
        return list(seq.states)
    return list(seq)


def total_cost(states, reference, u_seq, weights: CostWeights) -> float:
    """Quadratic tracking cost: summed state deviation plus control effort.

    Heading deviations are wrapped to (-pi, pi] before squaring.
    """
    states = _as_states(states)
    ref = _as_states(reference)
    u_seq = list(u_seq)
    if len(states) != len(ref):
        raise LengthMismatch(f"states length {len(states)} != reference length {len(ref)}")
    if len(u_seq) != len(states) - 1:
        raise LengthMismatch(f"controls length {len(u_seq)} != states length {len(states)} - 1")

    dx = np.array([s.x for s in states]) - np.array([r.x for r in ref])
    dy = np.array([s.y for s in states]) - np.array([r.y for r in ref])
    dh = wrap_angle(np.array([s.heading for s in states]) - np.array([r.heading for r in ref]))
    v = np.array([u.v for u in u_seq])
    w = np.array([u.w for u in u_seq])
    state_cost = np.sum(weights.q_pos * (dx * dx + dy * dy) + weights.q_heading * (dh * dh))
    ctrl_cost = np.sum(weights.r_v * (v * v) + weights.r_w * (w * w))
    return float(state_cost + ctrl_cost)


def feasible(states, grid: OccupancyGrid, footprint: Footprint) -> bool:
    """True iff every state in the sequence keeps the footprint in free space."""
    states = _as_states(states)
    xs = np.array([s.x for s in states])
    ys = np.array([s.y for s in states])
    return bool(pose_free_batch(grid, xs, ys, footprint).all())


def shift_warm_start(u_prev) -> list[ControlInput]:
    """Receding-horizon shift: drop the first control, repeat the last."""
    u_prev = list(u_prev)
    if not u_prev:
        raise EmptySequence("cannot shift an empty control sequence")
    return u_prev[1:] + [u_prev[-1]]


def _rollout_batch(s0: RobotState, vs: np.ndarray, ws: np.ndarray, dt: float):
    """Roll M control sequences at once; mirrors dynamics.step bit-for-bit."""
    m, t_steps = vs.shape
    xs = np.empty((m, t_steps + 1))
    ys = np.empty((m, t_steps + 1))
    hs = np.empty((m, t_steps + 1))
    xs[:, 0] = s0.x
    ys[:, 0] = s0.y
    hs[:, 0] = s0.heading
    for t in range(t_steps):
        x, y, h = xs[:, t], ys[:, t], hs[:, t]
        v, w = vs[:, t], ws[:, t]
        half = 0.5 * (w * dt)
        straight = half == 0.0
        safe_half = np.where(straight, 1.0, half)
        sinc = np.where(straight, 1.0, np.sin(safe_half) / safe_half)
        arc = v * dt * sinc
        mid = h + half
        xs[:, t + 1] = x + arc * np.cos(mid)
        ys[:, t + 1] = y + arc * np.sin(mid)
        hs[:, t + 1] = np.where(straight, h, wrap_angle(h + w * dt))
    return xs, ys, hs


def solve(
    s0: RobotState,
    reference: ReferenceTrajectory,
    grid: OccupancyGrid,
    footprint: Footprint,
    weights: CostWeights,
    limits: ControlLimits,
    config: PlannerConfig,
    warm_start=None,
) -> PlanResult:
    """Best-of-N sampling shooting around the seed, for `iterations` rounds.

    The seed (warm start if given, else zeros) is always evaluated as
    candidate 0, so a feasible warm start's cost is never regressed. Ties go
    to the lowest candidate index of the earliest iteration. Deterministic
    for a fixed config.rng_seed.
    """
    t_steps = config.horizon
    if len(reference) != t_steps + 1:
        raise LengthMismatch(
            f"reference length {len(reference)} != horizon + 1 = {t_steps + 1}"
        )
    if warm_start is not None:
        warm_start = list(warm_start)
        if len(warm_start) != t_steps:
            raise LengthMismatch(f"warm start length {len(warm_start)} != horizon {t_steps}")
        seed_v = np.array([u.v for u in warm_start], dtype=np.float64)
        seed_w = np.array([u.w for u in warm_start], dtype=np.float64)
    else:
        seed_v = np.zeros(t_steps)
        seed_w = np.zeros(t_steps)

    ref_x = np.array([s.x for s in reference.states])
    ref_y = np.array([s.y for s in reference.states])
    ref_h = np.array([s.heading for s in reference.states])

    rng = np.random.default_rng(config.rng_seed)
    best_cost = np.inf
    best_v = best_w = None

    for _ in range(config.iterations):
        noise_v = rng.normal(0.0, config.sigma_v, (config.samples, t_steps))
        noise_w = rng.normal(0.0, config.sigma_w, (config.samples, t_steps))
        cand_v = np.concatenate([seed_v[None, :], seed_v[None, :] + noise_v])
        cand_w = np.concatenate([seed_w[None, :], seed_w[None, :] + noise_w])
        np.clip(cand_v, limits.v_min, limits.v_max, out=cand_v)
        np.clip(cand_w, -limits.w_max, limits.w_max, out=cand_w)

        xs, ys, hs = _rollout_batch(s0, cand_v, cand_w, config.dt)
        feas = pose_free_batch(grid, xs, ys, footprint).all(axis=1)

        dx = xs - ref_x[None, :]
        dy = ys - ref_y[None, :]
        dh = wrap_angle(hs - ref_h[None, :])
        state_cost = np.sum(
            weights.q_pos * (dx * dx + dy * dy) + weights.q_heading * (dh * dh), axis=1
        )
        ctrl_cost = np.sum(weights.r_v * (cand_v * cand_v) + weights.r_w * (cand_w * cand_w), axis=1)
        costs = np.where(feas, state_cost + ctrl_cost, np.inf)

        idx = int(np.argmin(costs))
        if costs[idx] < best_cost:
            best_cost = float(costs[idx])
            best_v = cand_v[idx].copy()
            best_w = cand_w[idx].copy()
        if best_v is not None:
            seed_v, seed_w = best_v, best_w

    if best_v is None:
        return _emergency_stop(s0, t_steps, config.dt)

    u_star = tuple(ControlInput(float(v), float(w)) for v, w in zip(best_v, best_w))
    predicted = tuple(rollout(s0, u_star, config.dt))
    # The batch rollout and the per-step rollout share their arithmetic, so
    # this re-check only guards against a knife-edge disagreement.
    if not feasible(predicted, grid, footprint):
        return _emergency_stop(s0, t_steps, config.dt)
    cost = total_cost(predicted, reference, u_star, weights)
    return PlanResult(u_star, predicted, cost, True)


def _emergency_stop(s0: RobotState, t_steps: int, dt: float) -> PlanResult:
    u_star = tuple([STOP] * t_steps)
    predicted = tuple(rollout(s0, u_star, dt))
    return PlanResult(u_star, predicted, float("inf"), False)
