"""Differential-drive kinematics, horizon rollouts, and actuator emulation.

The state transition integrates a constant twist exactly over each step, so
planner rollouts and simulator ticks agree for any step size. A small PID plus
first-order-lag model emulates the drive electronics when enabled, and a
linear command-to-voltage map mirrors the drive's input range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

VOLTAGE_MID = 6.0
VOLTAGE_SPAN = 1.2  # volts per unit of normalized command


class NonPositiveDt(ValueError):
    pass


class EmptyControlSequence(ValueError):
    pass


def wrap_angle(angle):
    """Normalize angle(s) to (-pi, pi]. Works on scalars and arrays.

    Scalars and array elements go through the same numpy ufuncs so batched
    and one-at-a-time callers see bit-identical results.
    """
    a = np.remainder(np.asarray(angle, dtype=np.float64) + np.pi, TWO_PI)
    out = np.where(a == 0.0, np.pi, a - np.pi)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class RobotState:
    """Planar pose. heading must already be normalized to (-pi, pi];
    construct from raw angle sums via wrap_angle."""

    x: float
    y: float
    heading: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.heading)):
            raise ValueError(f"state components must be finite, got {self}")
        if not (-math.pi < self.heading <= math.pi):
            raise ValueError(f"heading {self.heading} outside (-pi, pi]; wrap before constructing")


@dataclass(frozen=True)
class ControlInput:
    v: float
    w: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v) and math.isfinite(self.w)):
            raise ValueError(f"control components must be finite, got {self}")


STOP = ControlInput(0.0, 0.0)


@dataclass(frozen=True)
class ControlLimits:
    v_min: float = -0.3
    v_max: float = 1.0
    w_max: float = 1.0

    def __post_init__(self) -> None:
        if not (self.v_min <= 0.0 <= self.v_max):
            raise ValueError(f"need v_min <= 0 <= v_max, got [{self.v_min}, {self.v_max}]")
        if not self.w_max > 0.0:
            raise ValueError(f"w_max must be positive, got {self.w_max}")


@dataclass
class ActuatorModel:
    """Discrete PID per velocity channel driving a first-order plant.

    Gains are unitless over velocity error; tau is the plant time constant.
    Integral and previous-error terms are mutable per-run state, one model
    instance per simulated robot.
    """

    kp: float = 2.0
    ki: float = 0.5
    kd: float = 0.0
    tau: float = 0.15
    integral_v: float = field(default=0.0, compare=False)
    integral_w: float = field(default=0.0, compare=False)
    prev_err_v: float = field(default=0.0, compare=False)
    prev_err_w: float = field(default=0.0, compare=False)

    def __post_init__(self) -> None:
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.kp < 0.0 or self.ki < 0.0 or self.kd < 0.0:
            raise ValueError("PID gains must be >= 0")

    def reset(self) -> None:
        self.integral_v = self.integral_w = 0.0
        self.prev_err_v = self.prev_err_w = 0.0


def step(s: RobotState, u: ControlInput, dt: float) -> RobotState:
    """Advance one step under a constant twist (exact arc integration).

    Product form of the arc chord: v*dt*sinc(w*dt/2) along heading + w*dt/2.
    Algebraically equal to (v/w)*(sin(h + w*dt) - sin h) but with no 1/w, so
    precision is flat all the way down to w = 0.
    """
    if not dt > 0.0:
        raise NonPositiveDt(f"dt must be positive, got {dt}")
    half = 0.5 * (u.w * dt)
    if half == 0.0:
        x = float(s.x + u.v * dt * np.cos(s.heading))
        y = float(s.y + u.v * dt * np.sin(s.heading))
        return RobotState(x, y, s.heading)
    arc = u.v * dt * (np.sin(half) / half)
    mid = s.heading + half
    x = float(s.x + arc * np.cos(mid))
    y = float(s.y + arc * np.sin(mid))
    return RobotState(x, y, wrap_angle(s.heading + u.w * dt))


def rollout(s0: RobotState, u_seq, dt: float) -> list[RobotState]:
    """States visited applying u_seq from s0; length len(u_seq) + 1."""
    u_seq = list(u_seq)
    if not u_seq:
        raise EmptyControlSequence("rollout needs at least one control")
    states = [s0]
    for u in u_seq:
        states.append(step(states[-1], u, dt))
    return states


def clamp(u: ControlInput, limits: ControlLimits) -> ControlInput:
    v = min(max(u.v, limits.v_min), limits.v_max)
    w = min(max(u.w, -limits.w_max), limits.w_max)
    if v == u.v and w == u.w:
        return u
    return ControlInput(v, w)


def cmd_to_voltage(u_norm: tuple[float, float]) -> tuple[float, float]:
    """Map normalized (forward, turn) commands in [-1, 1] to drive volts.

    Linear per channel: volts = 6.0 + 1.2 * u, so the full stick range spans
    4.8 V to 7.2 V. Out-of-range inputs are clipped first.
    """
    fwd = min(max(float(u_norm[0]), -1.0), 1.0)
    turn = min(max(float(u_norm[1]), -1.0), 1.0)
    return (VOLTAGE_MID + VOLTAGE_SPAN * fwd, VOLTAGE_MID + VOLTAGE_SPAN * turn)


def actuator_step(
    model: ActuatorModel, setpoint: ControlInput, achieved: ControlInput, dt: float
) -> tuple[ControlInput, ControlInput]:
    """One control period of the PID + first-order plant, per channel.

    Returns (effort, new achieved velocities) and updates the model's
    integral / previous-error state in place.
    """
    if not dt > 0.0:
        raise NonPositiveDt(f"dt must be positive, got {dt}")

    e_v = setpoint.v - achieved.v
    model.integral_v += e_v * dt
    deriv_v = (e_v - model.prev_err_v) / dt
    model.prev_err_v = e_v
    effort_v = model.kp * e_v + model.ki * model.integral_v + model.kd * deriv_v

    e_w = setpoint.w - achieved.w
    model.integral_w += e_w * dt
    deriv_w = (e_w - model.prev_err_w) / dt
    model.prev_err_w = e_w
    effort_w = model.kp * e_w + model.ki * model.integral_w + model.kd * deriv_w

    gain = dt / model.tau
    new_v = achieved.v + gain * (effort_v - achieved.v)
    new_w = achieved.w + gain * (effort_w - achieved.w)
    return ControlInput(effort_v, effort_w), ControlInput(new_v, new_w)
