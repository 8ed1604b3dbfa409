"""User-intent estimation and reference blending.

Recent command count k drives the blend weight theta(k) = 1 - exp(-lambda*k),
which mixes the user's short-horizon rollout with the global reference into
the single trajectory the local planner tracks. Silence decays k to zero and
hands control back to the global plan.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .dynamics import ControlInput, RobotState, rollout, wrap_angle
from .global_plan import ReferenceTrajectory


class NonMonotonicTimestamp(ValueError):
    pass


class NegativeK(ValueError):
    pass


class NonPositiveLambda(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class ThetaOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class BlendWeight:
    theta: float
    k: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= 1.0:
            raise ThetaOutOfRange(f"theta must be in [0, 1], got {self.theta}")


class UserCommandBuffer:
    """Time-ordered user commands with a sliding count window.

    Single writer, single reader. Entries older than the window behind the
    newest record are evicted; queries at or after the newest record are
    unaffected by eviction.
    """

    def __init__(self, window: float = 1.0):
        if not window > 0.0:
            raise ValueError(f"window must be positive, got {window}")
        self.window = float(window)
        self._entries: deque[tuple[float, ControlInput]] = deque()

    def __len__(self) -> int:
        return len(self._entries)

    def record(self, t: float, u: ControlInput) -> None:
        if self._entries and t < self._entries[-1][0]:
            raise NonMonotonicTimestamp(
                f"timestamp {t} precedes last recorded {self._entries[-1][0]}"
            )
        self._entries.append((float(t), u))
        horizon = t - self.window
        while self._entries and self._entries[0][0] < horizon:
            self._entries.popleft()

    def count_recent(self, t: float) -> int:
        """Number of commands with timestamp in [t - window, t]."""
        lo = t - self.window
        k = 0
        for stamp, _ in reversed(self._entries):
            if stamp > t:
                continue
            if stamp < lo:
                break
            k += 1
        return k

    def latest_command(self, t: float) -> ControlInput | None:
        """Most recent command in [t - window, t], or None."""
        lo = t - self.window
        for stamp, u in reversed(self._entries):
            if stamp > t:
                continue
            return u if stamp >= lo else None
        return None


def blend_weight(k: int, lam: float) -> BlendWeight:
    """Intent weight theta(k) = 1 - exp(-lam * k), in [0, 1)."""
    if k < 0:
        raise NegativeK(f"k must be >= 0, got {k}")
    if not lam > 0.0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")
    return BlendWeight(-math.expm1(-lam * k), int(k))


def user_reference(
    s0: RobotState, buffer: UserCommandBuffer, t: float, T: int, dt: float
) -> ReferenceTrajectory | None:
    """Horizon rollout holding the latest windowed user command, or None
    when the window holds no command (the no-user-input variant)."""
    if T < 1:
        raise ValueError(f"horizon must be >= 1, got {T}")
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    u = buffer.latest_command(t)
    if u is None:
        return None
    states = rollout(s0, [u] * T, dt)
    return ReferenceTrajectory(tuple(states), dt)


def blend_reference(
    s_user: ReferenceTrajectory, s_global: ReferenceTrajectory, theta: float
) -> ReferenceTrajectory:
    """Per-step convex mix of two references.

    Positions blend linearly; headings blend along the shortest arc. theta 0
    and 1 return the global and user reference exactly (same state tuple).
    """
    if len(s_user) != len(s_global):
        raise LengthMismatch(f"reference lengths differ: {len(s_user)} vs {len(s_global)}")
    if s_user.dt != s_global.dt:
        raise LengthMismatch(f"reference dt differ: {s_user.dt} vs {s_global.dt}")
    if not 0.0 <= theta <= 1.0:
        raise ThetaOutOfRange(f"theta must be in [0, 1], got {theta}")
    if theta == 0.0:
        return ReferenceTrajectory(s_global.states, s_global.dt)
    if theta == 1.0:
        return ReferenceTrajectory(s_user.states, s_user.dt)
    states = []
    for su, sg in zip(s_user.states, s_global.states):
        x = theta * su.x + (1.0 - theta) * sg.x
        y = theta * su.y + (1.0 - theta) * sg.y
        h = wrap_angle(sg.heading + theta * wrap_angle(su.heading - sg.heading))
        states.append(RobotState(x, y, h))
    return ReferenceTrajectory(tuple(states), s_user.dt)
