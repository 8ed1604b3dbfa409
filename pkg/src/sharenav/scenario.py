"""Experiment scenario configuration and TOML loading.

A scenario bundles everything one closed-loop run needs: the map, start and
goal, operating mode, planner and cost parameters, intent settings, actuator
emulation, and the scripted user model. Files use TOML; every table is
optional and falls back to documented defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .dynamics import ControlLimits, RobotState, wrap_angle
from .mpc import CostWeights, PlannerConfig
from .world import Footprint

MODES = ("manual", "autonomous", "shared")
USER_KINDS = ("silent", "tape", "pursuit")


class ScenarioInvalid(ValueError):
    pass


@dataclass(frozen=True)
class ActuatorConfig:
    """PID + first-order-lag emulation settings; disabled means commands are
    achieved instantly."""

    enabled: bool = False
    kp: float = 2.0
    ki: float = 0.5
    kd: float = 0.0
    tau: float = 0.15


@dataclass(frozen=True)
class UserModelSpec:
    """Scripted stand-in for the human operator.

    silent: never commands. tape: replays "t v w" lines from a file.
    pursuit: steers toward the goal every `period` seconds with Gaussian
    heading noise of std `noise`.
    """

    kind: str = "silent"
    period: float = 0.1
    noise: float = 0.0
    tape: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in USER_KINDS:
            raise ScenarioInvalid(f"user kind must be one of {USER_KINDS}, got {self.kind!r}")
        if self.kind == "tape" and not self.tape:
            raise ScenarioInvalid("user kind 'tape' requires a tape path")
        if not self.period > 0.0:
            raise ScenarioInvalid(f"user period must be positive, got {self.period}")
        if self.noise < 0.0:
            raise ScenarioInvalid(f"user noise must be >= 0, got {self.noise}")


@dataclass(frozen=True)
class Scenario:
    name: str
    map_path: str
    resolution: float
    start: RobotState
    goal: tuple[float, float]
    goal_tolerance: float = 0.3
    timeout: float = 60.0
    mode: str = "shared"
    v_ref: float = 0.6
    footprint: Footprint = field(default_factory=Footprint)
    limits: ControlLimits = field(default_factory=ControlLimits)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    weights: CostWeights = field(default_factory=CostWeights)
    lam: float = 0.2
    window: float = 1.0
    actuator: ActuatorConfig = field(default_factory=ActuatorConfig)
    user: UserModelSpec = field(default_factory=UserModelSpec)
    map_text: str | None = None  # inline map; takes precedence over map_path

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ScenarioInvalid(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.resolution > 0.0:
            raise ScenarioInvalid(f"resolution must be positive, got {self.resolution}")
        if not self.timeout > 0.0:
            raise ScenarioInvalid(f"timeout must be positive, got {self.timeout}")
        if not self.goal_tolerance > 0.0:
            raise ScenarioInvalid(f"goal_tolerance must be positive, got {self.goal_tolerance}")
        if not self.v_ref > 0.0:
            raise ScenarioInvalid(f"v_ref must be positive, got {self.v_ref}")
        if not self.lam > 0.0:
            raise ScenarioInvalid(f"lambda must be positive, got {self.lam}")
        if not self.window > 0.0:
            raise ScenarioInvalid(f"window must be positive, got {self.window}")


def _take(table: dict, name: str, allowed: set[str]) -> dict:
    unknown = set(table) - allowed
    if unknown:
        raise ScenarioInvalid(f"unknown keys in [{name}]: {sorted(unknown)}")
    return table


def load_scenario(path: str | Path) -> Scenario:
    """Parse a scenario TOML file. Map paths resolve relative to the file."""
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioInvalid(f"cannot read scenario file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioInvalid(f"bad TOML in {path}: {exc}") from exc

    top_keys = {
        "name", "map", "resolution", "mode", "timeout", "goal_tolerance", "v_ref",
        "start", "goal", "footprint", "limits", "planner", "weights", "intent",
        "actuator", "user",
    }
    _take(raw, "scenario", top_keys)
    try:
        missing = [k for k in ("map", "resolution", "start", "goal") if k not in raw]
        if missing:
            raise ScenarioInvalid(f"{path}: missing required keys {missing}")

        start_tbl = _take(raw["start"], "start", {"x", "y", "heading"})
        start = RobotState(
            float(start_tbl["x"]),
            float(start_tbl["y"]),
            wrap_angle(float(start_tbl.get("heading", 0.0))),
        )
        goal_tbl = _take(raw["goal"], "goal", {"x", "y"})
        goal = (float(goal_tbl["x"]), float(goal_tbl["y"]))

        fp_tbl = _take(raw.get("footprint", {}), "footprint", {"radius"})
        footprint = Footprint(float(fp_tbl.get("radius", 0.45)))

        lim_tbl = _take(raw.get("limits", {}), "limits", {"v_min", "v_max", "w_max"})
        limits = ControlLimits(
            v_min=float(lim_tbl.get("v_min", -0.3)),
            v_max=float(lim_tbl.get("v_max", 1.0)),
            w_max=float(lim_tbl.get("w_max", 1.0)),
        )

        pl_tbl = _take(
            raw.get("planner", {}),
            "planner",
            {"horizon", "dt", "samples", "iterations", "sigma_v", "sigma_w"},
        )
        planner = PlannerConfig(
            horizon=int(pl_tbl.get("horizon", 20)),
            dt=float(pl_tbl.get("dt", 0.1)),
            samples=int(pl_tbl.get("samples", 64)),
            iterations=int(pl_tbl.get("iterations", 4)),
            sigma_v=float(pl_tbl.get("sigma_v", 0.15)),
            sigma_w=float(pl_tbl.get("sigma_w", 0.3)),
        )

        w_tbl = _take(raw.get("weights", {}), "weights", {"q_pos", "q_heading", "r_v", "r_w"})
        weights = CostWeights(
            q_pos=float(w_tbl.get("q_pos", 1.0)),
            q_heading=float(w_tbl.get("q_heading", 0.2)),
            r_v=float(w_tbl.get("r_v", 0.02)),
            r_w=float(w_tbl.get("r_w", 0.05)),
        )

        it_tbl = _take(raw.get("intent", {}), "intent", {"lambda", "window"})
        lam = float(it_tbl.get("lambda", 0.2))
        window = float(it_tbl.get("window", 1.0))

        act_tbl = _take(
            raw.get("actuator", {}), "actuator", {"enabled", "kp", "ki", "kd", "tau"}
        )
        actuator = ActuatorConfig(
            enabled=bool(act_tbl.get("enabled", False)),
            kp=float(act_tbl.get("kp", 2.0)),
            ki=float(act_tbl.get("ki", 0.5)),
            kd=float(act_tbl.get("kd", 0.0)),
            tau=float(act_tbl.get("tau", 0.15)),
        )

        u_tbl = _take(raw.get("user", {}), "user", {"kind", "period", "noise", "tape"})
        tape = u_tbl.get("tape")
        if tape is not None:
            tape = str(path.parent / tape)
        user = UserModelSpec(
            kind=str(u_tbl.get("kind", "silent")),
            period=float(u_tbl.get("period", 0.1)),
            noise=float(u_tbl.get("noise", 0.0)),
            tape=tape,
        )

        return Scenario(
            name=str(raw.get("name", path.stem)),
            map_path=str(path.parent / raw["map"]),
            resolution=float(raw["resolution"]),
            start=start,
            goal=goal,
            goal_tolerance=float(raw.get("goal_tolerance", 0.3)),
            timeout=float(raw.get("timeout", 60.0)),
            mode=str(raw.get("mode", "shared")),
            v_ref=float(raw.get("v_ref", 0.6)),
            footprint=footprint,
            limits=limits,
            planner=planner,
            weights=weights,
            lam=lam,
            window=window,
            actuator=actuator,
            user=user,
        )
    except ScenarioInvalid:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioInvalid(f"{path}: {exc}") from exc


def load_tape(path: str | Path) -> list[tuple[float, float, float]]:
    """Parse a command tape: lines of "t v w", non-decreasing t.

    Blank lines and lines starting with '#' are skipped.
    """
    entries: list[tuple[float, float, float]] = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ScenarioInvalid(f"{path}:{i + 1}: expected 't v w', got {line!r}")
        try:
            t, v, w = (float(p) for p in parts)
        except ValueError as exc:
            raise ScenarioInvalid(f"{path}:{i + 1}: {exc}") from exc
        if entries and t < entries[-1][0]:
            raise ScenarioInvalid(f"{path}:{i + 1}: timestamps must be non-decreasing")
        if not (math.isfinite(t) and math.isfinite(v) and math.isfinite(w)):
            raise ScenarioInvalid(f"{path}:{i + 1}: values must be finite")
        entries.append((t, v, w))
    return entries


def save_tape(path: str | Path, entries) -> None:
    """Write a command tape; floats via repr so replays parse exact values."""
    lines = [f"{t!r} {v!r} {w!r}" for t, v, w in entries]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
