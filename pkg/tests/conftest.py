from __future__ import annotations

import numpy as np
import pytest

from sharenav.dynamics import ControlLimits, RobotState
from sharenav.mpc import CostWeights, PlannerConfig
from sharenav.scenario import ActuatorConfig, Scenario, UserModelSpec
from sharenav.world import Footprint, OccupancyGrid, load_map


def random_grid(rng: np.random.Generator, h: int, w: int, p: float, resolution: float = 1.0) -> OccupancyGrid:
    cells = rng.random((h, w)) < p
    return OccupancyGrid(cells, resolution)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def open_grid() -> OccupancyGrid:
    return load_map("\n".join(["." * 10] * 10), resolution=1.0)


def make_scenario(
    map_text: str,
    *,
    name: str = "inline",
    resolution: float = 0.15,
    start: RobotState = RobotState(0.45, 0.45, 0.0),
    goal: tuple[float, float] = (2.1, 0.45),
    goal_tolerance: float = 0.2,
    timeout: float = 30.0,
    mode: str = "autonomous",
    v_ref: float = 0.5,
    footprint_radius: float = 0.2,
    lam: float = 0.2,
    window: float = 1.0,
    planner: PlannerConfig | None = None,
    weights: CostWeights | None = None,
    user: UserModelSpec | None = None,
    actuator: ActuatorConfig | None = None,
    limits: ControlLimits | None = None,
) -> Scenario:
    """Small in-memory scenario for simulator tests; the map ships inline."""
    return Scenario(
        name=name,
        map_path=None,
        resolution=resolution,
        start=start,
        goal=goal,
        goal_tolerance=goal_tolerance,
        timeout=timeout,
        mode=mode,
        v_ref=v_ref,
        footprint=Footprint(footprint_radius),
        limits=limits if limits is not None else ControlLimits(),
        planner=planner if planner is not None else PlannerConfig(),
        weights=weights if weights is not None else CostWeights(),
        lam=lam,
        window=window,
        actuator=actuator if actuator is not None else ActuatorConfig(),
        user=user if user is not None else UserModelSpec(),
        map_text=map_text,
    )


# 20 x 6 cells at 0.15 m: a straight free corridor 3 m long, 0.9 m wide.
CORRIDOR = "\n".join(["." * 20] * 6)
