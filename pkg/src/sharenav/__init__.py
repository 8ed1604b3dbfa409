"""Shared-control navigation stack.

A sampling-based receding-horizon local planner tracks a reference blended
from a grid-planned global path and live user commands; a scenario simulator
and a websocket teleop service drive it headlessly or interactively.
"""

from .dynamics import (
    ActuatorModel,
    ControlInput,
    ControlLimits,
    RobotState,
    actuator_step,
    clamp,
    cmd_to_voltage,
    rollout,
    step,
    wrap_angle,
)
from .global_plan import GlobalPath, ReferenceTrajectory, plan, sample_reference
from .intent import (
    BlendWeight,
    UserCommandBuffer,
    blend_reference,
    blend_weight,
    user_reference,
)
from .mpc import (
    CostWeights,
    PlannerConfig,
    PlanResult,
    feasible,
    shift_warm_start,
    solve,
    total_cost,
)
from .scenario import Scenario, ScenarioInvalid, UserModelSpec, load_scenario
from .simulator import (
    MetricsReport,
    SimSession,
    TickRecord,
    angle_diff_sum,
    batch,
    pursuit_user,
    run,
    trajectory_length,
)
from .world import (
    Footprint,
    OccupancyGrid,
    cell_to_world,
    inflate,
    is_pose_free,
    load_map,
    serialize_map,
    world_to_cell,
)

__version__ = "0.1.0"
