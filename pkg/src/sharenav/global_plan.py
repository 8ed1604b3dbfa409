"""Grid path search and reference-trajectory sampling.

The long-range route comes from A* over the inflated grid (8-connected,
corner cutting forbidden). The route is then resampled by arc length into a
timed state sequence that the local planner can track.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import RobotState, wrap_angle
from .world import OccupancyGrid, cell_to_world, world_to_cell

SQRT2 = math.sqrt(2.0)

# 8-connected moves as (dcol, drow, is_diagonal).
_MOVES = (
    (1, 0, False),
    (-1, 0, False),
    (0, 1, False),
    (0, -1, False),
    (1, 1, True),
    (1, -1, True),
    (-1, 1, True),
    (-1, -1, True),
)


class StartOccupied(ValueError):
    pass


class GoalOccupied(ValueError):
    pass


class NoPath(ValueError):
    pass


class EmptyPath(ValueError):
    pass


@dataclass(frozen=True)
class GlobalPath:
    """Ordered world-frame waypoints (cell centers) and their total length."""

    waypoints: tuple[tuple[float, float], ...]
    total_length: float


@dataclass(frozen=True)
class ReferenceTrajectory:
    """A horizon-length timed state sequence for the local planner to track."""

    states: tuple[RobotState, ...]
    dt: float

    def __post_init__(self) -> None:
        if len(self.states) < 1:
            raise ValueError("reference needs at least one state")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    def __len__(self) -> int:
        return len(self.states)

    def positions(self) -> np.ndarray:
        return np.array([(s.x, s.y) for s in self.states], dtype=np.float64)


def _path_cost(n_axis: int, n_diag: int, res: float, diag_cost: float) -> float:
    # Single canonical expression so equal move counts give equal floats
    # in every algorithm that prices a path.
    return n_axis * res + n_diag * diag_cost


def plan(grid: OccupancyGrid, start: tuple[float, float], goal: tuple[float, float]) -> GlobalPath:
    """Cost-optimal 8-connected cell path from start to goal on a planning grid.

    Axis moves cost one cell, diagonal moves sqrt(2) cells, scaled by
    resolution. Diagonal moves require both adjacent axis cells free so the
    path cannot cut corners. Deterministic: ties resolve by lower
    heuristic, then smaller (row, col).
    """
    start_cell = world_to_cell(grid, start)
    goal_cell = world_to_cell(grid, goal)
    if grid.occupied(*start_cell):
        raise StartOccupied(f"start cell {start_cell} is occupied")
    if grid.occupied(*goal_cell):
        raise GoalOccupied(f"goal cell {goal_cell} is occupied")

    res = grid.resolution
    diag_cost = SQRT2 * res
    occ = grid.cells
    h_grid, w_grid = occ.shape

    def heuristic(col: int, row: int) -> float:
        return math.hypot((goal_cell[0] - col) * res, (goal_cell[1] - row) * res)

    if start_cell == goal_cell:
        return GlobalPath((cell_to_world(grid, *start_cell),), 0.0)

    # Per-cell best cost is tracked as (axis, diagonal) move counts and
    # priced through one shared expression, so optimal costs compare exactly.
    counts: dict[tuple[int, int], tuple[int, int]] = {start_cell: (0, 0)}
    g_best: dict[tuple[int, int], float] = {start_cell: 0.0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    h0 = heuristic(*start_cell)
    open_heap: list[tuple[float, float, int, int]] = [(h0, h0, start_cell[1], start_cell[0])]
    closed: set[tuple[int, int]] = set()

    while open_heap:
        _, _, row, col = heapq.heappop(open_heap)
        cell = (col, row)
        if cell in closed:
            continue
        closed.add(cell)
        if cell == goal_cell:
            break
        n_axis, n_diag = counts[cell]
        for dc, dr, diag in _MOVES:
            nc, nr = col + dc, row + dr
            if not (0 <= nc < w_grid and 0 <= nr < h_grid) or occ[nr, nc]:
                continue
            if diag and (occ[row, nc] or occ[nr, col]):
                continue
            nxt = (nc, nr)
            if nxt in closed:
                continue
            new_counts = (n_axis + (0 if diag else 1), n_diag + (1 if diag else 0))
            new_g = _path_cost(new_counts[0], new_counts[1], res, diag_cost)
            if new_g < g_best.get(nxt, math.inf):
                counts[nxt] = new_counts
                g_best[nxt] = new_g
                parent[nxt] = cell
                h = heuristic(nc, nr)
                heapq.heappush(open_heap, (new_g + h, h, nr, nc))

    if goal_cell not in closed:
        raise NoPath(f"no path from cell {start_cell} to cell {goal_cell}")

    cells = [goal_cell]
    while cells[-1] != start_cell:
        cells.append(parent[cells[-1]])
    cells.reverse()
    waypoints = tuple(cell_to_world(grid, c, r) for c, r in cells)
    n_axis, n_diag = counts[goal_cell]
    return GlobalPath(waypoints, _path_cost(n_axis, n_diag, res, diag_cost))


def path_cost(path: GlobalPath, resolution: float) -> float:
    """Price a cell-center path by its move counts (exact-comparison form)."""
    n_axis = n_diag = 0
    for (x0, y0), (x1, y1) in zip(path.waypoints, path.waypoints[1:]):
        dc = round((x1 - x0) / resolution)
        dr = round((y1 - y0) / resolution)
        if abs(dc) + abs(dr) == 1:
            n_axis += 1
        elif abs(dc) == 1 and abs(dr) == 1:
            n_diag += 1
        else:
            raise ValueError(f"waypoints {x0, y0} -> {x1, y1} are not one move apart")
    return _path_cost(n_axis, n_diag, resolution, SQRT2 * resolution)


def sample_reference(
    path: GlobalPath, s0: RobotState, T: int, dt: float, v_ref: float
) -> ReferenceTrajectory:
    """Resample the path into T+1 timed states starting at s0's projection.

    State t sits at arc length (projection + t * v_ref * dt), clamped to the
    path end; its heading is the tangent of the segment it falls on (the end
    of the path keeps the final segment's tangent).
    """
    if T < 1:
        raise ValueError(f"horizon must be >= 1, got {T}")
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not v_ref > 0.0:
        raise ValueError(f"v_ref must be positive, got {v_ref}")
    if len(path.waypoints) == 0:
        raise EmptyPath("path has no waypoints")

    if len(path.waypoints) == 1:
        x, y = path.waypoints[0]
        state = RobotState(x, y, s0.heading)
        return ReferenceTrajectory((state,) * (T + 1), dt)

    pts = np.asarray(path.waypoints, dtype=np.float64)
    seg = pts[1:] - pts[:-1]
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    cum = np.concatenate(([0.0], np.cumsum(seg_len)))
    total = float(cum[-1])

    # Project s0 onto the polyline: nearest point, earliest segment on ties.
    # Segments whose squared length underflows to zero are treated as points.
    p = np.array([s0.x, s0.y])
    rel = p - pts[:-1]
    sq = seg_len * seg_len
    denom = np.where(sq > 0.0, sq, 1.0)
    frac = np.clip((rel[:, 0] * seg[:, 0] + rel[:, 1] * seg[:, 1]) / denom, 0.0, 1.0)
    frac = np.where(sq > 0.0, frac, 0.0)
    nearest = pts[:-1] + frac[:, None] * seg
    d2 = np.sum((nearest - p) ** 2, axis=1)
    i0 = int(np.argmin(d2))
    arc0 = float(cum[i0] + frac[i0] * seg_len[i0])

    tangents = np.arctan2(seg[:, 1], seg[:, 0])
    states = []
    for t in range(T + 1):
        a = min(arc0 + t * v_ref * dt, total)
        i = int(np.searchsorted(cum, a, side="right")) - 1
        i = min(max(i, 0), len(seg) - 1)
        f = (a - cum[i]) / seg_len[i] if seg_len[i] > 0.0 else 0.0
        x = float(pts[i, 0] + f * seg[i, 0])
        y = float(pts[i, 1] + f * seg[i, 1])
        heading = wrap_angle(float(tangents[i])) if seg_len[i] > 0.0 else (
            states[-1].heading if states else s0.heading
        )
        states.append(RobotState(x, y, heading))
    return ReferenceTrajectory(tuple(states), dt)
