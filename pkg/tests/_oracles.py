"""Independent reference implementations used to check derived values.

Everything here is deliberately naive: plain relaxation search, all-pairs
scans, fine-step integration. Nothing imports from the package's planner or
world modules except shared primitive types, so an implementation bug cannot
hide in both sides of an assertion.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

SQRT2 = math.sqrt(2.0)


def dijkstra_cost(cells: np.ndarray, resolution: float, start, goal) -> float | None:
    """Shortest 8-connected path cost (corner cutting forbidden), or None.

    Costs are priced from (axis, diagonal) move counts through the same
    canonical expression the planner uses, so equal-cost paths compare as
    exactly equal floats.
    """
    h, w = cells.shape
    diag = SQRT2 * resolution

    def price(n_axis: int, n_diag: int) -> float:
        return n_axis * resolution + n_diag * diag

    if cells[start[1], start[0]] or cells[goal[1], goal[0]]:
        return None
    best: dict[tuple[int, int], float] = {start: 0.0}
    counts: dict[tuple[int, int], tuple[int, int]] = {start: (0, 0)}
    heap: list[tuple[float, int, int]] = [(0.0, start[1], start[0])]
    done = set()
    while heap:
        g, row, col = heapq.heappop(heap)
        cell = (col, row)
        if cell in done:
            continue
        done.add(cell)
        if cell == goal:
            return g
        n_axis, n_diag = counts[cell]
        for dc in (-1, 0, 1):
            for dr in (-1, 0, 1):
                if dc == 0 and dr == 0:
                    continue
                nc, nr = col + dc, row + dr
                if not (0 <= nc < w and 0 <= nr < h) or cells[nr, nc]:
                    continue
                if dc != 0 and dr != 0 and (cells[row, nc] or cells[nr, col]):
                    continue
                if dc != 0 and dr != 0:
                    cand = (n_axis, n_diag + 1)
                else:
                    cand = (n_axis + 1, n_diag)
                ng = price(*cand)
                if ng < best.get((nc, nr), math.inf):
                    best[(nc, nr)] = ng
                    counts[(nc, nr)] = cand
                    heapq.heappush(heap, (ng, nr, nc))
    return None


def brute_inflate(cells: np.ndarray, resolution: float, radius: float) -> np.ndarray:
    """All-pairs disc dilation: output cell occupied iff some input occupied
    cell center lies within `radius` (ties occupied)."""
    h, w = cells.shape
    out = np.array(cells, dtype=bool)
    occ_r, occ_c = np.nonzero(cells)
    rows = np.arange(h)[:, None, None]
    cols = np.arange(w)[None, :, None]
    if occ_r.size:
        d = np.hypot(
            (cols - occ_c[None, None, :]) * resolution,
            (rows - occ_r[None, None, :]) * resolution,
        )
        out |= (d <= radius).any(axis=2)
    return out


def brute_pose_free(
    cells: np.ndarray, resolution: float, origin, x: float, y: float, radius: float
) -> bool:
    """Direct lattice scan of the footprint-free definition."""
    h, w = cells.shape
    cx = (x - origin[0]) / resolution
    cy = (y - origin[1]) / resolution
    bc = round(cx)
    br = round(cy)
    if not (0 <= bc < w and 0 <= br < h):
        return False
    reach = int(math.ceil(radius / resolution)) + 1
    for rr in range(br - reach, br + reach + 1):
        for cc in range(bc - reach, bc + reach + 1):
            dx = (cc - cx) * resolution
            dy = (rr - cy) * resolution
            if dx * dx + dy * dy <= radius * radius:
                if not (0 <= cc < w and 0 <= rr < h) or cells[rr, cc]:
                    return False
    return True


def euler_rollout(x0: float, y0: float, h0: float, v: float, w: float, dt: float, n_sub: int):
    """Left-endpoint Euler integration of the unicycle over n_sub substeps."""
    dts = dt / n_sub
    i = np.arange(n_sub)
    headings = h0 + w * dts * i
    x = x0 + v * dts * np.sum(np.cos(headings))
    y = y0 + v * dts * np.sum(np.sin(headings))
    h = h0 + w * dt
    return float(x), float(y), float(h)


def polyline_point_at_arc(points, arc: float):
    """Walk a polyline to the given arc length (clamped to its ends)."""
    if arc <= 0.0:
        return tuple(points[0])
    walked = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        seg = math.hypot(x1 - x0, y1 - y0)
        if walked + seg >= arc and seg > 0.0:
            f = (arc - walked) / seg
            return (x0 + f * (x1 - x0), y0 + f * (y1 - y0))
        walked += seg
    return tuple(points[-1])
