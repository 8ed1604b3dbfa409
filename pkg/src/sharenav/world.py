"""Occupancy-grid world model: map I/O, obstacle inflation, footprint checks.

Grids are binary (occupied / free) and immutable after construction; every
"mutation" builds a new grid. World coordinates are meters, cell (0, 0) is the
first character of the first map row, and the center of cell (col, row) sits
at ``origin + (col * resolution, row * resolution)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

FREE_CHAR = "."
OCCUPIED_CHAR = "#"


class MapError(ValueError):
    """Malformed ASCII map input."""


class EmptyMapError(MapError):
    pass


class RaggedRowsError(MapError):
    pass


class InvalidCharError(MapError):
    pass


class OutOfBoundsError(IndexError):
    """World point or cell index outside the grid."""


@dataclass(frozen=True)
class Footprint:
    """Circular robot footprint. The radius is a configuration value."""

    radius: float = 0.45

    def __post_init__(self) -> None:
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"footprint radius must be positive, got {self.radius}")


class OccupancyGrid:
    """Binary occupancy grid over a row-major cell array.

    ``cells[row, col]`` is True when the cell is occupied. The array is
    frozen (read-only) so grids can be shared across readers.
    """

    def __init__(self, cells, resolution: float, origin: tuple[float, float] = (0.0, 0.0)):
        cells = np.array(cells, dtype=bool)
        if cells.ndim != 2 or cells.shape[0] < 1 or cells.shape[1] < 1:
            raise ValueError(f"cells must be a non-empty 2D array, got shape {cells.shape}")
        if not (resolution > 0.0 and math.isfinite(resolution)):
            raise ValueError(f"resolution must be positive, got {resolution}")
        cells.setflags(write=False)
        self.cells = cells
        self.resolution = float(resolution)
        self.origin = (float(origin[0]), float(origin[1]))
        self.height, self.width = cells.shape
        # Derived lookups built lazily by pose_free_batch; pure functions of
        # the (immutable) cells, so racing builders would agree anyway.
        self._clearance: np.ndarray | None = None
        self._padded: dict[int, np.ndarray] = {}

    def __eq__(self, other) -> bool:
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            self.resolution == other.resolution
            and self.origin == other.origin
            and self.cells.shape == other.cells.shape
            and bool(np.array_equal(self.cells, other.cells))
        )

    def __repr__(self) -> str:
        return (
            f"OccupancyGrid({self.width}x{self.height}, res={self.resolution}, "
            f"origin={self.origin}, occupied={int(self.cells.sum())})"
        )

    def in_bounds(self, col: int, row: int) -> bool:
        return 0 <= col < self.width and 0 <= row < self.height

    def occupied(self, col: int, row: int) -> bool:
        if not self.in_bounds(col, row):
            raise OutOfBoundsError(f"cell ({col}, {row}) outside {self.width}x{self.height} grid")
        return bool(self.cells[row, col])


def load_map(text: str, resolution: float = 1.0, origin: tuple[float, float] = (0.0, 0.0)) -> OccupancyGrid:
    """Parse an ASCII map: '#' occupied, '.' free, one row per line, row 0 on top."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines = lines[:-1]  # tolerate one trailing newline
    if not lines or all(len(line) == 0 for line in lines):
        raise EmptyMapError("map text is empty")
    width = len(lines[0])
    rows = []
    for i, line in enumerate(lines):
        if len(line) != width:
            raise RaggedRowsError(f"row {i} has length {len(line)}, expected {width}")
        row = []
        for ch in line:
            if ch == OCCUPIED_CHAR:
                row.append(True)
            elif ch == FREE_CHAR:
                row.append(False)
            else:
                raise InvalidCharError(f"invalid map character {ch!r} in row {i}")
        rows.append(row)
    return OccupancyGrid(np.array(rows, dtype=bool), resolution, origin)


def serialize_map(grid: OccupancyGrid) -> str:
    """Inverse of load_map (modulo trailing newline)."""
    lines = []
    for row in grid.cells:
        lines.append("".join(OCCUPIED_CHAR if c else FREE_CHAR for c in row))
    return "\n".join(lines) + "\n"


def world_to_cell(grid: OccupancyGrid, point: tuple[float, float]) -> tuple[int, int]:
    """Cell (col, row) whose center is nearest to the world point."""
    col = int(round((point[0] - grid.origin[0]) / grid.resolution))
    row = int(round((point[1] - grid.origin[1]) / grid.resolution))
    if not grid.in_bounds(col, row):
        raise OutOfBoundsError(f"point {point} maps to cell ({col}, {row}) outside grid")
    return col, row


def cell_to_world(grid: OccupancyGrid, col: int, row: int) -> tuple[float, float]:
    """World coordinates of the center of cell (col, row)."""
    if not grid.in_bounds(col, row):
        raise OutOfBoundsError(f"cell ({col}, {row}) outside {grid.width}x{grid.height} grid")
    return (grid.origin[0] + col * grid.resolution, grid.origin[1] + row * grid.resolution)


def inflate(grid: OccupancyGrid, radius: float) -> OccupancyGrid:
    """Dilate occupied cells by a disc of the given radius (meters).

    A cell is occupied in the output iff some input cell within Euclidean
    center-to-center distance <= radius is occupied. Distance exactly equal
    to the radius counts as inside (conservative).
    """
    if radius < 0.0 or not math.isfinite(radius):
        raise ValueError(f"inflation radius must be >= 0, got {radius}")
    if radius == 0.0:
        return grid
    occ = grid.cells
    out = np.array(occ)  # writable copy
    h, w = occ.shape
    reach = int(math.floor(radius / grid.resolution)) + 1
    for dr in range(-reach, reach + 1):
        for dc in range(-reach, reach + 1):
            if dr == 0 and dc == 0:
                continue
            if math.hypot(dc * grid.resolution, dr * grid.resolution) > radius:
                continue
            r0, r1 = max(dr, 0), h + min(dr, 0)
            c0, c1 = max(dc, 0), w + min(dc, 0)
            if r0 >= r1 or c0 >= c1:
                continue
            out[r0:r1, c0:c1] |= occ[r0 - dr : r1 - dr, c0 - dc : c1 - dc]
    return OccupancyGrid(out, grid.resolution, grid.origin)


@lru_cache(maxsize=32)
def _disc_offsets(radius_cells: float) -> tuple[np.ndarray, int]:
    """Integer cell offsets that can hold a center within ``radius_cells`` of a
    point anywhere inside the base cell (a covering superset), plus the reach."""
    reach = int(math.floor(radius_cells + 0.5)) + 1
    offsets = []
    for dr in range(-reach, reach + 1):
        for dc in range(-reach, reach + 1):
            gap = math.hypot(max(abs(dc) - 0.5, 0.0), max(abs(dr) - 0.5, 0.0))
            if gap <= radius_cells + 1e-9:
                offsets.append((dc, dr))
    arr = np.array(offsets, dtype=np.int64)
    arr.setflags(write=False)
    return arr, reach


def _clearance_cells(grid: OccupancyGrid) -> np.ndarray:
    """Per-cell distance (in cells) from the cell center to the nearest
    blocked center, where blocked = occupied or beyond the map edge."""
    if grid._clearance is None:
        h, w = grid.cells.shape
        rows = np.arange(h, dtype=np.float64)
        cols = np.arange(w, dtype=np.float64)
        # Nearest out-of-bounds lattice point is straight out to a side.
        d_oob = np.minimum.outer(np.minimum(rows + 1, h - rows), np.minimum(cols + 1, w - cols))
        occ_r, occ_c = np.nonzero(grid.cells)
        if occ_r.size:
            occ_r = occ_r.astype(np.float64)
            occ_c = occ_c.astype(np.float64)
            d2 = np.empty((h, w))
            for r in range(h):  # row at a time keeps the (w, n_occ) block small
                d2[r] = (((rows[r] - occ_r) ** 2)[None, :] + (cols[:, None] - occ_c) ** 2).min(
                    axis=1
                )
            clearance = np.minimum(d_oob, np.sqrt(d2))
        else:
            clearance = d_oob
        clearance.setflags(write=False)
        grid._clearance = clearance
    return grid._clearance


def _padded_occupancy(grid: OccupancyGrid, reach: int) -> np.ndarray:
    """Occupancy extended by `reach` rings of blocked cells, so candidate
    indexing needs no bounds checks (out of bounds blocks like occupied)."""
    padded = grid._padded.get(reach)
    if padded is None:
        h, w = grid.cells.shape
        padded = np.ones((h + 2 * reach, w + 2 * reach), dtype=bool)
        padded[reach : reach + h, reach : reach + w] = grid.cells
        padded.setflags(write=False)
        grid._padded[reach] = padded
    return padded


def pose_free_batch(grid: OccupancyGrid, xs, ys, footprint: Footprint) -> np.ndarray:
    """Vectorized is_pose_free over arrays of world x/y coordinates.

    A pose is free iff its containing cell is in bounds and every cell whose
    center lies within the footprint radius of the pose is in bounds and
    free. Cells beyond the map edge block exactly like occupied cells.

    A cached clearance field settles poses far from any decision boundary;
    only poses within half a cell diagonal of the boundary fall through to
    the exact per-cell distance check, so results match the brute-force
    definition everywhere.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    res = grid.resolution
    cx = (xs - grid.origin[0]) / res
    cy = (ys - grid.origin[1]) / res
    base_c = np.round(cx).astype(np.int64)
    base_r = np.round(cy).astype(np.int64)
    base_ok = (base_c >= 0) & (base_c < grid.width) & (base_r >= 0) & (base_r < grid.height)

    bc = np.clip(base_c, 0, grid.width - 1)
    br = np.clip(base_r, 0, grid.height - 1)
    ecc = np.hypot(cx - bc, cy - br)  # pose offset from its cell center, in cells
    r_cells = footprint.radius / res
    clear = _clearance_cells(grid)[br, bc]
    free_sure = clear - ecc > r_cells + 1e-9
    blocked_sure = clear + ecc <= r_cells - 1e-9

    out = base_ok & free_sure
    band = base_ok & ~free_sure & ~blocked_sure
    if band.any():
        out[band] = _pose_free_exact(grid, cx[band], cy[band], bc[band], br[band], footprint)
    return out


def _pose_free_exact(grid, cx, cy, bc, br, footprint: Footprint) -> np.ndarray:
    res = grid.resolution
    offs, reach = _disc_offsets(footprint.radius / res)
    padded = _padded_occupancy(grid, reach)
    cand_c = bc[:, None] + offs[:, 0]
    cand_r = br[:, None] + offs[:, 1]
    occ = padded[cand_r + reach, cand_c + reach]
    dx = (cand_c - cx[:, None]) * res
    dy = (cand_r - cy[:, None]) * res
    within = dx * dx + dy * dy <= footprint.radius * footprint.radius
    return ~(within & occ).any(axis=1)


def is_pose_free(grid: OccupancyGrid, pose, footprint: Footprint) -> bool:
    """True iff the robot disc at ``pose`` overlaps no occupied cell center
    and stays inside the map. Never raises; out-of-bounds poses are not free."""
    free = pose_free_batch(grid, np.array([pose.x]), np.array([pose.y]), footprint)
    return bool(free[0])
