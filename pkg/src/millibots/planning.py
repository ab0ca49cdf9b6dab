"""Occupancy-grid construction and 8-connected A* search.

Grids rasterize obstacle polygons at a configurable resolution, inflate
them by the module's swept radius, and serve deterministic minimal-cost
plans with the octile heuristic. Diagonal moves never cut corners: both
adjacent cardinal cells must be free.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import CUBE_EDGE, WORKSPACE_HALF
from .errors import InvalidEndpointError, NoFreeSpaceError, UnreachableGoalError

SQRT2 = math.sqrt(2.0)

# Compass directions indexed 0..7 counterclockwise from +x.
COMPASS = (
    (1, 0),  # E
    (1, 1),  # NE
    (0, 1),  # N
    (-1, 1),  # NW
    (-1, 0),  # W
    (-1, -1),  # SW
    (0, -1),  # S
    (1, -1),  # SE
)
COMPASS_NAMES = ("E", "NE", "N", "NW", "W", "SW", "S", "SE")

# Default inflation: half the cube diagonal plus a safety margin.
DEFAULT_INFLATION = CUBE_EDGE * SQRT2 / 2.0 + 0.5e-3
DEFAULT_RESOLUTION = 0.5e-3


@dataclass
class OccupancyGrid:
    """Binary workspace map; True cells are blocked."""

    resolution: float  # m per cell
    origin: tuple[float, float]  # workspace coords of the (0,0) cell corner
    occupied: np.ndarray  # (ny, nx) bool, inflated
    raw: np.ndarray  # (ny, nx) bool, before inflation
    inflation: float  # m

    @property
    def width(self) -> int:
        return self.occupied.shape[1]

    @property
    def height(self) -> int:
        return self.occupied.shape[0]

    def cell_of(self, point) -> tuple[int, int]:
        """Workspace point (m) -> (ix, iy) cell, clamped to the grid."""
        ix = int(math.floor((point[0] - self.origin[0]) / self.resolution))
        iy = int(math.floor((point[1] - self.origin[1]) / self.resolution))
        return (min(max(ix, 0), self.width - 1), min(max(iy, 0), self.height - 1))

    def center_of(self, cell) -> tuple[float, float]:
        """(ix, iy) cell -> workspace coords (m) of the cell center."""
        ix, iy = cell
        return (
            self.origin[0] + (ix + 0.5) * self.resolution,
            self.origin[1] + (iy + 0.5) * self.resolution,
        )

    def is_free(self, cell) -> bool:
        ix, iy = cell
        if not (0 <= ix < self.width and 0 <= iy < self.height):
            return False
        return not self.occupied[iy, ix]


@dataclass
class NavPlan:
    """8-connected waypoint path produced by `plan`."""

    waypoints: list[tuple[int, int]]
    moves: list[int]  # compass indices
    cost: float  # cells; diagonals cost sqrt(2)
    grid: OccupancyGrid | None = field(default=None, repr=False)

    def waypoint_positions(self) -> list[tuple[float, float]]:
        if self.grid is None:
            raise ValueError("plan has no grid attached")
        return [self.grid.center_of(c) for c in self.waypoints]


def _rasterize_polygon(poly: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Even-odd point-in-polygon test on the cell-center lattice."""
    inside = np.zeros((ys.size, xs.size), dtype=bool)
    px, py = np.meshgrid(xs, ys)
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        crosses = (y1 <= py) != (y2 <= py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_int = x1 + (py - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (px < x_int)
    return inside


def _disk_offsets(radius_cells: float) -> list[tuple[int, int]]:
    r = int(math.ceil(radius_cells))
    out = []
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dx * dx + dy * dy <= radius_cells * radius_cells:
                out.append((dx, dy))
    return out


def _inflate(raw: np.ndarray, radius_cells: float) -> np.ndarray:
    """Dilate a boolean mask with a disk: Minkowski sum by the robot footprint."""
    if radius_cells <= 0.0 or not raw.any():
        return raw.copy()
    ny, nx = raw.shape
    out = np.zeros_like(raw)
    for dx, dy in _disk_offsets(radius_cells):
        ys_dst = slice(max(0, dy), ny + min(0, dy))
        xs_dst = slice(max(0, dx), nx + min(0, dx))
        ys_src = slice(max(0, -dy), ny + min(0, -dy))
        xs_src = slice(max(0, -dx), nx + min(0, -dx))
        out[ys_dst, xs_dst] |= raw[ys_src, xs_src]
    return out


def build_grid(
    obstacles: list | None = None,
    resolution: float = DEFAULT_RESOLUTION,
    inflation: float = DEFAULT_INFLATION,
    workspace_half: float = WORKSPACE_HALF,
) -> OccupancyGrid:
    """Rasterize obstacle polygons and dilate them by the inflation radius.

    `obstacles` is a list of polygons, each an (n, 2) array of workspace
    coordinates in meters. Raises NoFreeSpaceError if inflation blocks
    every cell.
    """
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    n = int(round(2.0 * workspace_half / resolution))
    origin = (-workspace_half, -workspace_half)
    xs = origin[0] + (np.arange(n) + 0.5) * resolution
    ys = origin[1] + (np.arange(n) + 0.5) * resolution

    raw = np.zeros((n, n), dtype=bool)
    for poly in obstacles or []:
        raw |= _rasterize_polygon(np.asarray(poly, dtype=float), xs, ys)

    occupied = _inflate(raw, inflation / resolution)
    if occupied.all():
        raise NoFreeSpaceError("inflation removed all free space from the workspace")
    return OccupancyGrid(
        resolution=resolution, origin=origin, occupied=occupied, raw=raw,
        inflation=inflation,
    )


def grid_from_mask(
    mask: np.ndarray,
    resolution: float = DEFAULT_RESOLUTION,
    inflation: float = DEFAULT_INFLATION,
) -> OccupancyGrid:
    """Build a grid from a boolean/grayscale mask (nonzero = obstacle)."""
    raw = np.asarray(mask) != 0
    occupied = _inflate(raw, inflation / resolution)
    if occupied.all():
        raise NoFreeSpaceError("mask leaves no free space")
    origin = (-raw.shape[1] * resolution / 2.0, -raw.shape[0] * resolution / 2.0)
    return OccupancyGrid(
        resolution=resolution, origin=origin, occupied=occupied, raw=raw,
        inflation=inflation,
    )


def save_pgm(grid: OccupancyGrid, path, layer: str = "occupied") -> None:
    """Export a grid layer as a binary PGM image (occupied cells black).

    Rows are written top-down (image convention), so the first raster row
    is the highest-y strip of the workspace.
    """
    cells = grid.occupied if layer == "occupied" else grid.raw
    img = np.where(cells[::-1], 0, 255).astype(np.uint8)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode()
    with open(path, "wb") as fh:
        fh.write(header + img.tobytes())


def load_pgm(path) -> np.ndarray:
    """Read a (binary or ascii) PGM into an obstacle mask (True = occupied)."""
    data = open(path, "rb").read()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while end < len(data) and not data[end : end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    magic, width, height, maxval = fields[0], int(fields[1]), int(fields[2]), int(fields[3])
    if magic == b"P5":
        img = np.frombuffer(data[pos + 1 :], dtype=np.uint8, count=width * height)
    elif magic == b"P2":
        img = np.array(data[pos:].split()[: width * height], dtype=np.uint8)
    else:
        raise ValueError(f"not a PGM file: magic {magic!r}")
    mask = img.reshape(height, width) < maxval // 2
    return mask[::-1]  # back to workspace row order (y up)


def grid_from_pgm(
    path,
    resolution: float = DEFAULT_RESOLUTION,
    inflation: float = DEFAULT_INFLATION,
) -> OccupancyGrid:
    """Import an occupancy grid from a portable graymap obstacle mask."""
    return grid_from_mask(load_pgm(path), resolution, inflation)


def octile(a: tuple[int, int], b: tuple[int, int]) -> float:
    """Admissible 8-connected distance: diagonals cost sqrt(2)."""
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    return (dx + dy) + (SQRT2 - 2.0) * min(dx, dy)


def _neighbors(grid: OccupancyGrid, cell: tuple[int, int]):
    x, y = cell
    for idx, (dx, dy) in enumerate(COMPASS):
        nxt = (x + dx, y + dy)
        if not grid.is_free(nxt):
            continue
        if dx != 0 and dy != 0:
            # no corner cutting: both adjacent cardinals must be free
            if not (grid.is_free((x + dx, y)) and grid.is_free((x, y + dy))):
                continue
        yield idx, nxt


def plan(grid: OccupancyGrid, start: tuple[int, int], goal: tuple[int, int]) -> NavPlan:
    """Minimal-cost 8-connected path from start to goal.

    Ties on f prefer higher g (deeper nodes), then lexicographic cell order,
    so plans are deterministic.
    """
    start = tuple(start)
    goal = tuple(goal)
    if not grid.is_free(start):
        raise InvalidEndpointError(f"start cell {start} is occupied or out of bounds")
    if not grid.is_free(goal):
        raise InvalidEndpointError(f"goal cell {goal} is occupied or out of bounds")
    if start == goal:
        return NavPlan(waypoints=[start], moves=[], cost=0.0, grid=grid)

    open_heap = [(octile(start, goal), 0.0, start)]
    g_score = {start: 0.0}
    came_from: dict[tuple[int, int], tuple[tuple[int, int], int]] = {}
    closed = set()

    while open_heap:
        f, neg_g, current = heapq.heappop(open_heap)
        if current in closed:
            continue
        if current == goal:
            break
        closed.add(current)
        g_cur = g_score[current]
        for move_idx, nxt in _neighbors(grid, current):
            step = SQRT2 if COMPASS[move_idx][0] and COMPASS[move_idx][1] else 1.0
            tentative = g_cur + step
            if tentative < g_score.get(nxt, math.inf) - 1e-12:
                g_score[nxt] = tentative
                came_from[nxt] = (current, move_idx)
                heapq.heappush(
                    open_heap, (tentative + octile(nxt, goal), -tentative, nxt)
                )
    else:
        raise UnreachableGoalError(f"no path from {start} to {goal}")

    if goal not in came_from:
        raise UnreachableGoalError(f"no path from {start} to {goal}")

    waypoints = [goal]
    moves = []
    node = goal
    while node != start:
        node, move_idx = came_from[node]
        waypoints.append(node)
        moves.append(move_idx)
    waypoints.reverse()
    moves.reverse()
    n_diag = sum(1 for m in moves if COMPASS[m][0] and COMPASS[m][1])
    cost = (len(moves) - n_diag) + n_diag * SQRT2
    return NavPlan(waypoints=waypoints, moves=moves, cost=cost, grid=grid)


def dijkstra_cost(grid: OccupancyGrid, start: tuple[int, int], goal: tuple[int, int]) -> float:
    """Exhaustive shortest-path cost; reference oracle for `plan`."""
    start, goal = tuple(start), tuple(goal)
    dist = {start: (0.0, 0, 0)}  # cost, cardinals, diagonals
    heap = [(0.0, start)]
    seen = set()
    while heap:
        d, cur = heapq.heappop(heap)
        if cur in seen:
            continue
        seen.add(cur)
        if cur == goal:
            _, n_card, n_diag = dist[cur]
            return n_card + n_diag * SQRT2
        _, n_card, n_diag = dist[cur]
        for move_idx, nxt in _neighbors(grid, cur):
            diag = bool(COMPASS[move_idx][0] and COMPASS[move_idx][1])
            nd = d + (SQRT2 if diag else 1.0)
            if nd < dist.get(nxt, (math.inf,))[0] - 1e-12:
                dist[nxt] = (nd, n_card + (not diag), n_diag + diag)
                heapq.heappush(heap, (nd, nxt))
    raise UnreachableGoalError(f"no path from {start} to {goal}")


def maze_obstacles(
    corridor: float = 8.0e-3,
    wall: float = 3.0e-3,
    workspace_half: float = WORKSPACE_HALF,
) -> list[np.ndarray]:
    """Two-baffle serpentine maze with the given corridor clearance.

    The baffles alternate attachment sides, leaving `corridor`-wide gaps,
    mirroring the constrained navigation workspace.
    """
    w = workspace_half
    span = 2.0 * w
    lane = (span - 2.0 * wall) / 3.0
    y1 = -w + lane  # bottom of baffle 1
    y2 = y1 + wall + lane  # bottom of baffle 2

    def rect(x0, y0, x1, y1_):
        return np.array([[x0, y0], [x1, y0], [x1, y1_], [x0, y1_]])

    return [
        rect(-w, y1, w - corridor, y1 + wall),  # gap at the right
        rect(-w + corridor, y2, w, y2 + wall),  # gap at the left
    ]
