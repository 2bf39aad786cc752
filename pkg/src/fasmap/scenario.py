"""2D world model: grid geometry, base station, rectangular obstacles, visibility.

Grid convention: row index ``i`` runs along y, column index ``j`` along x,
and cell (i, j) maps to the cell-center coordinate
``((j + 0.5) * width / J, (i + 0.5) * height / I)``.
"""
from __future__ import annotations

import hashlib
import math

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .kernels import los_flags

if TYPE_CHECKING:  # pragma: no cover
    from .config import ScenarioConfig

PLACEMENT_BUDGET = 1000


class DegenerateLinkError(ValueError):
    """Query point coincides exactly with the base station."""


class PlacementError(RuntimeError):
    """Random obstacle placement failed within the retry budget."""


@dataclass(frozen=True)
class Obstacle:
    """Closed axis-aligned rectangle; a tangent segment counts as blocked."""

    min_corner: tuple[float, float]
    max_corner: tuple[float, float]

    def __post_init__(self):
        if not (self.min_corner[0] < self.max_corner[0]
                and self.min_corner[1] < self.max_corner[1]):
            raise ValueError("obstacle requires min_corner < max_corner componentwise")

    def contains(self, x: float, y: float) -> bool:
        return (self.min_corner[0] <= x <= self.max_corner[0]
                and self.min_corner[1] <= y <= self.max_corner[1])

    def as_row(self):
        return (self.min_corner[0], self.min_corner[1],
                self.max_corner[0], self.max_corner[1])


@dataclass(frozen=True)
class Scenario:
    width_m: float
    height_m: float
    grid_rows: int
    grid_cols: int
    bs_position: tuple[float, float]
    obstacles: tuple[Obstacle, ...]
    seed: int = 0

    def __post_init__(self):
        if self.grid_rows < 1 or self.grid_cols < 1:
            raise ValueError("grid must have at least one row and one column")
        if self.width_m <= 0 or self.height_m <= 0:
            raise ValueError("region dimensions must be positive")
        bx, by = self.bs_position
        if not (0.0 <= bx <= self.width_m and 0.0 <= by <= self.height_m):
            raise ValueError("bs_position lies outside the region")
        for o in self.obstacles:
            if (o.min_corner[0] < 0 or o.min_corner[1] < 0
                    or o.max_corner[0] > self.width_m or o.max_corner[1] > self.height_m):
                raise ValueError("obstacle extends outside the region")
        ci, cj = bs_cell(self)
        cx, cy = cell_center(self, ci, cj)
        for o in self.obstacles:
            if o.contains(cx, cy):
                raise ValueError("an obstacle covers the BS cell-center")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.grid_rows, self.grid_cols)

    def obstacle_array(self) -> np.ndarray:
        return np.array([o.as_row() for o in self.obstacles],
                        dtype=np.float64).reshape(-1, 4)


def cell_size(scenario: Scenario) -> tuple[float, float]:
    return (scenario.width_m / scenario.grid_cols,
            scenario.height_m / scenario.grid_rows)


def cell_center(scenario: Scenario, i: int, j: int) -> tuple[float, float]:
    """Center coordinate (x, y) in meters of grid cell (i, j)."""
    if not (0 <= i < scenario.grid_rows and 0 <= j < scenario.grid_cols):
        raise IndexError(f"cell index ({i}, {j}) out of range "
                         f"{scenario.grid_rows}x{scenario.grid_cols}")
    cw, ch = cell_size(scenario)
    return ((j + 0.5) * cw, (i + 0.5) * ch)


def cell_centers(scenario: Scenario) -> np.ndarray:
    """All cell centers as an (I*J, 2) array, row-major (i-major) order."""
    cw, ch = cell_size(scenario)
    xs = (np.arange(scenario.grid_cols) + 0.5) * cw
    ys = (np.arange(scenario.grid_rows) + 0.5) * ch
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def bs_cell(scenario: Scenario) -> tuple[int, int]:
    """Index of the grid cell containing the BS position."""
    cw, ch = cell_size(scenario)
    j = min(int(scenario.bs_position[0] / cw), scenario.grid_cols - 1)
    i = min(int(scenario.bs_position[1] / ch), scenario.grid_rows - 1)
    return (i, j)


def degenerate_cell(scenario: Scenario) -> tuple[int, int] | None:
    """The cell whose center coincides exactly with the BS, if any."""
    ci, cj = bs_cell(scenario)
    if cell_center(scenario, ci, cj) == tuple(scenario.bs_position):
        return (ci, cj)
    return None


def los_indicator(scenario: Scenario, r) -> int:
    """1 iff the segment from the BS to ``r`` misses every obstacle."""
    x, y = float(r[0]), float(r[1])
    if not scenario.obstacles:
        return 1
    flag = los_flags(scenario.bs_position[0], scenario.bs_position[1],
                     np.array([x]), np.array([y]), scenario.obstacle_array())
    return int(flag[0])


def los_map(scenario: Scenario) -> np.ndarray:
    """LoS flag for every cell center, shape (I, J), dtype uint8."""
    centers = cell_centers(scenario)
    if not scenario.obstacles:
        return np.ones(scenario.shape, dtype=np.uint8)
    flags = los_flags(scenario.bs_position[0], scenario.bs_position[1],
                      centers[:, 0], centers[:, 1], scenario.obstacle_array())
    return flags.reshape(scenario.shape)


def link_geometry(scenario: Scenario, r) -> tuple[float, float]:
    """Distance (m) and angle of departure (rad, in [-pi, pi)) of a point."""
    dx = float(r[0]) - scenario.bs_position[0]
    dy = float(r[1]) - scenario.bs_position[1]
    if dx == 0.0 and dy == 0.0:
        raise DegenerateLinkError("query point coincides with the BS position")
    phi = math.atan2(dy, dx)
    if phi == math.pi:
        phi = -math.pi
    return (math.hypot(dx, dy), phi)


def link_geometry_map(scenario: Scenario) -> tuple[np.ndarray, np.ndarray]:
    """Distance and AoD arrays for all cell centers, each of shape (I, J).

    A cell whose center coincides exactly with the BS gets d=0, phi=0; callers
    must consult :func:`degenerate_cell` before using those entries.
    """
    centers = cell_centers(scenario)
    dx = centers[:, 0] - scenario.bs_position[0]
    dy = centers[:, 1] - scenario.bs_position[1]
    d = np.hypot(dx, dy)
    phi = np.arctan2(dy, dx)
    phi[phi == np.pi] = -np.pi
    phi[d == 0.0] = 0.0
    return d.reshape(scenario.shape), phi.reshape(scenario.shape)


def generate_scenario(config: "ScenarioConfig", seed: int) -> Scenario:
    """Build a scenario from a config, placing obstacles with the seeded RNG.

    When ``config.fixed_obstacles`` is non-empty those corners are used
    verbatim; otherwise ``n_obstacles`` rectangles of the configured size are
    placed by rejection sampling (a placement covering the BS cell-center is
    re-drawn, up to PLACEMENT_BUDGET attempts per obstacle).
    """
    if config.fixed_obstacles:
        obstacles = tuple(Obstacle((xmin, ymin), (xmax, ymax))
                          for xmin, ymin, xmax, ymax in config.fixed_obstacles)
        return Scenario(config.width_m, config.height_m, config.grid_rows,
                        config.grid_cols, tuple(config.bs_position),
                        obstacles, int(seed))

    probe = Scenario(config.width_m, config.height_m, config.grid_rows,
                     config.grid_cols, tuple(config.bs_position), (), int(seed))
    ci, cj = bs_cell(probe)
    bs_cx, bs_cy = cell_center(probe, ci, cj)
    ow, oh = config.obstacle_width_m, config.obstacle_height_m
    if config.n_obstacles > 0 and (ow >= config.width_m or oh >= config.height_m):
        raise PlacementError("obstacle size does not fit in the region")
    rng = np.random.default_rng(seed)
    obstacles = []
    for _ in range(config.n_obstacles):
        for _ in range(PLACEMENT_BUDGET):
            x0 = rng.uniform(0.0, config.width_m - ow)
            y0 = rng.uniform(0.0, config.height_m - oh)
            cand = Obstacle((x0, y0), (x0 + ow, y0 + oh))
            if not cand.contains(bs_cx, bs_cy):
                obstacles.append(cand)
                break
        else:
            raise PlacementError(
                f"could not place obstacle after {PLACEMENT_BUDGET} attempts")
    return Scenario(config.width_m, config.height_m, config.grid_rows,
                    config.grid_cols, tuple(config.bs_position),
                    tuple(obstacles), int(seed))


# ---------------------------------------------------------------------------
# serialization (TOML; schema documented in the harness/README)

def scenario_to_toml(scenario: Scenario) -> str:
    lines = [
        "[scenario]",
        f"width_m = {scenario.width_m!r}",
        f"height_m = {scenario.height_m!r}",
        f"grid_rows = {scenario.grid_rows}",
        f"grid_cols = {scenario.grid_cols}",
        f"bs_position = [{scenario.bs_position[0]!r}, {scenario.bs_position[1]!r}]",
        f"seed = {scenario.seed}",
    ]
    for o in scenario.obstacles:
        lines += [
            "",
            "[[scenario.obstacles]]",
            f"min_corner = [{o.min_corner[0]!r}, {o.min_corner[1]!r}]",
            f"max_corner = [{o.max_corner[0]!r}, {o.max_corner[1]!r}]",
        ]
    return "\n".join(lines) + "\n"


def save_scenario(path, scenario: Scenario) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(scenario_to_toml(scenario))


def load_scenario(path) -> Scenario:
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    sec = doc["scenario"]
    obstacles = tuple(Obstacle(tuple(o["min_corner"]), tuple(o["max_corner"]))
                      for o in sec.get("obstacles", []))
    return Scenario(float(sec["width_m"]), float(sec["height_m"]),
                    int(sec["grid_rows"]), int(sec["grid_cols"]),
                    tuple(sec["bs_position"]), obstacles, int(sec.get("seed", 0)))


def scenario_hash(scenario: Scenario) -> str:
    """Stable content hash used to tie tensor files to their scenario."""
    return hashlib.sha256(scenario_to_toml(scenario).encode()).hexdigest()[:16]
