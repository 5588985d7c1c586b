"""Grid maps, MovingAI map I/O, map generators and border start sampling."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import ndimage

log = logging.getLogger(__name__)

FREE_CHARS = frozenset(".G")
OBSTACLE_CHARS = frozenset("@TO")
MAP_STYLES = ("random", "room", "maze")


class Cell(NamedTuple):
    row: int
    col: int


class MapFormatError(ValueError):
    """Raised for malformed MovingAI map text."""


@dataclass(frozen=True, eq=False)
class GridMap:
    """Occupancy grid; ``occupancy[r, c]`` is True for free cells.

    The lattice is copied and frozen on construction. Cell ids are dense
    integers assigned to free cells in row-major order, which is also the
    bit order used by every bitset in the package.
    """

    occupancy: np.ndarray
    demoted: int = field(default=0, compare=False)

    def __post_init__(self):
        occ = np.array(self.occupancy, dtype=bool, copy=True)
        if occ.ndim != 2 or occ.shape[0] < 1 or occ.shape[1] < 1:
            raise ValueError("occupancy must be a non-empty 2D array")
        occ.setflags(write=False)
        object.__setattr__(self, "occupancy", occ)

    @property
    def height(self) -> int:
        return self.occupancy.shape[0]

    @property
    def width(self) -> int:
        return self.occupancy.shape[1]

    @cached_property
    def free_cells(self) -> list[Cell]:
        rows, cols = np.nonzero(self.occupancy)
        return [Cell(int(r), int(c)) for r, c in zip(rows, cols)]

    @cached_property
    def id_grid(self) -> np.ndarray:
        """``height x width`` int array of cell ids, -1 on obstacles."""
        ids = np.full(self.occupancy.shape, -1, dtype=np.int64)
        ids[self.occupancy] = np.arange(int(self.occupancy.sum()))
        ids.setflags(write=False)
        return ids

    @cached_property
    def cell_ids(self) -> dict[Cell, int]:
        return {c: i for i, c in enumerate(self.free_cells)}

    @property
    def num_free(self) -> int:
        return len(self.free_cells)

    def in_bounds(self, cell: Sequence[int]) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def is_free(self, cell: Sequence[int]) -> bool:
        return self.in_bounds(cell) and bool(self.occupancy[cell[0], cell[1]])

    def __eq__(self, other):
        if not isinstance(other, GridMap):
            return NotImplemented
        return np.array_equal(self.occupancy, other.occupancy)

    def __hash__(self):
        return hash((self.occupancy.shape, self.occupancy.tobytes()))

    def __repr__(self):
        return f"GridMap({self.height}x{self.width}, free={self.num_free})"


@dataclass(frozen=True)
class ProblemInstance:
    """An MWRP instance with the makespan objective.

    ``unseen`` defaults to every free cell of ``map``.
    """

    map: GridMap
    starts: tuple[Cell, ...]
    unseen: frozenset[Cell] | None = None

    def __post_init__(self):
        starts = tuple(Cell(int(r), int(c)) for r, c in self.starts)
        if not starts:
            raise ValueError("at least one agent is required")
        for s in starts:
            if not self.map.is_free(s):
                raise ValueError(f"start {tuple(s)} is not a free cell")
        object.__setattr__(self, "starts", starts)
        if self.unseen is None:
            unseen = frozenset(self.map.free_cells)
        else:
            unseen = frozenset(Cell(int(r), int(c)) for r, c in self.unseen)
            bad = [c for c in unseen if not self.map.is_free(c)]
            if bad:
                raise ValueError(f"unseen cells must be free, got {sorted(bad)[:3]}")
        object.__setattr__(self, "unseen", unseen)

    @property
    def num_agents(self) -> int:
        return len(self.starts)


def largest_component(occupancy: np.ndarray) -> np.ndarray:
    """Keep only the largest 4-connected free component.

    Equal-size components are resolved in favour of the one holding the
    row-major-first free cell.
    """
    occ = np.asarray(occupancy, dtype=bool)
    labels, n = ndimage.label(occ)
    if n <= 1:
        return occ.copy()
    sizes = np.bincount(labels.ravel())[1:]
    # ndimage numbers components in raster order of their first cell
    keep = int(np.argmax(sizes)) + 1
    return labels == keep


def _connected(occupancy: np.ndarray) -> GridMap:
    kept = largest_component(occupancy)
    demoted = int(np.asarray(occupancy, dtype=bool).sum() - kept.sum())
    if demoted:
        log.info("demoted %d free cells outside the largest component", demoted)
    return GridMap(kept, demoted=demoted)


def parse_map(text: str) -> GridMap:
    """Parse MovingAI ``.map`` text into a connected :class:`GridMap`."""
    lines = text.splitlines()
    if len(lines) < 4:
        raise MapFormatError("truncated header")
    header = {}
    for i, name in enumerate(("type", "height", "width")):
        parts = lines[i].split()
        if len(parts) != 2 or parts[0] != name:
            raise MapFormatError(f"expected '{name} <value>' on line {i + 1}, got {lines[i]!r}")
        header[name] = parts[1]
    if lines[3].strip() != "map":
        raise MapFormatError(f"expected 'map' on line 4, got {lines[3]!r}")
    try:
        height, width = int(header["height"]), int(header["width"])
    except ValueError as exc:
        raise MapFormatError("non-integer map dimensions") from exc
    if height < 1 or width < 1:
        raise MapFormatError("map dimensions must be positive")
    rows = lines[4:]
    while len(rows) > height and rows[-1] == "":
        rows.pop()
    if len(rows) != height:
        raise MapFormatError(f"expected {height} map rows, found {len(rows)}")
    occ = np.zeros((height, width), dtype=bool)
    for r, row in enumerate(rows):
        if len(row) != width:
            raise MapFormatError(f"row {r} has length {len(row)}, expected {width}")
        for c, ch in enumerate(row):
            if ch in FREE_CHARS:
                occ[r, c] = True
            elif ch not in OBSTACLE_CHARS:
                raise MapFormatError(f"unknown map character {ch!r} at ({r}, {c})")
    if not occ.any():
        raise MapFormatError("map has no free cells")
    return _connected(occ)


def serialize_map(grid: GridMap) -> str:
    rows = ["".join("." if v else "@" for v in row) for row in grid.occupancy]
    return "type octile\nheight {}\nwidth {}\nmap\n{}\n".format(
        grid.height, grid.width, "\n".join(rows))


def read_map(path) -> GridMap:
    with open(path, encoding="utf-8") as fh:
        return parse_map(fh.read())


def write_map(grid: GridMap, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_map(grid))


def from_rows(rows: Iterable[str]) -> GridMap:
    """Build a map from bare rows of map characters (test and demo helper)."""
    rows = list(rows)
    text = f"type octile\nheight {len(rows)}\nwidth {len(rows[0])}\nmap\n" + "\n".join(rows)
    return parse_map(text)


def generate_map(style: str, width: int, height: int, density: float = 0.2,
                 seed: int = 0) -> GridMap:
    """Generate a connected map.

    ``random`` drops ``floor(density * width * height)`` obstacles uniformly,
    ``room`` tiles 3x3 rooms behind one-cell walls with one random door per
    shared wall, and ``maze`` carves a recursive-backtracker maze whose
    passages sit on even (row, col) coordinates so the top and left borders
    carry free cells.
    """
    if width < 3 or height < 3:
        raise ValueError(f"map must be at least 3x3, got {width}x{height}")
    rng = np.random.default_rng(seed)
    if style == "random":
        if not 0 <= density < 1:
            raise ValueError("density must lie in [0, 1)")
        occ = np.ones(height * width, dtype=bool)
        n_obs = int(np.floor(density * width * height))
        occ[rng.choice(height * width, size=n_obs, replace=False)] = False
        occ = occ.reshape(height, width)
        if not occ.any():
            raise ValueError("density leaves no free cell")
        return _connected(occ)
    if style == "room":
        return GridMap(_rooms(width, height, rng))
    if style == "maze":
        return GridMap(_maze(width, height, rng))
    raise ValueError(f"unknown map style {style!r}; expected one of {MAP_STYLES}")


def _rooms(width, height, rng) -> np.ndarray:
    n_cols, n_rows = (width + 1) // 4, (height + 1) // 4
    if n_cols < 1 or n_rows < 1:
        raise ValueError("room maps need room for at least one 3x3 room")
    occ = np.zeros((height, width), dtype=bool)
    for i in range(n_rows):
        for j in range(n_cols):
            occ[4 * i:4 * i + 3, 4 * j:4 * j + 3] = True
    for i in range(n_rows):
        for j in range(n_cols):
            if j + 1 < n_cols:
                occ[4 * i + int(rng.integers(3)), 4 * j + 3] = True
            if i + 1 < n_rows:
                occ[4 * i + 3, 4 * j + int(rng.integers(3))] = True
    return occ


def _maze(width, height, rng) -> np.ndarray:
    n_rows, n_cols = (height + 1) // 2, (width + 1) // 2
    occ = np.zeros((height, width), dtype=bool)
    visited = np.zeros((n_rows, n_cols), dtype=bool)
    stack = [(0, 0)]
    visited[0, 0] = True
    occ[0, 0] = True
    steps = ((-1, 0), (1, 0), (0, -1), (0, 1))
    while stack:
        i, j = stack[-1]
        options = [(i + di, j + dj) for di, dj in steps
                   if 0 <= i + di < n_rows and 0 <= j + dj < n_cols
                   and not visited[i + di, j + dj]]
        if not options:
            stack.pop()
            continue
        ni, nj = options[int(rng.integers(len(options)))]
        visited[ni, nj] = True
        occ[2 * ni, 2 * nj] = True
        occ[i + ni, j + nj] = True  # wall cell between the two lattice nodes
        stack.append((ni, nj))
    return occ


def border_cells(grid: GridMap) -> list[Cell]:
    h, w = grid.height, grid.width
    return [c for c in grid.free_cells
            if c.row in (0, h - 1) or c.col in (0, w - 1)]


def sample_border_starts(grid: GridMap, num_agents: int, seed: int = 0) -> list[Cell]:
    """Draw start cells uniformly, with replacement, from free border cells."""
    if num_agents < 1:
        raise ValueError("num_agents must be positive")
    border = border_cells(grid)
    if not border:
        raise ValueError("map has no free border cell")
    rng = np.random.default_rng(seed)
    return [border[int(k)] for k in rng.integers(len(border), size=num_agents)]
