"""Line of sight, watcher sets, movement and BFS distance fields on a grid.

Sets of cells are mostly handled as Python ``int`` bitsets where bit ``i``
stands for the free cell with id ``i`` (row-major numbering, see
:attr:`GridMap.cell_ids`).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .grid import Cell, GridMap

INF = np.iinfo(np.int32).max // 4
_STEPS = ((-1, 0), (1, 0), (0, -1), (0, 1))


def neighbors(grid: GridMap, s) -> list[Cell]:
    """Free four-way neighbours of ``s`` (north, south, west, east)."""
    r, c = s
    return [Cell(r + dr, c + dc) for dr, dc in _STEPS if grid.is_free((r + dr, c + dc))]


def bresenham_line(a, b) -> Iterator[Cell]:
    """Rasterise the segment a -> b, both endpoints included."""
    (r0, c0), (r1, c1) = a, b
    dx, dy = abs(c1 - c0), -abs(r1 - r0)
    sx = 1 if c0 < c1 else -1
    sy = 1 if r0 < r1 else -1
    err = dx + dy
    while True:
        yield Cell(r0, c0)
        if r0 == r1 and c0 == c1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            c0 += sx
        if e2 <= dx:
            err += dx
            r0 += sy


def bresenham_visible(grid: GridMap, a, b) -> bool:
    return all(grid.occupancy[r, c] for r, c in bresenham_line(a, b))


def bits_of(ids: Iterable[int]) -> int:
    out = 0
    for i in ids:
        out |= 1 << int(i)
    return out


def iter_bits(bits: int) -> Iterator[int]:
    """Yield set bit positions in increasing order."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


def _row_bits(mat: np.ndarray) -> list[int]:
    packed = np.packbits(mat, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


@dataclass(frozen=True, eq=False)
class VisibilityIndex:
    """Precomputed LOS and watcher sets for every free cell.

    ``visible[i, j]`` is True when cell ``j`` lies in the LOS of cell ``i``;
    watchers are the transpose. ``los_bits``/``watcher_bits`` hold the same
    relation as int bitsets indexed by cell id.
    """

    grid: GridMap
    visible: np.ndarray
    los_bits: list[int]
    watcher_bits: list[int]

    @property
    def cell_ids(self) -> dict[Cell, int]:
        return self.grid.cell_ids

    @property
    def cells(self) -> list[Cell]:
        return self.grid.free_cells

    def los(self, s) -> set[Cell]:
        return self.cells_of(self.los_bits[self.cell_ids[Cell(*s)]])

    def watchers(self, s) -> set[Cell]:
        return self.cells_of(self.watcher_bits[self.cell_ids[Cell(*s)]])

    def cells_of(self, bits: int) -> set[Cell]:
        cells = self.cells
        return {cells[i] for i in iter_bits(bits)}

    def bits(self, cells: Iterable) -> int:
        ids = self.cell_ids
        return bits_of(ids[Cell(*c)] for c in cells)

    @property
    def watcher_counts(self) -> np.ndarray:
        return self.visible.sum(axis=0)


def build_visibility_index(grid: GridMap, max_range: float | None = None,
                           chunk: int = 256) -> VisibilityIndex:
    """Compute Bresenham LOS between all pairs of free cells.

    The rasterisation is the same integer error-accumulation walk as
    :func:`bresenham_line`, run for a block of sources at once.
    """
    cells = np.array(grid.free_cells, dtype=np.int64).reshape(-1, 2)
    n = len(cells)
    occ = grid.occupancy
    visible = np.zeros((n, n), dtype=bool)
    for lo in range(0, n, chunk):
        src = cells[lo:lo + chunk]
        m = len(src)
        r = np.repeat(src[:, 0], n)
        c = np.repeat(src[:, 1], n)
        r1 = np.tile(cells[:, 0], m)
        c1 = np.tile(cells[:, 1], m)
        dx, dy = np.abs(c1 - c), -np.abs(r1 - r)
        sx = np.where(c < c1, 1, -1)
        sy = np.where(r < r1, 1, -1)
        err = dx + dy
        vis = np.ones(len(r), dtype=bool)
        active = np.ones(len(r), dtype=bool)
        while active.any():
            idx = np.flatnonzero(active)
            vis[idx] &= occ[r[idx], c[idx]]
            done = (r[idx] == r1[idx]) & (c[idx] == c1[idx])
            active[idx[done]] = False
            idx = idx[~done]
            e2 = 2 * err[idx]
            step_c = e2 >= dy[idx]
            step_r = e2 <= dx[idx]
            ic, ir = idx[step_c], idx[step_r]
            err[ic] += dy[ic]
            c[ic] += sx[ic]
            err[ir] += dx[ir]
            r[ir] += sy[ir]
        visible[lo:lo + m] = vis.reshape(m, n)
    if max_range is not None:
        diff = cells[:, None, :] - cells[None, :, :]
        visible &= (diff ** 2).sum(axis=2) <= max_range ** 2
    visible.setflags(write=False)
    return VisibilityIndex(grid, visible, _row_bits(visible), _row_bits(visible.T))


@lru_cache(maxsize=32)
def adjacency(grid: GridMap) -> tuple[tuple[int, ...], ...]:
    """Neighbour id lists per free cell id (north, south, west, east)."""
    ids = grid.id_grid
    out = []
    for r, c in grid.free_cells:
        out.append(tuple(int(ids[r + dr, c + dc]) for dr, dc in _STEPS
                         if grid.is_free((r + dr, c + dc))))
    return tuple(out)


@dataclass(frozen=True, eq=False)
class DistField:
    """Multi-source BFS distances indexed by cell id; ``INF`` when unreached."""

    grid: GridMap
    sources: frozenset
    dist: np.ndarray

    def __getitem__(self, cell) -> int:
        return int(self.dist[self.grid.cell_ids[Cell(*cell)]])


def bfs_ids(adj, sources: Iterable[int], n: int) -> np.ndarray:
    dist = np.full(n, INF, dtype=np.int64)
    queue = deque()
    for s in sources:
        if dist[s] != 0:
            dist[s] = 0
            queue.append(s)
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in adj[u]:
            if dist[v] == INF:
                dist[v] = du
                queue.append(v)
    return dist


def bfs_dist_field(grid: GridMap, sources: Iterable) -> DistField:
    sources = frozenset(Cell(*s) for s in sources)
    if not sources:
        raise ValueError("at least one source cell is required")
    ids = grid.cell_ids
    dist = bfs_ids(adjacency(grid), sorted(ids[s] for s in sources), grid.num_free)
    dist.setflags(write=False)
    return DistField(grid, sources, dist)


@lru_cache(maxsize=8)
def all_pairs_distances(grid: GridMap) -> np.ndarray:
    """Dense ``n x n`` shortest-path move counts between free cells."""
    adj = adjacency(grid)
    n = len(adj)
    rows = np.repeat(np.arange(n), [len(a) for a in adj])
    cols = np.fromiter((v for a in adj for v in a), dtype=np.int64, count=len(rows))
    graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    d = shortest_path(graph, method="D", unweighted=True, directed=False)
    d[np.isinf(d)] = INF
    out = d.astype(np.int64)
    out.setflags(write=False)
    return out


def shortest_path_cells(grid: GridMap, a, b) -> list[Cell]:
    """One shortest four-way path from ``a`` to ``b`` inclusive."""
    a, b = Cell(*a), Cell(*b)
    if a == b:
        return [a]
    parent = {a: None}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        for v in neighbors(grid, u):
            if v not in parent:
                parent[v] = u
                if v == b:
                    path = [v]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])
                    return path[::-1]
                queue.append(v)
    raise ValueError(f"no path between {tuple(a)} and {tuple(b)}")


def subgraph_bfs(starts: Iterable, neighbor_fn: Callable, allowed) -> set:
    """Cells of ``allowed`` reachable from ``starts`` while staying inside it."""
    queue = deque(starts)
    reached = set()
    while queue:
        s = queue.popleft()
        if s in reached or s not in allowed:
            continue
        reached.add(s)
        queue.extend(neighbor_fn(s))
    return reached


def subgraph_bfs_bits(adj, start_ids: Iterable[int], blocked: int) -> int:
    """Bitset form of :func:`subgraph_bfs`; ``blocked`` is the complement of C'."""
    reached = 0
    queue = deque(i for i in start_ids if not (blocked >> i) & 1)
    for i in queue:
        reached |= 1 << i
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            bit = 1 << v
            if not (reached | blocked) & bit:
                reached |= bit
                queue.append(v)
    return reached
