"""Pruning of the unseen set by cell dominance and path dominance.

Both passes drop cells that any solution is bound to see anyway, so the
optimal makespan over the reduced set equals the one over the input set.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable

from .grid import Cell, GridMap
from .visibility import VisibilityIndex, adjacency, subgraph_bfs_bits


@dataclass(frozen=True)
class ReductionStats:
    initial_size: int
    after_cd: int
    after_pd: int
    cd_ms: float = 0.0
    pd_ms: float = 0.0

    @property
    def reduction_pct(self) -> float:
        if not self.initial_size:
            return 0.0
        return 100.0 * (self.initial_size - self.after_pd) / self.initial_size

    def to_dict(self) -> dict:
        return {"initial": self.initial_size, "after_cd": self.after_cd,
                "after_pd": self.after_pd, "cd_ms": round(self.cd_ms, 3),
                "pd_ms": round(self.pd_ms, 3)}


def _ids(cells: Iterable, index: VisibilityIndex) -> list[int]:
    ids = index.cell_ids
    return sorted(ids[Cell(*c)] for c in cells)


def cell_dominance_ids(unseen: list[int], watcher_bits: list[int]) -> list[int]:
    alive = dict.fromkeys(unseen)  # ordered live set
    for si in list(alive):
        if si not in alive:
            continue
        wi = watcher_bits[si]
        for sj in list(alive):
            if sj != si and wi & ~watcher_bits[sj] == 0:
                del alive[sj]
    return list(alive)


def cell_dominance(unseen: Iterable, index: VisibilityIndex) -> set[Cell]:
    """Drop every cell whose watcher set contains another live cell's watcher set."""
    keep = cell_dominance_ids(_ids(unseen, index), index.watcher_bits)
    return {index.cells[i] for i in keep}


def path_dominance_order(unseen: list[int], watcher_bits: list[int]) -> list[int]:
    """Scan order used by path dominance: most watchers first, ties reverse row-major.

    Cells that cell dominance keeps (fewest watchers, earliest in row-major
    order) are therefore scanned after every cell they dominate, which makes
    the cells pruned by cell dominance a subset of those pruned here.
    """
    return sorted(unseen, key=lambda i: (-watcher_bits[i].bit_count(), -i))


def path_dominance_ids(unseen: list[int], start_ids: list[int], adj,
                       watcher_bits: list[int]) -> list[int]:
    alive = set(unseen)
    for sj in path_dominance_order(unseen, watcher_bits):
        reach = subgraph_bfs_bits(adj, start_ids, watcher_bits[sj])
        for si in alive:
            if si != sj and watcher_bits[si] & reach == 0:
                alive.discard(sj)
                break
    return sorted(alive)


def path_dominance(unseen: Iterable, starts: Iterable, grid: GridMap,
                   index: VisibilityIndex) -> set[Cell]:
    """Drop cells that every start-anchored route must see on its way to another cell.

    For each candidate ``s_j`` the flood fill from the starts avoids all
    watchers of ``s_j``; if some other live cell has no watcher inside the
    filled region, ``s_j`` is redundant.
    """
    ids = index.cell_ids
    keep = path_dominance_ids(_ids(unseen, index), sorted({ids[Cell(*s)] for s in starts}),
                              adjacency(grid), index.watcher_bits)
    return {index.cells[i] for i in keep}


def cpd_ids(unseen: list[int], start_ids: list[int], grid: GridMap, index: VisibilityIndex,
            enable_cd: bool = True, enable_pd: bool = True) -> tuple[list[int], ReductionStats]:
    t0 = time.perf_counter()
    after_cd = cell_dominance_ids(unseen, index.watcher_bits) if enable_cd else list(unseen)
    t1 = time.perf_counter()
    after_pd = (path_dominance_ids(after_cd, start_ids, adjacency(grid), index.watcher_bits)
                if enable_pd else list(after_cd))
    t2 = time.perf_counter()
    stats = ReductionStats(len(unseen), len(after_cd), len(after_pd),
                           (t1 - t0) * 1e3, (t2 - t1) * 1e3)
    return after_pd, stats


def cpd(unseen: Iterable, starts: Iterable, grid: GridMap,
        index: VisibilityIndex) -> tuple[set[Cell], ReductionStats]:
    """Cell dominance followed by path dominance on its output."""
    ids = index.cell_ids
    keep, stats = cpd_ids(_ids(unseen, index), sorted({ids[Cell(*s)] for s in starts}),
                          grid, index)
    return {index.cells[i] for i in keep}, stats


def initial_unseen_ids(unseen: Iterable, starts: Iterable, index: VisibilityIndex) -> list[int]:
    """Unseen cell ids that no start location can already see."""
    ids = index.cell_ids
    seen = 0
    for s in starts:
        seen |= index.los_bits[ids[Cell(*s)]]
    return [i for i in _ids(unseen, index) if not (seen >> i) & 1]
