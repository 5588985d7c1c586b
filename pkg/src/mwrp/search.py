"""Joint-space best-first search for the multiple watchman route problem.

One engine covers the optimal solvers (``baseline`` and ``cp3``), minimax
weighted A* (``mxw``) and focal search ordered by the sum (``focal_sorc``) or
max (``focal_morc``) of the per-agent mTSP path lengths, each optionally in
anytime mode.

Search nodes hold one jump location per agent (``-1`` once the agent has
terminated), the agents' accumulated move counts and the residual set of
reduced unseen cells as an int bitset. Heuristics are evaluated lazily: a
node enters OPEN with its Singleton value and is upgraded to the mTSP value
the first time it reaches the front.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .grid import Cell, ProblemInstance
from .heuristics import (PIVOT_CAP, HeuristicContext, Number, as_weight, mtsp_f, pathmax,
                         singleton_f)
from .reduction import ReductionStats, cpd_ids, initial_unseen_ids
from .visibility import (VisibilityIndex, adjacency, all_pairs_distances, build_visibility_index,
                         shortest_path_cells)

log = logging.getLogger(__name__)

ALGORITHMS = ("baseline", "cp3", "mxw", "focal_sorc", "focal_morc")
TERMINATED = -1
SINGLETON, MTSP, EXPANDED = 0, 1, 2
KEEP, PRUNE = True, False


class SearchTimeout(Exception):
    pass


@dataclass
class SolverConfig:
    """Algorithm choice and switches.

    ``None`` for the enhancement switches and ``batch_size`` means "the
    algorithm's default": everything off and batch size 1 for ``baseline``,
    everything on and batch size 100 otherwise.
    """

    algorithm: str = "cp3"
    weight: Fraction = Fraction(1)
    anytime: bool = False
    batch_size: int | None = None
    pivot_cap: int = PIVOT_CAP
    enable_cd: bool | None = None
    enable_pd: bool | None = None
    enable_pivot_prune: bool | None = None
    enable_dominance: bool = True
    time_limit: float | None = None
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        self.algorithm = self.algorithm.replace("-", "_").lower()
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        self.weight = as_weight(self.weight)
        default = self.algorithm != "baseline"
        for name in ("enable_cd", "enable_pd", "enable_pivot_prune"):
            if getattr(self, name) is None:
                setattr(self, name, default)
        if self.batch_size is None:
            self.batch_size = 100 if default else 1
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.pivot_cap < 1:
            raise ValueError("pivot_cap must be >= 1")

    @property
    def optimal(self) -> bool:
        return self.algorithm in ("baseline", "cp3")

    @property
    def focal(self) -> bool:
        return self.algorithm.startswith("focal")

    @property
    def search_weight(self) -> Fraction:
        """Weight folded into the priority (only MxW* weights its f-values)."""
        return self.weight if self.algorithm == "mxw" else Fraction(1)

    @property
    def bound(self) -> Fraction:
        return Fraction(1) if self.optimal else self.weight

    def to_dict(self) -> dict:
        d = asdict(self)
        d["weight"] = str(self.weight)
        return d


class SearchNode:
    __slots__ = ("locs", "costs", "residual", "f", "stage", "parent", "h", "g", "closed")

    def __init__(self, locs, costs, residual, parent=None):
        self.locs = tuple(locs)
        self.costs = tuple(costs)
        self.residual = residual
        self.parent = parent
        self.g = max(self.costs)
        self.f: Number = 0
        self.stage = SINGLETON
        self.h: list[int] | None = None
        self.closed = False

    @property
    def is_goal(self) -> bool:
        return not self.residual

    def __repr__(self):
        return (f"SearchNode(locs={self.locs}, costs={self.costs}, |R|={self.residual.bit_count()}, "
                f"f={self.f}, stage={self.stage})")


class _Bucket:
    __slots__ = ("res", "costs", "nodes", "alive", "n")

    def __init__(self, words: int, agents: int):
        self.res = np.empty((8, words), dtype=np.uint64)
        self.costs = np.empty((8, agents), dtype=np.int64)
        self.nodes: list[SearchNode] = []
        self.alive = np.zeros(8, dtype=bool)
        self.n = 0

    def append(self, r, c, node):
        if self.n == self.res.shape[0]:
            self._grow()
        i = self.n
        self.res[i], self.costs[i], self.alive[i] = r, c, True
        self.nodes.append(node)
        self.n += 1

    def _grow(self):
        keep = np.flatnonzero(self.alive[:self.n])
        size = max(8, 2 * len(keep))
        res = np.empty((size, self.res.shape[1]), dtype=np.uint64)
        costs = np.empty((size, self.costs.shape[1]), dtype=np.int64)
        res[:len(keep)], costs[:len(keep)] = self.res[keep], self.costs[keep]
        alive = np.zeros(size, dtype=bool)
        alive[:len(keep)] = True
        self.res, self.costs, self.alive = res, costs, alive
        self.nodes = [self.nodes[i] for i in keep]
        self.n = len(keep)


class DominanceStore:
    """Per location tuple, the non-dominated (residual, costs) records seen so far.

    Residual bitsets are stored as rows of 64-bit words so that a whole
    bucket is compared against a newcomer in a few array operations.
    """

    def __init__(self, nbits: int):
        self.words = max(1, -(-nbits // 64))
        self.records: dict[tuple, _Bucket] = {}
        self.prunes = 0

    def _row(self, residual: int) -> np.ndarray:
        return np.frombuffer(residual.to_bytes(8 * self.words, "little"), dtype=np.uint64)

    def check(self, node: SearchNode) -> bool:
        r = self._row(node.residual)
        c = np.asarray(node.costs, dtype=np.int64)
        bucket = self.records.get(node.locs)
        if bucket is None:
            bucket = self.records[node.locs] = _Bucket(self.words, len(c))
        elif bucket.n:
            n = bucket.n
            res, costs, alive = bucket.res[:n], bucket.costs[:n], bucket.alive[:n]
            inner = ~(res & ~r).any(axis=1) & (costs <= c).all(axis=1) & alive
            if inner.any():
                self.prunes += 1
                return PRUNE
            outer = ~(r & ~res).any(axis=1) & (costs >= c).all(axis=1) & alive
            for i in np.flatnonzero(outer):
                bucket.nodes[i].closed = True  # dominated by the newcomer; skip when popped
                bucket.alive[i] = False
        bucket.append(r, c, node)
        return KEEP


def dominance_check(store: DominanceStore, node: SearchNode) -> bool:
    return store.check(node)


def make_root(problem: ProblemInstance, index: VisibilityIndex, reduced_ids: Sequence[int]) -> SearchNode:
    ids = index.cell_ids
    locs = [ids[s] for s in problem.starts]
    seen = 0
    for loc in locs:
        seen |= index.los_bits[loc]
    residual = 0
    for i in reduced_ids:
        residual |= 1 << i
    return SearchNode(locs, [0] * len(locs), residual & ~seen)


def border_states(loc: int, residual: int, adj, los_bits: list[int]) -> list[int]:
    """Expanding-borders successor locations of one agent.

    Flood fill from ``loc`` through cells that see no residual cell; the
    first cells reached that do see one are the successor locations.
    """
    found = []
    visited = {loc}
    queue = deque([loc])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v in visited:
                continue
            visited.add(v)
            if los_bits[v] & residual:
                found.append(v)
            else:
                queue.append(v)
    return sorted(found)


def expand(node: SearchNode, index: VisibilityIndex, dist) -> list[SearchNode]:
    """Joint successors: each live agent jumps to a border cell or terminates."""
    adj = adjacency(index.grid)
    los = index.los_bits
    R = node.residual
    options = []
    for loc, cost in zip(node.locs, node.costs):
        if loc == TERMINATED:
            options.append(((TERMINATED, cost),))
            continue
        row = dist[loc]
        opts = [(w, cost + int(row[w])) for w in border_states(loc, R, adj, los)]
        opts.append((TERMINATED, cost))
        options.append(opts)
    children = []
    for combo in itertools.product(*options):
        moved = [w for w, _ in combo if w != TERMINATED]
        if not moved:
            continue
        seen = 0
        for w in moved:
            seen |= los[w]
        children.append(SearchNode([w for w, _ in combo], [c for _, c in combo], R & ~seen, node))
    return children


def prune_anytime(node: SearchNode, w, incumbent, focal: bool = False) -> bool:
    """Incumbent-based pruning for the anytime variants.

    MxW*: prune when ``max(f / w, g) >= B``. Focal: prune when the
    admissible ``f >= B``.
    """
    if incumbent is None:
        return KEEP
    if focal:
        return PRUNE if node.f >= incumbent else KEEP
    return PRUNE if max(Fraction(node.f) / as_weight(w), node.g) >= incumbent else KEEP


def focal_key(node: SearchNode, algorithm: str) -> int:
    h = node.h or [0]
    return sum(h) if algorithm == "focal_sorc" else max(h)


@dataclass
class Solution:
    """Per-agent cell paths plus bookkeeping from the run that produced them."""

    paths: list[list[Cell]]
    makespan: int
    costs: list[int]
    starts: list[Cell]
    algorithm: str
    config: dict
    stats: dict = field(default_factory=dict)
    anytime_trace: list[dict] = field(default_factory=list)
    status: str = "solved"
    proved_optimal: bool = False

    @property
    def num_agents(self) -> int:
        return len(self.paths)


class _Search:
    def __init__(self, problem: ProblemInstance, config: SolverConfig, index: VisibilityIndex,
                 reduced: list[int], rstats: ReductionStats):
        self.problem = problem
        self.config = config
        self.index = index
        self.ctx = HeuristicContext(problem.map, index, reduced, config.pivot_cap)
        self.dist = all_pairs_distances(problem.map)
        self.store = DominanceStore(problem.map.num_free)
        self.rstats = rstats
        self.w = config.search_weight
        self.plain = self.w == 1
        self.counter = itertools.count()
        self.stats = dict(expansions=0, generated=0, mtsp_calls=0, batches=0, anytime_prunes=0)
        self.incumbent: SearchNode | None = None
        self.trace: list[dict] = []
        self.t0 = time.perf_counter()
        self.deadline = None if config.time_limit is None else self.t0 + config.time_limit
        self.pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None

    # -- heuristic evaluation -------------------------------------------------

    def evaluate_singleton(self, node: SearchNode) -> None:
        if node.is_goal:
            node.f = node.g
            node.stage = MTSP
            node.h = [0] * len(node.locs)
            return
        f = singleton_f(node.locs, node.costs, node.residual, self.ctx, self.w)
        if self.plain and node.parent is not None:
            f = pathmax(f, node.parent.f)
        node.f = f

    def _mtsp(self, node: SearchNode):
        return mtsp_f(node.locs, node.costs, node.residual, self.ctx, self.w,
                      self.config.enable_pivot_prune)

    def evaluate_mtsp(self, nodes: list[SearchNode]) -> None:
        todo = [n for n in nodes if n.stage == SINGLETON]
        if not todo:
            return
        self.stats["batches"] += 1
        self.stats["mtsp_calls"] += len(todo)
        results = list(self.pool.map(self._mtsp, todo)) if self.pool else [self._mtsp(n) for n in todo]
        for node, (f, h) in zip(todo, results):
            node.f = max(f, node.f)
            node.h = h
            node.stage = MTSP

    # -- helpers --------------------------------------------------------------

    def entry(self, node: SearchNode):
        return (node.f, -node.g, -next(self.counter), node)

    def check_time(self):
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise SearchTimeout

    def record(self, node: SearchNode) -> None:
        self.incumbent = node
        self.trace.append({"t_ms": round((time.perf_counter() - self.t0) * 1e3, 3), "cost": node.g})
        log.debug("incumbent %d after %d expansions", node.g, self.stats["expansions"])

    def bound_value(self):
        return None if self.incumbent is None else self.incumbent.g

    def children(self, node: SearchNode) -> list[SearchNode]:
        node.stage = EXPANDED
        self.stats["expansions"] += 1
        out = []
        for child in expand(node, self.index, self.dist):
            self.stats["generated"] += 1
            if self.config.enable_dominance and self.store.check(child) is PRUNE:
                continue
            self.evaluate_singleton(child)
            out.append(child)
        return out

    # -- best-first (A*, MxW*) --------------------------------------------------

    def batch_evaluate(self, open_list: list) -> None:
        popped, batch = [], []
        while open_list and len(popped) < self.config.batch_size:
            item = heapq.heappop(open_list)
            if item[-1].closed:
                continue
            popped.append(item)
            if item[-1].stage == SINGLETON:
                batch.append(item[-1])
        self.evaluate_mtsp(batch)
        fresh = {id(n) for n in batch}
        for item in popped:
            node = item[-1]
            heapq.heappush(open_list, self.entry(node) if id(node) in fresh else item)

    def run_best_first(self, root: SearchNode) -> bool:
        anytime = self.config.anytime and not self.config.optimal
        open_list = [self.entry(root)]
        while open_list:
            self.check_time()
            node = open_list[0][-1]
            if node.closed:
                heapq.heappop(open_list)
                continue
            if anytime and prune_anytime(node, self.w, self.bound_value()) is PRUNE:
                heapq.heappop(open_list)
                self.stats["anytime_prunes"] += 1
                continue
            if node.stage == SINGLETON:
                self.batch_evaluate(open_list)
                continue
            heapq.heappop(open_list)
            node.closed = True
            if node.is_goal:
                self.record(node)
                if not anytime:
                    return self.config.optimal
                continue
            for child in self.children(node):
                if anytime and prune_anytime(child, self.w, self.bound_value()) is PRUNE:
                    self.stats["anytime_prunes"] += 1
                    continue
                heapq.heappush(open_list, self.entry(child))
        return self.incumbent is not None

    # -- focal search -----------------------------------------------------------

    def run_focal(self, root: SearchNode) -> bool:
        anytime = self.config.anytime
        w = self.config.weight
        open_all = []   # every open node by plain f, for f_min
        waiting = []    # open nodes not yet admitted to FOCAL, by f
        focal = []      # admitted nodes by (h_focal, f, -g, LIFO)

        def push(node):
            e = self.entry(node)
            heapq.heappush(open_all, e)
            heapq.heappush(waiting, e)

        def live(e):
            n = e[-1]
            return not n.closed and n.f == e[0]

        def front():
            while open_all and not live(open_all[0]):
                heapq.heappop(open_all)
            return open_all[0][0] if open_all else None

        push(root)
        while True:
            self.check_time()
            f_min = front()
            if f_min is None:
                return self.incumbent is not None
            B = self.bound_value()
            if B is not None and f_min >= B:
                self.stats["anytime_prunes"] += len(open_all)
                return True
            self.maintain_focal(waiting, focal, w * f_min, B if anytime else None, push)
            if front() != f_min:
                continue  # upgrades raised f_min; recompute the bound
            node = None
            while focal:
                cand = heapq.heappop(focal)[-1]
                if cand.closed:
                    continue
                if B is not None and cand.f >= B:
                    cand.closed = True
                    self.stats["anytime_prunes"] += 1
                    continue
                node = cand
                break
            if node is None:
                continue
            node.closed = True
            if node.is_goal:
                self.record(node)
                if not anytime:
                    return False
                continue
            B = self.bound_value()
            for child in self.children(node):
                if anytime and prune_anytime(child, w, B, focal=True) is PRUNE:
                    self.stats["anytime_prunes"] += 1
                    continue
                push(child)

    def maintain_focal(self, waiting: list, focal: list, limit, incumbent, push) -> None:
        """Admit open nodes with ``f <= limit`` (and ``f < incumbent``) into FOCAL.

        Singleton-stage nodes inside the limit are first upgraded to their
        mTSP value in batches and pushed back to OPEN.
        """
        algo = self.config.algorithm
        upgrade = []
        while waiting and waiting[0][0] <= limit:
            item = heapq.heappop(waiting)
            node = item[-1]
            if node.closed or node.f != item[0]:
                continue
            if incumbent is not None and node.f >= incumbent:
                node.closed = True
                self.stats["anytime_prunes"] += 1
                continue
            if node.stage == SINGLETON:
                upgrade.append(node)
                continue
            heapq.heappush(focal, (focal_key(node, algo), node.f, -node.g,
                                   -next(self.counter), node))
        n = self.config.batch_size
        for lo in range(0, len(upgrade), n):
            self.evaluate_mtsp(upgrade[lo:lo + n])
        for node in upgrade:
            push(node)

    # -- result ----------------------------------------------------------------

    def solution(self, status: str, proved: bool) -> Solution:
        cells = self.index.cells
        M = self.problem.num_agents
        node = self.incumbent
        if node is None:
            paths = [[s] for s in self.problem.starts]
            status = "no_solution"
        else:
            chain = []
            while node is not None:
                chain.append(node)
                node = node.parent
            chain.reverse()
            jumps = [[chain[0].locs[k]] for k in range(M)]
            for n in chain[1:]:
                for k, loc in enumerate(n.locs):
                    if loc != TERMINATED and loc != jumps[k][-1]:
                        jumps[k].append(loc)
            paths = []
            for k in range(M):
                path = [cells[jumps[k][0]]]
                for a, b in zip(jumps[k], jumps[k][1:]):
                    path.extend(shortest_path_cells(self.problem.map, cells[a], cells[b])[1:])
                paths.append(path)
            for k in range(M):
                assert len(paths[k]) - 1 == self.incumbent.costs[k], "path stitching lost cost"
        costs = [len(p) - 1 for p in paths]
        stats = dict(self.stats)
        stats["dominance_prunes"] = self.store.prunes
        stats["reduction"] = self.rstats.to_dict()
        stats["runtime_ms"] = round((time.perf_counter() - self.t0) * 1e3, 3)
        return Solution(paths, max(costs), costs, list(self.problem.starts), self.config.algorithm,
                        self.config.to_dict(), stats, list(self.trace), status, proved)

    def close(self):
        if self.pool:
            self.pool.shutdown()


def priority(node: SearchNode, ctx: HeuristicContext, config: SolverConfig, prune: bool | None = None) -> Number:
    """f-value of ``node`` at its current evaluation stage.

    Optimal and focal algorithms use the plain admissible value; MxW* uses
    the weighted minimax value. Plain values are pathmax-ed with the parent.
    """
    w = config.search_weight
    if prune is None:
        prune = config.enable_pivot_prune
    if node.stage == SINGLETON:
        f = singleton_f(node.locs, node.costs, node.residual, ctx, w)
    else:
        f, _ = mtsp_f(node.locs, node.costs, node.residual, ctx, w, prune)
    if w == 1 and node.parent is not None:
        f = pathmax(f, node.parent.f)
    return f


def reduce_problem(problem: ProblemInstance, index: VisibilityIndex,
                   enable_cd: bool = True, enable_pd: bool = True) -> tuple[list[int], ReductionStats]:
    """Initial unseen set (minus what the starts see) pruned by CD and PD."""
    ids = index.cell_ids
    start_ids = sorted({ids[s] for s in problem.starts})
    u0 = initial_unseen_ids(problem.unseen, problem.starts, index)
    return cpd_ids(u0, start_ids, problem.map, index, enable_cd, enable_pd)


def solve(problem: ProblemInstance, config: SolverConfig | None = None,
          index: VisibilityIndex | None = None) -> Solution:
    """Solve ``problem`` with the algorithm selected by ``config``.

    On timeout the best solution found so far is returned with status
    ``"timeout"``; with none found the status is ``"no_solution"`` and each
    path is just the agent's start.
    """
    config = config or SolverConfig()
    if index is None:
        index = build_visibility_index(problem.map)
    reduced, rstats = reduce_problem(problem, index, config.enable_cd, config.enable_pd)
    search = _Search(problem, config, index, reduced, rstats)
    root = make_root(problem, index, reduced)
    search.evaluate_singleton(root)
    timed_out = proved = False
    try:
        # True once optimality is established: an A* goal pop or an exhausted anytime OPEN
        proved = search.run_focal(root) if config.focal else search.run_best_first(root)
    except SearchTimeout:
        timed_out = True
    finally:
        search.close()
    proved = bool(proved) and search.incumbent is not None
    if timed_out:
        status = "timeout"
    else:
        status = "optimal" if proved else "solved"
    return search.solution(status, proved)
