"""Admissible makespan heuristics: Singleton and the pivot-graph mTSP bound.

Weights are exact :class:`fractions.Fraction` values ``p/q``. Internally every
weighted quantity ``g + w*h`` is handled as the integer ``q*g + p*h`` and only
converted back to a Fraction at the boundary, so priorities never depend on
floating-point rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Sequence

import numpy as np

from .grid import GridMap
from .visibility import INF, VisibilityIndex, adjacency, bfs_ids, iter_bits

PIVOT_CAP = 12
_BIG = 1 << 40  # unreachable DP entry; small enough that sums stay in int64

Number = int | Fraction


def as_weight(w) -> Fraction:
    """Parse a suboptimality weight: ``2``, ``1.5``, ``"3/2"`` or a Fraction."""
    if isinstance(w, str):
        w = Fraction(w.strip())
    elif isinstance(w, float):
        w = Fraction(w).limit_denominator(10_000)
    elif isinstance(w, Rational):
        w = Fraction(w)
    else:
        raise TypeError(f"cannot interpret {w!r} as a weight")
    if w < 1:
        raise ValueError(f"weight must be >= 1, got {w}")
    return w


def _norm(x: Fraction) -> Number:
    return int(x) if x.denominator == 1 else x


def pathmax(child_f, parent_f):
    return max(child_f, parent_f)


def minimax_f(g: Sequence[int], h: Sequence[int], w=1) -> Number:
    """``max_k(g_k + w * h_k)``."""
    w = as_weight(w)
    return _norm(max(Fraction(gk) + w * hk for gk, hk in zip(g, h)))


class HeuristicContext:
    """Distance data shared by every heuristic evaluation of one solve.

    ``fields[row]`` is the BFS distance from the watcher set of the
    ``row``-th reduced unseen cell to every free cell.
    """

    def __init__(self, grid: GridMap, index: VisibilityIndex, unseen_ids: Sequence[int],
                 pivot_cap: int = PIVOT_CAP):
        self.grid = grid
        self.index = index
        self.pivot_cap = pivot_cap
        self.unseen_ids = list(unseen_ids)
        n = grid.num_free
        adj = adjacency(grid)
        self.row_of = np.full(n, -1, dtype=np.int64)
        self.fields = np.empty((len(self.unseen_ids), n), dtype=np.int64)
        self.watcher_ids: dict[int, np.ndarray] = {}
        for row, s in enumerate(self.unseen_ids):
            w_ids = np.fromiter(iter_bits(index.watcher_bits[s]), dtype=np.int64)
            self.watcher_ids[s] = w_ids
            self.fields[row] = bfs_ids(adj, w_ids, n)
            self.row_of[s] = row
        self.fields.setflags(write=False)
        self.by_cell = np.ascontiguousarray(self.fields.T)  # by_cell[cell, row]
        self.watcher_count = {s: index.watcher_bits[s].bit_count() for s in self.unseen_ids}
        self._rows: dict[int, np.ndarray] = {}
        self._pair: dict[tuple[int, int], int] = {}

    def field(self, s: int) -> np.ndarray:
        return self.fields[self.row_of[s]]

    def rows(self, residual: int) -> np.ndarray:
        out = self._rows.get(residual)
        if out is None:
            if len(self._rows) > 50_000:
                self._rows.clear()
            out = self.row_of[np.fromiter(iter_bits(residual), dtype=np.int64)]
            self._rows[residual] = out
        return out

    def pair_distance(self, a: int, b: int) -> int:
        """Closest distance between the watcher sets of unseen cells ``a`` and ``b``."""
        key = (a, b) if a < b else (b, a)
        d = self._pair.get(key)
        if d is None:
            d = int(self.field(key[0])[self.watcher_ids[key[1]]].min())
            self._pair[key] = d
        return d


def singleton_f(locs: Sequence[int], costs: Sequence[int], residual: int,
                ctx: HeuristicContext, w=1) -> Number:
    """Max over residual cells of the cheapest (weighted) cost at which any live agent sees it.

    ``locs[k] < 0`` marks a terminated agent. The result never drops below
    the node cost ``max(costs)``.
    """
    g = max(costs)
    if not residual:
        return g
    live = [k for k, loc in enumerate(locs) if loc >= 0]
    if not live:
        return INF
    w = as_weight(w)
    p, q = w.numerator, w.denominator
    block = ctx.by_cell[[locs[k] for k in live]][:, ctx.rows(residual)]  # (agent, cell)
    scaled = q * np.asarray([costs[k] for k in live], dtype=np.int64)[:, None] + p * block
    best = int(scaled.min(axis=0).max())
    if q == 1:
        return max(best, g)
    return _norm(max(Fraction(best, q), Fraction(g)))


def select_pivots(residual: int, index: VisibilityIndex, cap: int = PIVOT_CAP,
                  watcher_count=None) -> list[int]:
    """Greedy watcher-disjoint pivots, fewest watchers first (ties by cell id)."""
    wb = index.watcher_bits
    if watcher_count is None:
        key = lambda s: (wb[s].bit_count(), s)  # noqa: E731
    else:
        key = lambda s: (watcher_count[s], s)  # noqa: E731
    pivots, taken = [], 0
    for s in sorted(iter_bits(residual), key=key):
        if wb[s] & taken == 0:
            pivots.append(s)
            taken |= wb[s]
    return pivots[:cap]


@dataclass
class GdlsGraph:
    """Agent/pivot graph with lower-bound edge costs.

    ``agent_pivot[k, j]`` is the distance from agent ``k`` to the nearest
    watcher of pivot ``j``; ``pivot_pivot[i, j]`` the closest distance between
    the two pivots' watcher sets.
    """

    agent_costs: list[int]
    pivots: list[int]
    agent_pivot: np.ndarray
    pivot_pivot: np.ndarray
    agents: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.agent_pivot = np.asarray(self.agent_pivot, dtype=np.int64).reshape(
            len(self.agent_costs), len(self.pivots))
        self.pivot_pivot = np.asarray(self.pivot_pivot, dtype=np.int64).reshape(
            len(self.pivots), len(self.pivots))
        if not self.agents:
            self.agents = list(range(len(self.agent_costs)))

    @property
    def num_pivots(self) -> int:
        return len(self.pivots)

    def without(self, j: int) -> "GdlsGraph":
        keep = [i for i in range(self.num_pivots) if i != j]
        return GdlsGraph(list(self.agent_costs), [self.pivots[i] for i in keep],
                         self.agent_pivot[:, keep], self.pivot_pivot[np.ix_(keep, keep)],
                         list(self.agents))


def build_gdls(locs: Sequence[int], costs: Sequence[int], pivots: Sequence[int],
               ctx: HeuristicContext) -> GdlsGraph:
    live = [k for k, loc in enumerate(locs) if loc >= 0]
    P = len(pivots)
    rows = ctx.row_of[list(pivots)]
    agent_pivot = ctx.fields[rows][:, [locs[k] for k in live]].T
    pivot_pivot = np.zeros((P, P), dtype=np.int64)
    for i in range(P):
        for j in range(i + 1, P):
            pivot_pivot[i, j] = pivot_pivot[j, i] = ctx.pair_distance(pivots[i], pivots[j])
    return GdlsGraph([costs[k] for k in live], list(pivots), agent_pivot, pivot_pivot, live)


def pivot_prune(g: GdlsGraph) -> GdlsGraph:
    """Repeatedly drop the pivot that offers the largest positive shortcut.

    The shortcut of pivot ``i`` towards pivot ``j`` for agent ``k`` is
    ``e(k, j) - (e(k, i) + e(i, j))``; ties go to the lowest pivot index.
    """
    P = g.num_pivots
    if P < 2 or not len(g.agent_costs):
        return g
    A, E = g.agent_pivot, g.pivot_pivot
    # edge costs do not change when a pivot goes, so the shortcut table is
    # computed once and removed pivots are masked out
    s = (A[:, None, :] - A[:, :, None] - E[None, :, :]).max(axis=0)  # s[i, j]
    low = np.iinfo(np.int64).min
    s[np.arange(P), np.arange(P)] = low
    keep = list(range(P))
    while len(keep) > 1:
        per_i = s.max(axis=1)
        i = int(np.argmax(per_i))
        if per_i[i] <= 0:
            break
        keep.remove(i)
        s[i, :] = low
        s[:, i] = low
    if len(keep) == P:
        return g
    return GdlsGraph(list(g.agent_costs), [g.pivots[i] for i in keep], A[:, keep],
                     E[np.ix_(keep, keep)], list(g.agents))


@dataclass
class MtspResult:
    f_value: Number
    per_agent_h: list[int]
    assignment: list[list[int]]


@lru_cache(maxsize=None)
def _submask_pairs(P: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All (S, T) with T a submask of S, grouped by S; plus each group's offset."""
    n = 3 ** P
    digits = (np.arange(n)[:, None] // (3 ** np.arange(P))[None, :]) % 3
    bits = 1 << np.arange(P)
    S = ((digits > 0) * bits).sum(axis=1)
    T = ((digits == 2) * bits).sum(axis=1)
    order = np.lexsort((T, S))
    S, T = S[order], T[order]
    offsets = np.flatnonzero(np.r_[True, S[1:] != S[:-1]])
    return S, T, offsets


@lru_cache(maxsize=None)
def _layers(P: int) -> list[np.ndarray]:
    masks = np.arange(1 << P)
    pop = np.array([bin(m).count("1") for m in masks])
    return [masks[pop == k] for k in range(P + 1)]


def open_path_costs(agent_pivot: np.ndarray, pivot_pivot: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Held-Karp over pivot subsets for every agent at once.

    Returns ``dp[k, mask, j]`` (cheapest open path from agent ``k`` through
    ``mask`` ending at pivot ``j``) and ``cost[k, mask] = min_j dp[k, mask, j]``
    with ``cost[k, 0] = 0``.
    """
    K, P = agent_pivot.shape
    dp = np.full((K, 1 << P, P), _BIG, dtype=np.int64)
    for j in range(P):
        dp[:, 1 << j, j] = agent_pivot[:, j]
    layers = _layers(P)
    bits = 1 << np.arange(P)
    Et = pivot_pivot.T[None, None, :, :]  # Et[..., j, i] = E[i, j]
    for size in range(2, P + 1):
        tgt = layers[size]
        member = (tgt[:, None] & bits[None, :]) != 0          # (L, j)
        prev = tgt[:, None] ^ bits[None, :]                     # drop j from the mask
        # dp[k, T, j] = min_i dp[k, T - j, i] + E[i, j]
        cand = (dp[:, prev, :] + Et).min(axis=3)                # (K, L, j)
        dp[:, tgt, :] = np.where(member[None], cand, _BIG)
    cost = dp.min(axis=2) if P else np.zeros((K, 1), dtype=np.int64)
    cost[:, 0] = 0
    return dp, cost


def _tour(dp_k: np.ndarray, E: np.ndarray, mask: int) -> list[int]:
    order = []
    if not mask:
        return order
    last = int(np.argmin(dp_k[mask]))
    while True:
        order.append(last)
        prev = mask ^ (1 << last)
        if not prev:
            break
        target = dp_k[mask, last]
        for i in iter_bits(prev):
            if dp_k[prev, i] + E[i, last] == target:
                mask, last = prev, i
                break
    return order[::-1]


def mtsp_solve(g: GdlsGraph, w=1, cap: int = PIVOT_CAP) -> MtspResult:
    """Exact min-max open-path mTSP on a pivot graph.

    Minimises ``max_k(g_k + w * h_k)`` over all splits of the pivots among
    the agents and all visiting orders, where ``h_k`` is agent ``k``'s open
    path length. Per-agent subset costs come from Held-Karp and the split is
    a subset-partition DP over agents.
    """
    w = as_weight(w)
    p, q = w.numerator, w.denominator
    K, P = len(g.agent_costs), g.num_pivots
    if K == 0:
        raise ValueError("mTSP needs at least one agent")
    if P > cap:
        raise ValueError(f"{P} pivots exceed the cap of {cap}")
    if P == 0:
        return MtspResult(max(g.agent_costs), [0] * K, [[] for _ in range(K)])
    dp, cost = open_path_costs(g.agent_pivot, g.pivot_pivot)
    values = q * np.asarray(g.agent_costs, dtype=np.int64)[:, None] + p * cost
    S, T, offsets = _submask_pairs(P)
    tables = [values[0]]
    for k in range(1, K):
        prev = tables[-1]
        tables.append(np.minimum.reduceat(np.maximum(prev[S ^ T], values[k][T]), offsets))
    full = (1 << P) - 1
    # walk back from the last agent, giving it the smallest optimal share
    shares = [0] * K
    remaining = full
    for k in range(K - 1, 0, -1):
        target = tables[k][remaining]
        sub = remaining
        candidates = []
        while True:
            if max(tables[k - 1][remaining ^ sub], values[k][sub]) == target:
                candidates.append(sub)
            if sub == 0:
                break
            sub = (sub - 1) & remaining
        shares[k] = min(candidates)
        remaining ^= shares[k]
    shares[0] = remaining
    per_h = [int(cost[k, shares[k]]) for k in range(K)]
    assignment = [[g.pivots[j] for j in _tour(dp[k], g.pivot_pivot, shares[k])] for k in range(K)]
    return MtspResult(_norm(Fraction(int(tables[-1][full]), q)), per_h, assignment)


def mtsp_f(locs: Sequence[int], costs: Sequence[int], residual: int, ctx: HeuristicContext,
           w=1, prune: bool = True) -> tuple[Number, list[int]]:
    """Full mTSP evaluation of a node: pivots, graph, optional pruning, solve.

    Returns the (weighted) f-value, never below ``max(costs)``, and per-agent
    remaining path lengths (0 for terminated agents).
    """
    g_max = max(costs)
    h = [0] * len(locs)
    if not residual:
        return g_max, h
    pivots = select_pivots(residual, ctx.index, ctx.pivot_cap, ctx.watcher_count)
    graph = build_gdls(locs, costs, pivots, ctx)
    if not graph.agents:
        return INF, h
    if prune:
        graph = pivot_prune(graph)
    res = mtsp_solve(graph, w, ctx.pivot_cap)
    for k, hk in zip(graph.agents, res.per_agent_h):
        h[k] = hk
    return max(res.f_value, g_max), h
