import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mwrp.grid import Cell, from_rows, generate_map
from mwrp.heuristics import (GdlsGraph, HeuristicContext, as_weight, build_gdls, minimax_f,
                             mtsp_f, mtsp_solve, pathmax, pivot_prune, select_pivots,
                             singleton_f)
from mwrp.search import reduce_problem
from mwrp.verify import sees
from mwrp.visibility import bits_of, build_visibility_index

sys.path.insert(0, str(Path(__file__).parent))
from oracle import brute_force_mtsp  # noqa: E402

# one agent and two hidden cells: nearest watchers 5 and 7 moves away, watcher sets 2 apart
TWO_ROWS = [".@...@@@",
             "......@@",
             ".@.@@..@",
             "@@@.....",
             "..@..@..",
             "......@@"]
TWO_AGENT, TWO_P1, TWO_P2 = Cell(4, 7), Cell(0, 0), Cell(4, 0)


@pytest.fixture(scope="module")
def two_targets():
    g = from_rows(TWO_ROWS)
    idx = build_visibility_index(g)
    ids = g.cell_ids
    ctx = HeuristicContext(g, idx, [ids[TWO_P1], ids[TWO_P2]])
    return g, idx, ctx, ids


def graph(costs, A, E, pivots=None):
    A = np.asarray(A)
    return GdlsGraph(list(costs), pivots or list(range(A.shape[1])), A, E)


def path_cost(g, k, order):
    if not order:
        return 0
    idx = [g.pivots.index(p) for p in order]
    return int(g.agent_pivot[k, idx[0]] + sum(g.pivot_pivot[a, b] for a, b in zip(idx, idx[1:])))


def test_as_weight():
    assert as_weight("3/2") == Fraction(3, 2)
    assert as_weight(1.2) == Fraction(6, 5)
    assert as_weight(2) == 2
    with pytest.raises(ValueError):
        as_weight("1/2")
    with pytest.raises(TypeError):
        as_weight(None)


def test_pathmax():
    assert pathmax(5, 7) == 7 and pathmax(7, 5) == 7


def test_singleton_two_targets(two_targets):
    g, idx, ctx, ids = two_targets
    a, p1, p2 = ids[TWO_AGENT], ids[TWO_P1], ids[TWO_P2]
    assert ctx.field(p1)[a] == 5 and ctx.field(p2)[a] == 7
    R = bits_of([p1, p2])
    assert singleton_f([a], [0], R, ctx) == 7
    assert singleton_f([a], [0], R, ctx, 2) == 14


def test_gdls_and_mtsp_two_targets(two_targets):
    g, idx, ctx, ids = two_targets
    a, p1, p2 = ids[TWO_AGENT], ids[TWO_P1], ids[TWO_P2]
    pivots = select_pivots(bits_of([p1, p2]), idx)
    assert sorted(pivots) == sorted([p1, p2])
    gd = build_gdls([a], [0], [p1, p2], ctx)
    assert gd.agent_pivot.tolist() == [[5, 7]]
    assert gd.pivot_pivot.tolist() == [[0, 2], [2, 0]]
    res = mtsp_solve(gd)
    assert res.f_value == 7 == brute_force_mtsp([0], [[5, 7]], [[0, 2], [2, 0]])
    assert res.assignment == [[p1, p2]]
    assert mtsp_solve(gd, 2).f_value == 14


def test_singleton_on_watcher(two_targets):
    g, idx, ctx, ids = two_targets
    p1 = ids[TWO_P1]
    assert singleton_f([p1], [3], bits_of([p1]), ctx) == 3


def test_singleton_edge_cases(two_targets):
    g, idx, ctx, ids = two_targets
    p1 = ids[TWO_P1]
    assert singleton_f([p1], [4], 0, ctx) == 4
    assert singleton_f([-1], [4], bits_of([p1]), ctx) > 10**6


def test_gdls_edges_symmetric():
    g = generate_map("room", 11, 11, 0.0, 5)
    idx = build_visibility_index(g)
    residual = bits_of(range(g.num_free))
    pivots = select_pivots(residual, idx)
    ctx = HeuristicContext(g, idx, pivots)
    gd = build_gdls([0, 5], [0, 0], pivots, ctx)
    for i, pi in enumerate(pivots):
        for j, pj in enumerate(pivots):
            other = int(ctx.field(pj)[ctx.watcher_ids[pi]].min())
            assert gd.pivot_pivot[i, j] == other
    assert (np.diag(gd.pivot_pivot) == 0).all()


def test_pivots_disjoint_between_rooms():
    g = generate_map("room", 11, 11, 0.0, 0)
    idx = build_visibility_index(g)
    pivots = select_pivots(bits_of(range(g.num_free)), idx)
    assert len(pivots) >= 2
    free = g.occupancy.tolist()
    cells = g.free_cells
    for i, a in enumerate(pivots):
        for b in pivots[i + 1:]:
            wa = {w for w in cells if sees(free, w, cells[a])}
            wb = {w for w in cells if sees(free, w, cells[b])}
            assert not wa & wb


def test_pivot_trivia():
    g = from_rows(["....", "...."])
    idx = build_visibility_index(g)
    assert select_pivots(bits_of([3]), idx) == [3]
    assert len(select_pivots(bits_of(range(8)), idx)) == 1
    many = generate_map("maze", 32, 32, 0.0, 1)
    midx = build_visibility_index(many)
    assert len(select_pivots(bits_of(range(many.num_free)), midx, cap=5)) == 5


def test_pivot_prune_raises_the_bound():
    g = graph([0], [[15, 5]], [[0, 2], [2, 0]], pivots=["p1", "p2"])
    assert mtsp_solve(g).f_value == 7
    pruned = pivot_prune(g)
    assert pruned.pivots == ["p1"]
    assert mtsp_solve(pruned).f_value == 15


def test_pivot_prune_can_lower_the_bound():
    # a-p1 4, a-p2 9, a-p3 5, p1-p2 5, p1-p3 9, p2-p3 2; p3 shortcuts a -> p2 by 9 - (5 + 2)
    g = graph([0], [[4, 9, 5]], [[0, 5, 9], [5, 0, 2], [9, 2, 0]], pivots=["p1", "p2", "p3"])
    assert mtsp_solve(g).f_value == 11
    pruned = pivot_prune(g)
    assert pruned.pivots == ["p1", "p2"]
    assert mtsp_solve(pruned).f_value == 9


def test_pivot_prune_single():
    g = graph([3], [[4]], [[0]])
    assert pivot_prune(g) is g


def test_mtsp_zero_pivots():
    res = mtsp_solve(graph([3, 8], np.zeros((2, 0), dtype=int), np.zeros((0, 0), dtype=int)))
    assert res.f_value == 8 and res.per_agent_h == [0, 0]


def test_mtsp_split_between_agents():
    g = graph([0, 0], [[1, 40], [40, 3]], [[0, 50], [50, 0]])
    res = mtsp_solve(g)
    assert res.f_value == 3
    assert res.assignment == [[0], [1]] and res.per_agent_h == [1, 3]


def test_mtsp_cap():
    P = 4
    g = graph([0], np.ones((1, P), dtype=int), np.ones((P, P), dtype=int) - np.eye(P, dtype=int))
    with pytest.raises(ValueError):
        mtsp_solve(g, cap=3)


def test_minimax_formula():
    assert minimax_f([50, 10], [0, 40], Fraction(6, 5)) == 58
    assert minimax_f([35, 45], [5, 10], Fraction(6, 5)) == 57


random_graphs = st.integers(1, 3).flatmap(lambda K: st.integers(0, 6).flatmap(lambda P: st.tuples(
    st.lists(st.integers(0, 12), min_size=K, max_size=K),
    st.lists(st.lists(st.integers(0, 12), min_size=P, max_size=P), min_size=K, max_size=K),
    st.lists(st.integers(1, 12), min_size=P * P, max_size=P * P),
    st.sampled_from([1, Fraction(3, 2), 2, Fraction(7, 3)]))))


@settings(max_examples=150, deadline=None)
@given(random_graphs)
def test_mtsp_matches_brute_force(case):
    costs, A, flat, w = case
    K, P = len(costs), len(A[0])
    E = np.array(flat, dtype=int).reshape(P, P)
    E = np.minimum(E, E.T)
    np.fill_diagonal(E, 0)
    g = graph(costs, np.array(A, dtype=int).reshape(K, P), E)
    res = mtsp_solve(g, w)
    assert res.f_value == brute_force_mtsp(costs, g.agent_pivot.tolist(), E.tolist(), w)
    # the returned assignment realises the value
    assert sorted(p for a in res.assignment for p in a) == list(range(P))
    realised = [path_cost(g, k, res.assignment[k]) for k in range(K)]
    assert realised == res.per_agent_h
    assert max(Fraction(c) + w * h for c, h in zip(costs, realised)) == res.f_value
    if w == 1:
        assert mtsp_solve(g, Fraction(1)).f_value == mtsp_solve(g).f_value


@settings(max_examples=60, deadline=None)
@given(random_graphs)
def test_pivot_prune_properties(case):
    costs, A, flat, _ = case
    K, P = len(costs), len(A[0])
    E = np.array(flat, dtype=int).reshape(P, P)
    E = np.minimum(E, E.T)
    np.fill_diagonal(E, 0)
    g = graph(costs, np.array(A, dtype=int).reshape(K, P), E)
    pruned = pivot_prune(g)
    assert set(pruned.pivots) <= set(g.pivots)
    assert len(pruned.pivots) >= min(P, 1)
    # no positive shortcut survives
    A2, E2 = pruned.agent_pivot, pruned.pivot_pivot
    n = len(pruned.pivots)
    for k in range(K):
        for i in range(n):
            for j in range(n):
                if i != j:
                    assert A2[k, j] - A2[k, i] - E2[i, j] <= 0


def test_root_heuristics_admissible(oracle_suite):
    for p, c_star in oracle_suite:
        g = p.map
        idx = build_visibility_index(g)
        reduced, _ = reduce_problem(p, idx)
        ctx = HeuristicContext(g, idx, reduced)
        locs = [g.cell_ids[s] for s in p.starts]
        seen = 0
        for loc in locs:
            seen |= idx.los_bits[loc]
        R = bits_of(reduced) & ~seen
        zero = [0] * len(locs)
        assert singleton_f(locs, zero, R, ctx) <= c_star
        for prune in (True, False):
            f, _ = mtsp_f(locs, zero, R, ctx, 1, prune)
            assert f <= c_star
        assert singleton_f(locs, zero, R, ctx, 1) == singleton_f(locs, zero, R, ctx, Fraction(1))
