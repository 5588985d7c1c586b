import dataclasses

import pytest

from mwrp.grid import Cell, ProblemInstance, from_rows, generate_map, sample_border_starts
from mwrp.postprocess import Responsibility, extract_responsibility, improve
from mwrp.search import Solution, SolverConfig, solve
from mwrp.verify import check, sees
from mwrp.visibility import build_visibility_index, shortest_path_cells


def valid(problem, sol):
    return check(problem.map.occupancy.tolist(), problem.starts, sol.paths).valid


def hand_solution(problem, paths):
    costs = [len(p) - 1 for p in paths]
    return Solution(paths, max(costs), costs, list(problem.starts), "manual", {})


def independent_responsibility(problem, paths, agent):
    free = problem.map.occupancy.tolist()
    watch = list(problem.starts) + [c for k, p in enumerate(paths) if k != agent for c in p]
    return {u for u in problem.unseen if not any(sees(free, w, u) for w in watch)}


def test_empty_responsibility_collapses_path():
    g = from_rows(["....", "@@@.", "@@@."])
    p = ProblemInstance(g, [(0, 0), (0, 0)])
    sweep = shortest_path_cells(g, Cell(0, 0), Cell(2, 3))
    detour = sweep + sweep[-2::-1]
    sol = hand_solution(p, [sweep, detour])
    idx = build_visibility_index(g)
    assert extract_responsibility(sol, 1, p, idx).cells == frozenset()
    out = improve(sol, p, idx)
    assert out.paths[1] == [Cell(0, 0)]
    # agent 0 then becomes the costliest and is re-planned over its own share
    assert out.makespan <= len(sweep) - 1 and valid(p, out)


def test_single_agent_responsibility_is_everything_unseen():
    g = generate_map("room", 7, 7, 0.0, 3)
    p = ProblemInstance(g, sample_border_starts(g, 1, 3))
    idx = build_visibility_index(g)
    sol = solve(p, SolverConfig("mxw", weight=5))
    r = extract_responsibility(sol, 0, p, idx)
    assert isinstance(r, Responsibility) and r.agent == 0
    assert set(r.cells) == independent_responsibility(p, sol.paths, 0)
    out = improve(sol, p, idx)
    assert out.makespan == solve(p, SolverConfig("cp3")).makespan <= sol.makespan


def test_responsibility_matches_independent_pass():
    g = generate_map("maze", 16, 16, 0.0, 2)
    p = ProblemInstance(g, sample_border_starts(g, 3, 2))
    idx = build_visibility_index(g)
    sol = solve(p, SolverConfig("mxw", weight=2))
    for k in range(3):
        r = extract_responsibility(sol, k, p, idx)
        assert set(r.cells) == independent_responsibility(p, sol.paths, k)
        # nothing in r is visible from another agent's path
        free = g.occupancy.tolist()
        others = [c for j, path in enumerate(sol.paths) if j != k for c in path]
        assert not any(sees(free, w, u) for w in others for u in r.cells)


def test_optimal_input_is_not_worsened():
    g = from_rows(["......."])
    p = ProblemInstance(g, [(0, 3), (0, 3)])
    sol = solve(p, SolverConfig("cp3"))
    assert improve(sol, p).makespan == sol.makespan == 0


def test_rejects_suboptimal_subsolver():
    g = from_rows(["..."])
    p = ProblemInstance(g, [(0, 0)])
    with pytest.raises(ValueError):
        improve(solve(p), p, config=SolverConfig("mxw", weight=2))


@pytest.mark.parametrize("style,seed", [("maze", s) for s in range(4)] + [("room", s) for s in range(4)]
                         + [("random", s) for s in range(4)])
def test_never_worse_and_valid(style, seed):
    g = generate_map(style, 14, 14, 0.2, seed)
    p = ProblemInstance(g, sample_border_starts(g, 3, seed))
    idx = build_visibility_index(g)
    sol = solve(p, SolverConfig("focal_morc", weight=3), idx)
    out = improve(sol, p, idx)
    assert out.makespan <= sol.makespan
    assert valid(p, out)
    info = out.stats["postprocess"]
    assert info["input_makespan"] == sol.makespan
    assert len(info["rounds"]) <= 3
    # every accepted replacement is a start-anchored connected path
    assert [path[0] for path in out.paths] == list(p.starts)


def test_marks_bound_the_rounds():
    g = generate_map("maze", 16, 16, 0.0, 7)
    p = ProblemInstance(g, sample_border_starts(g, 2, 7))
    sol = solve(p, SolverConfig("mxw", weight=3))
    out = improve(sol, p)
    agents = [r["agent"] for r in out.stats["postprocess"]["rounds"]]
    assert len(agents) == len(set(agents))


def test_input_solution_untouched():
    g = generate_map("maze", 12, 12, 0.0, 1)
    p = ProblemInstance(g, sample_border_starts(g, 2, 1))
    sol = solve(p, SolverConfig("mxw", weight=3))
    before = dataclasses.replace(sol, paths=[list(x) for x in sol.paths])
    improve(sol, p)
    assert sol.paths == before.paths and sol.makespan == before.makespan


def test_majority_improves_on_large_mazes():
    better = 0
    seeds = range(6)
    for seed in seeds:
        g = generate_map("maze", 32, 32, 0.0, seed)
        idx = build_visibility_index(g)
        p = ProblemInstance(g, sample_border_starts(g, 3, seed))
        sol = solve(p, SolverConfig("mxw", weight=2, time_limit=120), idx)
        assert sol.status == "solved"
        out = improve(sol, p, idx)
        assert valid(p, out) and out.makespan <= sol.makespan
        better += out.makespan < sol.makespan
    assert better > len(seeds) / 2
