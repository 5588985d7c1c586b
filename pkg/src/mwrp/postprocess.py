"""Makespan improvement by re-planning the costliest agent alone.

The costliest agent only has to see the cells no other agent sees (its
minimum responsibility). Re-solving that single-agent instance optimally
can shorten its path without breaking coverage; the loop stops once the
costliest agent has already been re-planned.
"""

from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass

from .grid import Cell, ProblemInstance
from .search import Solution, SolverConfig, solve
from .visibility import VisibilityIndex, build_visibility_index


@dataclass(frozen=True)
class Responsibility:
    agent: int
    cells: frozenset[Cell]


def extract_responsibility(solution: Solution, agent: int, problem: ProblemInstance,
                           index: VisibilityIndex) -> Responsibility:
    ids = index.cell_ids
    seen = 0
    for s in problem.starts:
        seen |= index.los_bits[ids[s]]
    for k, path in enumerate(solution.paths):
        if k == agent:
            continue
        for c in path:
            seen |= index.los_bits[ids[Cell(*c)]]
    cells = frozenset(c for c in problem.unseen if not (seen >> ids[c]) & 1)
    return Responsibility(agent, cells)


def improve(solution: Solution, problem: ProblemInstance, index: VisibilityIndex | None = None,
            config: SolverConfig | None = None) -> Solution:
    """Repeatedly re-plan the max-cost agent over its minimum responsibility.

    A replacement path is accepted when it is no longer than the old one.
    Each agent is re-planned at most once, so the loop runs at most M rounds.
    """
    if index is None:
        index = build_visibility_index(problem.map)
    sub_config = config or SolverConfig("cp3")
    if not sub_config.optimal:
        raise ValueError("sub-problems must be solved by an optimal algorithm")
    t0 = time.perf_counter()
    paths = [list(p) for p in solution.paths]
    optimized = [False] * len(paths)
    rounds, timed_out = [], False
    while True:
        costs = [len(p) - 1 for p in paths]
        a_max = max(range(len(paths)), key=lambda k: (costs[k], -k))
        if optimized[a_max]:
            break
        current = dataclasses.replace(solution, paths=paths)
        resp = extract_responsibility(current, a_max, problem, index)
        sub = ProblemInstance(problem.map, (problem.starts[a_max],), resp.cells)
        result = solve(sub, sub_config, index)
        optimized[a_max] = True
        if result.status != "optimal":
            timed_out = True
            break
        new_cost = result.costs[0]
        rounds.append({"agent": a_max, "old": costs[a_max], "new": new_cost,
                       "responsibility": len(resp.cells)})
        if new_cost <= costs[a_max]:
            paths[a_max] = list(result.paths[0])
    costs = [len(p) - 1 for p in paths]
    stats = dict(solution.stats)
    stats["postprocess"] = {"input_makespan": solution.makespan, "rounds": rounds,
                            "timed_out": timed_out,
                            "runtime_ms": round((time.perf_counter() - t0) * 1e3, 3)}
    return dataclasses.replace(solution, paths=paths, costs=costs, makespan=max(costs),
                               stats=stats)
