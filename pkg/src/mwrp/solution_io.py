"""Solution JSON reading and writing."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .grid import Cell, GridMap, serialize_map
from .search import Solution

TIMING_KEYS = ("runtime_ms", "cd_ms", "pd_ms", "t_ms")


def _cell(c) -> dict:
    return {"r": int(c[0]), "c": int(c[1])}


def map_digest(grid: GridMap) -> str:
    return hashlib.sha256(serialize_map(grid).encode()).hexdigest()


def solution_to_dict(solution: Solution, grid: GridMap, map_path: str | None = None) -> dict:
    stats = dict(solution.stats)
    return {
        "map": {"path": str(map_path) if map_path else None, "sha256": map_digest(grid)},
        "agents": solution.num_agents,
        "starts": [_cell(s) for s in solution.starts],
        "algorithm": solution.algorithm,
        "w": solution.config.get("weight", "1"),
        "makespan": solution.makespan,
        "costs": list(solution.costs),
        "status": solution.status,
        "proved_optimal": solution.proved_optimal,
        "paths": [[_cell(c) for c in path] for path in solution.paths],
        "stats": stats,
        "config": solution.config,
        "anytime_trace": list(solution.anytime_trace),
    }


def write_solution(solution: Solution, grid: GridMap, path, map_path=None) -> None:
    data = solution_to_dict(solution, grid, map_path)
    Path(path).write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")


def read_solution(path) -> Solution:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    paths = [[Cell(p["r"], p["c"]) for p in path] for path in data["paths"]]
    return Solution(paths=paths, makespan=data["makespan"], costs=[len(p) - 1 for p in paths],
                    starts=[Cell(s["r"], s["c"]) for s in data["starts"]],
                    algorithm=data["algorithm"], config=data.get("config", {}),
                    stats=data.get("stats", {}), anytime_trace=data.get("anytime_trace", []),
                    status=data.get("status", "solved"),
                    proved_optimal=data.get("proved_optimal", False))


def strip_timing(obj):
    """Copy of a JSON-like object with wall-clock fields removed."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj
