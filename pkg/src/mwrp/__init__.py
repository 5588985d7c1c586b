"""Solvers for the multiple watchman route problem (makespan) on 2D grids."""

from .grid import (Cell, GridMap, MapFormatError, ProblemInstance, generate_map, parse_map,
                   read_map, sample_border_starts, serialize_map, write_map)
from .heuristics import as_weight, mtsp_solve, pivot_prune
from .postprocess import extract_responsibility, improve
from .render import render_svg
from .reduction import ReductionStats, cell_dominance, cpd, path_dominance
from .search import Solution, SolverConfig, solve
from .verify import CoverageReport, check
from .visibility import VisibilityIndex, bfs_dist_field, build_visibility_index

__all__ = [
    "Cell", "GridMap", "MapFormatError", "ProblemInstance", "generate_map", "parse_map",
    "read_map", "sample_border_starts", "serialize_map", "write_map",
    "as_weight", "mtsp_solve", "pivot_prune",
    "extract_responsibility", "improve",
    "render_svg",
    "ReductionStats", "cell_dominance", "cpd", "path_dominance",
    "Solution", "SolverConfig", "solve",
    "CoverageReport", "check",
    "VisibilityIndex", "bfs_dist_field", "build_visibility_index",
]
