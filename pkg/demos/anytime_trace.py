"""Incumbent cost over time for the anytime solvers on one room map.

Each run stops once its incumbent is proved optimal or after 60 seconds.

    python demos/anytime_trace.py [seed]
"""

import sys

from mwrp import ProblemInstance, SolverConfig, build_visibility_index, generate_map, sample_border_starts, solve


def main(seed=3):
    g = generate_map("room", 11, 11, seed=seed)
    p = ProblemInstance(g, sample_border_starts(g, 2, seed))
    idx = build_visibility_index(g)
    for algo in ("mxw", "focal_sorc", "focal_morc"):
        sol = solve(p, SolverConfig(algo, weight=5, anytime=True, time_limit=60), idx)
        trace = ", ".join(f"{t['cost']}@{t['t_ms']:.0f}ms" for t in sol.anytime_trace)
        print(f"{algo:<11} {sol.status:<8} final {sol.makespan}  trace: {trace}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 3)
