"""Solve a small maze optimally, a larger one with MxW*, and post-process.

Writes SVG drawings next to this script (demos/out/).

    python demos/quickstart.py
"""

from pathlib import Path

from mwrp import (ProblemInstance, SolverConfig, build_visibility_index, check, generate_map,
                  improve, render_svg, sample_border_starts, solve)

OUT = Path(__file__).parent / "out"


def show(label, problem, sol):
    ok = check(problem.map.occupancy.tolist(), problem.starts, sol.paths).valid
    red = sol.stats["reduction"]
    print(f"{label:<22} makespan {sol.makespan:>4}  costs {sol.costs}  status {sol.status:<8} "
          f"verified {ok}  |U| {red['initial']} -> {red['after_pd']}  "
          f"{sol.stats['expansions']} expansions  {sol.stats['runtime_ms']:.0f} ms")


def main():
    OUT.mkdir(exist_ok=True)

    # optimal: 2 agents on a small maze
    g = generate_map("maze", 16, 16, seed=4)
    p = ProblemInstance(g, sample_border_starts(g, 2, seed=4))
    sol = solve(p, SolverConfig("cp3"))
    show("cp3 16x16 maze", p, sol)
    (OUT / "maze16_cp3.svg").write_text(render_svg(g, p.starts, sol.paths, title="cp3"))

    # bounded: 3 agents on a 28x28 maze, then re-plan the costliest agent
    g = generate_map("maze", 28, 28, seed=2)
    p = ProblemInstance(g, sample_border_starts(g, 3, seed=2))
    idx = build_visibility_index(g)
    sol = solve(p, SolverConfig("mxw", weight=2), idx)
    show("mxw w=2 28x28 maze", p, sol)
    better = improve(sol, p, idx)
    show("  + postprocess", p, better)
    (OUT / "maze28_mxw.svg").write_text(render_svg(g, p.starts, sol.paths, title="mxw w=2"))
    (OUT / "maze28_post.svg").write_text(render_svg(g, p.starts, better.paths, title="postprocessed"))
    print(f"SVGs written to {OUT}")


if __name__ == "__main__":
    main()
