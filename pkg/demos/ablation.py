"""Effect of each cp3 enhancement on search effort.

Same instances, one switch turned off at a time; the makespan never
changes, only expansions, mTSP calls and runtime.

    python demos/ablation.py
"""

from mwrp import ProblemInstance, SolverConfig, build_visibility_index, generate_map, sample_border_starts, solve

VARIANTS = {
    "cp3": {},
    "no CD": {"enable_cd": False},
    "no PD": {"enable_pd": False},
    "no pivot pruning": {"enable_pivot_prune": False},
    "batch 1": {"batch_size": 1},
    "baseline": None,
}


def main():
    for seed in range(3):
        g = generate_map("maze", 14, 14, seed=seed)
        p = ProblemInstance(g, sample_border_starts(g, 2, seed))
        idx = build_visibility_index(g)
        print(f"maze 14x14 seed {seed}")
        for name, flags in VARIANTS.items():
            config = SolverConfig("baseline") if flags is None else SolverConfig("cp3", **flags)
            config.time_limit = 120
            sol = solve(p, config, idx)
            s = sol.stats
            print(f"  {name:<17} makespan {sol.makespan:>3} {sol.status:<8} {s['expansions']:>6} exp "
                  f"{s['mtsp_calls']:>6} mTSP  {s['runtime_ms']:>8.0f} ms")


if __name__ == "__main__":
    main()
