"""Regenerate src/mwrp/data/oracle_suite from the brute-force oracle.

Instances are small generated maps (at most 30 free cells) with 1-3 border
starts; each optimal makespan comes from the joint breadth-first oracle in
tests/oracle.py, which shares no code with the solver.

    python3 tools/build_oracle_suite.py
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from oracle import optimal_makespan  # noqa: E402

from mwrp.grid import generate_map, sample_border_starts, serialize_map, write_map  # noqa: E402
from mwrp.verify import read_grid  # noqa: E402

OUT = ROOT / "src" / "mwrp" / "data" / "oracle_suite"
SHAPES = [("random", 6, 6, 0.25), ("room", 11, 3, 0.0), ("maze", 7, 5, 0.0),
          ("random", 7, 5, 0.2), ("room", 7, 6, 0.0), ("maze", 8, 5, 0.0),
          ("random", 5, 5, 0.1)]
COUNT = 120


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for old in OUT.glob("*.map"):
        old.unlink()
    instances, seed = [], 0
    while len(instances) < COUNT:
        style, w, h, density = SHAPES[seed % len(SHAPES)]
        grid = generate_map(style, w, h, density, seed)
        seed += 1
        if not 4 <= grid.num_free <= 30:
            continue
        agents = 1 + len(instances) % 3
        starts = sample_border_starts(grid, agents, seed)
        name = f"{style}_{w}x{h}_s{seed - 1:03d}.map"
        write_map(grid, OUT / name)
        free = read_grid(serialize_map(grid))
        instances.append({"map": name, "starts": [list(s) for s in starts],
                          "free_cells": grid.num_free,
                          "oracle_makespan": optimal_makespan(free, starts)})
    (OUT / "suite.json").write_text(json.dumps({"instances": instances}, indent=1) + "\n")
    print(f"{len(instances)} instances in {OUT}")


if __name__ == "__main__":
    main()
