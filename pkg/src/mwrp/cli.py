"""``mwrp`` command line: gen, solve, verify, bench and render.

Exit codes: 0 success, 1 verification failed, 2 timeout with an incumbent,
3 timeout without a solution, 4 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .grid import MapFormatError, ProblemInstance, generate_map, read_map, sample_border_starts, write_map
from .heuristics import PIVOT_CAP, as_weight
from .postprocess import improve
from .render import render_svg
from .search import Solution, SolverConfig, solve
from .solution_io import read_solution, write_solution
from .verify import verify
from .visibility import build_visibility_index

EXIT_OK, EXIT_INVALID_SOLUTION, EXIT_TIMEOUT, EXIT_NO_SOLUTION, EXIT_BAD_INPUT = 0, 1, 2, 3, 4
BENCH_HEADER = ["map", "M", "algo", "w", "makespan", "runtime_ms", "expansions", "reduction_pct"]

log = logging.getLogger("mwrp")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse's own exit status 2 would read as "timeout with incumbent"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_INPUT, f"{self.prog}: error: {message}\n")


def parse_starts(text: str) -> list[tuple[int, int]]:
    """``"r,c;r,c"`` to a list of (row, col)."""
    try:
        starts = []
        for part in text.split(";"):
            if part.strip():
                r, c = part.split(",")
                starts.append((int(r), int(c)))
    except ValueError as exc:
        raise InputError(f"bad --starts {text!r}; expected \"r,c;r,c\"") from exc
    if not starts:
        raise InputError("--starts lists no cells")
    return starts


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", default="cp3",
                   choices=["baseline", "cp3", "mxw", "focal-sorc", "focal-morc"])
    p.add_argument("--w", default="1", help="suboptimality weight, e.g. 2 or 3/2")
    p.add_argument("--anytime", action="store_true")
    p.add_argument("--batch", type=int, default=None, metavar="N",
                   help="nodes per batched mTSP evaluation (default 100, baseline 1)")
    p.add_argument("--pivot-cap", type=int, default=PIVOT_CAP, metavar="P")
    p.add_argument("--no-cd", action="store_true", help="disable cell dominance")
    p.add_argument("--no-pd", action="store_true", help="disable path dominance")
    p.add_argument("--no-pivot-prune", action="store_true")
    p.add_argument("--postprocess", action="store_true",
                   help="re-plan the costliest agent after solving")
    p.add_argument("--time-limit", type=float, default=None, metavar="SECONDS")
    p.add_argument("--workers", type=int, default=1,
                   help="threads for batched heuristic evaluation")


def config_from_args(args) -> SolverConfig:
    try:
        w = as_weight(args.w)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(f"bad --w {args.w!r}: {exc}") from exc
    off = lambda flag: False if flag else None  # noqa: E731
    try:
        return SolverConfig(algorithm=args.algo, weight=w, anytime=args.anytime,
                            batch_size=args.batch, pivot_cap=args.pivot_cap,
                            enable_cd=off(args.no_cd), enable_pd=off(args.no_pd),
                            enable_pivot_prune=off(args.no_pivot_prune),
                            time_limit=args.time_limit, workers=args.workers,
                            seed=getattr(args, "seed", 0) or 0)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _load_map(path):
    try:
        return read_map(path)
    except OSError as exc:
        raise InputError(f"cannot read map {path}: {exc}") from exc
    except MapFormatError as exc:
        raise InputError(f"{path}: {exc}") from exc


def run_solver(problem: ProblemInstance, config: SolverConfig, postprocess: bool = False,
               index=None) -> Solution:
    index = index or build_visibility_index(problem.map)
    sol = solve(problem, config, index)
    if postprocess and sol.status != "no_solution":
        sol = improve(sol, problem, index, SolverConfig("cp3", time_limit=config.time_limit))
    return sol


def exit_code(sol: Solution) -> int:
    if sol.status == "timeout":
        return EXIT_TIMEOUT
    if sol.status == "no_solution":
        return EXIT_NO_SOLUTION
    return EXIT_OK


# -- subcommands ---------------------------------------------------------------

def cmd_gen(args) -> int:
    try:
        grid = generate_map(args.style, args.width, args.height, args.density, args.seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    write_map(grid, args.output)
    print(f"{args.output}: {grid.height}x{grid.width}, {grid.num_free} free cells")
    return EXIT_OK


def cmd_solve(args) -> int:
    grid = _load_map(args.map)
    if args.starts:
        starts = parse_starts(args.starts)
    else:
        starts = sample_border_starts(grid, args.agents, args.seed)
    config = config_from_args(args)
    try:
        problem = ProblemInstance(grid, starts)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    sol = run_solver(problem, config, args.postprocess)
    if args.output:
        write_solution(sol, grid, args.output, args.map)
    print(f"{sol.status}: makespan {sol.makespan}, costs {sol.costs}, "
          f"{sol.stats.get('expansions', 0)} expansions, {sol.stats['runtime_ms']:.0f} ms")
    return exit_code(sol)


def cmd_verify(args) -> int:
    try:
        report = verify(args.map, args.solution)
    except (OSError, KeyError, ValueError, IndexError) as exc:
        raise InputError(f"cannot parse inputs: {exc}") from exc
    print(json.dumps(report.to_dict()))
    return EXIT_OK if report.valid else EXIT_INVALID_SOLUTION


def load_suite(suite_dir) -> list[dict]:
    """Instances of a suite directory's ``suite.json``.

    Each entry names a map file (relative to the directory) and either
    explicit ``starts`` or ``agents`` plus ``seed`` for border sampling.
    """
    suite_dir = Path(suite_dir)
    try:
        data = json.loads((suite_dir / "suite.json").read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise InputError(f"cannot read {suite_dir / 'suite.json'}: {exc}") from exc
    out = []
    for entry in data["instances"]:
        entry = dict(entry)
        entry["map_path"] = str(suite_dir / entry["map"])
        out.append(entry)
    return out


def _bench_one(job) -> list:
    entry, algo, w, time_limit = job
    grid = read_map(entry["map_path"])
    if "starts" in entry:
        starts = [tuple(s) for s in entry["starts"]]
    else:
        starts = sample_border_starts(grid, entry["agents"], entry.get("seed", 0))
    config = SolverConfig(algorithm=algo, weight=w, time_limit=time_limit)
    sol = solve(ProblemInstance(grid, starts), config)
    red = sol.stats["reduction"]
    pct = 100.0 * (red["initial"] - red["after_pd"]) / red["initial"] if red["initial"] else 0.0
    makespan = sol.makespan if sol.status != "no_solution" else ""
    return [entry["map"], len(starts), algo, str(config.weight), makespan,
            sol.stats["runtime_ms"], sol.stats["expansions"], f"{pct:.2f}"]


def cmd_bench(args) -> int:
    entries = load_suite(args.suite)
    jobs = []
    for entry in entries:
        for algo in args.algo:
            optimal = algo in ("baseline", "cp3")
            for w in (["1"] if optimal else args.w):
                jobs.append((entry, algo.replace("-", "_"), as_weight(w), args.time_limit))
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    with open(args.output, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCH_HEADER)
        writer.writerows(rows)
    print(f"{args.output}: {len(rows)} rows")
    return EXIT_OK


def cmd_render(args) -> int:
    grid = _load_map(args.map)
    try:
        sol = read_solution(args.solution)
    except (OSError, KeyError, ValueError) as exc:
        raise InputError(f"cannot read solution {args.solution}: {exc}") from exc
    svg = render_svg(grid, sol.starts, sol.paths, args.cell,
                     title=f"{sol.algorithm} makespan {sol.makespan}")
    Path(args.output).write_text(svg, encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mwrp", description="Multiple watchman route solvers (makespan).")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="write a generated MovingAI map")
    p.add_argument("--style", choices=["random", "room", "maze"], default="random")
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--density", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve one instance and write the solution JSON")
    p.add_argument("map")
    p.add_argument("--starts", help='start cells as "r,c;r,c"')
    p.add_argument("--agents", type=int, default=1, help="border starts to sample without --starts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a solution with the independent verifier")
    p.add_argument("map")
    p.add_argument("solution")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bench", help="run a suite directory and write a CSV")
    p.add_argument("suite", help="directory holding suite.json and its maps")
    p.add_argument("--algo", action="append", default=None,
                   choices=["baseline", "cp3", "mxw", "focal-sorc", "focal-morc"])
    p.add_argument("--w", action="append", default=None, help="weight for the bounded solvers")
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--workers", type=int, default=1, help="instances solved in parallel")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("render", help="draw a solution as SVG")
    p.add_argument("map")
    p.add_argument("solution")
    p.add_argument("--cell", type=int, default=12, help="pixels per grid cell")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "bench":
        args.algo = args.algo or ["cp3"]
        args.w = args.w or ["2"]
    try:
        return args.func(args)
    except InputError as exc:
        print(f"mwrp: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
