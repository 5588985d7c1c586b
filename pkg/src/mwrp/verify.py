"""Stand-alone solution checker.

Deliberately shares no code with the solver: it parses the map itself,
repeats the connectivity demotion with its own flood fill and rasterises
lines of sight with its own Bresenham walk. Agreement between the two is
therefore evidence rather than tautology.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class CoverageReport:
    uncovered: list[tuple[int, int]] = field(default_factory=list)
    path_violations: list[tuple[int, int]] = field(default_factory=list)
    start_mismatches: list[int] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not (self.uncovered or self.path_violations or self.start_mismatches)

    def to_dict(self) -> dict:
        return {"valid": self.valid, "uncovered": [list(c) for c in self.uncovered],
                "path_violations": [list(v) for v in self.path_violations],
                "start_mismatches": list(self.start_mismatches)}


def read_grid(text: str) -> list[list[bool]]:
    """MovingAI text to a list-of-lists free mask, restricted to its largest component."""
    lines = text.splitlines()
    height = int(lines[1].split()[1])
    width = int(lines[2].split()[1])
    rows = lines[4:4 + height]
    free = [[ch in ".G" for ch in row[:width]] for row in rows]
    return _largest_region(free)


def _largest_region(free):
    h, w = len(free), len(free[0])
    label = [[0] * w for _ in range(h)]
    best, best_size, current = 0, 0, 0
    for r in range(h):
        for c in range(w):
            if not free[r][c] or label[r][c]:
                continue
            current += 1
            label[r][c] = current
            stack, size = [(r, c)], 0
            while stack:
                y, x = stack.pop()
                size += 1
                for ny, nx in ((y + 1, x), (y - 1, x), (y, x + 1), (y, x - 1)):
                    if 0 <= ny < h and 0 <= nx < w and free[ny][nx] and not label[ny][nx]:
                        label[ny][nx] = current
                        stack.append((ny, nx))
            if size > best_size:
                best, best_size = current, size
    return [[label[r][c] == best and best > 0 for c in range(w)] for r in range(h)]


def _line(r0, c0, r1, c1):
    cols, rows = c1 - c0, r1 - r0
    step_c = (cols > 0) - (cols < 0)
    step_r = (rows > 0) - (rows < 0)
    ax, ay = abs(cols), abs(rows)
    e = ax - ay
    out = [(r0, c0)]
    while (r0, c0) != (r1, c1):
        twice = e + e
        if twice >= -ay:
            e -= ay
            c0 += step_c
        if twice <= ax:
            e += ax
            r0 += step_r
        out.append((r0, c0))
    return out


def sees(free, a, b) -> bool:
    return all(free[r][c] for r, c in _line(a[0], a[1], b[0], b[1]))


def free_cells(free) -> list[tuple[int, int]]:
    return [(r, c) for r, row in enumerate(free) for c, v in enumerate(row) if v]


def check(free, starts, paths, unseen=None) -> CoverageReport:
    """Check four-way step validity, start cells and coverage of ``unseen``.

    ``unseen`` defaults to every free cell.
    """
    report = CoverageReport()
    h, w = len(free), len(free[0])

    def ok(cell):
        r, c = cell
        return 0 <= r < h and 0 <= c < w and free[r][c]

    for k, path in enumerate(paths):
        if not path or k >= len(starts) or tuple(path[0]) != tuple(starts[k]):
            report.start_mismatches.append(k)
        for i, cell in enumerate(path):
            if not ok(cell):
                report.path_violations.append((k, i))
            elif i and abs(cell[0] - path[i - 1][0]) + abs(cell[1] - path[i - 1][1]) != 1:
                report.path_violations.append((k, i))
    if len(paths) != len(starts):
        report.start_mismatches.extend(range(len(paths), len(starts)))
    visited = {tuple(c) for p in paths for c in p if ok(c)}
    targets = free_cells(free) if unseen is None else sorted(tuple(c) for c in unseen)
    for t in targets:
        if not any(sees(free, v, t) for v in visited):
            report.uncovered.append(t)
    return report


def verify(map_file, solution_file) -> CoverageReport:
    """Verify a solution JSON file against a MovingAI map file."""
    with open(map_file, encoding="utf-8") as fh:
        free = read_grid(fh.read())
    with open(solution_file, encoding="utf-8") as fh:
        data = json.load(fh)
    starts = [(s["r"], s["c"]) for s in data["starts"]]
    paths = [[(p["r"], p["c"]) for p in path] for path in data["paths"]]
    return check(free, starts, paths)
