"""Hardness benchmarks: a small DPLL solver and planted-instance sweeps.

The solver is for desk-scale trend checks (n up to about 64).  For real
measurements export DIMACS files and run an external solver.
"""

from __future__ import annotations

import os
import statistics
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from .keys import PublicKey, draw_clause, export_dimacs, keygen
from .prng import DeterministicRng

SAT, UNSAT, BUDGET = "SAT", "UNSAT", "BUDGET"
CSV_FIELDS = ("n", "ratio", "k", "seed", "verdict", "decisions", "propagations", "millis")


@dataclass
class SolveResult:
    status: str
    assignment: tuple[int, ...] | None
    decisions: int
    propagations: int
    millis: float


class _Budget(Exception):
    pass


class _Dpll:
    """Counter-based unit propagation, most-frequent-literal branching."""

    def __init__(self, n: int, clauses: Sequence[Sequence[int]], budget: int | None):
        self.n = n
        self.budget = budget
        self.decisions = 0
        self.propagations = 0
        self.clauses: list[tuple[int, ...]] = []
        self.empty = False
        for c in clauses:
            lits = tuple(dict.fromkeys(c))
            if any(-l in lits for l in lits):
                continue  # tautology
            if not lits:
                self.empty = True
            self.clauses.append(lits)
        self.occ: dict[int, list[int]] = {}
        for ci, c in enumerate(self.clauses):
            for l in c:
                if abs(l) > n or l == 0:
                    raise ValueError(f"literal {l} out of range for n={n}")
                self.occ.setdefault(l, []).append(ci)
        self.val = [0] * (n + 1)
        self.nsat = [0] * len(self.clauses)
        self.nfalse = [0] * len(self.clauses)
        self.trail: list[int] = []

    def _assign(self, lit: int, queue: list[int]) -> bool:
        self.val[abs(lit)] = 1 if lit > 0 else -1
        self.trail.append(lit)
        for ci in self.occ.get(lit, ()):
            self.nsat[ci] += 1
        ok = True
        for ci in self.occ.get(-lit, ()):
            self.nfalse[ci] += 1
            if not self.nsat[ci]:
                left = len(self.clauses[ci]) - self.nfalse[ci]
                if left == 0:
                    ok = False
                elif left == 1:
                    queue.append(ci)
        return ok

    def _undo(self, mark: int) -> None:
        while len(self.trail) > mark:
            lit = self.trail.pop()
            self.val[abs(lit)] = 0
            for ci in self.occ.get(lit, ()):
                self.nsat[ci] -= 1
            for ci in self.occ.get(-lit, ()):
                self.nfalse[ci] -= 1

    def _propagate(self, queue: list[int]) -> bool:
        while queue:
            ci = queue.pop()
            if self.nsat[ci]:
                continue
            free = [l for l in self.clauses[ci] if not self.val[abs(l)]]
            if not free:
                return False
            self.propagations += 1
            if not self._assign(free[0], queue):
                return False
        return True

    def _pick(self) -> int | None:
        counts: dict[int, int] = {}
        for ci, c in enumerate(self.clauses):
            if self.nsat[ci]:
                continue
            for l in c:
                if not self.val[abs(l)]:
                    counts[l] = counts.get(l, 0) + 1
        if not counts:
            return None
        return max(counts, key=lambda l: (counts[l], -abs(l), l > 0))

    def _search(self) -> bool:
        lit = self._pick()
        if lit is None:
            return True
        for choice in (lit, -lit):
            if self.budget is not None and self.decisions >= self.budget:
                raise _Budget
            self.decisions += 1
            mark = len(self.trail)
            queue: list[int] = []
            if self._assign(choice, queue) and self._propagate(queue):
                if self._search():
                    return True
            self._undo(mark)
        return False

    def solve(self) -> str:
        if self.empty:
            return UNSAT
        queue = [ci for ci, c in enumerate(self.clauses) if len(c) == 1]
        if not self._propagate(queue):
            return UNSAT
        try:
            return SAT if self._search() else UNSAT
        except _Budget:
            return BUDGET


def dpll_solve(instance, budget: int | None = None, n: int | None = None) -> SolveResult:
    """Solve a PublicKey or a list of literal tuples (then ``n`` is required)."""
    if isinstance(instance, PublicKey):
        n, clauses = instance.n, [c.literals for c in instance.clauses]
    else:
        clauses = [tuple(c) for c in instance]
        if n is None:
            n = max((abs(l) for c in clauses for l in c), default=0)
    t0 = time.perf_counter()
    s = _Dpll(n, clauses, budget)
    status = s.solve()
    millis = (time.perf_counter() - t0) * 1000
    assignment = None
    if status == SAT:
        assignment = tuple(int(v > 0) for v in s.val[1:])
    return SolveResult(status, assignment, s.decisions, s.propagations, millis)


def random_cnf(n: int, m: int, k: int, rng: DeterministicRng) -> list[tuple[int, ...]]:
    """Uniform random k-CNF (no planted solution)."""
    return [draw_clause(n, k, rng).literals for _ in range(m)]


def satisfies(clauses: Iterable[Sequence[int]], x: Sequence[int]) -> bool:
    return all(any((x[abs(l) - 1] == 1) == (l > 0) for l in c) for c in clauses)


def dimacs_name(n: int, ratio: float, seed: int) -> str:
    return f"planted_n{n}_r{ratio:g}_s{seed}.cnf"


def instance_rng(n: int, ratio: float, k: int, seed: int) -> DeterministicRng:
    return DeterministicRng.from_label(f"bench/n={n}/r={ratio:g}/k={k}/s={seed}")


def hardness_sweep(ns: Sequence[int], ratios: Sequence[float], k: int = 3, seeds: int = 10,
                   budget: int | None = None, dimacs_dir: str | None = None) -> list[dict]:
    """Solve planted instances for every (n, ratio, seed) cell; one row per instance."""
    rows = []
    if dimacs_dir:
        os.makedirs(dimacs_dir, exist_ok=True)
    for n in ns:
        for ratio in ratios:
            m = max(1, round(ratio * n))
            for seed in range(seeds):
                priv, pub = keygen(n, m, k, instance_rng(n, ratio, k, seed))
                if not pub.evaluate(priv.bits):
                    raise AssertionError("planted assignment does not satisfy its instance")
                if dimacs_dir:
                    with open(os.path.join(dimacs_dir, dimacs_name(n, ratio, seed)), "w") as fh:
                        fh.write(export_dimacs(pub))
                r = dpll_solve(pub, budget)
                rows.append({"n": n, "ratio": ratio, "k": k, "seed": seed, "verdict": r.status,
                             "decisions": r.decisions, "propagations": r.propagations,
                             "millis": round(r.millis, 3)})
    return rows


def summarize(rows: Sequence[dict]) -> list[dict]:
    """Per-cell min/median/max of decisions and time."""
    cells: dict[tuple, list[dict]] = {}
    for r in rows:
        cells.setdefault((r["n"], r["ratio"], r["k"]), []).append(r)
    out = []
    for (n, ratio, k), rs in sorted(cells.items()):
        d = sorted(r["decisions"] for r in rs)
        ms = sorted(r["millis"] for r in rs)
        out.append({"n": n, "ratio": ratio, "k": k, "count": len(rs),
                    "dec_min": d[0], "dec_median": statistics.median(d), "dec_max": d[-1],
                    "ms_min": ms[0], "ms_median": statistics.median(ms), "ms_max": ms[-1]})
    return out
