"""Attack workbench: distinguisher statistics, tampering, coverage and the Boolean CLT gap."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .anf import AnfPoly, eval_many
from .cipher import BitEncryptor, TupleSelection
from .keys import PublicKey
from .prng import DeterministicRng


def enumeration_count(m: int, alpha: int, beta: int, k: int) -> int:
    """Rough count of distinct ciphertexts, ``C(m, beta)**alpha * 2**(alpha*beta*(beta-1)*k)``."""
    if m < beta:
        raise ValueError("need m >= beta")
    return math.comb(m, beta) ** alpha * 2 ** (alpha * beta * (beta - 1) * k)


def sigma_bound(p: float, N: int, z: float = 3.0) -> float:
    return z * math.sqrt(p * (1 - p) / N)


def two_proportion_z(x1: int, n1: int, x2: int, n2: int) -> float:
    """Pooled two-proportion z statistic; 0 when both samples are constant and equal."""
    p = (x1 + x2) / (n1 + n2)
    var = p * (1 - p) * (1 / n1 + 1 / n2)
    if var == 0:
        return 0.0 if x1 / n1 == x2 / n2 else math.inf
    return (x1 / n1 - x2 / n2) / math.sqrt(var)


def constant_term_count(pub: PublicKey, sel: TupleSelection, N: int, rng: DeterministicRng,
                        y: int = 0) -> int:
    """Number of ``N`` independent encryptions of ``y`` containing the constant term."""
    if N < 1:
        raise ValueError("N must be >= 1")
    enc = BitEncryptor(pub, sel)
    polys = enc.encrypt_many([y] * N, [rng.fork(f"trial:{i}") for i in range(N)])
    return sum(g.has_constant for g in polys)


def constant_term_stat(pub: PublicKey, sel: TupleSelection, N: int, rng: DeterministicRng,
                       y: int = 0) -> float:
    return constant_term_count(pub, sel, N, rng, y) / N


def random_masks(n: int, N: int, rng: DeterministicRng) -> list[int]:
    """``N`` uniform assignments as bitmasks (bit ``i-1`` is variable ``i``)."""
    nbytes = (n + 7) // 8
    top = (1 << n) - 1
    return [int.from_bytes(rng.read(nbytes), "little") & top for _ in range(N)]


def value_prob_stat(g: AnfPoly, N: int, rng: DeterministicRng) -> float:
    """Monte Carlo estimate of the fraction of inputs where ``g`` is 1."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return float(eval_many(g, random_masks(g.nvars, N, rng)).mean())


def oracle_tamper(g: AnfPoly, var: int, guess: int) -> AnfPoly:
    """Substitute a constant for one variable (partial evaluation)."""
    if not 1 <= var <= g.nvars:
        raise ValueError(f"variable {var} out of range")
    bit = 1 << (var - 1)
    arr = g.as_array()
    if arr is not None:
        b = np.uint64(bit)
        has = (arr & b) != 0
        if not guess:
            return AnfPoly.from_array(arr[~has], g.nvars)
        vals, counts = np.unique(arr & ~b, return_counts=True)
        return AnfPoly.from_array(vals[counts & 1 == 1], g.nvars)
    out: set[int] = set()
    for t in g.terms:
        if t & bit:
            if not guess:
                continue
            t ^= bit
        out.symmetric_difference_update((t,))
    return AnfPoly(frozenset(out), g.nvars, check=False)


@dataclass
class CoverageReport:
    unused: list[int]
    used: int
    variables: int

    @property
    def ratio(self) -> float:
        return self.used / self.variables if self.variables else 0.0


def clause_coverage(sel: TupleSelection, pub: PublicKey) -> CoverageReport:
    used = sel.used_clauses()
    unused = sorted(set(range(1, pub.m + 1)) - used)
    touched = set()
    for j in used:
        touched.update(pub.clauses[j - 1].indices)
    return CoverageReport(unused, len(used), len(touched))


def locality_estimate(M: int, m: int, n: int, k: int) -> Fraction:
    """Expected number of clauses with all variables inside a fixed M-subset: C(M,k)*m/n**k."""
    if not k <= M <= n:
        raise ValueError("need k <= M <= n")
    return Fraction(math.comb(M, k) * m, n ** k)


def clt_sums(p1, M: int):
    """Probabilities that the XOR of M independent p1-coins is 0 and 1 (binomial sums)."""
    if M < 1:
        raise ValueError("M must be >= 1")
    if not 0 <= p1 <= 1:
        raise ValueError("p1 must lie in [0, 1]")
    exact = isinstance(p1, (int, Fraction))
    terms = [math.comb(M, j) * p1 ** j * (1 - p1) ** (M - j) for j in range(M + 1)]
    if exact:
        return sum(terms[0::2]), sum(terms[1::2])
    return math.fsum(terms[0::2]), math.fsum(terms[1::2])


def clt_gap(p1, M: int):
    """(|P(xor=0) - P(xor=1)| from the binomial sums, closed form |1 - 2 p1|**M)."""
    p0, q1 = clt_sums(p1, M)
    return abs(p0 - q1), abs(1 - 2 * p1) ** M


def write_csv(path_or_file, rows: Sequence[dict], fields: Iterable[str] | None = None) -> None:
    fields = list(fields or (rows[0].keys() if rows else []))
    if hasattr(path_or_file, "write"):
        w = csv.DictWriter(path_or_file, fieldnames=fields)
        w.writeheader()
        w.writerows(rows)
        return
    with open(path_or_file, "w", newline="") as fh:
        write_csv(fh, rows, fields)
