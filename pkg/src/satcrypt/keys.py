"""Planted random k-SAT key pairs, key files and DIMACS export."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .anf import assignment_mask

log = logging.getLogger(__name__)

# Critical clause/variable ratios for which the literature gives a value.
CRITICAL_RATIO = {3: 4.2, 4: 9.8}

PUB_HEADER = "satcrypt-key v1"
PRIV_HEADER = "satcrypt-priv v1"


class KeyFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Params:
    n: int = 1024
    m: int = 5120
    k: int = 3
    alpha: int | None = None  # None means alpha = m
    beta: int = 2
    gamma: int = 1
    t: int = 2
    L: int | None = None      # None means no truncation
    K: int = 64

    def validate(self) -> list[str]:
        """Raise on hard violations, return warnings for soft ones."""
        if self.k < 3:
            raise ValueError("k must be >= 3")
        if self.beta < 2:
            raise ValueError("beta must be >= 2")
        alpha = self.m if self.alpha is None else self.alpha
        if self.m < self.beta:
            raise ValueError("need m >= beta")
        if self.gamma > 1 and not 2 <= self.t <= self.gamma / 2:
            raise ValueError("multi-key threshold must satisfy 2 <= t <= gamma/2")
        warnings = []
        ratio = CRITICAL_RATIO.get(self.k)
        if ratio is not None and self.m <= ratio * self.n:
            warnings.append(f"m={self.m} is not above the critical value {ratio}*n")
        if alpha * self.beta < self.n:
            warnings.append(f"alpha*beta={alpha * self.beta} < n={self.n}")
        if self.beta >= alpha:
            warnings.append("beta should be much smaller than alpha")
        return warnings


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals ``x_i XOR s_i``; sign 1 means negated."""

    indices: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        if len(self.indices) != len(self.signs):
            raise ValueError("indices and signs differ in length")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError(f"duplicate variable in clause {self.indices}")
        if any(i < 1 for i in self.indices):
            raise ValueError("variable indices are 1-based")

    @classmethod
    def from_literals(cls, lits: Sequence[int]) -> "Clause":
        return cls(tuple(abs(l) for l in lits), tuple(int(l < 0) for l in lits))

    @property
    def literals(self) -> tuple[int, ...]:
        return tuple(-i if s else i for i, s in zip(self.indices, self.signs))

    @property
    def width(self) -> int:
        return len(self.indices)

    @property
    def var_mask(self) -> int:
        mask = 0
        for i in self.indices:
            mask |= 1 << (i - 1)
        return mask

    def evaluate(self, x: Sequence[int]) -> int:
        return int(any(x[i - 1] ^ s for i, s in zip(self.indices, self.signs)))


@dataclass(frozen=True)
class PublicKey:
    n: int
    k: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        for c in self.clauses:
            if c.width != self.k:
                raise ValueError(f"clause width {c.width} != k={self.k}")
            if max(c.indices) > self.n:
                raise ValueError(f"clause {c.literals} exceeds n={self.n}")

    @property
    def m(self) -> int:
        return len(self.clauses)

    def evaluate(self, x: Sequence[int]) -> int:
        return int(all(c.evaluate(x) for c in self.clauses))

    def to_text(self) -> str:
        lines = [PUB_HEADER, f"n={self.n} m={self.m} k={self.k}"]
        lines += [" ".join(map(str, c.literals)) for c in self.clauses]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PublicKey":
        lines = text.splitlines()
        if not lines or lines[0].strip() != PUB_HEADER:
            raise KeyFormatError("missing public key header")
        if len(lines) < 2:
            raise KeyFormatError("missing parameter line")
        params = _parse_params(lines[1], ("n", "m", "k"))
        body = [l for l in lines[2:] if l.strip()]
        if len(body) != params["m"]:
            raise KeyFormatError(f"expected {params['m']} clauses, found {len(body)}")
        try:
            clauses = tuple(Clause.from_literals([int(v) for v in l.split()]) for l in body)
            return cls(params["n"], params["k"], clauses)
        except ValueError as exc:
            raise KeyFormatError(str(exc)) from exc


@dataclass(frozen=True)
class PrivateKey:
    bits: tuple[int, ...]
    mask: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("private key bits must be 0/1")
        object.__setattr__(self, "mask", assignment_mask(self.bits))

    @property
    def n(self) -> int:
        return len(self.bits)

    def to_text(self) -> str:
        return f"{PRIV_HEADER}\n{''.join(map(str, self.bits))}\n"

    @classmethod
    def from_text(cls, text: str) -> "PrivateKey":
        lines = text.split()
        if len(lines) != 3 or " ".join(lines[:2]) != PRIV_HEADER:
            raise KeyFormatError("malformed private key file")
        if set(lines[2]) - {"0", "1"}:
            raise KeyFormatError("private key must be a 0/1 string")
        return cls(tuple(int(c) for c in lines[2]))


def _parse_params(line: str, names: Sequence[str]) -> dict[str, int]:
    out = {}
    try:
        for item in line.split():
            key, value = item.split("=")
            out[key] = int(value)
    except ValueError as exc:
        raise KeyFormatError(f"bad parameter line {line!r}") from exc
    missing = [n for n in names if n not in out]
    if missing:
        raise KeyFormatError(f"parameter line lacks {missing}")
    return out


def draw_clause(n: int, k: int, rng) -> Clause:
    """k distinct indices (uniform draws, repeats redrawn) and k uniform signs."""
    chosen: list[int] = []
    while len(chosen) < k:
        i = rng.randbelow(n) + 1
        if i not in chosen:
            chosen.append(i)
    signs = tuple(int(b) for b in rng.bits(k))
    return Clause(tuple(chosen), signs)


def keygen(n: int, m: int, k: int, rng, stats: dict | None = None) -> tuple[PrivateKey, PublicKey]:
    """Planted instance: random private key, clauses kept only if it satisfies them."""
    if k < 3 or m < 1:
        raise ValueError("need k >= 3 and m >= 1")
    if n < k:
        raise ValueError(f"n={n} < k={k}")
    priv = PrivateKey(tuple(int(b) for b in rng.bits(n)))
    clauses = []
    rejected = 0
    while len(clauses) < m:
        c = draw_clause(n, k, rng)
        if c.evaluate(priv.bits):
            clauses.append(c)
        else:
            rejected += 1
    if stats is not None:
        stats["rejected"] = rejected
        stats["accepted"] = m
    return priv, PublicKey(n, k, tuple(clauses))


def encoded_key_bits(n: int, m: int, k: int) -> int:
    """Public key size: k*m literals of ceil(log2 n) index bits plus a sign bit."""
    if min(n, m, k) < 1:
        raise ValueError("arguments must be positive")
    return k * m * ((n - 1).bit_length() + 1)


def export_dimacs(pub: PublicKey) -> str:
    lines = [f"p cnf {pub.n} {pub.m}"]
    lines += [" ".join(map(str, c.literals)) + " 0" for c in pub.clauses]
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> tuple[int, list[tuple[int, ...]]]:
    """Return (variable count, clauses as literal tuples)."""
    n = m = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith(("c", "%")):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise KeyFormatError(f"bad problem line {line!r}")
            n, m = int(parts[2]), int(parts[3])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if n is None:
        raise KeyFormatError("missing problem line")
    if current:
        clauses.append(tuple(current))
    if len(clauses) != m:
        raise KeyFormatError(f"header says {m} clauses, found {len(clauses)}")
    return n, clauses


def public_key_from_dimacs(text: str) -> PublicKey:
    n, lits = parse_dimacs(text)
    clauses = tuple(Clause.from_literals(c) for c in lits)
    k = clauses[0].width if clauses else 0
    return PublicKey(n, k, clauses)
