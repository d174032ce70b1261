"""Boolean polynomials over GF(2) in algebraic normal form.

A polynomial is an XOR of monomials.  Each monomial is stored as an integer
bitmask: bit ``i - 1`` set means variable ``x_i`` occurs (indices are 1-based)
and the mask ``0`` is the constant-1 monomial.  Since
``x*x = x`` over GF(2), a monomial is a set, and multiplying two monomials is a
bitwise OR.  A polynomial is a frozenset of masks; XOR of polynomials is the
symmetric difference of the sets.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

# Products with at least this many term pairs are refused on the pairwise
# route (the dense route below is bounded by its support size instead).
MAX_PAIRS = 1 << 20
# Largest variable support for which ``anf_and`` may use the dense route.
DENSE_SUPPORT_LIMIT = 22
# Largest variable list accepted by ``random_anf``.
RANDOM_ANF_MAX_VARS = 24


class AnfSizeError(ValueError):
    """A polynomial operation would exceed the configured size limits."""


def _mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        if i < 1:
            raise ValueError(f"variable index must be >= 1, got {i}")
        mask |= 1 << (i - 1)
    return mask


def _indices_of(mask: int) -> tuple[int, ...]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length())
        mask ^= low
    return tuple(out)


@lru_cache(maxsize=1 << 16)
def term_sort_key(mask: int) -> tuple[int, tuple[int, ...]]:
    """Canonical order: degree ascending, then index sequence ascending."""
    return (mask.bit_count(), _indices_of(mask))


@lru_cache(maxsize=1 << 16)
def term_text(mask: int) -> str:
    return "*".join(f"x{i}" for i in _indices_of(mask)) if mask else "1"


@lru_cache(maxsize=1 << 16)
def _parse_term(part: str) -> int:
    if part == "1":
        return 0
    mask = 0
    for factor in part.split("*"):
        if not factor.startswith("x") or not factor[1:].isdigit():
            raise ValueError(f"bad factor {factor!r}")
        i = int(factor[1:])
        if i < 1:
            raise ValueError("variable indices are 1-based")
        mask |= 1 << (i - 1)
    return mask


class AnfPoly:
    """Immutable XOR-of-monomials over ``nvars`` variables.

    Terms live in a frozenset of masks.  Polynomials over at most 64 variables
    may instead be backed by a sorted ``uint64`` array (see ``from_array``);
    the set view is then built only on first access to ``terms``.
    """

    __slots__ = ("_terms", "_arr", "nvars")

    def __init__(self, terms: Iterable[int] = (), nvars: int = 0, *, check: bool = True):
        terms = terms if isinstance(terms, frozenset) else frozenset(terms)
        if check and terms:
            limit = 1 << nvars
            for t in terms:
                if t < 0 or t >= limit:
                    raise ValueError(f"term {_indices_of(t)} outside 1..{nvars}")
        object.__setattr__(self, "_terms", terms)
        object.__setattr__(self, "_arr", None)
        object.__setattr__(self, "nvars", nvars)

    @classmethod
    def from_array(cls, arr: np.ndarray, nvars: int) -> "AnfPoly":
        """Wrap a sorted, duplicate-free uint64 mask array (not copied or checked)."""
        if nvars > 64:
            raise ValueError("array backing needs nvars <= 64")
        self = object.__new__(cls)
        object.__setattr__(self, "_terms", None)
        object.__setattr__(self, "_arr", arr)
        object.__setattr__(self, "nvars", nvars)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("AnfPoly is immutable")

    @property
    def terms(self) -> frozenset:
        if self._terms is None:
            object.__setattr__(self, "_terms", frozenset(self._arr.tolist()))
        return self._terms

    def as_array(self) -> np.ndarray | None:
        """Sorted uint64 view of the terms, or None above 64 variables."""
        if self._arr is None:
            if self.nvars > 64:
                return None
            arr = np.fromiter(self._terms, dtype=np.uint64, count=len(self._terms))
            arr.sort()
            object.__setattr__(self, "_arr", arr)
        return self._arr

    # construction helpers

    @classmethod
    def zero(cls, nvars: int) -> "AnfPoly":
        return cls(frozenset(), nvars, check=False)

    @classmethod
    def one(cls, nvars: int) -> "AnfPoly":
        return cls(frozenset((0,)), nvars, check=False)

    @classmethod
    def constant(cls, bit: int, nvars: int) -> "AnfPoly":
        return cls.one(nvars) if bit & 1 else cls.zero(nvars)

    @classmethod
    def var(cls, i: int, nvars: int) -> "AnfPoly":
        return cls(frozenset((1 << (i - 1),)), nvars)

    @classmethod
    def from_terms(cls, terms: Iterable[Iterable[int]], nvars: int) -> "AnfPoly":
        """Build from index collections; repeated terms cancel in pairs."""
        acc: set[int] = set()
        for t in terms:
            m = _mask_of(t)
            if m in acc:
                acc.remove(m)
            else:
                acc.add(m)
        return cls(frozenset(acc), nvars)

    # inspection

    def __len__(self) -> int:
        return len(self._arr) if self._arr is not None else len(self._terms)

    def __bool__(self) -> bool:
        return len(self) > 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, AnfPoly):
            return NotImplemented
        if self.nvars != other.nvars or len(self) != len(other):
            return False
        if self.nvars <= 64:
            return bool(np.array_equal(self.as_array(), other.as_array()))
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.nvars, self.terms))

    def __repr__(self) -> str:
        text = self.to_text()
        if len(text) > 80:
            text = text[:77] + "..."
        return f"AnfPoly({text!r}, nvars={self.nvars})"

    @property
    def degree(self) -> int:
        """Largest monomial degree; -1 for the zero polynomial."""
        if self._arr is not None:
            return int(np.bitwise_count(self._arr).max()) if len(self._arr) else -1
        return max((t.bit_count() for t in self._terms), default=-1)

    @property
    def has_constant(self) -> bool:
        if self._arr is not None:
            return bool(len(self._arr)) and int(self._arr[0]) == 0
        return 0 in self._terms

    def support(self) -> int:
        """Mask of all variables occurring in some term."""
        if self._arr is not None:
            return int(np.bitwise_or.reduce(self._arr)) if len(self._arr) else 0
        s = 0
        for t in self._terms:
            s |= t
        return s

    def sorted_terms(self) -> list[tuple[int, ...]]:
        return [_indices_of(t) for t in self._canonical_masks()]

    def _canonical_masks(self) -> list[int]:
        masks = self._arr.tolist() if self._arr is not None else self._terms
        return sorted(masks, key=term_sort_key)

    # algebra

    def __xor__(self, other: "AnfPoly") -> "AnfPoly":
        return anf_xor(self, other)

    def __and__(self, other: "AnfPoly") -> "AnfPoly":
        return anf_and(self, other)

    def __call__(self, x: Sequence[int]) -> int:
        return anf_eval(self, x)

    # serialization

    def to_text(self) -> str:
        if not len(self):
            return "0"
        return " + ".join(map(term_text, self._canonical_masks()))

    @classmethod
    def from_text(cls, text: str, nvars: int) -> "AnfPoly":
        text = text.strip()
        if text == "0":
            return cls.zero(nvars)
        parts = text.split(" + ")
        terms = frozenset(_parse_term(p.strip()) for p in parts)
        if len(terms) != len(parts):
            raise ValueError("non-canonical text: repeated terms")
        return cls(terms, nvars)

    def to_bytes(self) -> bytes:
        masks = self._canonical_masks()
        out = bytearray(_varint(len(masks)))
        for t in masks:
            idx = _indices_of(t)
            out += _varint(len(idx))
            for i in idx:
                out += _varint(i)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes, nvars: int) -> "AnfPoly":
        count, pos = _read_varint(data, 0)
        terms = []
        for _ in range(count):
            deg, pos = _read_varint(data, pos)
            idx = []
            for _ in range(deg):
                i, pos = _read_varint(data, pos)
                idx.append(i)
            terms.append(idx)
        if pos != len(data):
            raise ValueError("trailing bytes after polynomial")
        return cls.from_terms(terms, nvars)


def _varint(value: int) -> bytes:
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def _read_varint(data: bytes, pos: int) -> tuple[int, int]:
    value = shift = 0
    while True:
        if pos >= len(data):
            raise ValueError("truncated varint")
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7


def _check_dims(a: AnfPoly, b: AnfPoly) -> None:
    if a.nvars != b.nvars:
        raise ValueError(f"dimension mismatch: {a.nvars} vs {b.nvars}")


def anf_xor(a: AnfPoly, b: AnfPoly) -> AnfPoly:
    _check_dims(a, b)
    if a._arr is not None and b._arr is not None:
        return AnfPoly.from_array(np.setxor1d(a._arr, b._arr, assume_unique=True), a.nvars)
    return AnfPoly(a.terms ^ b.terms, a.nvars, check=False)


def anf_and(a: AnfPoly, b: AnfPoly, max_pairs: int = MAX_PAIRS) -> AnfPoly:
    """Product of two polynomials.

    Small products expand pairwise.  When the pair count is large but both
    operands live on at most ``DENSE_SUPPORT_LIMIT`` variables, the product is
    taken pointwise on truth tables (Moebius transform), which costs
    ``O(s * 2**s)`` for support size ``s`` regardless of term counts.
    """
    _check_dims(a, b)
    n = a.nvars
    if not a or not b:
        return AnfPoly.zero(n)
    pairs = len(a) * len(b)
    if pairs <= 4096:
        return AnfPoly(_and_pairwise(a.terms, b.terms), n, check=False)
    support = a.support() | b.support()
    s = support.bit_count()
    if s <= DENSE_SUPPORT_LIMIT and (1 << s) <= 4 * pairs:
        return _and_dense(a, b, support)
    if pairs >= max_pairs:
        raise AnfSizeError(
            f"product of {len(a)} x {len(b)} terms on {s} variables exceeds limits"
        )
    if n <= 64:
        return AnfPoly.from_array(_and_pairwise_np(a.as_array(), b.as_array()), n)
    return AnfPoly(_and_pairwise(a.terms, b.terms), n, check=False)


def _and_pairwise(ta: Iterable[int], tb: Iterable[int]) -> frozenset:
    out: set[int] = set()
    for x in ta:
        for y in tb:
            t = x | y
            if t in out:
                out.remove(t)
            else:
                out.add(t)
    return frozenset(out)


def _and_pairwise_np(xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    prod = (xa[:, None] | xb[None, :]).ravel()
    vals, counts = np.unique(prod, return_counts=True)
    return vals[counts & 1 == 1]


def _compress(p: AnfPoly, positions: list[int]) -> np.ndarray:
    """Map term masks onto compact indices over the given bit positions."""
    arr = p.as_array()
    if arr is not None:
        out = np.zeros(len(arr), dtype=np.int64)
        for j, v in enumerate(positions):
            out |= ((arr >> np.uint64(v)) & np.uint64(1)).astype(np.int64) << j
        return out
    out = np.empty(len(p), dtype=np.int64)
    for n, t in enumerate(p.terms):
        c = 0
        for j, v in enumerate(positions):
            if t >> v & 1:
                c |= 1 << j
        out[n] = c
    return out


def _expand(compact: np.ndarray, positions: list[int], nvars: int) -> AnfPoly:
    if nvars <= 64:
        full = np.zeros(len(compact), dtype=np.uint64)
        for j, v in enumerate(positions):
            full |= ((compact >> j) & 1).astype(np.uint64) << np.uint64(v)
        full.sort()
        return AnfPoly.from_array(full, nvars)
    out = []
    for c in compact.tolist():
        t = 0
        for j, v in enumerate(positions):
            if c >> j & 1:
                t |= 1 << v
        out.append(t)
    return AnfPoly(frozenset(out), nvars, check=False)


def mobius(table: np.ndarray) -> np.ndarray:
    """In-place GF(2) Moebius transform of a length-2**s uint8 array.

    Maps ANF coefficients to truth-table values and back (it is an involution).
    """
    size = table.shape[0]
    h = 1
    while h < size:
        view = table.reshape(-1, 2, h)
        view[:, 1, :] ^= view[:, 0, :]
        h <<= 1
    return table


def _and_dense(a: AnfPoly, b: AnfPoly, support: int) -> AnfPoly:
    positions = [i - 1 for i in _indices_of(support)]
    size = 1 << len(positions)
    fa = np.zeros(size, dtype=np.uint8)
    fb = np.zeros(size, dtype=np.uint8)
    fa[_compress(a, positions)] = 1
    fb[_compress(b, positions)] = 1
    mobius(fa)
    mobius(fb)
    fa &= fb
    mobius(fa)
    return _expand(np.flatnonzero(fa), positions, a.nvars)


def assignment_mask(x: Sequence[int]) -> int:
    """Bitmask of the true variables of a 0/1 vector (x[0] is variable 1)."""
    mask = 0
    for i, b in enumerate(x):
        if b:
            mask |= 1 << i
    return mask


def eval_mask(p: AnfPoly, mask: int) -> int:
    """Evaluate at the assignment whose true variables are the bits of ``mask``."""
    if p._arr is not None:
        off = np.uint64(~mask & 0xFFFFFFFFFFFFFFFF)
        return int(np.count_nonzero((p._arr & off) == 0) & 1)
    off = ~mask
    parity = 0
    for t in p._terms:
        if not t & off:
            parity ^= 1
    return parity


def anf_eval(p: AnfPoly, x: Sequence[int]) -> int:
    if len(x) != p.nvars:
        raise ValueError(f"assignment length {len(x)} != nvars {p.nvars}")
    return eval_mask(p, assignment_mask(x))


def eval_many(p: AnfPoly, masks: Sequence[int]) -> np.ndarray:
    """Evaluate at many assignment masks at once; returns a uint8 array."""
    if p.nvars > 64 or not p:
        return np.array([eval_mask(p, m) for m in masks], dtype=np.uint8)
    terms = p.as_array()
    xs = np.asarray(masks, dtype=np.uint64)
    out = np.empty(len(xs), dtype=np.uint8)
    chunk = max(1, (1 << 22) // len(terms))
    for lo in range(0, len(xs), chunk):
        off = ~xs[lo:lo + chunk]
        hit = (terms[None, :] & off[:, None]) == 0
        out[lo:lo + chunk] = hit.sum(axis=1) & 1
    return out


def negated_clause_anf(clause, nvars: int | None = None) -> AnfPoly:
    """ANF of the negation of a clause.

    ``1 + OR_i (x_i + s_i) = AND_i (x_i + s_i + 1)``: a negated literal
    contributes the factor ``x_i`` and a positive one ``1 + x_i``, so the
    result is the sum over all subsets of the positive variables, each joined
    with the negated ones.
    """
    indices, signs = clause.indices, clause.signs
    if len(set(indices)) != len(indices):
        raise ValueError(f"duplicate variable in clause {indices}")
    if len(indices) != len(signs):
        raise ValueError("clause indices and signs differ in length")
    if nvars is None:
        nvars = max(indices, default=0)
    fixed = _mask_of(i for i, s in zip(indices, signs) if s)
    terms = [fixed]
    for i, s in zip(indices, signs):
        if not s:
            bit = 1 << (i - 1)
            terms += [t | bit for t in terms]
    return AnfPoly(frozenset(terms), nvars)


def subset_masks(vars: Sequence[int]) -> list[int]:
    """All monomials over ``vars``; entry ``b`` holds vars[j] iff bit j of b is set."""
    masks = [0]
    for v in vars:
        bit = 1 << (v - 1)
        masks += [m | bit for m in masks]
    return masks


def random_anf(vars: Sequence[int], rng, nvars: int | None = None,
               max_vars: int = RANDOM_ANF_MAX_VARS) -> AnfPoly:
    """Random polynomial over ``vars``: each monomial kept with probability 1/2.

    Consumes ``ceil(2**len(vars) / 8)`` bytes of ``rng``; monomial ``b`` (see
    ``subset_masks``) is kept iff bit ``b`` of that byte string, read
    little-endian within each byte, is set.
    """
    if len(vars) > max_vars:
        raise AnfSizeError(f"random_anf over {len(vars)} variables exceeds cap {max_vars}")
    if len(set(vars)) != len(vars):
        raise ValueError("random_anf variables must be distinct")
    if nvars is None:
        nvars = max(vars, default=0)
    masks = subset_masks(vars)
    keep = rng.bits(len(masks))
    return AnfPoly(frozenset(m for m, k in zip(masks, keep.tolist()) if k), nvars)


def truncate(p: AnfPoly, L: int) -> tuple[AnfPoly, int]:
    """Drop all terms of degree > L; return the result and the number dropped."""
    if L < 0:
        raise ValueError("L must be >= 0")
    if p._arr is not None:
        kept_arr = p._arr[np.bitwise_count(p._arr) <= L]
        return AnfPoly.from_array(kept_arr, p.nvars), len(p) - len(kept_arr)
    kept = frozenset(t for t in p.terms if t.bit_count() <= L)
    return AnfPoly(kept, p.nvars, check=False), len(p) - len(kept)
