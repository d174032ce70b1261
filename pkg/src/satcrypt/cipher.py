"""Bitwise encryption with planted k-SAT keys, plus the honest (re-encryptable) mode.

A ciphertext bit for ``y`` is the polynomial

    g = y + sum_{i,a} cbar_{J(i,a)} * R_{i,a}

where ``cbar_j`` is the negation of clause ``j`` (zero on the private key) and
``R_{i,a}`` is a random polynomial over the variables of the other clauses in
tuple ``i``.  Decryption is evaluation at the private key.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .anf import (AnfPoly, _and_pairwise, anf_and, eval_mask, negated_clause_anf,
                  random_anf, subset_masks)
from .keys import KeyFormatError, PrivateKey, PublicKey, _parse_params
from .prng import DeterministicRng, derive_seed, sha256

log = logging.getLogger(__name__)

BLOCK_BITS = 128
LENGTH_PREFIX_BYTES = 8
CT_HEADER = "satcrypt-ct v1"
BITS_HEADER = "satcrypt-bits v1"

# Plain ciphertext bits are just polynomials; the alias documents intent.
CiphertextBit = AnfPoly


class RejectedCiphertext(Exception):
    """Honest-mode verification failed; no plaintext is released."""


@dataclass(frozen=True)
class TupleSelection:
    """``J[i][a]`` is the 1-based clause index of summand ``a`` in tuple ``i``."""

    J: tuple[tuple[int, ...], ...]
    sigma: tuple[int, ...] = ()

    def __post_init__(self):
        for row in self.J:
            if len(set(row)) != len(row):
                raise ValueError(f"tuple {row} repeats a clause")
        if self.J and len({len(r) for r in self.J}) != 1:
            raise ValueError("all tuples must have the same width")

    @property
    def alpha(self) -> int:
        return len(self.J)

    @property
    def beta(self) -> int:
        return len(self.J[0]) if self.J else 0

    def used_clauses(self) -> set[int]:
        return {j for row in self.J for j in row}

    @classmethod
    def cyclic(cls, sigma: Sequence[int], beta: int) -> "TupleSelection":
        """Windows ``J(i,a) = sigma(i+a-1)`` with indices taken modulo m."""
        m = len(sigma)
        J = tuple(tuple(sigma[(i + a) % m] for a in range(beta)) for i in range(m))
        return cls(J, tuple(sigma))


def _isolated_at(pub: PublicKey, row: Sequence[int], a: int) -> bool:
    """Clause ``row[a]`` is negation-free and shares no variable with the rest of ``row``."""
    c = pub.clauses[row[a] - 1]
    if any(c.signs):
        return False
    others = 0
    for b, j in enumerate(row):
        if b != a:
            others |= pub.clauses[j - 1].var_mask
    return not c.var_mask & others


def _isolated_all_positive(pub: PublicKey, row: Sequence[int]) -> bool:
    return any(_isolated_at(pub, row, a) for a in range(len(row)))


def select_tuples(pub: PublicKey, rng: DeterministicRng, beta: int = 2,
                  max_swaps: int | None = None) -> TupleSelection:
    """Cyclic tuple selection over a greedily built clause order.

    The order starts at a random clause; each next clause is drawn uniformly
    from the unused clauses sharing a variable with the previous one, or from
    all unused clauses if there is none.  Windows that still contain a
    negation-free clause isolated from its tuple-mates are repaired by up to
    ``max_swaps`` (default m) swaps.  Each moves an isolated clause to a
    position drawn among those giving the largest drop in such windows.
    """
    m = pub.m
    if beta < 1 or m < beta:
        raise ValueError(f"need 1 <= beta <= m, got beta={beta}, m={m}")
    by_var: dict[int, list[int]] = defaultdict(list)
    for j, c in enumerate(pub.clauses):
        for v in c.indices:
            by_var[v].append(j)

    pool = list(range(m))
    where = list(range(m))
    used = [False] * m

    def take(j: int) -> None:
        p = where[j]
        last = pool[-1]
        pool[p], where[last] = last, p
        pool.pop()
        used[j] = True

    first = rng.randbelow(m)
    order = [first]
    take(first)
    while pool:
        prev = pub.clauses[order[-1]]
        cands = sorted({j for v in prev.indices for j in by_var[v] if not used[j]})
        nxt = cands[rng.randbelow(len(cands))] if cands else pool[rng.randbelow(len(pool))]
        order.append(nxt)
        take(nxt)

    sigma = [j + 1 for j in order]

    def window(i: int) -> list[int]:
        return [sigma[(i + a) % m] for a in range(beta)]

    bad = {i for i in range(m) if _isolated_all_positive(pub, window(i))}
    if bad:
        budget = m if max_swaps is None else max_swaps

        def gain(p: int, q: int) -> tuple[int, set[int], set[int]]:
            touched = {(x - d) % m for x in (p, q) for d in range(beta)}
            before = sum(1 for w in touched if w in bad)
            sigma[p], sigma[q] = sigma[q], sigma[p]
            now_bad = {w for w in touched if _isolated_all_positive(pub, window(w))}
            sigma[p], sigma[q] = sigma[q], sigma[p]
            return before - len(now_bad), touched, now_bad

        stuck: set[int] = set()
        swaps = 0
        while swaps < budget:
            todo = sorted(bad - stuck)
            if not todo:
                break
            i = todo[rng.randbelow(len(todo))]
            row = window(i)
            a = next(a for a in range(beta) if _isolated_at(pub, row, a))
            p = (i + a) % m
            best, moves, level = 0, [], []
            for q in range(m):
                if q == p:
                    continue
                g, touched, now_bad = gain(p, q)
                if g > best:
                    best, moves = g, [(q, touched, now_bad)]
                elif g == best and g > 0:
                    moves.append((q, touched, now_bad))
                elif g == 0:
                    level.append((q, touched, now_bad))
            if not moves:
                # no single swap helps: take a neutral one to leave the plateau
                stuck.add(i)
                if stuck < bad or not level:
                    continue
                moves = level
            q, touched, now_bad = moves[rng.randbelow(len(moves))]
            sigma[p], sigma[q] = sigma[q], sigma[p]
            bad = (bad - touched) | now_bad
            stuck.clear()
            swaps += 1
        if bad:
            log.warning("%d tuple(s) keep an isolated negation-free clause", len(bad))
    return TupleSelection.cyclic(sigma, beta)


def check_conditions(pub: PublicKey, sel: TupleSelection) -> dict[str, bool]:
    """Report the three tuple conditions: (a) sharing, (b) overlap, (c) coverage."""
    a = not any(_isolated_all_positive(pub, row) for row in sel.J)
    members: dict[int, set[int]] = defaultdict(set)
    for i, row in enumerate(sel.J):
        for j in row:
            members[j].add(i)
    b = all(any(len(members[j]) > 1 for j in row) for row in sel.J) if sel.alpha > 1 else False
    c = sel.used_clauses() == set(range(1, pub.m + 1))
    return {"a": a, "b": b, "c": c}


@lru_cache(maxsize=8)
def negated_clauses(pub: PublicKey) -> tuple[AnfPoly, ...]:
    return tuple(negated_clause_anf(c, pub.n) for c in pub.clauses)


def _random_vars(pub: PublicKey, row: Sequence[int], a: int) -> list[int]:
    mask = 0
    for b, j in enumerate(row):
        if b != a:
            mask |= pub.clauses[j - 1].var_mask
    return [v for v in range(1, pub.n + 1) if mask >> (v - 1) & 1]


def encrypt_bit(pub: PublicKey, y: int, sel: TupleSelection, rng: DeterministicRng,
                summands: list | None = None) -> AnfPoly:
    """Encrypt one bit directly from the defining sum.

    Random polynomials are drawn tuple by tuple, summand by summand, each via
    ``random_anf`` over the sorted variable list of the other clauses in its
    tuple.  If ``summands`` is a list, every product ``cbar * R`` is appended.
    This is the reference path; ``BitEncryptor`` yields identical output faster.
    """
    cbar = negated_clauses(pub)
    acc = {0} if y & 1 else set()
    for row in sel.J:
        for a, j in enumerate(row):
            R = random_anf(_random_vars(pub, row, a), rng, pub.n)
            s = anf_and(cbar[j - 1], R)
            if summands is not None:
                summands.append(s)
            acc.symmetric_difference_update(s.terms)
    return AnfPoly(frozenset(acc), pub.n, check=False)


class BitEncryptor:
    """Encryption compiled for one (public key, tuple selection) pair.

    ``cbar * R`` is linear in the coefficient vector of ``R``, so every summand
    is a sum of precomputed products ``cbar * r`` over monomials ``r`` chosen by
    the random bits.  Encrypting a bit then reduces to a parity count over
    term ids.  Random bits are consumed exactly as in ``encrypt_bit``.
    """

    def __init__(self, pub: PublicKey, sel: TupleSelection):
        self.pub = pub
        self.sel = sel
        cbar = negated_clauses(pub)
        products: list[frozenset] = []
        bitpos: list[int] = []
        offset = 0
        for row in sel.J:
            for a, j in enumerate(row):
                masks = subset_masks(_random_vars(pub, row, a))
                base = cbar[j - 1].terms
                for b, r in enumerate(masks):
                    products.append(_and_pairwise(base, (r,)))
                    bitpos.append(offset * 8 + b)
                offset += (len(masks) + 7) // 8
        self.nbytes = offset
        # term ids follow ascending mask order; id 0 is the constant monomial
        table = sorted(set().union(*products) | {0})
        ids = {t: i for i, t in enumerate(table)}
        self._flat = np.fromiter((ids[t] for p in products for t in p), dtype=np.int64)
        self._lens = np.fromiter((len(p) for p in products), dtype=np.int64, count=len(products))
        self._bitpos = np.asarray(bitpos, dtype=np.int64)
        self._nterms = len(table)
        self._table_np = np.asarray(table, dtype=np.uint64) if pub.n <= 64 else None
        self._table = table
        # incidence grouped by term, for the batched path
        owner = np.repeat(np.arange(len(products)), self._lens)
        order = np.argsort(self._flat, kind="stable")
        self._owner_by_term = owner[order]
        present, starts = np.unique(self._flat[order], return_index=True)
        self._present = present
        self._starts = starts

    def encrypt(self, y: int, rng: DeterministicRng) -> AnfPoly:
        raw = np.frombuffer(rng.read(self.nbytes), dtype=np.uint8)
        chosen = np.unpackbits(raw, bitorder="little")[self._bitpos].astype(bool)
        ids = self._flat[np.repeat(chosen, self._lens)]
        parity = np.bincount(ids, minlength=self._nterms) & 1
        parity[0] ^= y & 1
        odd = np.flatnonzero(parity)
        if self._table_np is not None:
            return AnfPoly.from_array(self._table_np[odd], self.pub.n)
        return AnfPoly(frozenset(self._table[i] for i in odd.tolist()), self.pub.n, check=False)

    def encrypt_many(self, ys: Sequence[int], rngs: Sequence[DeterministicRng],
                     chunk: int = 512) -> list[AnfPoly]:
        """Encrypt many bits at once; same output as ``encrypt`` bit by bit.

        Choice bits are packed along the batch axis, so each term's parity is
        an XOR-reduction of the packed rows of the products containing it.
        """
        if len(ys) != len(rngs):
            raise ValueError("need one rng per bit")
        out: list[AnfPoly] = []
        for lo in range(0, len(ys), chunk):
            out += self._encrypt_chunk(ys[lo:lo + chunk], rngs[lo:lo + chunk])
        return out

    def _encrypt_chunk(self, ys, rngs) -> list[AnfPoly]:
        B = len(ys)
        if not B:
            return []
        raw = np.frombuffer(b"".join(r.read(self.nbytes) for r in rngs), dtype=np.uint8)
        bits = np.unpackbits(raw.reshape(B, self.nbytes), axis=1, bitorder="little")
        chosen = bits[:, self._bitpos]
        packed = np.ascontiguousarray(np.packbits(chosen, axis=0, bitorder="little").T)
        acc = np.zeros((self._nterms, packed.shape[1]), dtype=np.uint8)
        if len(self._present):
            acc[self._present] = np.bitwise_xor.reduceat(
                packed[self._owner_by_term], self._starts, axis=0)
        acc[0] ^= np.packbits(np.asarray(ys, dtype=np.uint8) & 1, bitorder="little")
        table = np.unpackbits(acc, axis=1, bitorder="little")[:, :B].T
        polys = []
        for row in table:
            odd = np.flatnonzero(row)
            if self._table_np is not None:
                polys.append(AnfPoly.from_array(self._table_np[odd], self.pub.n))
            else:
                polys.append(AnfPoly(frozenset(self._table[i] for i in odd.tolist()),
                                     self.pub.n, check=False))
        return polys


def decrypt_bit(priv: PrivateKey, g: AnfPoly) -> int:
    if g.nvars != priv.n:
        raise ValueError(f"ciphertext over {g.nvars} variables, key has {priv.n}")
    return eval_mask(g, priv.mask)


# message transform


def _gf2_inverse(rows: list[int], size: int) -> list[int] | None:
    a = list(rows)
    inv = [1 << i for i in range(size)]
    for col in range(size):
        bit = 1 << col
        piv = next((r for r in range(col, size) if a[r] & bit), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        for r in range(size):
            if r != col and a[r] & bit:
                a[r] ^= a[col]
                inv[r] ^= inv[col]
    return inv


@lru_cache(maxsize=8)
def transform_matrices(pub: PublicKey, size: int = BLOCK_BITS) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Invertible GF(2) matrix (as row bitmasks) and its inverse, fixed per key.

    Rows are read as little-endian ``size``-bit integers from a stream seeded by
    ``H(public key text || "msgxform")``; singular draws are discarded whole.
    """
    rng = DeterministicRng(sha256(pub.to_text().encode(), b"msgxform"))
    nbytes = size // 8
    while True:
        rows = [int.from_bytes(rng.read(nbytes), "little") for _ in range(size)]
        inv = _gf2_inverse(rows, size)
        if inv is not None:
            return tuple(rows), tuple(inv)


def _apply(rows: Sequence[int], vec: int) -> int:
    out = 0
    for i, r in enumerate(rows):
        if (r & vec).bit_count() & 1:
            out |= 1 << i
    return out


def message_transform(bits: Sequence[int], pub: PublicKey, direction: str = "forward") -> list[int]:
    """Multiply each 128-bit block by the key's fixed matrix (or its inverse).

    Input is zero-padded to a whole number of blocks.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be 'forward' or 'inverse'")
    fwd, inv = transform_matrices(pub)
    rows = fwd if direction == "forward" else inv
    bits = list(bits) + [0] * (-len(bits) % BLOCK_BITS)
    out: list[int] = []
    for lo in range(0, len(bits), BLOCK_BITS):
        vec = 0
        for j, b in enumerate(bits[lo:lo + BLOCK_BITS]):
            if b:
                vec |= 1 << j
        res = _apply(rows, vec)
        out += [res >> j & 1 for j in range(BLOCK_BITS)]
    return out


def encode_message(cleartext: bytes) -> list[int]:
    data = len(cleartext).to_bytes(LENGTH_PREFIX_BYTES, "big") + cleartext
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8)).tolist()
    return bits + [0] * (-len(bits) % BLOCK_BITS)


def decode_message(bits: Sequence[int]) -> bytes:
    if len(bits) % 8:
        raise ValueError("bit count is not a whole number of bytes")
    data = np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()
    if len(data) < LENGTH_PREFIX_BYTES:
        raise ValueError("missing length prefix")
    n = int.from_bytes(data[:LENGTH_PREFIX_BYTES], "big")
    body = data[LENGTH_PREFIX_BYTES:]
    if n > len(body) or any(body[n:]):
        raise ValueError("inconsistent length prefix or padding")
    return body[:n]


# honest mode


@dataclass(frozen=True)
class HonestCiphertext:
    salt: bytes
    n: int
    m: int
    k: int
    alpha: int
    beta: int
    bits: tuple[AnfPoly, ...]
    block: int = BLOCK_BITS

    def to_text(self) -> str:
        lines = [
            CT_HEADER,
            f"n={self.n} m={self.m} k={self.k} alpha={self.alpha} beta={self.beta} "
            f"block={self.block} bits={len(self.bits)}",
            self.salt.hex(),
        ]
        lines += [g.to_text() for g in self.bits]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "HonestCiphertext":
        lines = text.splitlines()
        if len(lines) < 3 or lines[0].strip() != CT_HEADER:
            raise KeyFormatError("missing ciphertext header")
        p = _parse_params(lines[1], ("n", "m", "k", "alpha", "beta", "block", "bits"))
        try:
            salt = bytes.fromhex(lines[2].strip())
        except ValueError as exc:
            raise KeyFormatError("bad salt") from exc
        body = lines[3:]
        if len(body) != p["bits"]:
            raise KeyFormatError(f"expected {p['bits']} bit lines, found {len(body)}")
        try:
            bits = tuple(AnfPoly.from_text(l, p["n"]) for l in body)
        except ValueError as exc:
            raise KeyFormatError(str(exc)) from exc
        return cls(salt, p["n"], p["m"], p["k"], p["alpha"], p["beta"], bits, p["block"])


def min_cleartext_bytes(pub: PublicKey) -> int:
    return max(1, pub.n // 8)


def encrypt_message(pub: PublicKey, cleartext: bytes, salt: bytes, beta: int = 2) -> HonestCiphertext:
    """Deterministic encryption seeded by ``derive_seed(salt, cleartext)``.

    Sub-streams: ``tuple`` draws the clause order (one selection per message),
    ``rfun:<i>`` draws the random polynomials of message bit ``i``.
    """
    if len(cleartext) < min_cleartext_bytes(pub):
        log.warning("cleartext of %d bytes is short for n=%d; the seed may be guessable",
                    len(cleartext), pub.n)
    root = DeterministicRng(derive_seed(salt, cleartext))
    sel = select_tuples(pub, root.fork("tuple"), beta)
    enc = BitEncryptor(pub, sel)
    bits = message_transform(encode_message(cleartext), pub, "forward")
    polys = tuple(enc.encrypt_many(bits, [root.fork(f"rfun:{i}") for i in range(len(bits))]))
    return HonestCiphertext(salt, pub.n, pub.m, pub.k, sel.alpha, sel.beta, polys)


def decrypt_verify(priv: PrivateKey, pub: PublicKey, ct: HonestCiphertext) -> bytes:
    """Decrypt, re-encrypt from the recovered seed, and release only on exact match."""
    try:
        if (ct.n, ct.m, ct.k) != (pub.n, pub.m, pub.k) or priv.n != pub.n:
            raise ValueError("parameter mismatch")
        if ct.block != BLOCK_BITS or len(ct.bits) % BLOCK_BITS or len(ct.salt) != 32:
            raise ValueError("malformed ciphertext")
        raw = [decrypt_bit(priv, g) for g in ct.bits]
        cleartext = decode_message(message_transform(raw, pub, "inverse"))
        expected = encrypt_message(pub, cleartext, ct.salt, ct.beta)
    except (ValueError, IndexError) as exc:
        raise RejectedCiphertext("ciphertext rejected") from exc
    if expected.alpha != ct.alpha or expected.bits != ct.bits:
        raise RejectedCiphertext("ciphertext rejected")
    return cleartext


# plain bit files (used for homomorphic evaluation and plain-mode encryption)


def bits_to_text(polys: Sequence[AnfPoly], nvars: int) -> str:
    lines = [BITS_HEADER, f"n={nvars} bits={len(polys)}"] + [g.to_text() for g in polys]
    return "\n".join(lines) + "\n"


def bits_from_text(text: str) -> list[AnfPoly]:
    lines = text.splitlines()
    if len(lines) < 2 or lines[0].strip() != BITS_HEADER:
        raise KeyFormatError("missing bits header")
    p = _parse_params(lines[1], ("n", "bits"))
    body = lines[2:]
    if len(body) != p["bits"]:
        raise KeyFormatError(f"expected {p['bits']} bit lines, found {len(body)}")
    return [AnfPoly.from_text(l, p["n"]) for l in body]
