"""Independent reference implementations used only by the tests.

Nothing here imports the package's algebra: polynomials are sets of
frozensets of variable indices, evaluation is by definition, and ChaCha20 is
written out from RFC 8439.
"""

from __future__ import annotations

import itertools
import struct

# ChaCha20 (RFC 8439, section 2.3)


def _rotl(v, c):
    return ((v << c) & 0xFFFFFFFF) | (v >> (32 - c))


def _quarter(s, a, b, c, d):
    s[a] = (s[a] + s[b]) & 0xFFFFFFFF
    s[d] = _rotl(s[d] ^ s[a], 16)
    s[c] = (s[c] + s[d]) & 0xFFFFFFFF
    s[b] = _rotl(s[b] ^ s[c], 12)
    s[a] = (s[a] + s[b]) & 0xFFFFFFFF
    s[d] = _rotl(s[d] ^ s[a], 8)
    s[c] = (s[c] + s[d]) & 0xFFFFFFFF
    s[b] = _rotl(s[b] ^ s[c], 7)


def chacha20_block(key: bytes, counter: int, nonce: bytes) -> bytes:
    consts = [0x61707865, 0x3320646E, 0x79622D32, 0x6B206574]
    state = consts + list(struct.unpack("<8I", key)) + [counter] + list(struct.unpack("<3I", nonce))
    w = list(state)
    for _ in range(10):
        _quarter(w, 0, 4, 8, 12)
        _quarter(w, 1, 5, 9, 13)
        _quarter(w, 2, 6, 10, 14)
        _quarter(w, 3, 7, 11, 15)
        _quarter(w, 0, 5, 10, 15)
        _quarter(w, 1, 6, 11, 12)
        _quarter(w, 2, 7, 8, 13)
        _quarter(w, 3, 4, 9, 14)
    return struct.pack("<16I", *[(a + b) & 0xFFFFFFFF for a, b in zip(w, state)])


def chacha20_stream(key: bytes, nbytes: int, nonce: bytes = bytes(12), counter: int = 0) -> bytes:
    out = b""
    while len(out) < nbytes:
        out += chacha20_block(key, counter, nonce)
        counter += 1
    return out[:nbytes]


# ANF by definition


def poly(*terms) -> frozenset:
    """XOR of the given index tuples, cancelling repeats."""
    acc = set()
    for t in terms:
        acc ^= {frozenset(t)}
    return frozenset(acc)


def evaluate(p, x) -> int:
    """x is a 0/1 sequence with x[0] the value of variable 1."""
    v = 0
    for t in p:
        v ^= all(x[i - 1] for i in t)
    return v


def xor(a, b):
    return frozenset(set(a) ^ set(b))


def mul(a, b):
    acc = set()
    for s in a:
        for t in b:
            acc ^= {s | t}
    return frozenset(acc)


def all_inputs(n: int):
    return itertools.product((0, 1), repeat=n)


def anf_from_function(f, n: int):
    """Coefficient of monomial S is the XOR of f over all inputs supported inside S."""
    out = set()
    for r in range(n + 1):
        for S in itertools.combinations(range(1, n + 1), r):
            c = 0
            for sub_r in range(len(S) + 1):
                for sub in itertools.combinations(S, sub_r):
                    x = [0] * n
                    for i in sub:
                        x[i - 1] = 1
                    c ^= f(x)
            if c:
                out.add(frozenset(S))
    return frozenset(out)


def clause_value(literals, x) -> int:
    return int(any((x[abs(l) - 1] == 1) == (l > 0) for l in literals))


def brute_force_sat(n: int, clauses) -> bool:
    return any(all(clause_value(c, x) for c in clauses) for x in all_inputs(n))


def xor_distribution(p1, M: int):
    """P(xor = 0), P(xor = 1) by enumerating all 2**M outcome vectors (exact for Fractions)."""
    p0 = q1 = p1 * 0
    for bits in all_inputs(M):
        w = p1 ** 0
        for b in bits:
            w *= p1 if b else 1 - p1
        if sum(bits) % 2:
            q1 += w
        else:
            p0 += w
    return p0, q1
