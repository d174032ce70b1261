"""Multi-key chains: each bit encrypted under gamma keys, accepted by thresholded majority.

Tampering with a ciphertext in an unknown way makes its vote a coin flip.  With
``f`` tampered ciphers the recipient rejects whenever at least ``t`` votes
flipped, which blurs the yes/no signal an oracle attacker relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .anf import AnfPoly, anf_xor
from .cipher import BitEncryptor, RejectedCiphertext, decrypt_bit, select_tuples
from .keys import (PRIV_HEADER, PUB_HEADER, KeyFormatError, PrivateKey, PublicKey,
                   _parse_params, keygen)
from .prng import DeterministicRng

CHAIN_HEADER = "satcrypt-chain v1"
MK_CT_HEADER = "satcrypt-mkct v1"


@dataclass(frozen=True)
class KeyChain:
    pubs: tuple[PublicKey, ...]
    privs: tuple[PrivateKey, ...] | None
    t: int

    def __post_init__(self):
        g = len(self.pubs)
        if g < 1:
            raise ValueError("empty chain")
        if g > 1 and not 2 <= self.t <= g / 2:
            raise ValueError(f"threshold must satisfy 2 <= t <= gamma/2, got t={self.t}, gamma={g}")
        if len({(p.n, p.m, p.k) for p in self.pubs}) != 1:
            raise ValueError("all chain keys must share n, m, k")
        if self.privs is not None and len(self.privs) != g:
            raise ValueError("private and public key counts differ")

    @property
    def gamma(self) -> int:
        return len(self.pubs)

    def public(self) -> "KeyChain":
        return KeyChain(self.pubs, None, self.t)

    def pub_text(self) -> str:
        head = f"{CHAIN_HEADER}\ngamma={self.gamma} t={self.t}\n"
        return head + "".join(p.to_text() for p in self.pubs)

    def priv_text(self) -> str:
        if self.privs is None:
            raise ValueError("chain has no private keys")
        head = f"{CHAIN_HEADER}\ngamma={self.gamma} t={self.t}\n"
        return head + "".join(p.to_text() for p in self.privs)


def _split_blocks(text: str, header: str) -> list[str]:
    blocks: list[list[str]] = []
    for line in text.splitlines()[2:]:
        if line.strip() == header:
            blocks.append([])
        if not blocks:
            raise KeyFormatError("stray line before first key block")
        blocks[-1].append(line)
    return ["\n".join(b) + "\n" for b in blocks]


def _chain_params(text: str) -> tuple[int, int]:
    lines = text.splitlines()
    if len(lines) < 2 or lines[0].strip() != CHAIN_HEADER:
        raise KeyFormatError("missing chain header")
    p = _parse_params(lines[1], ("gamma", "t"))
    return p["gamma"], p["t"]


def load_chain(pub_text: str, priv_text: str | None = None) -> KeyChain:
    gamma, t = _chain_params(pub_text)
    pubs = tuple(PublicKey.from_text(b) for b in _split_blocks(pub_text, PUB_HEADER))
    if len(pubs) != gamma:
        raise KeyFormatError(f"chain declares {gamma} keys, found {len(pubs)}")
    privs = None
    if priv_text is not None:
        if _chain_params(priv_text) != (gamma, t):
            raise KeyFormatError("public and private chain headers differ")
        privs = tuple(PrivateKey.from_text(b) for b in _split_blocks(priv_text, PRIV_HEADER))
    return KeyChain(pubs, privs, t)


def default_threshold(gamma: int, c: float = 3) -> int:
    """``max(2, floor(gamma/2 - c/2 * sqrt(gamma)))``."""
    return max(2, math.floor(gamma / 2 - c / 2 * math.sqrt(gamma)))


def chain_keygen(gamma: int, n: int, m: int, k: int, rng: DeterministicRng,
                 t: int | None = None) -> KeyChain:
    pairs = [keygen(n, m, k, rng.fork(f"keygen:{j}")) for j in range(gamma)]
    if t is None:
        t = default_threshold(gamma) if gamma >= 4 else 2
    return KeyChain(tuple(p for _, p in pairs), tuple(s for s, _ in pairs), t)


class ChainEncryptor:
    """One tuple selection per key, reused across the bits of a message."""

    def __init__(self, pubs: Sequence[PublicKey], rng: DeterministicRng, beta: int = 2):
        self.encs = [BitEncryptor(p, select_tuples(p, rng.fork(f"tuple:{j}"), beta))
                     for j, p in enumerate(pubs)]

    def encrypt(self, y: int, rng: DeterministicRng) -> list[AnfPoly]:
        return [e.encrypt(y, rng.fork(f"rfun:{j}")) for j, e in enumerate(self.encs)]


def mk_encrypt(pubs: Sequence[PublicKey], y: int, rng: DeterministicRng, beta: int = 2) -> list[AnfPoly]:
    """Encrypt ``y`` independently under every key of the chain."""
    return ChainEncryptor(pubs, rng, beta).encrypt(y, rng)


def majority_vote(votes: Sequence[int], t: int) -> int:
    """Majority bit if the minority is smaller than ``t``; raise otherwise.

    An exact tie has no majority and is rejected.
    """
    ones = sum(votes)
    zeros = len(votes) - ones
    if ones == zeros:
        raise RejectedCiphertext("tied vote")
    if min(ones, zeros) >= t:
        raise RejectedCiphertext(f"minority of {min(ones, zeros)} reaches threshold {t}")
    return int(ones > zeros)


def mk_decrypt(privs: Sequence[PrivateKey], ciphers: Sequence[AnfPoly], t: int) -> int:
    if len(privs) != len(ciphers):
        raise ValueError(f"{len(ciphers)} ciphers for {len(privs)} keys")
    return majority_vote([decrypt_bit(p, g) for p, g in zip(privs, ciphers)], t)


def mk_decrypt_message(privs: Sequence[PrivateKey], rows: Sequence[Sequence[AnfPoly]], t: int) -> list[int]:
    """Per-bit thresholding; any rejected bit rejects the whole message."""
    return [mk_decrypt(privs, row, t) for row in rows]


def rejection_prob(t: int, f: int) -> Fraction:
    """Exact ``2**-f * sum_{T=t}^{f} C(f, T)``."""
    if t < 0 or f < 0:
        raise ValueError("t and f must be nonnegative")
    return Fraction(sum(math.comb(f, T) for T in range(t, f + 1)), 2 ** f)


def flip_tampered(votes: Sequence[int], tampered: Sequence[int], rng: DeterministicRng) -> list[int]:
    """The attack model: each tampered cipher's vote is replaced by a fair coin."""
    out = list(votes)
    for j in tampered:
        out[j] ^= rng.bit()
    return out


def tamper_cipher(g: AnfPoly, rng: DeterministicRng) -> AnfPoly:
    """Real-polynomial counterpart of the coin: XOR in constant 1 with probability 1/2."""
    return anf_xor(g, AnfPoly.one(g.nvars)) if rng.bit() else g


def simulate_rejection(gamma: int, t: int, f: int, trials: int, rng: DeterministicRng,
                       y: int = 1) -> float:
    """Empirical rejection rate with ``f`` of ``gamma`` honest votes flipped by coins.

    Counts rejections where at least ``t`` tampered votes disagree with ``y``,
    i.e. whenever the minority reaches the threshold.
    """
    if not 0 <= f <= gamma:
        raise ValueError("need 0 <= f <= gamma")
    rejected = 0
    for _ in range(trials):
        votes = flip_tampered([y] * gamma, range(f), rng)
        try:
            majority_vote(votes, t)
        except RejectedCiphertext:
            rejected += 1
    return rejected / trials


def mk_bits_to_text(rows: Sequence[Sequence[AnfPoly]], nvars: int) -> str:
    gamma = len(rows[0]) if rows else 0
    lines = [MK_CT_HEADER, f"n={nvars} gamma={gamma} bits={len(rows)}"]
    for row in rows:
        lines += [g.to_text() for g in row]
    return "\n".join(lines) + "\n"


def mk_bits_from_text(text: str) -> list[list[AnfPoly]]:
    lines = text.splitlines()
    if len(lines) < 2 or lines[0].strip() != MK_CT_HEADER:
        raise KeyFormatError("missing chain ciphertext header")
    p = _parse_params(lines[1], ("n", "gamma", "bits"))
    body = lines[2:]
    if len(body) != p["gamma"] * p["bits"]:
        raise KeyFormatError("line count does not match gamma * bits")
    polys = [AnfPoly.from_text(l, p["n"]) for l in body]
    g = p["gamma"]
    return [polys[i:i + g] for i in range(0, len(polys), g)]
