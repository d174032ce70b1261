"""Deterministic randomness, seed derivation and hash commitments.

Hash: SHA-256.  Keystream: ChaCha20 keyed with the 32-byte seed, all-zero
nonce, block counter starting at 0 (the plain keystream, i.e. ChaCha20
encryption of zero bytes).  Two parties holding the same seed therefore draw
bit-identical streams; everything else in this package derives its random
choices from this stream through the sampling rules documented below.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
from dataclasses import dataclass

import numpy as np
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

SEED_TAG = b"satcrypt/seed/v1\x00"
FORK_TAG = b"satcrypt/fork/v1\x00"

LABELS = ("keygen", "tuple", "rfun", "msgxform", "zk")

_MASK64 = (1 << 64) - 1
_CHUNK = 4096


def sha256(*parts: bytes) -> bytes:
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
    return h.digest()


class DeterministicRng:
    """ChaCha20 keystream reader with a few sampling helpers.

    Not thread-safe; use ``fork`` to hand independent sub-streams to workers.
    """

    def __init__(self, seed: bytes):
        if len(seed) != 32:
            raise ValueError("seed must be 32 bytes")
        self.seed = bytes(seed)
        self._enc = Cipher(algorithms.ChaCha20(self.seed, bytes(16)), mode=None).encryptor()
        self._buf = b""
        self._pos = 0
        self.position = 0

    @classmethod
    def from_label(cls, material: bytes | str) -> "DeterministicRng":
        if isinstance(material, str):
            material = material.encode()
        return cls(sha256(b"satcrypt/rng/v1\x00", material))

    @property
    def seed_hex(self) -> str:
        return self.seed.hex()

    def fork(self, label: str) -> "DeterministicRng":
        """Independent child stream named by ``label``; does not advance self."""
        return DeterministicRng(sha256(FORK_TAG, self.seed, label.encode()))

    def read(self, n: int) -> bytes:
        if n < 0:
            raise ValueError("negative read")
        avail = len(self._buf) - self._pos
        if n <= avail:
            out = self._buf[self._pos:self._pos + n]
            self._pos += n
        else:
            need = n - avail
            fresh = self._enc.update(bytes(max(_CHUNK, need)))
            out = self._buf[self._pos:] + fresh[:need]
            self._buf, self._pos = fresh, need
        self.position += n
        return out

    def bits(self, count: int) -> np.ndarray:
        """``count`` bits from ``ceil(count/8)`` fresh bytes, LSB first per byte."""
        raw = np.frombuffer(self.read((count + 7) // 8), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[:count]

    def bit(self) -> int:
        return self.read(1)[0] & 1

    def u64(self) -> int:
        return int.from_bytes(self.read(8), "little")

    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound) by multiply-shift with rejection.

        Draw a 64-bit word x, form x*bound; the high 64 bits are the sample.
        The low 64 bits below (2**64 - bound) % bound signal a biased slot and
        trigger a redraw.
        """
        if not 0 < bound <= _MASK64:
            raise ValueError("bound out of range")
        m = self.u64() * bound
        low = m & _MASK64
        if low < bound:
            threshold = ((1 << 64) - bound) % bound
            while low < threshold:
                m = self.u64() * bound
                low = m & _MASK64
        return m >> 64

    def shuffle(self, items: list) -> list:
        """In-place Fisher-Yates, walking from the end."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def permutation(self, n: int) -> list[int]:
        return self.shuffle(list(range(n)))


def derive_seed(salt: bytes, cleartext: bytes) -> bytes:
    if len(salt) != 32:
        raise ValueError("salt must be exactly 32 bytes")
    return sha256(SEED_TAG, salt, cleartext)


def fresh_salt() -> bytes:
    """The one place OS entropy enters the package."""
    return secrets.token_bytes(32)


@dataclass(frozen=True)
class Commitment:
    digest: bytes

    def hex(self) -> str:
        return self.digest.hex()


@dataclass(frozen=True)
class Opening:
    nonce: bytes
    payload: bytes


def commitment_digest(nonce: bytes, payload: bytes) -> bytes:
    return sha256(nonce, payload)


def commit(payload: bytes, rng: DeterministicRng) -> tuple[Commitment, Opening]:
    nonce = rng.read(32)
    return Commitment(commitment_digest(nonce, payload)), Opening(nonce, payload)


def verify_opening(c: Commitment, nonce: bytes, payload: bytes) -> bool:
    if len(nonce) != 32:
        return False
    return hmac.compare_digest(c.digest, commitment_digest(nonce, payload))
