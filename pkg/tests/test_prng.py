import hashlib
from collections import Counter

import pytest
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

import oracles
from satcrypt.prng import (SEED_TAG, DeterministicRng, commit, derive_seed, fresh_salt,
                           verify_opening)

RFC_KEY = bytes(range(32))
RFC_NONCE = bytes.fromhex("000000090000004a00000000")
# first 32 bytes of the block-function test vector (counter 1)
RFC_BLOCK = bytes.fromhex("10f1e7e4d13b5915500fdd1fa32071c4c7d1f4c733c068030422aa9ac3d46c4e")


def test_chacha_oracle_matches_rfc_vector():
    assert oracles.chacha20_block(RFC_KEY, 1, RFC_NONCE)[:32] == RFC_BLOCK


def test_library_matches_rfc_vector():
    nonce = (1).to_bytes(4, "little") + RFC_NONCE
    ks = Cipher(algorithms.ChaCha20(RFC_KEY, nonce), mode=None).encryptor().update(bytes(32))
    assert ks == RFC_BLOCK


def test_stream_matches_independent_chacha():
    seed = hashlib.sha256(b"any seed").digest()
    rng = DeterministicRng(seed)
    # irregular read sizes cross the internal buffer boundary
    got = b"".join(rng.read(s) for s in (1, 63, 4000, 100, 5000))
    assert got == oracles.chacha20_stream(seed, len(got))
    assert rng.position == len(got)


def test_seed_length_checked():
    with pytest.raises(ValueError):
        DeterministicRng(b"short")


def test_fork_is_stable_and_separated():
    root = DeterministicRng.from_label("fork")
    a1 = root.fork("tuple").read(64)
    a2 = root.fork("tuple").read(64)
    b = root.fork("rfun").read(64)
    assert a1 == a2 != b
    assert root.position == 0


def test_bits_are_lsb_first():
    rng1, rng2 = DeterministicRng.from_label("b"), DeterministicRng.from_label("b")
    byte = rng2.read(1)[0]
    assert rng1.bits(8).tolist() == [byte >> j & 1 for j in range(8)]


def test_randbelow_power_of_two_takes_top_bits():
    r1, r2 = DeterministicRng.from_label("p2"), DeterministicRng.from_label("p2")
    for _ in range(100):
        assert r1.randbelow(1 << 10) == r2.u64() >> 54


def test_randbelow_uniform(rng):
    bound = 7
    N = 70_000
    counts = Counter(rng.randbelow(bound) for _ in range(N))
    assert set(counts) == set(range(bound))
    # chi-square with 6 degrees of freedom; 22.5 is the 0.999 quantile
    chi2 = sum((c - N / bound) ** 2 / (N / bound) for c in counts.values())
    assert chi2 < 22.5


def test_randbelow_bounds(rng):
    with pytest.raises(ValueError):
        rng.randbelow(0)
    assert rng.randbelow(1) == 0


def test_shuffle_is_permutation(rng):
    p = rng.permutation(50)
    assert sorted(p) == list(range(50)) and p != list(range(50))


def test_derive_seed():
    salt = bytes(32)
    s = derive_seed(salt, b"hello")
    assert s == derive_seed(salt, b"hello")
    assert s == hashlib.sha256(SEED_TAG + salt + b"hello").digest()
    other_salt = bytearray(salt)
    other_salt[5] ^= 1
    assert derive_seed(bytes(other_salt), b"hello") != s
    assert derive_seed(salt, b"hellp") != s  # 'o' and 'p' differ in one bit
    with pytest.raises(ValueError):
        derive_seed(b"x" * 31, b"")


def test_fresh_salt():
    a, b = fresh_salt(), fresh_salt()
    assert len(a) == 32 and a != b


def test_commit_open(rng):
    c, op = commit(b"payload", rng)
    assert verify_opening(c, op.nonce, b"payload")
    assert not verify_opening(c, op.nonce, b"payloae")
    c2, op2 = commit(b"payload", rng)
    assert op.nonce != op2.nonce and c.digest != c2.digest
    assert c.hex() == c.digest.hex() and len(c.hex()) == 64


def test_commitment_binding_under_random_tampering(rng):
    c, op = commit(b"\x00\x00\x00\x07\x01", rng)
    payload = bytearray(op.payload)
    nonce = bytearray(op.nonce)
    for _ in range(100_000):
        pos = rng.randbelow(len(payload) + len(nonce))
        flip = rng.randbelow(255) + 1
        p, nn = bytearray(payload), bytearray(nonce)
        if pos < len(p):
            p[pos] ^= flip
        else:
            nn[pos - len(p)] ^= flip
        assert not verify_opening(c, bytes(nn), bytes(p))
