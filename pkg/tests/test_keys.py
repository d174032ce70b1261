from collections import Counter

import pytest

import oracles
from satcrypt.anf import anf_eval, negated_clause_anf
from satcrypt.keys import (Clause, KeyFormatError, Params, PrivateKey, PublicKey, draw_clause,
                           encoded_key_bits, export_dimacs, keygen, parse_dimacs,
                           public_key_from_dimacs)


def test_keygen_planted(rng):
    stats = {}
    priv, pub = keygen(40, 200, 3, rng, stats)
    assert pub.m == 200 and pub.n == 40 and priv.n == 40
    assert pub.evaluate(priv.bits) == 1
    for c in pub.clauses:
        assert c.evaluate(priv.bits) == 1
        assert anf_eval(negated_clause_anf(c, 40), priv.bits) == 0
        assert len(set(c.indices)) == 3
    assert stats["accepted"] == 200


def test_keygen_deterministic():
    from satcrypt.prng import DeterministicRng
    a = keygen(20, 50, 3, DeterministicRng.from_label("same"))
    b = keygen(20, 50, 3, DeterministicRng.from_label("same"))
    assert a == b
    assert a[1].to_text() == b[1].to_text()


def test_keygen_rejects_bad_sizes(rng):
    with pytest.raises(ValueError):
        keygen(2, 5, 3, rng)
    with pytest.raises(ValueError):
        keygen(10, 5, 2, rng)


def test_toy_pair_is_valid(toy_pair):
    priv, pub = toy_pair
    assert pub.evaluate(priv.bits) == 1


def test_rejection_rate(rng):
    stats = {}
    keygen(30, 10_000, 3, rng, stats)
    draws = stats["accepted"] + stats["rejected"]
    p = stats["rejected"] / draws
    sigma = (1 / 8 * 7 / 8 / draws) ** 0.5
    assert abs(p - 1 / 8) <= 3 * sigma


def test_sign_patterns_uniform_among_accepted(rng):
    priv, pub = keygen(30, 10_000, 3, rng)
    # pattern relative to the private key: which literals are true at priv
    counts = Counter(tuple(priv.bits[i - 1] ^ s for i, s in zip(c.indices, c.signs))
                     for c in pub.clauses)
    assert len(counts) == 7 and (0, 0, 0) not in counts
    sigma = (1 / 7 * 6 / 7 / 10_000) ** 0.5
    for v in counts.values():
        assert abs(v / 10_000 - 1 / 7) <= 3 * sigma


def test_draw_clause_distinct(rng):
    for _ in range(200):
        c = draw_clause(4, 4, rng)
        assert sorted(c.indices) == [1, 2, 3, 4]


def test_encoded_key_bits():
    assert encoded_key_bits(1024, 5120, 3) == 168_960
    assert encoded_key_bits(2, 1, 1) == 2
    assert encoded_key_bits(350, 3500, 4) == 140_000


def test_clause_validation():
    with pytest.raises(ValueError):
        Clause((1, 1, 2), (0, 0, 0))
    with pytest.raises(ValueError):
        Clause((1, 2), (0,))
    with pytest.raises(ValueError):
        Clause((0, 2, 3), (0, 0, 0))
    assert Clause.from_literals((-1, 4, 5)).literals == (-1, 4, 5)


def test_dimacs_toy(toy_pair):
    _, pub = toy_pair
    assert export_dimacs(pub) == "p cnf 7 3\n-1 -2 -3 0\n-1 4 5 0\n1 6 7 0\n"


def test_dimacs_empty():
    assert export_dimacs(PublicKey(5, 3, ())).strip() == "p cnf 5 0"


def test_dimacs_round_trip(key32):
    _, pub = key32
    text = export_dimacs(pub)
    n, clauses = parse_dimacs(text)
    assert n == pub.n
    assert Counter(clauses) == Counter(c.literals for c in pub.clauses)
    assert public_key_from_dimacs(text) == pub


def test_dimacs_parser_tolerates_comments_and_wrapping():
    text = "c hello\np cnf 4 2\n1 -2\n 3 0 -4\n0\n"
    assert parse_dimacs(text) == (4, [(1, -2, 3), (-4,)])
    with pytest.raises(KeyFormatError):
        parse_dimacs("p cnf 4 3\n1 2 0\n")


def test_key_files_round_trip(key32):
    priv, pub = key32
    text = pub.to_text()
    assert text.startswith("satcrypt-key v1\nn=32 m=160 k=3\n")
    assert PublicKey.from_text(text) == pub
    assert PublicKey.from_text(text).to_text() == text
    ptext = priv.to_text()
    assert ptext == "satcrypt-priv v1\n" + "".join(map(str, priv.bits)) + "\n"
    assert PrivateKey.from_text(ptext) == priv


@pytest.mark.parametrize("text", ["", "satcrypt-key v2\nn=3 m=0 k=3\n",
                                  "satcrypt-key v1\nn=3 k=3\n",
                                  "satcrypt-key v1\nn=3 m=2 k=3\n1 2 3\n",
                                  "satcrypt-key v1\nn=3 m=1 k=3\n1 1 3\n"])
def test_bad_key_files(text):
    with pytest.raises(KeyFormatError):
        PublicKey.from_text(text)


def test_params_validation():
    warnings = Params(n=1024, m=5120, k=3).validate()
    assert warnings == []
    assert Params(n=64, m=200, k=3).validate()  # below 4.2 n
    with pytest.raises(ValueError):
        Params(k=2).validate()
    with pytest.raises(ValueError):
        Params(gamma=8, t=5).validate()


def test_key_brute_force_consistency(rng):
    priv, pub = keygen(10, 30, 3, rng)
    lits = [c.literals for c in pub.clauses]
    assert oracles.brute_force_sat(10, lits)
    assert all(oracles.clause_value(l, priv.bits) for l in lits)
