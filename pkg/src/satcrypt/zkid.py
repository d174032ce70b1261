"""Zero-knowledge identification and Fiat-Shamir signatures over planted k-SAT keys.

Each round the prover relabels the instance by a secret map f(x) = sigma(x) + s
and commits to every literal of the pulled-back formula and to f^-1(priv),
which satisfies it.  The verifier then asks for either

  a: f itself, so every literal commitment can be recomputed from the public key;
  b: the assignment f^-1(priv), plus one satisfied committed literal per clause.

A prover without the private key can prepare for at most one of the two, so a
cheater survives each round with probability 1/2.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, TextIO

from .keys import PrivateKey, PublicKey
from .prng import (Commitment, DeterministicRng, commit, commitment_digest, sha256,
                   verify_opening)

log = logging.getLogger(__name__)

SIG_HEADER = "satcrypt-sig v1"
DIGEST = 32


@dataclass(frozen=True)
class AffineMap:
    """``sigma[i-1]`` is the 1-based position variable ``i`` is moved to."""

    sigma: tuple[int, ...]
    shift: tuple[int, ...]

    def __post_init__(self):
        n = len(self.sigma)
        if sorted(self.sigma) != list(range(1, n + 1)):
            raise ValueError("sigma is not a permutation of 1..n")
        if len(self.shift) != n or any(b not in (0, 1) for b in self.shift):
            raise ValueError("shift must be a 0/1 vector of length n")

    @property
    def n(self) -> int:
        return len(self.sigma)

    def inverse_sigma(self) -> tuple[int, ...]:
        inv = [0] * self.n
        for i, p in enumerate(self.sigma, 1):
            inv[p - 1] = i
        return tuple(inv)

    def apply(self, x: Sequence[int]) -> tuple[int, ...]:
        out = [0] * self.n
        for i, p in enumerate(self.sigma):
            out[p - 1] = x[i]
        return tuple(b ^ s for b, s in zip(out, self.shift))

    def invert(self, v: Sequence[int]) -> tuple[int, ...]:
        w = [b ^ s for b, s in zip(v, self.shift)]
        return tuple(w[p - 1] for p in self.sigma)

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(tuple(range(1, n + 1)), (0,) * n)


def sample_affine_map(n: int, rng: DeterministicRng) -> AffineMap:
    if n < 1:
        raise ValueError("n must be >= 1")
    sigma = tuple(p + 1 for p in rng.permutation(n))
    shift = tuple(int(b) for b in rng.bits(n))
    return AffineMap(sigma, shift)


def pullback_literal(f: AffineMap, index: int, sign: int, inv: Sequence[int] | None = None) -> tuple[int, int]:
    """Literal ``(index', sign')`` with value at ``f^-1(v)`` equal to ``(index, sign)`` at ``v``."""
    if not 1 <= index <= f.n:
        raise ValueError(f"index {index} out of range")
    inv = f.inverse_sigma() if inv is None else inv
    return inv[index - 1], sign ^ f.shift[index - 1]


def literal_payload(index: int, sign: int) -> bytes:
    return index.to_bytes(4, "big") + bytes([sign])


def parse_literal_payload(payload: bytes) -> tuple[int, int]:
    if len(payload) != 5 or payload[4] > 1:
        raise ValueError("bad literal payload")
    return int.from_bytes(payload[:4], "big"), payload[4]


def assignment_payload(u: Sequence[int]) -> bytes:
    return bytes(u)


def _pulled_literals(pub: PublicKey, f: AffineMap) -> list[tuple[int, int]]:
    inv = f.inverse_sigma()
    return [pullback_literal(f, i, s, inv) for c in pub.clauses for i, s in zip(c.indices, c.signs)]


@dataclass(frozen=True)
class RoundCommitment:
    literal_commits: tuple[bytes, ...]
    assignment_commit: bytes

    def to_bytes(self) -> bytes:
        return b"".join(self.literal_commits) + self.assignment_commit

    @classmethod
    def from_bytes(cls, data: bytes, count: int) -> "RoundCommitment":
        if len(data) != (count + 1) * DIGEST:
            raise ValueError("commitment blob has the wrong length")
        d = [data[i:i + DIGEST] for i in range(0, len(data), DIGEST)]
        return cls(tuple(d[:-1]), d[-1])

    def __len__(self) -> int:
        return len(self.literal_commits) + 1


@dataclass
class RoundSecret:
    f: AffineMap | None
    literals: list[tuple[int, int]]
    nonces: list[bytes]
    u: tuple[int, ...]
    u_nonce: bytes
    k: int


@dataclass(frozen=True)
class RevealA:
    f: AffineMap
    nonces: tuple[bytes, ...]


@dataclass(frozen=True)
class RevealB:
    u: tuple[int, ...]
    u_nonce: bytes
    choices: tuple[int, ...]
    payloads: tuple[bytes, ...]
    nonces: tuple[bytes, ...]


def _commit_all(literals, u, rng) -> tuple[RoundCommitment, list[bytes], bytes]:
    # one read for all nonces; the stream is consumed exactly as by repeated commit()
    blob = rng.read(DIGEST * len(literals))
    nonces = [blob[i:i + DIGEST] for i in range(0, len(blob), DIGEST)]
    digests = tuple(commitment_digest(nonce, literal_payload(*lit))
                    for nonce, lit in zip(nonces, literals))
    cu, opu = commit(assignment_payload(u), rng)
    return RoundCommitment(digests, cu.digest), nonces, opu.nonce


def commit_round(priv: PrivateKey, pub: PublicKey, rng: DeterministicRng) -> tuple[RoundCommitment, RoundSecret]:
    f = sample_affine_map(pub.n, rng)
    literals = _pulled_literals(pub, f)
    u = f.invert(priv.bits)
    rc, nonces, u_nonce = _commit_all(literals, u, rng)
    return rc, RoundSecret(f, literals, nonces, u, u_nonce, pub.k)


def respond(secret: RoundSecret, challenge: str, rng: DeterministicRng) -> RevealA | RevealB:
    if challenge == "a":
        if secret.f is None:
            raise ValueError("no map to reveal")
        return RevealA(secret.f, tuple(secret.nonces))
    if challenge != "b":
        raise ValueError("challenge must be 'a' or 'b'")
    k = secret.k
    choices, payloads, nonces = [], [], []
    for j in range(len(secret.literals) // k):
        sat = [a for a in range(k)
               if secret.u[secret.literals[j * k + a][0] - 1] ^ secret.literals[j * k + a][1]]
        # an honest prover always has one; a cheater may not, and opens anything
        a = sat[rng.randbelow(len(sat))] if sat else rng.randbelow(k)
        choices.append(a)
        payloads.append(literal_payload(*secret.literals[j * k + a]))
        nonces.append(secret.nonces[j * k + a])
    return RevealB(secret.u, secret.u_nonce, tuple(choices), tuple(payloads), tuple(nonces))


def verify_round(pub: PublicKey, rc: RoundCommitment, challenge: str, reveal) -> bool:
    try:
        return _verify_round(pub, rc, challenge, reveal)
    except (ValueError, IndexError, TypeError, AttributeError):
        return False


def _verify_round(pub: PublicKey, rc: RoundCommitment, challenge: str, reveal) -> bool:
    k = pub.k
    if len(rc.literal_commits) != pub.m * k:
        return False
    if challenge == "a":
        if not isinstance(reveal, RevealA) or reveal.f.n != pub.n:
            return False
        literals = _pulled_literals(pub, reveal.f)
        if len(reveal.nonces) != len(literals):
            return False
        return all(verify_opening(Commitment(d), nonce, literal_payload(*lit))
                   for d, nonce, lit in zip(rc.literal_commits, reveal.nonces, literals))
    if challenge != "b" or not isinstance(reveal, RevealB):
        return False
    if len(reveal.u) != pub.n or any(b not in (0, 1) for b in reveal.u):
        return False
    if not verify_opening(Commitment(rc.assignment_commit), reveal.u_nonce, assignment_payload(reveal.u)):
        return False
    if not len(reveal.choices) == len(reveal.payloads) == len(reveal.nonces) == pub.m:
        return False
    for j, (a, payload, nonce) in enumerate(zip(reveal.choices, reveal.payloads, reveal.nonces)):
        if not 0 <= a < k:
            return False
        if not verify_opening(Commitment(rc.literal_commits[j * k + a]), nonce, payload):
            return False
        idx, sign = parse_literal_payload(payload)
        if not 1 <= idx <= pub.n or not reveal.u[idx - 1] ^ sign:
            return False
    return True


# cheaters


def cheat_fake_instance(pub: PublicKey, rng: DeterministicRng) -> tuple[RoundCommitment, RoundSecret]:
    """Commit to a made-up formula that a random assignment satisfies; survives only b."""
    u = tuple(int(b) for b in rng.bits(pub.n))
    literals = []
    for _ in range(pub.m * pub.k):
        idx = rng.randbelow(pub.n) + 1
        literals.append((idx, u[idx - 1] ^ 1))
    rc, nonces, u_nonce = _commit_all(literals, u, rng)
    return rc, RoundSecret(None, literals, nonces, u, u_nonce, pub.k)


def cheat_honest_commit(pub: PublicKey, rng: DeterministicRng) -> tuple[RoundCommitment, RoundSecret]:
    """Commit honestly to the pullback but to a guessed assignment; survives a, and b only by luck."""
    f = sample_affine_map(pub.n, rng)
    literals = _pulled_literals(pub, f)
    u = tuple(int(b) for b in rng.bits(pub.n))
    rc, nonces, u_nonce = _commit_all(literals, u, rng)
    return rc, RoundSecret(f, literals, nonces, u, u_nonce, pub.k)


def cheater_round(pub: PublicKey, prover_rng: DeterministicRng, challenge: str) -> bool:
    """One round by a prover without the key who guesses the challenge with a coin."""
    expects_a = prover_rng.bit()
    if expects_a:
        rc, secret = cheat_honest_commit(pub, prover_rng)
    else:
        rc, secret = cheat_fake_instance(pub, prover_rng)
    if challenge == "a" and secret.f is None:
        # nothing consistent with the public key can be opened
        fake = RevealA(sample_affine_map(pub.n, prover_rng), tuple(secret.nonces))
        return verify_round(pub, rc, challenge, fake)
    return verify_round(pub, rc, challenge, respond(secret, challenge, prover_rng))


# signatures


def challenge_bits(document: bytes, C: bytes, K: int) -> list[str]:
    """First K bits (MSB first) of H(document || C), extended by H(document || C || counter)."""
    stream = sha256(document, C)
    counter = 1
    while len(stream) * 8 < K:
        stream += sha256(document, C, counter.to_bytes(4, "big"))
        counter += 1
    return ["ab"[stream[i // 8] >> (7 - i % 8) & 1] for i in range(K)]


@dataclass(frozen=True)
class Signature:
    K: int
    C: bytes
    reveals: tuple

    def to_text(self) -> str:
        lines = [SIG_HEADER, f"K={self.K}", self.C.hex()]
        lines += [reveal_to_text(r) for r in self.reveals]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Signature":
        lines = text.splitlines()
        if len(lines) < 3 or lines[0].strip() != SIG_HEADER or not lines[1].startswith("K="):
            raise ValueError("malformed signature header")
        K = int(lines[1][2:])
        reveals = tuple(reveal_from_text(l) for l in lines[3:])
        if len(reveals) != K:
            raise ValueError(f"expected {K} reveals, found {len(reveals)}")
        return cls(K, bytes.fromhex(lines[2].strip()), reveals)


def _bits(v: Sequence[int]) -> str:
    return "".join(map(str, v))


def _unbits(s: str) -> tuple[int, ...]:
    if set(s) - {"0", "1"}:
        raise ValueError("expected a 0/1 string")
    return tuple(int(c) for c in s)


def reveal_to_text(r) -> str:
    if isinstance(r, RevealA):
        return " ".join(["A", ",".join(map(str, r.f.sigma)), _bits(r.f.shift),
                         b"".join(r.nonces).hex()])
    return " ".join(["B", _bits(r.u), r.u_nonce.hex(), ",".join(map(str, r.choices)),
                     b"".join(r.payloads).hex(), b"".join(r.nonces).hex()])


def _chunks(blob: bytes, size: int) -> tuple[bytes, ...]:
    if len(blob) % size:
        raise ValueError("blob length is not a multiple of the record size")
    return tuple(blob[i:i + size] for i in range(0, len(blob), size))


def reveal_from_text(line: str):
    parts = line.split()
    if parts and parts[0] == "A" and len(parts) == 4:
        f = AffineMap(tuple(int(v) for v in parts[1].split(",")), _unbits(parts[2]))
        return RevealA(f, _chunks(bytes.fromhex(parts[3]), DIGEST))
    if parts and parts[0] == "B" and len(parts) == 6:
        choices = tuple(int(v) for v in parts[3].split(",")) if parts[3] else ()
        return RevealB(_unbits(parts[1]), bytes.fromhex(parts[2]), choices,
                       _chunks(bytes.fromhex(parts[4]), 5), _chunks(bytes.fromhex(parts[5]), DIGEST))
    raise ValueError("malformed reveal record")


def sign(priv: PrivateKey, pub: PublicKey, document: bytes, K: int, rng: DeterministicRng) -> Signature:
    if K < 1:
        raise ValueError("K must be >= 1")
    rounds = [commit_round(priv, pub, rng) for _ in range(K)]
    C = b"".join(rc.to_bytes() for rc, _ in rounds)
    chal = challenge_bits(document, C, K)
    reveals = tuple(respond(secret, ch, rng) for (_, secret), ch in zip(rounds, chal))
    return Signature(K, C, reveals)


def verify_signature(pub: PublicKey, document: bytes, sig: Signature) -> bool:
    try:
        per = (pub.m * pub.k + 1) * DIGEST
        if sig.K < 1 or len(sig.C) != sig.K * per or len(sig.reveals) != sig.K:
            return False
        chal = challenge_bits(document, sig.C, sig.K)
        for r, ch in enumerate(chal):
            rc = RoundCommitment.from_bytes(sig.C[r * per:(r + 1) * per], pub.m * pub.k)
            if not verify_round(pub, rc, ch, sig.reveals[r]):
                return False
        return True
    except (ValueError, TypeError):
        return False


# interactive identification over framed lines


def send_frame(w: TextIO, msg: str) -> None:
    w.write(f"{len(msg)} {msg}\n")
    w.flush()


def recv_frame(r: TextIO) -> str:
    line = r.readline()
    if not line:
        raise EOFError("peer closed the stream")
    size, _, body = line.rstrip("\n").partition(" ")
    if not size.isdigit() or int(size) != len(body):
        raise ValueError("bad frame length")
    return body


def run_prover(priv: PrivateKey, pub: PublicKey, rng: DeterministicRng, r: TextIO, w: TextIO) -> bool:
    """Answer challenges until the verifier sends a verdict; returns it."""
    while True:
        msg = recv_frame(r)
        if msg.startswith("RESULT "):
            return msg == "RESULT accept"
        if msg != "ROUND":
            raise ValueError(f"unexpected message {msg[:40]!r}")
        rc, secret = commit_round(priv, pub, rng)
        send_frame(w, "COMMIT " + rc.to_bytes().hex())
        ch = recv_frame(r)
        if ch.startswith("RESULT "):
            return ch == "RESULT accept"
        if not ch.startswith("CHALLENGE "):
            raise ValueError("expected a challenge")
        send_frame(w, "REVEAL " + reveal_to_text(respond(secret, ch.split()[1], rng)))


def run_verifier(pub: PublicKey, K: int, rng: DeterministicRng, r: TextIO, w: TextIO) -> bool:
    ok = True
    for _ in range(K):
        send_frame(w, "ROUND")
        msg = recv_frame(r)
        try:
            if not msg.startswith("COMMIT "):
                raise ValueError("expected a commitment")
            rc = RoundCommitment.from_bytes(bytes.fromhex(msg[7:]), pub.m * pub.k)
            ch = "ab"[rng.bit()]
            send_frame(w, f"CHALLENGE {ch}")
            msg = recv_frame(r)
            if not msg.startswith("REVEAL "):
                raise ValueError("expected a reveal")
            if not verify_round(pub, rc, ch, reveal_from_text(msg[7:])):
                ok = False
                break
        except ValueError as exc:
            log.info("round aborted: %s", exc)
            ok = False
            break
    send_frame(w, "RESULT " + ("accept" if ok else "reject"))
    return ok
