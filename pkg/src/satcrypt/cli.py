"""Command line driver.

Exit codes: 0 success, 1 usage or input error, 2 rejected ciphertext or signature.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

from . import attacks, bench, cipher, homo, keys, multikey, zkid
from .prng import DeterministicRng, fresh_salt

log = logging.getLogger("satcrypt")

EXIT_USAGE = 1
EXIT_REJECTED = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rng(args, purpose: str) -> DeterministicRng:
    """Seeded from --seed or SATCRYPT_SEED when given, else from OS entropy."""
    seed = getattr(args, "seed", None) or os.environ.get("SATCRYPT_SEED")
    if seed:
        try:
            material = bytes.fromhex(seed)
        except ValueError:
            raise UsageError("seed must be hex")
    else:
        material = fresh_salt()
    return DeterministicRng.from_label(material).fork(purpose)


def _read(path: str, binary: bool = False):
    if path == "-":
        return sys.stdin.buffer.read() if binary else sys.stdin.read()
    with open(path, "rb" if binary else "r") as fh:
        return fh.read()


def _write(path: str | None, data) -> None:
    if path in (None, "-"):
        if isinstance(data, bytes):
            sys.stdout.buffer.write(data)
            sys.stdout.buffer.flush()
        else:
            sys.stdout.write(data)
        return
    with open(path, "wb" if isinstance(data, bytes) else "w") as fh:
        fh.write(data)


def _pub(path):
    return keys.PublicKey.from_text(_read(path))


def _priv(path):
    return keys.PrivateKey.from_text(_read(path))


def _ints(text: str, cast=int) -> list:
    return [cast(v) for v in text.split(",") if v]


def cmd_keygen(args) -> int:
    p = keys.Params(n=args.n, m=args.m, k=args.k)
    for w in p.validate():
        log.warning(w)
    priv, pub = keys.keygen(args.n, args.m, args.k, _rng(args, "keygen"))
    _write(args.out + ".pub", pub.to_text())
    _write(args.out + ".priv", priv.to_text())
    if args.dimacs:
        _write(args.out + ".cnf", keys.export_dimacs(pub))
    return 0


def _bits_of_text(text: str) -> list[int]:
    bits = [c for c in text if not c.isspace()]
    if set(bits) - {"0", "1"}:
        raise UsageError("raw bit input must contain only 0 and 1")
    return [int(c) for c in bits]


def cmd_encrypt(args) -> int:
    pub = _pub(args.pub)
    if args.raw_bits:
        log.warning("plain mode: ciphertexts are open to the oracle attack")
        bits = _bits_of_text(_read(args.input))
        rng = _rng(args, "encrypt")
        sel = cipher.select_tuples(pub, rng.fork("tuple"), args.beta)
        enc = cipher.BitEncryptor(pub, sel)
        polys = enc.encrypt_many(bits, [rng.fork(f"rfun:{i}") for i in range(len(bits))])
        _write(args.out, cipher.bits_to_text(polys, pub.n))
        return 0
    if args.salt:
        salt = bytes.fromhex(args.salt)
        if len(salt) != 32:
            raise UsageError("--salt must be 32 bytes of hex")
    else:
        salt = fresh_salt()
    ct = cipher.encrypt_message(pub, _read(args.input, binary=True), salt, args.beta)
    _write(args.out, ct.to_text())
    return 0


def cmd_decrypt(args) -> int:
    priv = _priv(args.priv)
    text = _read(args.input)
    if args.raw:
        polys = cipher.bits_from_text(text)
        _write(args.out, "".join(str(cipher.decrypt_bit(priv, g)) for g in polys) + "\n")
        return 0
    if args.pub is None:
        raise UsageError("honest decryption needs --pub")
    pub = _pub(args.pub)
    try:
        ct = cipher.HonestCiphertext.from_text(text)
        clear = cipher.decrypt_verify(priv, pub, ct)
    except (cipher.RejectedCiphertext, keys.KeyFormatError):
        print("rejected: ciphertext failed verification", file=sys.stderr)
        return EXIT_REJECTED
    _write(args.out, clear)
    return 0


def cmd_homo(args) -> int:
    polys = cipher.bits_from_text(_read(args.input))
    circ = homo.Circuit.from_text(_read(args.circuit), n_inputs=len(polys))
    rep = homo.homo_eval(circ, polys, args.L)
    _write(args.out, cipher.bits_to_text(rep.outputs, polys[0].nvars if polys else 0))
    print(f"gate_terms={','.join(map(str, rep.gate_terms))} discarded={rep.discarded} "
          f"flip_bound={rep.flip_bound:.3g}", file=sys.stderr)
    return 0


def cmd_mk_keygen(args) -> int:
    chain = multikey.chain_keygen(args.gamma, args.n, args.m, args.k, _rng(args, "keygen"), args.t)
    _write(args.out + ".pub", chain.pub_text())
    _write(args.out + ".priv", chain.priv_text())
    return 0


def _msg_bits(data: bytes) -> list[int]:
    return [b >> (7 - j) & 1 for b in data for j in range(8)]


def cmd_mk_encrypt(args) -> int:
    chain = multikey.load_chain(_read(args.pub))
    bits = _msg_bits(_read(args.input, binary=True))
    rng = _rng(args, "mk-encrypt")
    enc = multikey.ChainEncryptor(chain.pubs, rng, args.beta)
    rows = [enc.encrypt(y, rng.fork(f"bit:{i}")) for i, y in enumerate(bits)]
    _write(args.out, multikey.mk_bits_to_text(rows, chain.pubs[0].n))
    return 0


def cmd_mk_decrypt(args) -> int:
    chain = multikey.load_chain(_read(args.pub), _read(args.priv))
    rows = multikey.mk_bits_from_text(_read(args.input))
    t = args.t if args.t is not None else chain.t
    try:
        bits = multikey.mk_decrypt_message(chain.privs, rows, t)
    except cipher.RejectedCiphertext as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    if len(bits) % 8:
        raise UsageError("bit count is not a whole number of bytes")
    data = bytes(int("".join(map(str, bits[i:i + 8])), 2) for i in range(0, len(bits), 8))
    _write(args.out, data)
    return 0


def cmd_identify(args) -> int:
    pub = _pub(args.pub)
    rng = _rng(args, "zk")
    if args.role == "prover":
        if not args.priv:
            raise UsageError("the prover needs --priv")
        ok = zkid.run_prover(_priv(args.priv), pub, rng, sys.stdin, sys.stdout)
    else:
        ok = zkid.run_verifier(pub, args.rounds, rng, sys.stdin, sys.stdout)
    print("accepted" if ok else "rejected", file=sys.stderr)
    return 0 if ok else EXIT_REJECTED


def cmd_sign(args) -> int:
    sig = zkid.sign(_priv(args.priv), _pub(args.pub), _read(args.input, binary=True),
                    args.rounds, _rng(args, "zk"))
    _write(args.out, sig.to_text())
    return 0


def cmd_verify(args) -> int:
    pub = _pub(args.pub)
    try:
        sig = zkid.Signature.from_text(_read(args.sig))
        ok = zkid.verify_signature(pub, _read(args.input, binary=True), sig)
    except ValueError:
        ok = False
    print("valid" if ok else "invalid", file=sys.stderr)
    return 0 if ok else EXIT_REJECTED


def cmd_attack(args) -> int:
    kind = args.kind
    if kind == "enum":
        c = attacks.enumeration_count(args.m, args.alpha, args.beta, args.k)
        attacks.write_csv(sys.stdout, [{"m": args.m, "alpha": args.alpha, "beta": args.beta,
                                        "k": args.k, "count": c, "log2": round(math.log2(c), 3)}])
        return 0
    if kind == "clt":
        exact, closed = attacks.clt_gap(args.p1, args.M)
        attacks.write_csv(sys.stdout, [{"p1": args.p1, "M": args.M, "binomial": exact,
                                        "closed": closed, "diff": abs(exact - closed),
                                        "pass": abs(exact - closed) < 1e-12}])
        return 0
    if kind == "tamper":
        return _tamper(args)
    pub = _pub(args.pub)
    rng = _rng(args, "attack")
    sel = cipher.select_tuples(pub, rng.fork("tuple"), args.beta)
    if kind == "coverage":
        rep = attacks.clause_coverage(sel, pub)
        attacks.write_csv(sys.stdout, [{"n": pub.n, "m": pub.m, "unused": len(rep.unused),
                                        "used": rep.used, "variables": rep.variables,
                                        "ratio": round(rep.ratio, 4), "pass": not rep.unused}])
        return 0
    N = args.N
    rows = []
    if kind == "const-term":
        for y in (0, 1):
            f = attacks.constant_term_stat(pub, sel, N, rng.fork(f"y{y}"), y)
            s = attacks.sigma_bound(0.5, N)
            rows.append({"n": pub.n, "m": pub.m, "k": pub.k, "alpha": sel.alpha, "beta": sel.beta,
                         "N": N, "y": y, "statistic": round(f, 5), "sigma_bound": round(s, 5),
                         "pass": abs(f - 0.5) <= s})
    else:
        enc = cipher.BitEncryptor(pub, sel)
        for y in (0, 1):
            g = enc.encrypt(y, rng.fork(f"cipher{y}"))
            f = attacks.value_prob_stat(g, N, rng.fork(f"samples{y}"))
            s = attacks.sigma_bound(0.5, N)
            rows.append({"n": pub.n, "m": pub.m, "terms": len(g), "N": N, "y": y,
                         "statistic": round(f, 5), "sigma_bound": round(s, 5),
                         "pass": abs(f - 0.5) <= s})
    attacks.write_csv(sys.stdout, rows)
    return 0


def _tamper(args) -> int:
    text = _read(args.input)
    head = text.split("\n", 1)[0].strip()
    if head == cipher.CT_HEADER:
        ct = cipher.HonestCiphertext.from_text(text)
        polys = list(ct.bits)
    else:
        polys = cipher.bits_from_text(text)
    targets = range(len(polys)) if args.bit is None else [args.bit]
    changed = 0
    for i in targets:
        g = attacks.oracle_tamper(polys[i], args.var, args.guess)
        changed += g != polys[i]
        polys[i] = g
    if not changed:
        log.warning("variable %d does not occur in the targeted bits; output unchanged", args.var)
    if head == cipher.CT_HEADER:
        out = cipher.HonestCiphertext(ct.salt, ct.n, ct.m, ct.k, ct.alpha, ct.beta,
                                      tuple(polys), ct.block).to_text()
    else:
        out = cipher.bits_to_text(polys, polys[0].nvars if polys else 0)
    _write(args.out, out)
    return 0


def cmd_bench(args) -> int:
    rows = bench.hardness_sweep(_ints(args.n), _ints(args.ratio, float), args.k, args.seeds,
                                args.budget, args.dimacs_dir)
    if args.csv:
        attacks.write_csv(args.csv, rows, bench.CSV_FIELDS)
    attacks.write_csv(sys.stdout, bench.summarize(rows) if args.summary else rows,
                      None if args.summary else bench.CSV_FIELDS)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="satcrypt", description="Planted k-SAT public-key toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def seeded(sp):
        sp.add_argument("--seed", help="hex seed (default: $SATCRYPT_SEED, else OS entropy)")
        return sp

    s = seeded(sub.add_parser("keygen", help="generate a key pair"))
    s.add_argument("--n", type=int, default=1024)
    s.add_argument("--m", type=int)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--out", required=True, help="prefix for <out>.pub and <out>.priv")
    s.add_argument("--dimacs", action="store_true", help="also write <out>.cnf")
    s.set_defaults(func=cmd_keygen)

    s = seeded(sub.add_parser("encrypt", help="encrypt a file (honest mode)"))
    s.add_argument("--pub", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.add_argument("--salt", help="32-byte salt as hex (default: random)")
    s.add_argument("--beta", type=int, default=2)
    s.add_argument("--raw-bits", action="store_true",
                   help="plain mode: input is a 0/1 text, output a bits file")
    s.set_defaults(func=cmd_encrypt)

    s = sub.add_parser("decrypt", help="decrypt and verify")
    s.add_argument("--priv", required=True)
    s.add_argument("--pub")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.add_argument("--raw", action="store_true", help="input is a plain bits file")
    s.set_defaults(func=cmd_decrypt)

    s = sub.add_parser("homo", help="evaluate a circuit on a bits file")
    s.add_argument("--circuit", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.add_argument("--L", type=int, help="degree cap (default: no truncation)")
    s.set_defaults(func=cmd_homo)

    s = seeded(sub.add_parser("mk-keygen", help="generate a multi-key chain"))
    s.add_argument("--gamma", type=int, required=True)
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--m", type=int)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--t", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_mk_keygen)

    s = seeded(sub.add_parser("mk-encrypt", help="encrypt a file under a chain"))
    s.add_argument("--pub", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.add_argument("--beta", type=int, default=2)
    s.set_defaults(func=cmd_mk_encrypt)

    s = sub.add_parser("mk-decrypt", help="threshold-decrypt a chain ciphertext")
    s.add_argument("--pub", required=True)
    s.add_argument("--priv", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.add_argument("--t", type=int)
    s.set_defaults(func=cmd_mk_decrypt)

    s = seeded(sub.add_parser("identify", help="interactive identification on stdin/stdout"))
    s.add_argument("--role", choices=("prover", "verifier"), required=True)
    s.add_argument("--pub", required=True)
    s.add_argument("--priv")
    s.add_argument("--rounds", type=int, default=64)
    s.set_defaults(func=cmd_identify)

    s = seeded(sub.add_parser("sign", help="sign a document"))
    s.add_argument("--priv", required=True)
    s.add_argument("--pub", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.add_argument("--rounds", type=int, default=64)
    s.set_defaults(func=cmd_sign)

    s = sub.add_parser("verify", help="verify a signature")
    s.add_argument("--pub", required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--sig", required=True)
    s.set_defaults(func=cmd_verify)

    a = sub.add_parser("attack", help="attack statistics and tools (CSV output)")
    asub = a.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for name in ("const-term", "value-prob", "coverage"):
        s = seeded(asub.add_parser(name))
        s.add_argument("--pub", required=True)
        s.add_argument("--beta", type=int, default=2)
        if name != "coverage":
            s.add_argument("--N", type=int, default=2000)
    s = asub.add_parser("tamper", help="substitute a constant for a variable")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.add_argument("--var", type=int, required=True)
    s.add_argument("--guess", type=int, choices=(0, 1), required=True)
    s.add_argument("--bit", type=int, help="only this bit index (default: all)")
    s = asub.add_parser("clt")
    s.add_argument("--p1", type=float, required=True)
    s.add_argument("--M", type=int, required=True)
    s = asub.add_parser("enum")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--alpha", type=int)
    s.add_argument("--beta", type=int, default=2)
    s.add_argument("--k", type=int, default=3)
    a.set_defaults(func=cmd_attack)

    s = sub.add_parser("bench", help="planted-instance hardness sweep")
    s.add_argument("--n", default="16,24,32,40", help="comma list")
    s.add_argument("--ratio", default="4.3", help="comma list")
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--seeds", type=int, default=10)
    s.add_argument("--budget", type=int)
    s.add_argument("--csv", help="also write per-instance rows here")
    s.add_argument("--dimacs-dir")
    s.add_argument("--summary", action="store_true", help="print per-cell summary instead of rows")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "m", "x") is None and args.cmd in ("keygen", "mk-keygen"):
        args.m = 5 * args.n
    if args.cmd == "attack" and args.kind == "enum" and args.alpha is None:
        args.alpha = args.m
    try:
        return args.func(args)
    except (UsageError, keys.KeyFormatError, homo.CircuitError, OSError, ValueError) as exc:
        print(f"satcrypt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
