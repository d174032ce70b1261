"""Homomorphic evaluation of Boolean circuits on ciphertext bits.

XOR of ciphertexts decrypts to XOR of plaintexts and likewise for AND, since
decryption is evaluation at a point.  AND multiplies term counts, so only a
few multiplications are practical; an optional degree cap ``L`` drops long
terms, each of which flips the result with probability about ``2**-L``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .anf import AnfPoly, AnfSizeError, anf_and, anf_xor, truncate

OPS = {"XOR": 2, "AND": 2, "NOT": 1, "CONST": 1}


class CircuitError(ValueError):
    pass


class GateOverflow(AnfSizeError):
    def __init__(self, gate: int, op: str, detail: str):
        super().__init__(f"gate {gate} ({op}) exceeds the term limit: {detail}")
        self.gate = gate


@dataclass(frozen=True)
class Gate:
    op: str
    args: tuple[int, ...]


@dataclass
class Circuit:
    """Wires ``0..n_inputs-1`` are inputs; gate ``g`` writes wire ``n_inputs + g``."""

    n_inputs: int
    gates: list[Gate] = field(default_factory=list)
    outputs: list[int] = field(default_factory=list)

    @property
    def n_wires(self) -> int:
        return self.n_inputs + len(self.gates)

    def _wire(self, w: int, limit: int) -> int:
        if not 0 <= w < limit:
            raise CircuitError(f"wire {w} not defined before use")
        return w

    def add(self, op: str, *args: int) -> int:
        if op not in OPS or len(args) != OPS[op]:
            raise CircuitError(f"bad gate {op} {args}")
        if op == "CONST":
            if args[0] not in (0, 1):
                raise CircuitError("CONST takes 0 or 1")
        else:
            for a in args:
                self._wire(a, self.n_wires)
        self.gates.append(Gate(op, tuple(args)))
        return self.n_wires - 1

    def out(self, w: int) -> None:
        self.outputs.append(self._wire(w, self.n_wires))

    def to_text(self) -> str:
        lines = [f"INPUTS {self.n_inputs}"]
        lines += [" ".join([g.op, *map(str, g.args)]) for g in self.gates]
        lines += [f"OUT {w}" for w in self.outputs]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, n_inputs: int | None = None) -> "Circuit":
        """Parse one gate per line; ``INPUTS n`` may replace the argument."""
        lines = [l.split("#")[0].split() for l in text.splitlines()]
        lines = [l for l in lines if l]
        if lines and lines[0][0] == "INPUTS":
            n_inputs = int(lines.pop(0)[1])
        if n_inputs is None:
            raise CircuitError("input count unknown")
        c = cls(n_inputs)
        try:
            for parts in lines:
                op, args = parts[0].upper(), [int(a) for a in parts[1:]]
                if op == "OUT":
                    if len(args) != 1:
                        raise CircuitError("OUT takes one wire")
                    c.out(args[0])
                else:
                    c.add(op, *args)
        except ValueError as exc:
            raise CircuitError(str(exc)) from exc
        return c


def evaluate_plain(circuit: Circuit, inputs: Sequence[int]) -> list[int]:
    if len(inputs) != circuit.n_inputs:
        raise CircuitError(f"expected {circuit.n_inputs} inputs, got {len(inputs)}")
    wires = [int(b) & 1 for b in inputs]
    for g in circuit.gates:
        if g.op == "XOR":
            wires.append(wires[g.args[0]] ^ wires[g.args[1]])
        elif g.op == "AND":
            wires.append(wires[g.args[0]] & wires[g.args[1]])
        elif g.op == "NOT":
            wires.append(wires[g.args[0]] ^ 1)
        else:
            wires.append(g.args[0])
    return [wires[w] for w in circuit.outputs]


@dataclass
class HomoReport:
    outputs: list[AnfPoly]
    gate_terms: list[int]
    discarded: int = 0
    L: int | None = None

    @property
    def flip_bound(self) -> float:
        """Union bound on the probability that truncation changed some output."""
        if self.L is None or not self.discarded:
            return 0.0
        return min(1.0, self.discarded * 2.0 ** -self.L)


def homo_eval(circuit: Circuit, ct_bits: Sequence[AnfPoly], L: int | None = None) -> HomoReport:
    if len(ct_bits) != circuit.n_inputs:
        raise CircuitError(f"expected {circuit.n_inputs} ciphertext bits, got {len(ct_bits)}")
    if L is not None and L < 0:
        raise ValueError("L must be >= 0")
    nvars = ct_bits[0].nvars if ct_bits else 0
    wires = list(ct_bits)
    counts: list[int] = []
    discarded = 0
    for gi, g in enumerate(circuit.gates):
        if g.op == "XOR":
            w = anf_xor(wires[g.args[0]], wires[g.args[1]])
        elif g.op == "NOT":
            w = anf_xor(wires[g.args[0]], AnfPoly.one(nvars))
        elif g.op == "CONST":
            w = AnfPoly.constant(g.args[0], nvars)
        else:
            try:
                w = anf_and(wires[g.args[0]], wires[g.args[1]])
            except AnfSizeError as exc:
                raise GateOverflow(gi, g.op, str(exc)) from exc
            if L is not None:
                w, dropped = truncate(w, L)
                discarded += dropped
        wires.append(w)
        counts.append(len(w))
    return HomoReport([wires[w] for w in circuit.outputs], counts, discarded, L)


def random_circuit(n_inputs: int, n_gates: int, rng, max_and: int | None = None,
                   n_outputs: int = 1) -> Circuit:
    """Random circuit for tests; ``max_and`` caps the number of AND gates."""
    c = Circuit(n_inputs)
    ands = 0
    for _ in range(n_gates):
        ops = ["XOR", "NOT", "CONST"]
        if max_and is None or ands < max_and:
            ops.append("AND")
        op = ops[rng.randbelow(len(ops))]
        if op == "CONST":
            c.add(op, rng.bit())
        elif op == "NOT":
            c.add(op, rng.randbelow(c.n_wires))
        else:
            ands += op == "AND"
            c.add(op, rng.randbelow(c.n_wires), rng.randbelow(c.n_wires))
    for _ in range(n_outputs):
        c.out(c.n_wires - 1 - rng.randbelow(min(c.n_wires, 3)))
    return c
