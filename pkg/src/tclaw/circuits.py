"""Circuit text format and stock reversible-logic circuits.

The format is one gate per line (``H 0``, ``CNOT 0 1``), ``#`` comments,
and an optional leading ``qubits N`` header that pins the register size;
without it the size is one past the highest index used.
"""

from __future__ import annotations

from .channel import GATE_KINDS, SINGLE_QUBIT_KINDS, Gate, gate
from .errors import ParseError

__all__ = [
    "parse_circuit",
    "format_circuit",
    "toffoli",
    "fredkin",
    "peres",
    "controlled_s",
]

_CANON = {k.lower(): k for k in GATE_KINDS}


def parse_circuit(text: str) -> tuple[int, list[Gate]]:
    """Parse circuit text into (register size, gate list).

    Raises ParseError with the offending 1-based line number on unknown
    mnemonics, wrong argument counts, repeated qubits, malformed indices,
    or indices outside a declared header.
    """
    header: int | None = None
    gates: list[Gate] = []
    highest = -1
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        word = tokens[0].lower()
        if word == "qubits":
            if gates or header is not None:
                raise ParseError(line_no, "qubits header must come first")
            if len(tokens) != 2:
                raise ParseError(line_no, "expected: qubits N")
            try:
                header = int(tokens[1])
            except ValueError:
                raise ParseError(line_no, f"bad register size {tokens[1]!r}") from None
            if header < 1:
                raise ParseError(line_no, "register size must be positive")
            continue
        kind = _CANON.get(word)
        if kind is None:
            raise ParseError(line_no, f"unknown gate {tokens[0]!r}")
        want = 1 if kind in SINGLE_QUBIT_KINDS else 2
        if len(tokens) - 1 != want:
            raise ParseError(
                line_no, f"{kind} takes {want} qubit argument{'s' * (want > 1)}"
            )
        qubits = []
        for tok in tokens[1:]:
            try:
                q = int(tok)
            except ValueError:
                raise ParseError(line_no, f"bad qubit index {tok!r}") from None
            if q < 0:
                raise ParseError(line_no, "qubit indices must be non-negative")
            if header is not None and q >= header:
                raise ParseError(
                    line_no, f"qubit {q} outside the declared register of {header}"
                )
            qubits.append(q)
        if want == 2 and qubits[0] == qubits[1]:
            raise ParseError(line_no, f"{kind} needs two distinct qubits")
        highest = max(highest, *qubits)
        gates.append(gate(kind, *qubits))
    n = header if header is not None else max(highest + 1, 1)
    return n, gates


def format_circuit(gates: list[Gate], n: int | None = None) -> str:
    """Render gates in the text format, with a ``qubits`` header so the
    register size survives a round-trip."""
    if n is None:
        n = max((max(g.qubits) for g in gates), default=0) + 1
    lines = [f"qubits {n}"]
    for g in gates:
        lines.append(" ".join([g.kind, *map(str, g.qubits)]))
    return "\n".join(lines) + "\n"


def toffoli(c1: int = 0, c2: int = 1, target: int = 2) -> list[Gate]:
    """Doubly controlled NOT over {H, T, Tdg, CNOT}; seven T gates."""
    a, b, c = c1, c2, target
    return [
        gate("H", c),
        gate("CNOT", b, c), gate("Tdg", c),
        gate("CNOT", a, c), gate("T", c),
        gate("CNOT", b, c), gate("Tdg", c),
        gate("CNOT", a, c),
        gate("T", b), gate("T", c),
        gate("H", c),
        gate("CNOT", a, b), gate("T", a), gate("Tdg", b),
        gate("CNOT", a, b),
    ]


def fredkin(control: int = 0, a: int = 1, b: int = 2) -> list[Gate]:
    """Controlled swap: conjugate one leg by CNOT to reuse the Toffoli."""
    wrap = gate("CNOT", b, a)
    return [wrap, *toffoli(control, a, b), wrap]


def peres(a: int = 0, b: int = 1, c: int = 2) -> list[Gate]:
    """Toffoli followed by CNOT: (a, b, c) -> (a, a xor b, c xor ab)."""
    return [*toffoli(a, b, c), gate("CNOT", a, b)]


def controlled_s(a: int = 0, b: int = 1) -> list[Gate]:
    """Controlled phase gate; three T gates."""
    return [
        gate("T", a), gate("T", b),
        gate("CNOT", a, b), gate("Tdg", b), gate("CNOT", a, b),
    ]
