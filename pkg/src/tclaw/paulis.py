"""n-qubit Pauli operators in binary symplectic form.

A Pauli is a pair of bitmasks ``(x, z)``; bit ``q`` of each mask belongs to
qubit ``q``.  The canonical single-qubit operators are::

    (x, z) = (0, 0) -> I        (1, 0) -> X
             (0, 1) -> Z        (1, 1) -> Y,  with  Y = i X Z

so every stored Pauli is the Hermitian representative with phase +1, and the
convention Y = iXZ is fixed once here.  Products of canonical Paulis pick up
powers of i; :class:`PhasedPauli` carries that power as ``phase_exp`` with
phase = i**phase_exp.

Each qubit has the 2-bit code ``v = 2x + z`` (0=I, 1=Z, 2=X, 3=Y) and the
index of an n-qubit Pauli is ``sum_q v_q * 4**q`` with qubit 0 least
significant.  This is a bijection between ``range(4**n)`` and the n-qubit
Paulis; dense channel matrices are indexed by it.  Qubit 0 prints leftmost
in string form ("XIZ" acts with X on qubit 0).
"""

from __future__ import annotations

from dataclasses import dataclass

# Hard cap on qubit count unless a caller raises it explicitly; channel
# matrices are dense in 4**n and become unmanageable beyond this.
DEFAULT_MAX_QUBITS = 6

_CODE_TO_CHAR = "IZXY"
_CHAR_TO_CODE = {c: v for v, c in enumerate(_CODE_TO_CHAR)}


def check_qubit_count(n: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> None:
    if not 1 <= n <= max_qubits:
        raise ValueError(f"qubit count {n} outside [1, {max_qubits}]")


@dataclass(frozen=True)
class Pauli:
    """Hermitian n-qubit Pauli with implicit phase +1."""

    n: int
    x: int
    z: int

    def __post_init__(self):
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("x/z bits outside qubit range")

    @classmethod
    def identity(cls, n: int) -> Pauli:
        return cls(n, 0, 0)

    @classmethod
    def from_index(cls, idx: int, n: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> Pauli:
        """Inverse of :attr:`index`; ``idx`` must lie in ``range(4**n)``."""
        check_qubit_count(n, max_qubits)
        if not 0 <= idx < 4**n:
            raise ValueError(f"pauli index {idx} outside [0, 4**{n})")
        x = z = 0
        for q in range(n):
            v = (idx >> (2 * q)) & 3
            x |= (v >> 1) << q
            z |= (v & 1) << q
        return cls(n, x, z)

    @classmethod
    def from_string(cls, s: str) -> Pauli:
        """Parse "XIZ" form, qubit 0 leftmost."""
        check_qubit_count(len(s))
        x = z = 0
        for q, c in enumerate(s):
            try:
                v = _CHAR_TO_CODE[c]
            except KeyError:
                raise ValueError(f"bad pauli character {c!r}") from None
            x |= (v >> 1) << q
            z |= (v & 1) << q
        return cls(len(s), x, z)

    @property
    def index(self) -> int:
        idx = 0
        for q in range(self.n):
            v = 2 * ((self.x >> q) & 1) + ((self.z >> q) & 1)
            idx |= v << (2 * q)
        return idx

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def commutes(self, other: Pauli) -> bool:
        """True iff the symplectic form sum_q (x1 z2 + z1 x2) vanishes mod 2."""
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def mul(self, other: Pauli) -> PhasedPauli:
        """Operator product self * other as a phased canonical Pauli.

        The bits combine by xor; the phase exponent comes from rewriting
        X^x Z^z factors into canonical (Y = iXZ) form:

            i^(x1.z1) i^(x2.z2) (-1)^(z1.x2) = i^e i^(x3.z3)

        where dots are bit-counted overlaps and (x3, z3) = (x1^x2, z1^z2).
        """
        if self.n != other.n:
            raise ValueError("qubit count mismatch")
        x3 = self.x ^ other.x
        z3 = self.z ^ other.z
        e = (
            (self.x & self.z).bit_count()
            + (other.x & other.z).bit_count()
            + 2 * (self.z & other.x).bit_count()
            - (x3 & z3).bit_count()
        ) % 4
        return PhasedPauli(Pauli(self.n, x3, z3), e)

    def __str__(self) -> str:
        return "".join(
            _CODE_TO_CHAR[2 * ((self.x >> q) & 1) + ((self.z >> q) & 1)]
            for q in range(self.n)
        )


@dataclass(frozen=True)
class PhasedPauli:
    """A canonical Pauli scaled by i**phase_exp."""

    pauli: Pauli
    phase_exp: int

    def __post_init__(self):
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)

    @property
    def phase(self) -> complex:
        return 1j**self.phase_exp

    def sign(self) -> int:
        """+1 or -1 for real phases; error on imaginary ones."""
        if self.phase_exp == 0:
            return 1
        if self.phase_exp == 2:
            return -1
        raise ValueError(f"phase i**{self.phase_exp} is not real")

    def mul(self, other: PhasedPauli) -> PhasedPauli:
        prod = self.pauli.mul(other.pauli)
        return PhasedPauli(prod.pauli, prod.phase_exp + self.phase_exp + other.phase_exp)

    def mul_pauli(self, other: Pauli) -> PhasedPauli:
        prod = self.pauli.mul(other)
        return PhasedPauli(prod.pauli, prod.phase_exp + self.phase_exp)

    def __str__(self) -> str:
        return ("+", "+i", "-", "-i")[self.phase_exp] + str(self.pauli)
