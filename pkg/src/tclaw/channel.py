"""Exact channel representations of Clifford+T gates and circuits.

The channel representation of a unitary U on n qubits is the real 4^n x 4^n
matrix with entries Tr(P_i U P_j U+) / 2^n over the canonically indexed Pauli
basis: column j expands U P_j U+ in that basis.  It is orthogonal, multiplies
contravariantly with circuit composition, and is blind to global phase.

Clifford gates become signed permutation matrices.  The T gate on qubit q is
exactly the pi/4 rotation about Z_q; the rotation channel about any Pauli P
fixes the commutant of P and sends each anticommuting Q to (Q - i P Q)/sqrt2,
giving one diagonal 1/sqrt2 entry plus one off-diagonal +-1/sqrt2 entry per
anticommuting column.

``channel_oracle_dense`` recomputes the same matrix numerically from a dense
unitary; it exists as an independent cross-check for tests and is never used
by the synthesis engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exact import ChannelMatrix
from .paulis import Pauli, PhasedPauli, check_qubit_count

SINGLE_QUBIT_KINDS = ("H", "S", "Sdg", "X", "Y", "Z", "T", "Tdg")
TWO_QUBIT_KINDS = ("CNOT", "CZ", "SWAP")
GATE_KINDS = SINGLE_QUBIT_KINDS + TWO_QUBIT_KINDS
CLIFFORD_KINDS = tuple(k for k in GATE_KINDS if k not in ("T", "Tdg"))

_DAGGER = {"S": "Sdg", "Sdg": "S", "T": "Tdg", "Tdg": "T"}


@dataclass(frozen=True)
class Gate:
    """A named gate on explicit qubit indices."""

    kind: str
    qubits: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 1 if self.kind in SINGLE_QUBIT_KINDS else 2
        if len(self.qubits) != want:
            raise ValueError(f"{self.kind} takes {want} qubit(s)")
        if any(q < 0 for q in self.qubits):
            raise ValueError("negative qubit index")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.kind} qubits must be distinct")

    def dagger(self) -> Gate:
        return Gate(_DAGGER.get(self.kind, self.kind), self.qubits)

    def __str__(self) -> str:
        return " ".join([self.kind, *map(str, self.qubits)])


def gate(kind: str, *qubits: int) -> Gate:
    return Gate(kind, tuple(qubits))


# ---------------------------------------------------------------- rotations


def rotation_channel(p: Pauli) -> ChannelMatrix:
    """Channel of the pi/4 rotation about the non-identity Pauli ``p``."""
    if p.is_identity():
        raise ValueError("rotation axis must be a non-identity Pauli")
    return _rotation_by_index(p.n, p.index)


def rotation_channel_t(p: Pauli) -> ChannelMatrix:
    """Transpose (= inverse) of :func:`rotation_channel`, cached."""
    if p.is_identity():
        raise ValueError("rotation axis must be a non-identity Pauli")
    return _rotation_t_by_index(p.n, p.index)


@lru_cache(maxsize=256)
def _pauli_bit_tables(n: int):
    """Vectorized index<->bits tables: x bits, z bits per Pauli index."""
    idx = np.arange(4**n, dtype=np.int64)
    x = np.zeros_like(idx)
    z = np.zeros_like(idx)
    for q in range(n):
        x |= ((idx >> (2 * q + 1)) & 1) << q
        z |= ((idx >> (2 * q)) & 1) << q
    return x, z


def _bits_to_index(x: np.ndarray, z: np.ndarray, n: int) -> np.ndarray:
    idx = np.zeros_like(x)
    for q in range(n):
        idx |= (((x >> q) & 1) << (2 * q + 1)) | (((z >> q) & 1) << (2 * q))
    return idx


@lru_cache(maxsize=256)
def _rotation_by_index(n: int, p_idx: int) -> ChannelMatrix:
    check_qubit_count(n)
    dim = 4**n
    xs, zs = _pauli_bit_tables(n)
    px = int(xs[p_idx])
    pz = int(zs[p_idx])
    anti = ((np.bitwise_count(px & zs) + np.bitwise_count(pz & xs)) & 1).astype(bool)
    a = np.zeros((dim, dim), dtype=np.int64)
    b = np.zeros((dim, dim), dtype=np.int64)
    cols = np.arange(dim)
    # Commuting columns: the value 1 on the diagonal is sqrt2/sqrt2**1.
    b[cols[~anti], cols[~anti]] = 1
    # Anticommuting: 1/sqrt2 on the diagonal plus the -i*P*Q partner row.
    ac = cols[anti]
    a[ac, ac] = 1
    x3 = px ^ xs[ac]
    z3 = pz ^ zs[ac]
    rows = _bits_to_index(x3, z3, n)
    # phase exponent of P*Q in canonical form; odd for anticommuting pairs,
    # and -i * i**e is +1 for e == 1, -1 for e == 3.
    e = (
        int(px & pz).bit_count()
        + np.bitwise_count(xs[ac] & zs[ac])
        + 2 * np.bitwise_count(pz & xs[ac])
        - np.bitwise_count(x3 & z3)
    ) % 4
    if not ((e == 1) | (e == 3)).all():
        raise AssertionError("even product phase on an anticommuting pair")
    a[rows, ac] = np.where(e == 1, 1, -1)
    return ChannelMatrix(n, 1, a, b, _canonical=True)


@lru_cache(maxsize=256)
def _rotation_t_by_index(n: int, p_idx: int) -> ChannelMatrix:
    return _rotation_by_index(n, p_idx).transpose()


# ---------------------------------------------------------------- cliffords


def _embed(p_single: str, n: int, qubits: tuple[int, ...], sign: int) -> PhasedPauli:
    """PhasedPauli acting as ``p_single`` (one char per gate qubit) on ``qubits``."""
    x = z = 0
    for c, q in zip(p_single, qubits):
        if c in ("X", "Y"):
            x |= 1 << q
        if c in ("Z", "Y"):
            z |= 1 << q
    return PhasedPauli(Pauli(n, x, z), 0 if sign > 0 else 2)


def _gate_generator_images(g: Gate, n: int) -> dict[tuple[int, str], PhasedPauli]:
    """Conjugation images g X_q g+ and g Z_q g+ for the gate's own qubits."""
    k = g.kind
    qs = g.qubits
    table = {
        "H": {"X": ("Z", 1), "Z": ("X", 1)},
        "S": {"X": ("Y", 1), "Z": ("Z", 1)},
        "Sdg": {"X": ("Y", -1), "Z": ("Z", 1)},
        "X": {"X": ("X", 1), "Z": ("Z", -1)},
        "Y": {"X": ("X", -1), "Z": ("Z", -1)},
        "Z": {"X": ("X", -1), "Z": ("Z", 1)},
        "CNOT": {"X0": ("XX", 1), "Z0": ("ZI", 1), "X1": ("IX", 1), "Z1": ("ZZ", 1)},
        "CZ": {"X0": ("XZ", 1), "Z0": ("ZI", 1), "X1": ("ZX", 1), "Z1": ("IZ", 1)},
        "SWAP": {"X0": ("IX", 1), "Z0": ("IZ", 1), "X1": ("XI", 1), "Z1": ("ZI", 1)},
    }[k]
    out: dict[tuple[int, str], PhasedPauli] = {}
    if len(qs) == 1:
        for gen in ("X", "Z"):
            img, sign = table[gen]
            out[(qs[0], gen)] = _embed(img, n, qs, sign)
    else:
        for pos, q in enumerate(qs):
            for gen in ("X", "Z"):
                img, sign = table[f"{gen}{pos}"]
                out[(q, gen)] = _embed(img, n, qs, sign)
    return out


def conjugate_phased(g: Gate, p: PhasedPauli) -> PhasedPauli:
    """g p g+ for a Clifford gate, tracking the (real) sign exactly."""
    if g.kind not in CLIFFORD_KINDS:
        raise ValueError(f"{g.kind} is not a Clifford gate")
    n = p.pauli.n
    if any(q >= n for q in g.qubits):
        raise ValueError("gate qubit outside register")
    imgs = _gate_generator_images(g, n)
    acc = PhasedPauli(Pauli.identity(n), p.phase_exp)
    for q in range(n):
        xq = (p.pauli.x >> q) & 1
        zq = (p.pauli.z >> q) & 1
        if not (xq or zq):
            continue
        if q in g.qubits:
            ix = imgs[(q, "X")]
            iz = imgs[(q, "Z")]
            if xq and zq:
                # Y_q = i X_q Z_q
                f = ix.mul(iz)
                f = PhasedPauli(f.pauli, f.phase_exp + 1)
            elif xq:
                f = ix
            else:
                f = iz
        else:
            f = PhasedPauli(Pauli(n, xq << q, zq << q), 0)
        acc = acc.mul(f)
    return acc


def clifford_channel(g: Gate, n: int) -> ChannelMatrix:
    """Signed-permutation channel of a Clifford gate on an n-qubit register."""
    check_qubit_count(n)
    if g.kind not in CLIFFORD_KINDS:
        raise ValueError(f"{g.kind} is not a Clifford gate")
    if any(q >= n for q in g.qubits):
        raise ValueError("gate qubit outside register")
    dim = 4**n
    a = np.zeros((dim, dim), dtype=np.int64)
    b = np.zeros((dim, dim), dtype=np.int64)
    for j in range(dim):
        img = conjugate_phased(g, PhasedPauli(Pauli.from_index(j, n), 0))
        a[img.pauli.index, j] = img.sign()
    m = ChannelMatrix(n, 0, a, b, _canonical=True)
    if not m.is_signed_permutation():
        raise AssertionError(f"clifford channel of {g} is not a signed permutation")
    return m


def gate_channel(g: Gate, n: int) -> ChannelMatrix:
    if g.kind == "T":
        return rotation_channel(Pauli(n, 0, 1 << g.qubits[0]))
    if g.kind == "Tdg":
        return rotation_channel_t(Pauli(n, 0, 1 << g.qubits[0]))
    return clifford_channel(g, n)


def circuit_channel(gates: list[Gate], n: int) -> ChannelMatrix:
    """Exact channel of a whole circuit; gates listed in application order,
    so the first gate applied is the rightmost factor of the product."""
    check_qubit_count(n)
    m = ChannelMatrix.identity(n)
    for g in gates:
        m = gate_channel(g, n) @ m
    if not m.fixes_identity():
        raise AssertionError("circuit channel does not fix the identity Pauli")
    return m


# ------------------------------------------------------------- dense oracle
#
# Everything below is numeric test scaffolding: an independent route to the
# same matrices through dense unitaries.  The engine never calls it.

_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0),
    "S": np.diag([1, 1j]).astype(complex),
    "Sdg": np.diag([1, -1j]).astype(complex),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex),
    "Tdg": np.diag([1, np.exp(-1j * np.pi / 4)]).astype(complex),
}


def pauli_matrix(p: Pauli) -> np.ndarray:
    """Dense matrix of a canonical Pauli; qubit 0 on the least significant bit."""
    m = np.eye(1, dtype=complex)
    for q in range(p.n):
        c = "IZXY"[2 * ((p.x >> q) & 1) + ((p.z >> q) & 1)]
        m = np.kron(_1Q[c], m)
    return m


def gate_unitary(g: Gate, n: int) -> np.ndarray:
    dim = 2**n
    if g.kind in SINGLE_QUBIT_KINDS:
        m = np.eye(1, dtype=complex)
        for q in range(n):
            m = np.kron(_1Q[g.kind] if q == g.qubits[0] else _1Q["I"], m)
        return m
    idx = np.arange(dim)
    q0, q1 = g.qubits
    b0 = (idx >> q0) & 1
    b1 = (idx >> q1) & 1
    if g.kind == "CZ":
        return np.diag(np.where(b0 & b1, -1.0, 1.0)).astype(complex)
    if g.kind == "CNOT":
        dest = idx ^ (b0 << q1)
    else:  # SWAP
        dest = idx ^ ((b0 ^ b1) << q0) ^ ((b0 ^ b1) << q1)
    u = np.zeros((dim, dim), dtype=complex)
    u[dest, idx] = 1.0
    return u


def circuit_unitary(gates: list[Gate], n: int) -> np.ndarray:
    u = np.eye(2**n, dtype=complex)
    for g in gates:
        u = gate_unitary(g, n) @ u
    return u


def channel_oracle_dense(u: np.ndarray, n: int, atol: float = 1e-9) -> np.ndarray:
    """Tr(P_i U P_j U+) / 2^n computed numerically from a dense unitary."""
    dim = 2**n
    if u.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} unitary")
    if not np.allclose(u @ u.conj().T, np.eye(dim), atol=atol):
        raise ValueError("input is not unitary within tolerance")
    paulis = np.stack([pauli_matrix(Pauli.from_index(i, n)) for i in range(4**n)])
    conj = u[None] @ paulis @ u.conj().T[None]
    m = np.einsum("iab,jba->ij", paulis, conj) / dim
    if np.abs(m.imag).max() > atol:
        raise AssertionError("channel matrix has nonreal entries")
    return m.real
