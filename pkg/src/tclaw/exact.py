"""Exact 4^n x 4^n matrices over Z[sqrt2] with a shared sqrt2-power denominator.

Every entry of a channel matrix built from pi/4 Pauli rotations and Clifford
gates has the form (a + b*sqrt2) / sqrt2**sde with integers a, b and a single
matrix-wide denominator exponent ``sde``.  Both integer parts are required:
already a product of three rotation factors can produce an entry such as
(2 + sqrt2)/4, which no plain-integer numerator over a sqrt2 power can hold.

Canonical form divides the whole matrix by sqrt2 while possible:

    (a + b*sqrt2) / sqrt2  =  b + (a/2)*sqrt2      (needs every a even)

so a matrix is canonical iff sde == 0 or some entry has odd ``a``.  Canonical
representations are unique, which makes equality and byte serialization
deterministic; coset labels build on that.

Storage is a dense pair of int64 numpy arrays.  Dense-by-default wins in
this interpreter: multiplication runs as four BLAS float64 products, exact
because every intermediate value is an integer bounded far below 2**53 (the
bound is checked, with an arbitrary-precision object-array fallback that in
practice never triggers at supported sizes).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

# 3 * dim * maxA * maxB must stay below 2**53 for the float64 product of two
# matrices to be exact; see __matmul__.
_FLOAT_EXACT_BOUND = 1 << 53


def sign_of_pair(a: int, b: int) -> int:
    """Sign of a + b*sqrt2 (0 only for a == b == 0)."""
    if a == 0 and b == 0:
        return 0
    if a == 0:
        return 1 if b > 0 else -1
    if b == 0:
        return 1 if a > 0 else -1
    if (a > 0) == (b > 0):
        return 1 if a > 0 else -1
    # Opposite signs; sqrt2 irrational so |a| == |b|*sqrt2 cannot happen.
    if a * a > 2 * b * b:
        return 1 if a > 0 else -1
    return 1 if b > 0 else -1


def _reduce_triple(a: int, b: int, sde: int) -> tuple[int, int, int]:
    if a == 0 and b == 0:
        return 0, 0, 0
    while sde > 0 and a % 2 == 0:
        a, b = b, a // 2
        sde -= 1
    return a, b, sde


@dataclass(frozen=True)
class RootTwoScalar:
    """Canonical scalar (a + b*sqrt2) / sqrt2**sde; oracle-comparison helper."""

    a: int
    b: int
    sde: int

    @classmethod
    def of(cls, a: int, b: int, sde: int) -> RootTwoScalar:
        if sde < 0:
            raise ValueError("sde must be nonnegative")
        return cls(*_reduce_triple(a, b, sde))

    @classmethod
    def zero(cls) -> RootTwoScalar:
        return cls(0, 0, 0)

    @classmethod
    def one(cls) -> RootTwoScalar:
        return cls(1, 0, 0)

    @property
    def value(self) -> float:
        return (self.a + self.b * np.sqrt(2.0)) / np.sqrt(2.0) ** self.sde

    def sign(self) -> int:
        return sign_of_pair(self.a, self.b)


class ChannelMatrix:
    """Immutable exact matrix; see module docstring for the entry domain."""

    __slots__ = ("n", "sde", "a", "b", "_max_abs", "_floats")

    def __init__(self, n: int, sde: int, a: np.ndarray, b: np.ndarray, *, _canonical: bool = False):
        dim = 4**n
        if a.shape != (dim, dim) or b.shape != (dim, dim):
            raise ValueError(f"expected shape {(dim, dim)}, got {a.shape} / {b.shape}")
        if sde < 0:
            raise ValueError("sde must be nonnegative")
        if not _canonical:
            sde, a, b = _canonicalize(sde, a, b)
        for arr in (a, b):
            arr.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "sde", sde)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(
            self,
            "_max_abs",
            max(int(np.abs(a).max(initial=0)), int(np.abs(b).max(initial=0))),
        )
        object.__setattr__(self, "_floats", None)

    def __setattr__(self, name, value):
        raise AttributeError("ChannelMatrix is immutable")

    def __reduce__(self):
        # Slots plus the raising __setattr__ break default pickling.
        return (_rebuild, (self.n, self.sde, self.a, self.b))

    def float_pair(self) -> tuple[np.ndarray, np.ndarray]:
        """Cached float64 copies of (a, b); callers must check the entry
        magnitudes keep their arithmetic inside the float64-exact range."""
        fp = self._floats
        if fp is None:
            fp = (self.a.astype(np.float64), self.b.astype(np.float64))
            fp[0].setflags(write=False)
            fp[1].setflags(write=False)
            object.__setattr__(self, "_floats", fp)
        return fp

    @property
    def dim(self) -> int:
        return self.a.shape[0]

    @classmethod
    def identity(cls, n: int) -> ChannelMatrix:
        dim = 4**n
        return cls(
            n, 0, np.eye(dim, dtype=np.int64), np.zeros((dim, dim), dtype=np.int64),
            _canonical=True,
        )

    def __matmul__(self, other: ChannelMatrix) -> ChannelMatrix:
        if not isinstance(other, ChannelMatrix):
            return NotImplemented
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        if (
            self.a.dtype == np.int64
            and other.a.dtype == np.int64
            and 3 * self.dim * self._max_abs * other._max_abs < _FLOAT_EXACT_BOUND
        ):
            fa1 = self.a.astype(np.float64)
            fb1 = self.b.astype(np.float64)
            fa2 = other.a.astype(np.float64)
            fb2 = other.b.astype(np.float64)
            a = np.rint(fa1 @ fa2 + 2.0 * (fb1 @ fb2)).astype(np.int64)
            b = np.rint(fa1 @ fb2 + fb1 @ fa2).astype(np.int64)
        else:
            # Arbitrary-precision escalation; slow but exact.
            oa1 = self.a.astype(object)
            ob1 = self.b.astype(object)
            oa2 = other.a.astype(object)
            ob2 = other.b.astype(object)
            a = _demote(oa1 @ oa2 + 2 * (ob1 @ ob2))
            b = _demote(oa1 @ ob2 + ob1 @ oa2)
        return ChannelMatrix(self.n, self.sde + other.sde, a, b)

    def transpose(self) -> ChannelMatrix:
        return ChannelMatrix(
            self.n, self.sde, self.a.T.copy(), self.b.T.copy(), _canonical=True
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChannelMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and self.sde == other.sde
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
        )

    __hash__ = None

    def entry(self, i: int, j: int) -> RootTwoScalar:
        return RootTwoScalar.of(int(self.a[i, j]), int(self.b[i, j]), self.sde)

    def value(self) -> np.ndarray:
        """Float snapshot for oracle comparison; the engine never consumes it."""
        return (
            self.a.astype(np.float64) + np.sqrt(2.0) * self.b.astype(np.float64)
        ) / np.sqrt(2.0) ** self.sde

    def is_signed_permutation(self) -> bool:
        if self.sde != 0 or self.b.any():
            return False
        aa = np.abs(self.a)
        if (aa > 1).any():
            return False
        return bool((aa.sum(axis=0) == 1).all() and (aa.sum(axis=1) == 1).all())

    def unit_numerator(self) -> tuple[int, int]:
        """The (a, b) pair representing the value 1 at this matrix's sde."""
        if self.sde % 2 == 0:
            return (1 << (self.sde // 2), 0)
        return (0, 1 << ((self.sde - 1) // 2))

    def fixes_identity(self) -> bool:
        """Row 0 and column 0 hold exactly the entry 1 at (0, 0)."""
        ua, ub = self.unit_numerator()
        if self.a[0, 0] != ua or self.b[0, 0] != ub:
            return False
        return not (
            self.a[0, 1:].any()
            or self.a[1:, 0].any()
            or self.b[0, 1:].any()
            or self.b[1:, 0].any()
        )

    def column_triples(self) -> list[tuple[tuple[int, int, int], ...]]:
        """Per column: ((row, a, b), ...) for nonzero entries, rows ascending."""
        at = np.ascontiguousarray(self.a.T)
        bt = np.ascontiguousarray(self.b.T)
        nz = (at != 0) | (bt != 0)
        out = []
        for j in range(self.dim):
            rows = nz[j].nonzero()[0]
            out.append(
                tuple(zip(rows.tolist(), at[j][rows].tolist(), bt[j][rows].tolist()))
            )
        return out

    def serialize(self) -> bytes:
        """Deterministic bytes: dim, sde, then per column the entry count and
        (row, a, b) triples in row order, little-endian fixed width."""
        return serialize_columns(self.dim, self.sde, self.column_triples())

    def __repr__(self) -> str:
        return f"ChannelMatrix(n={self.n}, sde={self.sde})"


def _rebuild(n: int, sde: int, a: np.ndarray, b: np.ndarray) -> ChannelMatrix:
    return ChannelMatrix(n, sde, a, b, _canonical=True)


def _canonicalize(sde: int, a: np.ndarray, b: np.ndarray):
    a = np.ascontiguousarray(a)
    b = np.ascontiguousarray(b)
    while sde > 0 and not (a & 1).any():
        a, b = b, a >> 1
        sde -= 1
    return sde, a, b


def _demote(arr: np.ndarray) -> np.ndarray:
    """Return an int64 view of an object array when values fit, else keep objects."""
    flat = arr.ravel()
    if all(-(2**63) <= v < 2**63 for v in flat):
        return arr.astype(np.int64)
    return arr


def serialize_columns(
    dim: int, sde: int, columns: list[tuple[tuple[int, int, int], ...]]
) -> bytes:
    parts = [struct.pack("<II", dim, sde)]
    pack_head = struct.Struct("<I").pack
    pack_entry = struct.Struct("<Iqq").pack
    for col in columns:
        parts.append(pack_head(len(col)))
        for r, va, vb in col:
            parts.append(pack_entry(r, va, vb))
    return b"".join(parts)
