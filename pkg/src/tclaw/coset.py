"""Canonical labels for right-Clifford cosets of channel matrices.

Every Clifford channel representation is a signed permutation fixing the
identity column, so right multiplication by one permutes the non-identity
columns and flips their signs.  A complete invariant for the coset {A Q} is
therefore: normalize each non-identity column's sign on its first nonzero
entry, sort the non-identity columns, and serialize.  Two matrices get equal
labels exactly when they differ by such a Q, which is what the meet-in-the-
middle halves need to collide on.
"""

from __future__ import annotations

import struct

import numpy as np

from .exact import ChannelMatrix, serialize_columns, sign_of_pair

_SQRT2 = float(np.sqrt(2.0))
# float sign of a + b*sqrt2 is exact below this (gap >= 1/(|a|+sqrt2|b|))
_FLOAT_SIGN_MAX = 1 << 20
_ENTRY = struct.Struct("<Iqq")
_COUNT = struct.Struct("<I")
# little-endian payload matching serialize_columns' per-entry layout
_PAY_DT = np.dtype({"names": ["r", "a", "b"], "formats": ["<u4", "<i8", "<i8"],
                    "offsets": [0, 4, 12], "itemsize": 20})
# big-endian, sign-bit-flipped copy whose bytes sort like (row, a, b) tuples
_KEY_DT = np.dtype([("r", ">u4"), ("a", ">u8"), ("b", ">u8")])
_SIGN_FLIP = np.uint64(1) << np.uint64(63)


def coset_label(m: ChannelMatrix) -> bytes:
    """Byte label invariant under right signed-permutation factors.

    Requires the identity column to be fixed (column 0 = e_0), which holds
    for every channel representation of a unitary.
    """
    if m.a.dtype != np.int64 or m._max_abs > _FLOAT_SIGN_MAX:
        return _coset_label_generic(m)
    a, b = m.a, m.b
    dim = a.shape[0]
    cols, rows = np.nonzero((a | b).T)
    ea = a[rows, cols]
    eb = b[rows, cols]
    counts = np.bincount(cols, minlength=dim)
    starts = np.cumsum(counts) - counts
    ua, ub = m.unit_numerator()
    if not (counts[0] == 1 and rows[0] == 0 and ea[0] == ua and eb[0] == ub):
        raise ValueError("matrix does not fix the identity column")
    head = ea[starts].astype(np.float64) + eb[starts].astype(np.float64) * _SQRT2
    sign = np.where(head < 0.0, -1, 1)
    sign[0] = 1
    kbytes, pbytes = entry_bytes(rows, sign[cols], ea, eb)
    return assemble_label(dim, m.sde, counts.tolist(), starts.tolist(), kbytes, pbytes)


def entry_bytes(rows, es, ea, eb) -> tuple[bytes, bytes]:
    """Sort-key and payload byte strings for sign-normalized entries.

    Key bytes compare like (row, a, b) tuples; payload bytes match the
    serialized column layout.  Both are 20 bytes per entry.
    """
    va = ea * es
    vb = eb * es
    keys = np.empty(len(rows), _KEY_DT)
    keys["r"] = rows
    keys["a"] = va.view(np.uint64) ^ _SIGN_FLIP
    keys["b"] = vb.view(np.uint64) ^ _SIGN_FLIP
    payload = np.empty(len(rows), _PAY_DT)
    payload["r"] = rows
    payload["a"] = va
    payload["b"] = vb
    return keys.tobytes(), payload.tobytes()


def assemble_label(dim, sde, counts, starts, kbytes, pbytes, base: int = 0) -> bytes:
    """Label bytes from one matrix's entry span inside kbytes/pbytes."""
    lo0 = base * 20
    bounds = [((base + starts[j]) * 20, (base + starts[j] + counts[j]) * 20) for j in range(dim)]
    order = sorted(range(1, dim), key=lambda j: kbytes[bounds[j][0]:bounds[j][1]])
    parts = [struct.pack("<II", dim, sde), _COUNT.pack(1), pbytes[lo0:lo0 + 20]]
    for j in order:
        lo, hi = bounds[j]
        parts.append(_COUNT.pack(counts[j]))
        parts.append(pbytes[lo:hi])
    return b"".join(parts)


def _coset_label_generic(m: ChannelMatrix) -> bytes:
    """Tuple-based path for huge entries, where float signs could round."""
    cols = m.column_triples()
    if cols[0] != ((0, *m.unit_numerator()),):
        raise ValueError("matrix does not fix the identity column")
    rest = []
    for col in cols[1:]:
        r0, a0, b0 = col[0]
        if sign_of_pair(a0, b0) < 0:
            col = tuple((r, -a, -b) for r, a, b in col)
        rest.append(col)
    rest.sort()
    return serialize_columns(m.dim, m.sde, [cols[0], *rest])


def clifford_quotient(a: ChannelMatrix, b: ChannelMatrix) -> ChannelMatrix | None:
    """transpose(a) @ b when that is a signed permutation, else None.

    For orthogonal a with equal coset labels this recovers the right factor
    relating the two matrices.
    """
    if a.n != b.n:
        raise ValueError("dimension mismatch")
    q = a.transpose() @ b
    return q if q.is_signed_permutation() else None
