"""Exact ring-element and matrix arithmetic, checked against float evaluation."""

import math
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import tclaw.exact as exact
from tclaw.channel import clifford_channel, gate, rotation_channel
from tclaw.exact import ChannelMatrix, RootTwoScalar, serialize_columns, sign_of_pair
from tclaw.paulis import Pauli

SQRT2 = math.sqrt(2.0)


def scalar_float(a, b, sde):
    return (a + b * SQRT2) / SQRT2**sde


# ----------------------------------------------------------------- scalars


def test_scalar_canonical_examples():
    assert RootTwoScalar.of(2, 0, 2) == RootTwoScalar.one()
    assert RootTwoScalar.of(0, 1, 1) == RootTwoScalar.one()
    assert RootTwoScalar.of(0, 2, 3) == RootTwoScalar.one()
    assert RootTwoScalar.of(4, 0, 4) == RootTwoScalar.one()
    assert RootTwoScalar.of(-2, 0, 2) == RootTwoScalar(-1, 0, 0)
    assert RootTwoScalar.of(6, 2, 2) == RootTwoScalar(3, 1, 0)
    assert RootTwoScalar.of(0, 0, 9) == RootTwoScalar.zero()
    # Odd leading numerator cannot reduce.
    assert RootTwoScalar.of(1, 4, 5) == RootTwoScalar(1, 4, 5)


@given(
    st.integers(-(10**6), 10**6),
    st.integers(-(10**6), 10**6),
    st.integers(0, 12),
)
def test_scalar_canonical_form_and_value(a, b, sde):
    s = RootTwoScalar.of(a, b, sde)
    # Canonical: zero is all-zero, otherwise no further sqrt2 division applies.
    if a == 0 and b == 0:
        assert s == RootTwoScalar.zero()
    else:
        assert s.sde == 0 or s.a % 2 == 1
    assert s.value == pytest.approx(scalar_float(a, b, sde), rel=1e-12, abs=1e-12)
    # Idempotent.
    assert RootTwoScalar.of(s.a, s.b, s.sde) == s


@given(st.integers(-(10**9), 10**9), st.integers(-(10**9), 10**9))
def test_sign_of_pair_matches_float(a, b):
    v = a + b * SQRT2
    got = sign_of_pair(a, b)
    if a == 0 and b == 0:
        assert got == 0
    else:
        # Far from float ties for integer pairs of this size.
        assert got == (1 if v > 0 else -1)


def test_scalar_rejects_negative_sde():
    with pytest.raises(ValueError):
        RootTwoScalar.of(1, 0, -1)


# ---------------------------------------------------------------- matrices


def random_channel(rng, n, t):
    """Product of t rotation channels about random non-identity Paulis."""
    m = ChannelMatrix.identity(n)
    for _ in range(t):
        idx = int(rng.integers(1, 4**n))
        m = rotation_channel(Pauli.from_index(idx, n)) @ m
    return m


def test_identity_properties():
    m = ChannelMatrix.identity(2)
    assert m.sde == 0
    assert m.is_signed_permutation()
    assert m.fixes_identity()
    assert m.entry(0, 0) == RootTwoScalar.one()
    assert m.entry(0, 1) == RootTwoScalar.zero()


def test_identity_is_neutral():
    rng = np.random.default_rng(7)
    m = random_channel(rng, 2, 3)
    i = ChannelMatrix.identity(2)
    assert m @ i == m
    assert i @ m == m


def test_scaled_identity_canonicalizes():
    dim = 4
    a = 2 * np.eye(dim, dtype=np.int64)
    b = np.zeros((dim, dim), dtype=np.int64)
    assert ChannelMatrix(1, 2, a, b) == ChannelMatrix.identity(1)


def test_matmul_associative_exact():
    rng = np.random.default_rng(11)
    for _ in range(5):
        x = random_channel(rng, 2, 2)
        y = random_channel(rng, 2, 3)
        z = random_channel(rng, 2, 2)
        assert (x @ y) @ z == x @ (y @ z)


def test_matmul_matches_float():
    rng = np.random.default_rng(13)
    x = random_channel(rng, 2, 3)
    y = random_channel(rng, 2, 4)
    np.testing.assert_allclose((x @ y).value(), x.value() @ y.value(), atol=1e-9)


def test_transpose_involution_and_product_rule():
    rng = np.random.default_rng(17)
    x = random_channel(rng, 1, 3)
    y = random_channel(rng, 1, 2)
    assert x.transpose().transpose() == x
    assert (x @ y).transpose() == y.transpose() @ x.transpose()


def test_rotation_orthogonality():
    rng = np.random.default_rng(19)
    for n in (1, 2):
        m = random_channel(rng, n, 3)
        assert m @ m.transpose() == ChannelMatrix.identity(n)


def test_signed_permutation_detection():
    h = clifford_channel(gate("H", 0), 1)
    assert h.is_signed_permutation()
    r = rotation_channel(Pauli.from_string("Z"))
    assert not r.is_signed_permutation()
    # A column with two +-1 entries is not a signed permutation.
    a = np.eye(4, dtype=np.int64)
    a[2, 1] = 1
    m = ChannelMatrix(1, 0, a, np.zeros((4, 4), dtype=np.int64))
    assert not m.is_signed_permutation()


def test_fixes_identity_negative():
    h = clifford_channel(gate("H", 0), 1)
    assert h.fixes_identity()
    a = np.eye(4, dtype=np.int64)
    a[[0, 1]] = a[[1, 0]]
    m = ChannelMatrix(1, 0, a, np.zeros((4, 4), dtype=np.int64))
    assert not m.fixes_identity()


def test_immutability():
    m = ChannelMatrix.identity(1)
    with pytest.raises(AttributeError):
        m.sde = 3
    with pytest.raises(ValueError):
        m.a[0, 0] = 5


def test_eq_distinguishes_sde():
    dim = 4
    eye = np.eye(dim, dtype=np.int64)
    zero = np.zeros((dim, dim), dtype=np.int64)
    m1 = ChannelMatrix(1, 1, eye.copy(), zero.copy())  # (1 + 0*sqrt2)/sqrt2
    assert m1 != ChannelMatrix.identity(1)
    assert m1.sde == 1


# ------------------------------------------------------------ serialization


def test_serialize_identity_layout():
    m = ChannelMatrix.identity(1)
    expected = [struct.pack("<II", 4, 0)]
    for j in range(4):
        expected.append(struct.pack("<I", 1))
        expected.append(struct.pack("<Iqq", j, 1, 0))
    assert m.serialize() == b"".join(expected)


def test_serialize_rotation_layout():
    m = rotation_channel(Pauli.from_string("Z"))
    got = m.serialize()
    expected = [struct.pack("<II", 4, 1)]
    # Column I: value 1 = sqrt2/sqrt2.  Column Z: same.  Column X: diagonal
    # 1/sqrt2 plus +1/sqrt2 in the Y row.  Column Y: -1/sqrt2 in the X row
    # plus diagonal 1/sqrt2.
    cols = [
        ((0, 0, 1),),
        ((1, 0, 1),),
        ((2, 1, 0), (3, 1, 0)),
        ((2, -1, 0), (3, 1, 0)),
    ]
    for col in cols:
        expected.append(struct.pack("<I", len(col)))
        for r, va, vb in col:
            expected.append(struct.pack("<Iqq", r, va, vb))
    assert got == b"".join(expected)
    assert got == serialize_columns(4, 1, list(cols))


def test_serialize_deterministic():
    rng = np.random.default_rng(23)
    m = random_channel(rng, 2, 4)
    assert m.serialize() == m.serialize()
    m2 = ChannelMatrix(m.n, m.sde, m.a.copy(), m.b.copy(), _canonical=True)
    assert m2.serialize() == m.serialize()


def test_column_triples_row_order():
    rng = np.random.default_rng(29)
    m = random_channel(rng, 1, 5)
    for j, col in enumerate(m.column_triples()):
        rows = [r for r, _, _ in col]
        assert rows == sorted(rows)
        for r, va, vb in col:
            assert (va, vb) != (0, 0)
            assert va == int(m.a[r, j]) and vb == int(m.b[r, j])


# ------------------------------------------------- escalation beyond floats


def test_object_escalation_matches_float_path():
    rng = np.random.default_rng(31)
    x = random_channel(rng, 1, 3)
    y = random_channel(rng, 1, 3)
    fast = x @ y
    bound = exact._FLOAT_EXACT_BOUND
    try:
        exact._FLOAT_EXACT_BOUND = 0
        slow = x @ y
    finally:
        exact._FLOAT_EXACT_BOUND = bound
    assert fast == slow


def test_large_entry_product_is_exact():
    k = (1 << 30) + 1
    dim = 4
    a = k * np.eye(dim, dtype=np.int64)
    b = np.zeros((dim, dim), dtype=np.int64)
    m = ChannelMatrix(1, 0, a, b)
    p = m @ m
    # 3 * dim * k * k overflows the float-exact budget, forcing escalation;
    # the result must still be the exact square.
    assert 3 * dim * k * k >= exact._FLOAT_EXACT_BOUND
    assert int(p.a[0, 0]) == k * k
    assert not p.b.any()


def test_huge_entry_product_beyond_int64():
    k = (1 << 40) + 1
    dim = 4
    a = k * np.eye(dim, dtype=np.int64)
    b = np.zeros((dim, dim), dtype=np.int64)
    m = ChannelMatrix(1, 0, a, b)
    p = m @ m
    assert int(p.a[0, 0]) == k * k  # k*k does not fit in int64
    assert p.entry(0, 0) == RootTwoScalar(k * k, 0, 0)
    q = p @ ChannelMatrix.identity(1)
    assert int(q.a[0, 0]) == k * k
