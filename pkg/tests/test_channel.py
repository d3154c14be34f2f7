"""Channel construction against an independent dense-unitary oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tclaw.channel import (
    CLIFFORD_KINDS,
    Gate,
    SINGLE_QUBIT_KINDS,
    TWO_QUBIT_KINDS,
    channel_oracle_dense,
    circuit_channel,
    circuit_unitary,
    clifford_channel,
    conjugate_phased,
    gate,
    gate_channel,
    gate_unitary,
    pauli_matrix,
    rotation_channel,
    rotation_channel_t,
)
from tclaw.exact import ChannelMatrix
from tclaw.paulis import Pauli, PhasedPauli

S2 = np.sqrt(2.0)


def idx(s):
    return Pauli.from_string(s).index


# ---------------------------------------------------------------- rotations


def test_z_rotation_entries_frozen():
    m = rotation_channel(Pauli.from_string("Z"))
    assert m.sde == 1
    expected = np.array(
        [
            [1, 0, 0, 0],
            [0, 1, 0, 0],
            [0, 0, 1 / S2, -1 / S2],
            [0, 0, 1 / S2, 1 / S2],
        ]
    )
    np.testing.assert_allclose(m.value(), expected, atol=1e-12)
    # Integer layers behind those values.
    assert m.b[0, 0] == 1 and m.b[1, 1] == 1
    assert m.a[2, 2] == 1 and m.a[3, 2] == 1 and m.a[2, 3] == -1 and m.a[3, 3] == 1


@pytest.mark.parametrize("n", [1, 2, 3])
def test_rotation_nonzero_count(n):
    rng = np.random.default_rng(41 + n)
    for _ in range(3):
        p = Pauli.from_index(int(rng.integers(1, 4**n)), n)
        m = rotation_channel(p)
        nonzeros = int(((m.a != 0) | (m.b != 0)).sum())
        assert nonzeros == 3 * 4**n // 2


def test_rotation_identity_axis_rejected():
    with pytest.raises(ValueError):
        rotation_channel(Pauli.identity(2))
    with pytest.raises(ValueError):
        rotation_channel_t(Pauli.identity(1))


def test_rotation_squared_is_quarter_turn():
    r = rotation_channel(Pauli.from_string("Z"))
    assert r @ r == clifford_channel(gate("S", 0), 1)


def test_rotation_transpose_is_inverse():
    rng = np.random.default_rng(43)
    for n in (1, 2):
        p = Pauli.from_index(int(rng.integers(1, 4**n)), n)
        r = rotation_channel(p)
        assert r @ rotation_channel_t(p) == ChannelMatrix.identity(n)
        assert rotation_channel_t(p) == r.transpose()


def test_rotation_matches_dense_oracle():
    rng = np.random.default_rng(47)
    for n in (1, 2):
        for _ in range(4):
            p = Pauli.from_index(int(rng.integers(1, 4**n)), n)
            u = (
                np.cos(np.pi / 8) * np.eye(2**n)
                - 1j * np.sin(np.pi / 8) * pauli_matrix(p)
            )
            np.testing.assert_allclose(
                rotation_channel(p).value(), channel_oracle_dense(u, n), atol=1e-9
            )


# ---------------------------------------------------------------- cliffords


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("Q", (0,))
    with pytest.raises(ValueError):
        Gate("H", (0, 1))
    with pytest.raises(ValueError):
        Gate("CNOT", (1, 1))
    with pytest.raises(ValueError):
        Gate("CNOT", (0,))
    with pytest.raises(ValueError):
        Gate("X", (-1,))
    with pytest.raises(ValueError):
        clifford_channel(gate("H", 2), 2)
    with pytest.raises(ValueError):
        clifford_channel(gate("T", 0), 1)


def test_gate_dagger_and_str():
    assert gate("S", 0).dagger() == gate("Sdg", 0)
    assert gate("T", 1).dagger() == gate("Tdg", 1)
    assert gate("CNOT", 0, 1).dagger() == gate("CNOT", 0, 1)
    assert str(gate("CNOT", 0, 1)) == "CNOT 0 1"
    assert str(gate("H", 2)) == "H 2"


def test_known_conjugation_columns():
    h = clifford_channel(gate("H", 0), 1)
    assert h.a[idx("Z"), idx("X")] == 1
    assert h.a[idx("X"), idx("Z")] == 1
    assert h.a[idx("Y"), idx("Y")] == -1
    s = clifford_channel(gate("S", 0), 1)
    assert s.a[idx("Y"), idx("X")] == 1
    assert s.a[idx("X"), idx("Y")] == -1
    x = clifford_channel(gate("X", 0), 1)
    assert x.a[idx("Z"), idx("Z")] == -1
    cnot = clifford_channel(gate("CNOT", 0, 1), 2)
    assert cnot.a[idx("XX"), idx("XI")] == 1
    assert cnot.a[idx("ZZ"), idx("IZ")] == 1
    assert cnot.a[idx("IX"), idx("IX")] == 1
    assert cnot.a[idx("ZI"), idx("ZI")] == 1


def test_clifford_channels_are_signed_perms():
    for kind in CLIFFORD_KINDS:
        g = gate(kind, 0) if kind in SINGLE_QUBIT_KINDS else gate(kind, 0, 1)
        m = clifford_channel(g, 2)
        assert m.is_signed_permutation()
        assert m.fixes_identity()


def test_self_inverse_gates():
    for kind in ("H", "X", "Y", "Z"):
        m = clifford_channel(gate(kind, 0), 1)
        assert m @ m == ChannelMatrix.identity(1)
    for kind in ("CNOT", "CZ", "SWAP"):
        m = clifford_channel(gate(kind, 0, 1), 2)
        assert m @ m == ChannelMatrix.identity(2)
    s = clifford_channel(gate("S", 0), 1)
    sdg = clifford_channel(gate("Sdg", 0), 1)
    assert s @ sdg == ChannelMatrix.identity(1)


def test_conjugate_phased_matches_dense():
    rng = np.random.default_rng(53)
    n = 2
    kinds = [k for k in CLIFFORD_KINDS]
    for _ in range(30):
        kind = kinds[int(rng.integers(len(kinds)))]
        if kind in SINGLE_QUBIT_KINDS:
            g = gate(kind, int(rng.integers(n)))
        else:
            a, b = rng.permutation(n)[:2]
            g = gate(kind, int(a), int(b))
        p = PhasedPauli(Pauli.from_index(int(rng.integers(4**n)), n), int(rng.integers(4)))
        got = conjugate_phased(g, p)
        u = gate_unitary(g, n)
        lhs = u @ (p.phase * pauli_matrix(p.pauli)) @ u.conj().T
        rhs = got.phase * pauli_matrix(got.pauli)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12)


# ----------------------------------------------------------------- circuits


def random_circuit(rng, n, length, t_kinds=True):
    kinds = list(CLIFFORD_KINDS) + (["T", "Tdg"] if t_kinds else [])
    gates = []
    for _ in range(length):
        kind = kinds[int(rng.integers(len(kinds)))]
        if kind in SINGLE_QUBIT_KINDS:
            gates.append(gate(kind, int(rng.integers(n))))
        elif n >= 2:
            a, b = rng.permutation(n)[:2]
            gates.append(gate(kind, int(a), int(b)))
    return gates


@pytest.mark.parametrize("n", [1, 2])
def test_circuit_channel_matches_dense_oracle(n):
    rng = np.random.default_rng(59 + n)
    for _ in range(6):
        gates = random_circuit(rng, n, int(rng.integers(1, 9)))
        m = circuit_channel(gates, n)
        u = circuit_unitary(gates, n)
        np.testing.assert_allclose(m.value(), channel_oracle_dense(u, n), atol=1e-9)


def test_composition_order():
    # First gate applied = rightmost factor: X then H sends Z -> -Z -> -X.
    m = circuit_channel([gate("X", 0), gate("H", 0)], 1)
    assert m.a[idx("X"), idx("Z")] == -1


def test_channel_blind_to_global_phase():
    rng = np.random.default_rng(61)
    gates = random_circuit(rng, 2, 6)
    u = circuit_unitary(gates, 2)
    np.testing.assert_allclose(
        channel_oracle_dense(u, 2),
        channel_oracle_dense(np.exp(1j * 0.7) * u, 2),
        atol=1e-9,
    )


def test_sde_bounded_by_t_count():
    rng = np.random.default_rng(67)
    for _ in range(8):
        gates = random_circuit(rng, 2, int(rng.integers(1, 10)))
        t_count = sum(1 for g in gates if g.kind in ("T", "Tdg"))
        assert circuit_channel(gates, 2).sde <= t_count


def test_t_gate_is_z_rotation():
    assert gate_channel(gate("T", 1), 2) == rotation_channel(Pauli.from_string("IZ"))
    assert gate_channel(gate("Tdg", 0), 1) == rotation_channel_t(Pauli.from_string("Z"))
    u = gate_unitary(gate("T", 0), 1)
    np.testing.assert_allclose(
        gate_channel(gate("T", 0), 1).value(), channel_oracle_dense(u, 1), atol=1e-12
    )


def test_oracle_rejects_nonunitary():
    with pytest.raises(ValueError):
        channel_oracle_dense(np.ones((2, 2), dtype=complex), 1)
    with pytest.raises(ValueError):
        channel_oracle_dense(np.eye(4, dtype=complex), 1)


@given(st.integers(0, 4**2 - 1), st.integers(0, 4**2 - 1))
@settings(max_examples=40, deadline=None)
def test_pauli_matrix_products_consistent(i, j):
    p = Pauli.from_index(i, 2)
    q = Pauli.from_index(j, 2)
    r = p.mul(q)
    np.testing.assert_allclose(
        pauli_matrix(p) @ pauli_matrix(q),
        r.phase * pauli_matrix(r.pauli),
        atol=1e-12,
    )


def test_two_qubit_unitaries():
    # CNOT control qubit 0 (LSB): flips target bit 1 when bit 0 set.
    u = gate_unitary(gate("CNOT", 0, 1), 2)
    assert u[0b00, 0b00] == 1 and u[0b11, 0b01] == 1
    assert u[0b01, 0b11] == 1 and u[0b10, 0b10] == 1
    swap = gate_unitary(gate("SWAP", 0, 1), 2)
    assert swap[0b10, 0b01] == 1 and swap[0b01, 0b10] == 1
    cz = gate_unitary(gate("CZ", 0, 1), 2)
    np.testing.assert_allclose(np.diag(cz), [1, 1, 1, -1])
