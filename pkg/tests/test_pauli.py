"""Pauli algebra, recognition, and the Clifford hierarchy predicates."""

import numpy as np
import pytest

from qpv import gates
from qpv.pauli import (
    PauliOperator,
    count_pauli_preserving,
    hierarchy_level,
    is_clifford,
    is_semi_clifford,
    pauli_mul,
    random_clifford,
    single_qubit_pauli,
    try_as_pauli,
)
from qpv.rng import RngStream
from qpv.statevec import haar_random_unitary


def test_pauli_matrix_round_trip():
    p = PauliOperator((1, 0), (0, 1), 1)  # i * (X tensor Z)
    expected = 1j * np.kron(gates.X, gates.Z)
    assert np.allclose(p.matrix(), expected)
    q = try_as_pauli(expected)
    assert q is not None
    assert (q.x_bits, q.z_bits, q.phase) == ((1, 0), (0, 1), 1)


def test_pauli_mul_tracks_phase():
    x = single_qubit_pauli("X", 0, 1)
    z = single_qubit_pauli("Z", 0, 1)
    xz = pauli_mul(x, z)
    assert np.allclose(xz.matrix(), gates.X @ gates.Z)
    # anticommutation: (XZ)^2 = -XXZZ picked up a sign
    assert np.allclose(pauli_mul(xz, xz).matrix(), -np.eye(2))
    assert np.allclose(pauli_mul(x, x).matrix(), np.eye(2))
    y = single_qubit_pauli("Y", 0, 1)
    assert np.allclose(y.matrix(), np.array([[0, -1j], [1j, 0]]))


def test_try_as_pauli_accepts_all_phases():
    for k in range(4):
        m = (1j**k) * np.kron(gates.Y, gates.X)
        p = try_as_pauli(m)
        assert p is not None
        assert np.allclose(p.matrix(), m, atol=1e-10)


def test_try_as_pauli_rejects_non_pauli():
    assert try_as_pauli(gates.H) is None
    assert try_as_pauli(gates.T) is None
    u = haar_random_unitary(4, RngStream(3, 0))
    assert try_as_pauli(u @ np.kron(gates.X, gates.X) @ u.conj().T) is None


def test_is_clifford_table():
    assert is_clifford(gates.H)
    assert is_clifford(gates.S)
    assert is_clifford(gates.CNOT)
    assert not is_clifford(gates.T)


def test_hierarchy_levels_of_named_gates():
    assert hierarchy_level(gates.X, k_max=4).level == 1
    assert hierarchy_level(gates.H, k_max=4).level == 2
    assert hierarchy_level(gates.S, k_max=4).level == 2
    assert hierarchy_level(gates.T, k_max=4).level == 3
    assert hierarchy_level(gates.CNOT, k_max=4).level == 2


def test_hierarchy_level_is_phase_blind():
    assert hierarchy_level(np.exp(0.31j) * gates.T, k_max=3).level == 3


def test_haar_unitary_escapes_hierarchy():
    rng = RngStream(9, 0)
    for _ in range(5):
        u = haar_random_unitary(2, rng)
        assert hierarchy_level(u, k_max=4).level is None


def test_semi_clifford_predicates():
    assert is_semi_clifford(gates.T)
    assert is_semi_clifford(gates.H)
    rng = RngStream(13, 0)
    for _ in range(5):
        assert not is_semi_clifford(haar_random_unitary(2, rng))


def test_count_pauli_preserving():
    assert count_pauli_preserving(gates.T) == 2  # I and Z survive
    assert count_pauli_preserving(gates.H) == 4
    rng = RngStream(15, 0)
    assert count_pauli_preserving(haar_random_unitary(2, rng)) == 1


def test_random_clifford_is_clifford_and_varied():
    rng = RngStream(19, 0)
    actions = set()
    for _ in range(30):
        c = random_clifford(1, rng)
        assert is_clifford(c)
        # classify by the conjugation action on X and Z, which is the
        # Clifford's identity modulo phase
        key = []
        for g in (gates.X, gates.Z):
            p = try_as_pauli(c @ g @ c.conj().T)
            key.append((p.x_bits, p.z_bits, p.phase))
        actions.add(tuple(key))
    assert len(actions) > 5


def test_random_clifford_two_qubits():
    rng = RngStream(23, 0)
    c = random_clifford(2, rng)
    assert c.shape == (4, 4)
    assert is_clifford(c)


def test_clifford_conjugation_preserves_third_level():
    rng = RngStream(29, 0)
    for _ in range(5):
        c = random_clifford(1, rng)
        u = c @ gates.T @ c.conj().T
        assert hierarchy_level(u, k_max=3).level == 3
        assert is_semi_clifford(u)
