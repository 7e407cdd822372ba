"""Pauli algebra and Clifford hierarchy membership tests.

A Pauli operator on n qubits is stored symplectically: bit vectors x, z and
a phase exponent p mod 4, denoting i^p * prod_j X_j^{x_j} Z_j^{z_j} (X to
the left of Z on each qubit). Composition and action on basis states are
then integer arithmetic; matrices are only built to cross-check.

Hierarchy levels follow the recursive definition: C_1 is the Pauli group and
U is in C_{k+1} iff U sigma U^dag is in C_k for every Pauli sigma. For k >= 3
the levels are not groups, so membership is tested by conjugating all 4^n
phaseless Paulis and recursing; checking generators only would be unsound.
Intended for n <= 2 and k <= 4, which covers every protocol in the package.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .gates import CNOT, H, I2, S, X, Z

ATOL = 1e-8

_SINGLE = {
    (0, 0): I2,
    (1, 0): X,
    (0, 1): Z,
    (1, 1): X @ Z,
}


@dataclass(frozen=True)
class PauliOperator:
    """i^phase * prod_j X_j^{x_j} Z_j^{z_j} on num_qubits qubits."""

    x_bits: tuple[int, ...]
    z_bits: tuple[int, ...]
    phase: int = 0

    def __post_init__(self):
        if len(self.x_bits) != len(self.z_bits):
            raise ValidationError("x_bits and z_bits must have equal length")
        object.__setattr__(self, "x_bits", tuple(int(b) & 1 for b in self.x_bits))
        object.__setattr__(self, "z_bits", tuple(int(b) & 1 for b in self.z_bits))
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @property
    def num_qubits(self) -> int:
        return len(self.x_bits)

    def is_identity(self) -> bool:
        return not any(self.x_bits) and not any(self.z_bits) and self.phase == 0

    def matrix(self) -> np.ndarray:
        m = np.array([[1.0 + 0j]])
        for xb, zb in zip(self.x_bits, self.z_bits):
            m = np.kron(m, _SINGLE[(xb, zb)])
        return (1j**self.phase) * m

    def inverse(self) -> "PauliOperator":
        # (X^x Z^z)^2 = (-1)^{x.z} I, so the inverse reuses the same bits.
        xz = sum(a & b for a, b in zip(self.x_bits, self.z_bits))
        return PauliOperator(self.x_bits, self.z_bits, (-self.phase - 2 * xz) % 4)


def single_qubit_pauli(name: str, qubit: int, n: int) -> PauliOperator:
    """Named Pauli embedded at one position of an n-qubit identity string."""
    x = [0] * n
    z = [0] * n
    if name == "X":
        x[qubit] = 1
    elif name == "Z":
        z[qubit] = 1
    elif name == "Y":
        x[qubit] = 1
        z[qubit] = 1
        return PauliOperator(x, z, 1)
    elif name != "I":
        raise ValidationError(f"unknown Pauli name {name!r}")
    return PauliOperator(x, z, 0)


def pauli_mul(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Product a@b; moving each Z in a past each X in b costs a sign."""
    if a.num_qubits != b.num_qubits:
        raise ValidationError("Pauli size mismatch")
    crossings = sum(az & bx for az, bx in zip(a.z_bits, b.x_bits))
    return PauliOperator(
        tuple(ax ^ bx for ax, bx in zip(a.x_bits, b.x_bits)),
        tuple(az ^ bz for az, bz in zip(a.z_bits, b.z_bits)),
        (a.phase + b.phase + 2 * crossings) % 4,
    )


def pauli_apply_to_basis(p: PauliOperator, bits: np.ndarray) -> tuple[np.ndarray, complex]:
    """P|bits> = phase * |bits xor x_bits>."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (p.num_qubits,):
        raise ValidationError("basis string length mismatch")
    flips = np.array(p.x_bits, dtype=np.uint8)
    sign_bits = int(np.sum(np.array(p.z_bits, dtype=np.uint8) & bits)) & 1
    phase = (1j**p.phase) * (-1.0 if sign_bits else 1.0)
    return bits ^ flips, complex(phase)


def try_as_pauli(m: np.ndarray, tol: float = ATOL) -> PauliOperator | None:
    """Exact Pauli representation of a matrix, or None if it is not one."""
    m = np.asarray(m, dtype=np.complex128)
    d = m.shape[0]
    if m.ndim != 2 or m.shape[1] != d or d & (d - 1):
        raise ValidationError("matrix must be square with power-of-two dimension")
    n = d.bit_length() - 1

    col0 = m[:, 0]
    row = int(np.argmax(np.abs(col0)))
    c = col0[row]
    if abs(abs(c) - 1.0) > tol:
        return None
    k = int(np.round(np.angle(c) / (np.pi / 2))) % 4
    if abs(c - 1j**k) > tol:
        return None

    x_bits = tuple((row >> (n - 1 - j)) & 1 for j in range(n))
    z_bits = []
    for j in range(n):
        col = 1 << (n - 1 - j)
        val = m[row ^ col, col]
        if abs(val - 1j**k) <= tol:
            z_bits.append(0)
        elif abs(val + 1j**k) <= tol:
            z_bits.append(1)
        else:
            return None

    cand = PauliOperator(x_bits, tuple(z_bits), k)
    if np.max(np.abs(m - cand.matrix())) > tol:
        return None
    return cand


def phaseless_paulis(n: int):
    """All 4^n operators X^x Z^z with phase exponent 0, identity first."""
    for x_bits in itertools.product((0, 1), repeat=n):
        for z_bits in itertools.product((0, 1), repeat=n):
            yield PauliOperator(x_bits, z_bits, 0)


def is_clifford(u: np.ndarray, tol: float = ATOL) -> bool:
    """True iff conjugation maps every X_j and Z_j generator to a Pauli."""
    u = np.asarray(u, dtype=np.complex128)
    n = u.shape[0].bit_length() - 1
    ud = u.conj().T
    for j in range(n):
        for name in ("X", "Z"):
            sigma = single_qubit_pauli(name, j, n).matrix()
            if try_as_pauli(u @ sigma @ ud, tol) is None:
                return False
    return True


@dataclass(frozen=True)
class HierarchyLevel:
    """Smallest hierarchy level, or level=None if above k_max."""

    level: int | None
    k_max: int

    def __str__(self) -> str:
        if self.level is None:
            return f"not in C_k for k <= {self.k_max}"
        return f"C_{self.level}"


def _in_level(u: np.ndarray, k: int, tol: float) -> bool:
    if k == 1:
        return try_as_pauli(u, tol) is not None
    n = u.shape[0].bit_length() - 1
    ud = u.conj().T
    for sigma in phaseless_paulis(n):
        conj = u @ sigma.matrix() @ ud
        if not _in_level(conj, k - 1, tol):
            return False
    return True


def hierarchy_level(u: np.ndarray, k_max: int = 4, tol: float = ATOL) -> HierarchyLevel:
    """Smallest k <= k_max with U in C_k, by full recursive conjugation."""
    u = np.asarray(u, dtype=np.complex128)
    d = u.shape[0]
    if u.ndim != 2 or u.shape[1] != d or d & (d - 1):
        raise ValidationError("matrix must be square with power-of-two dimension")
    n = d.bit_length() - 1
    if n > 2:
        raise ValidationError("hierarchy_level supports n <= 2")
    if k_max > 4:
        raise ValidationError("hierarchy_level supports k_max <= 4")
    if np.max(np.abs(u @ u.conj().T - np.eye(d))) > 1e-6:
        raise ValidationError("matrix is not unitary")
    for k in range(1, k_max + 1):
        if _in_level(u, k, tol):
            return HierarchyLevel(k, k_max)
    return HierarchyLevel(None, k_max)


def _symplectic_product(a: tuple[int, ...], b: tuple[int, ...], n: int) -> int:
    ax, az = a[:n], a[n:]
    bx, bz = b[:n], b[n:]
    return (sum(x & z for x, z in zip(ax, bz)) + sum(x & z for x, z in zip(bx, az))) % 2


def _maximal_isotropic_subgroups(n: int) -> list[list[PauliOperator]]:
    """Maximal abelian subgroups of the phaseless Pauli group, n <= 2.

    Vectors live in F_2^{2n} as (x_bits, z_bits); a maximal isotropic
    subspace has dimension n (3 subgroups at n=1, 15 at n=2).
    """
    vecs = [v for v in itertools.product((0, 1), repeat=2 * n) if any(v)]
    spans: dict[frozenset, list[tuple[int, ...]]] = {}
    if n == 1:
        for v in vecs:
            spans[frozenset({v})] = [v]
    elif n == 2:
        for a, b in itertools.combinations(vecs, 2):
            if _symplectic_product(a, b, n):
                continue
            ab = tuple(x ^ y for x, y in zip(a, b))
            key = frozenset({a, b, ab})
            spans.setdefault(key, [a, b, ab])
    else:
        raise ValidationError("is_semi_clifford supports n <= 2")
    groups = []
    for members in spans.values():
        groups.append([PauliOperator(v[:n], v[n:]) for v in members])
    return groups


def is_semi_clifford(u: np.ndarray, tol: float = ATOL) -> bool:
    """True iff some maximal abelian Pauli subgroup stays Pauli under U . U^dag."""
    u = np.asarray(u, dtype=np.complex128)
    n = u.shape[0].bit_length() - 1
    ud = u.conj().T
    for group in _maximal_isotropic_subgroups(n):
        if all(try_as_pauli(u @ p.matrix() @ ud, tol) is not None for p in group):
            return True
    return False


def count_pauli_preserving(u: np.ndarray, tol: float = ATOL) -> int:
    """How many of the 4^n phaseless Paulis conjugate to a Pauli under U."""
    u = np.asarray(u, dtype=np.complex128)
    n = u.shape[0].bit_length() - 1
    if n > 2:
        raise ValidationError("count_pauli_preserving supports n <= 2")
    ud = u.conj().T
    return sum(
        1
        for sigma in phaseless_paulis(n)
        if try_as_pauli(u @ sigma.matrix() @ ud, tol) is not None
    )


def random_clifford(n: int, rng, moves: int | None = None) -> np.ndarray:
    """Random Clifford as a random circuit over H, S, CNOT."""
    if n < 1:
        raise ValidationError("need at least one qubit")
    if moves is None:
        moves = 20 * n * n + 10
    gen = rng.generator
    u = np.eye(2**n, dtype=np.complex128)
    for _ in range(moves):
        kind = int(gen.integers(0, 3 if n > 1 else 2))
        if kind == 0:
            q = int(gen.integers(0, n))
            u = _embed_1q(H, q, n) @ u
        elif kind == 1:
            q = int(gen.integers(0, n))
            u = _embed_1q(S, q, n) @ u
        else:
            c = int(gen.integers(0, n))
            t = int(gen.integers(0, n - 1))
            if t >= c:
                t += 1
            u = _embed_cnot(c, t, n) @ u
    return u


def _embed_1q(g: np.ndarray, qubit: int, n: int) -> np.ndarray:
    m = np.array([[1.0 + 0j]])
    for j in range(n):
        m = np.kron(m, g if j == qubit else I2)
    return m


def _embed_cnot(control: int, target: int, n: int) -> np.ndarray:
    d = 2**n
    m = np.zeros((d, d), dtype=np.complex128)
    for idx in range(d):
        bits = [(idx >> (n - 1 - j)) & 1 for j in range(n)]
        if bits[control]:
            bits[target] ^= 1
        out = 0
        for b in bits:
            out = (out << 1) | b
        m[out, idx] = 1.0
    return m
