"""Dense statevector simulation and the spectral helpers built on it.

Qubit ordering convention, used everywhere in the package: qubit 0 is the
most significant bit of the amplitude index, so |q0 q1 .. q_{n-1}> sits at
index sum_j q_j * 2^(n-1-j). Multi-qubit gates read their targets the same
way: the first listed target is the most significant bit of the gate index.

Two state representations live here. StateVector is the dense form for
registers up to roughly 12 qubits. QubitArray holds a product state as an
(n, 2) table and scales to n in the tens of thousands; the interleaved
product games use it, since their payloads never entangle qubits.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .pauli import PauliOperator
from .rng import RngStream

ATOL_EXACT = 1e-10
ATOL_EIG = 1e-8


def bits_of_index(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> (n - 1 - j)) & 1 for j in range(n))


def index_of_bits(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | (int(b) & 1)
    return out


def check_unitary(m: np.ndarray, tol: float = 1e-8, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name} must be square")
    d = m.shape[0]
    if np.max(np.abs(m.conj().T @ m - np.eye(d))) > tol:
        raise ValidationError(f"{name} is not unitary within {tol}")
    return m


class StateVector:
    """Normalized pure state on num_qubits qubits."""

    __slots__ = ("amps",)

    def __init__(self, amps, normalize: bool = False):
        a = np.ascontiguousarray(np.asarray(amps, dtype=np.complex128).reshape(-1))
        d = a.shape[0]
        if d < 2 or d & (d - 1):
            raise ValidationError("amplitude count must be a power of two, >= 2")
        if not np.all(np.isfinite(a.view(np.float64))):
            raise ValidationError("amplitudes must be finite")
        norm = float(np.linalg.norm(a))
        if normalize:
            if norm == 0.0:
                raise ValidationError("cannot normalize the zero vector")
            a = a / norm
        elif abs(norm - 1.0) > ATOL_EXACT:
            raise ValidationError(f"state norm {norm!r} is not 1 within {ATOL_EXACT}")
        self.amps = a

    @property
    def num_qubits(self) -> int:
        return self.amps.shape[0].bit_length() - 1

    @classmethod
    def from_bits(cls, bits) -> "StateVector":
        bits = [int(b) & 1 for b in bits]
        if not bits:
            raise ValidationError("need at least one qubit")
        a = np.zeros(2 ** len(bits), dtype=np.complex128)
        a[index_of_bits(bits)] = 1.0
        return cls(a)

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        return cls.from_bits([0] * n)

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(np.kron(self.amps, other.amps))

    def inner(self, other: "StateVector") -> complex:
        if self.amps.shape != other.amps.shape:
            raise ValidationError("state dimension mismatch")
        return complex(np.vdot(self.amps, other.amps))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amps, self.amps.conj()), check=False)

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"


class DensityMatrix:
    """Mixed state; Hermitian, unit trace, PSD up to 1e-9."""

    __slots__ = ("mat",)

    def __init__(self, mat, check: bool = True):
        m = np.asarray(mat, dtype=np.complex128)
        d = m.shape[0]
        if m.ndim != 2 or m.shape[1] != d or d < 2 or d & (d - 1):
            raise ValidationError("density matrix must be square with power-of-two dimension")
        if check:
            if np.max(np.abs(m - m.conj().T)) > ATOL_EXACT:
                raise ValidationError("density matrix is not Hermitian")
            if abs(np.trace(m).real - 1.0) > ATOL_EXACT:
                raise ValidationError("density matrix trace is not 1")
            if float(np.linalg.eigvalsh(m).min()) < -1e-9:
                raise ValidationError("density matrix has a negative eigenvalue")
        self.mat = m

    @property
    def num_qubits(self) -> int:
        return self.mat.shape[0].bit_length() - 1

    @classmethod
    def from_pure(cls, state: StateVector) -> "DensityMatrix":
        return state.density()

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        d = 2**n
        return cls(np.eye(d, dtype=np.complex128) / d, check=False)

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        return hermitian_eigendecomposition(self.mat)

    def __repr__(self) -> str:
        return f"DensityMatrix(num_qubits={self.num_qubits})"


def _check_targets(targets, n: int) -> list[int]:
    out = [int(t) for t in targets]
    if not out:
        raise ValidationError("need at least one target qubit")
    for t in out:
        if t < 0 or t >= n:
            raise ValidationError(f"target {t} out of range for {n} qubits")
    if len(set(out)) != len(out):
        raise ValidationError("repeated target qubit")
    return out


def apply_unitary(state: StateVector, u: np.ndarray, targets) -> StateVector:
    """Apply a 2^k-dimensional unitary to the listed qubits, identity elsewhere."""
    n = state.num_qubits
    targets = _check_targets(targets, n)
    k = len(targets)
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2**k, 2**k):
        raise ValidationError(f"gate dimension {u.shape} does not match {k} targets")
    t = state.amps.reshape((2,) * n)
    ut = u.reshape((2,) * (2 * k))
    t = np.tensordot(ut, t, axes=(tuple(range(k, 2 * k)), tuple(targets)))
    t = np.moveaxis(t, tuple(range(k)), tuple(targets))
    return StateVector(t.reshape(-1))


def measure_computational(
    state: StateVector, targets, rng: RngStream, drop: bool = False
) -> tuple[tuple[int, ...], StateVector]:
    """Born-rule measurement of the listed qubits in the computational basis.

    Returns the outcome bits (in target-list order) and the collapsed state.
    With drop=True the measured qubits leave the register; the survivors
    keep their original relative order.
    """
    n = state.num_qubits
    targets = _check_targets(targets, n)
    k = len(targets)
    perm = targets + [a for a in range(n) if a not in targets]
    rows = np.transpose(state.amps.reshape((2,) * n), perm).reshape(2**k, -1)
    marg = np.sum(np.abs(rows) ** 2, axis=1)
    marg = marg / marg.sum()
    outcome = int(rng.choice(2**k, p=marg))
    bits = bits_of_index(outcome, k)

    picked = rows[outcome]
    norm = float(np.linalg.norm(picked))
    if drop:
        if k == n:
            raise ValidationError("cannot drop every qubit")
        return bits, StateVector(picked / norm)
    collapsed = np.zeros_like(rows)
    collapsed[outcome] = picked / norm
    t = collapsed.reshape((2,) * n)
    return bits, StateVector(np.transpose(t, np.argsort(perm)).reshape(-1))


def bell_pair() -> StateVector:
    a = np.zeros(4, dtype=np.complex128)
    a[0] = a[3] = 1.0 / np.sqrt(2.0)
    return StateVector(a)


def bell_measurement(
    state: StateVector, q1: int, q2: int, rng: RngStream
) -> tuple[PauliOperator, StateVector]:
    """Bell-basis measurement of (q1, q2); both qubits leave the register.

    The returned single-qubit Pauli is the teleportation correction: when
    (q1, q2) were the sender qubit and the sender half of a Bell pair, the
    receiver half now holds correction * |psi>, so applying the correction
    inverse recovers |psi| exactly.
    """
    if q1 == q2:
        raise ValidationError("Bell measurement needs two distinct qubits")
    from .gates import CNOT, H

    state = apply_unitary(state, CNOT, [q1, q2])
    state = apply_unitary(state, H, [q1])
    (z, x), post = measure_computational(state, [q1, q2], rng, drop=True)
    return PauliOperator((x,), (z,), 0), post


def move_qubit(state: StateVector, src: int, dst: int) -> StateVector:
    """Relocate one qubit within the register, preserving the others' order."""
    n = state.num_qubits
    _check_targets([src], n)
    _check_targets([dst], n)
    if src == dst:
        return state
    t = np.moveaxis(state.amps.reshape((2,) * n), src, dst)
    return StateVector(t.reshape(-1))


def partial_trace_matrix(mat: np.ndarray, keep) -> np.ndarray:
    """Partial trace of any square power-of-two operator; no trace-1 requirement."""
    mat = np.asarray(mat, dtype=np.complex128)
    d = mat.shape[0]
    n = d.bit_length() - 1
    keep = sorted(_check_targets(keep, n))
    t = mat.reshape((2,) * (2 * n))
    m = n
    for ax in sorted(set(range(n)) - set(keep), reverse=True):
        t = np.trace(t, axis1=ax, axis2=ax + m)
        m -= 1
    dd = 2**m
    return t.reshape(dd, dd)


def partial_trace(rho, keep) -> DensityMatrix:
    """Trace out every qubit not listed; kept qubits stay in ascending order."""
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    return DensityMatrix(partial_trace_matrix(mat, keep), check=False)


def sample_eigenstate(rho: DensityMatrix, rng: RngStream) -> StateVector:
    """Draw a pure state from the eigendecomposition of rho, weighted by eigenvalue.

    Chaining maps through this sampler reproduces every observable of the
    mixed-state evolution in distribution (an unravelling, not an
    approximation), which is how multi-hop teleportation keeps inputs pure.
    """
    w, v = rho.eigensystem()
    p = np.clip(w, 0.0, None)
    p = p / p.sum()
    idx = int(rng.choice(p.shape[0], p=p))
    return StateVector(v[:, idx], normalize=True)


def hermitian_eigendecomposition(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and eigenvector columns of a Hermitian matrix."""
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError("matrix must be square")
    if np.max(np.abs(h - h.conj().T)) > 1e-9:
        raise ValidationError("matrix is not Hermitian within 1e-9")
    w, v = np.linalg.eigh(h)
    return w, v


def psd_inverse_sqrt(m: np.ndarray, cutoff: float = 1e-12) -> np.ndarray:
    """M^(-1/2) on the support {eigenvalue > cutoff}, zero on the kernel."""
    w, v = hermitian_eigendecomposition(m)
    if float(w.min()) < -1e-9:
        raise ValidationError("matrix is not positive semidefinite")
    inv = np.where(w > cutoff, 1.0 / np.sqrt(np.clip(w, cutoff, None)), 0.0)
    return (v * inv) @ v.conj().T


def phase_invariant_distance(u: np.ndarray, v: np.ndarray) -> float:
    """min over phases of the spectral norm ||U - e^{i phi} V||.

    Equals 2 sin(w/4) where w is the width of the smallest circular arc
    containing the eigenphases of U^dag V.
    """
    u = np.asarray(u, dtype=np.complex128)
    v = np.asarray(v, dtype=np.complex128)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError("operands must be square matrices of equal dimension")
    ang = np.sort(np.angle(np.linalg.eigvals(u.conj().T @ v)))
    if ang.shape[0] == 1:
        return 0.0
    gaps = np.diff(ang)
    largest = max(float(gaps.max()), float(ang[0] + 2.0 * np.pi - ang[-1]))
    width = 2.0 * np.pi - largest
    return float(2.0 * np.sin(width / 4.0))


def fidelity(pure: StateVector, other) -> float:
    """<psi|rho|psi> against a DensityMatrix, or |<psi|phi>|^2 against a pure state."""
    if isinstance(other, StateVector):
        return float(abs(pure.inner(other)) ** 2)
    mat = other.mat if isinstance(other, DensityMatrix) else np.asarray(other)
    if mat.shape[0] != pure.amps.shape[0]:
        raise ValidationError("state dimension mismatch")
    val = float(np.real(np.vdot(pure.amps, mat @ pure.amps)))
    return min(max(val, 0.0), 1.0)


def haar_random_unitary(dim: int, rng: RngStream) -> np.ndarray:
    """Haar-distributed unitary: QR of a Ginibre matrix with phase-fixed R diagonal."""
    if dim < 1:
        raise ValidationError("dimension must be at least 1")
    g = rng.generator
    z = (g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_qubit_batch(count: int, rng: RngStream) -> np.ndarray:
    """Stack of `count` independent Haar 2x2 unitaries, shape (count, 2, 2)."""
    if count < 1:
        raise ValidationError("count must be at least 1")
    g = rng.generator
    z = (g.standard_normal((count, 2, 2)) + 1j * g.standard_normal((count, 2, 2))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def haar_random_state(n: int, rng: RngStream) -> StateVector:
    g = rng.generator
    a = g.standard_normal(2**n) + 1j * g.standard_normal(2**n)
    return StateVector(a, normalize=True)


def embed_operator(u: np.ndarray, targets, n: int) -> np.ndarray:
    """Full 2^n matrix acting as u on the listed qubits, identity elsewhere."""
    targets = _check_targets(targets, n)
    k = len(targets)
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2**k, 2**k):
        raise ValidationError(f"gate dimension {u.shape} does not match {k} targets")
    full = np.kron(u, np.eye(2 ** (n - k), dtype=np.complex128)) if k < n else u
    order = targets + [q for q in range(n) if q not in targets]
    inv = list(np.argsort(order))
    t = full.reshape((2,) * (2 * n))
    t = np.transpose(t, inv + [n + i for i in inv])
    return np.ascontiguousarray(t.reshape(2**n, 2**n))


class QubitArray:
    """Product state of n unentangled qubits as an (n, 2) amplitude table."""

    __slots__ = ("amps",)

    def __init__(self, amps, normalize: bool = False):
        a = np.asarray(amps, dtype=np.complex128)
        if a.ndim != 2 or a.shape[1] != 2 or a.shape[0] < 1:
            raise ValidationError("QubitArray expects an (n, 2) array")
        norms = np.linalg.norm(a, axis=1)
        if normalize:
            if np.any(norms == 0.0):
                raise ValidationError("cannot normalize a zero row")
            a = a / norms[:, None]
        elif np.max(np.abs(norms - 1.0)) > ATOL_EXACT:
            raise ValidationError("every qubit row must have unit norm")
        self.amps = a

    @property
    def num_qubits(self) -> int:
        return self.amps.shape[0]

    @classmethod
    def from_bits(cls, bits) -> "QubitArray":
        bits = np.asarray(bits, dtype=np.int64) & 1
        a = np.zeros((bits.shape[0], 2), dtype=np.complex128)
        a[np.arange(bits.shape[0]), bits] = 1.0
        return cls(a)

    def apply_same(self, u: np.ndarray) -> "QubitArray":
        """Apply one 2x2 unitary to every qubit."""
        u = np.asarray(u, dtype=np.complex128)
        if u.shape != (2, 2):
            raise ValidationError("expected a 2x2 matrix")
        return QubitArray(self.amps @ u.T)

    def apply_each(self, us: np.ndarray) -> "QubitArray":
        """Apply the i-th 2x2 unitary of a (n, 2, 2) stack to qubit i."""
        us = np.asarray(us, dtype=np.complex128)
        if us.shape != (self.num_qubits, 2, 2):
            raise ValidationError("expected an (n, 2, 2) stack")
        return QubitArray(np.einsum("qij,qj->qi", us, self.amps))

    def qubit(self, i: int) -> StateVector:
        return StateVector(self.amps[i])

    def measure_all(self, rng: RngStream) -> np.ndarray:
        """Computational measurement of every qubit, vectorized; returns bits."""
        p1 = np.abs(self.amps[:, 1]) ** 2
        return (rng.random(self.num_qubits) < p1).astype(np.uint8)
