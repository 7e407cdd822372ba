"""Teleportation primitives: plain, gate-through-resource, and port-based.

Plain teleportation consumes one Bell pair per qubit and leaves the receiver
holding correction * |psi| with a tracked Pauli correction. Gate teleportation
pre-rotates the resource by a third-level gate U, so the receiver holds
U R |psi| = R' U |psi| with R' one hierarchy level below U; undoing R' yields
U|psi| without ever running U on the live state.

Port-based teleportation implements the square-root measurement over N Bell
pairs ("ports"). POVM elements live on the N+1 qubits Alice measures. Because
the resource is fixed, the outcome probabilities and the receiver qubit are
exact bilinear functions of the 2-dimensional input; both kernels are
precomputed at build time, so per-use cost does not grow with N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StrategyError, ValidationError
from .gates import CNOT, H
from .pauli import PauliOperator, hierarchy_level, is_clifford
from .rng import RngStream
from .statevec import (
    DensityMatrix,
    StateVector,
    apply_unitary,
    bell_measurement,
    bell_pair,
    embed_operator,
    fidelity,
    haar_random_state,
    measure_computational,
    move_qubit,
    partial_trace_matrix,
    psd_inverse_sqrt,
)


@dataclass(frozen=True)
class TeleportResult:
    """Receiver holds correction * |input>; undo with correction.inverse()."""

    correction: PauliOperator
    receiver_state: StateVector
    epr_consumed: int


def teleport(state: StateVector, qubit: int, rng: RngStream) -> TeleportResult:
    """Teleport one qubit of the register through a fresh Bell pair.

    The receiver qubit takes the sender qubit's register position, so
    callers keep stable indices across calls.
    """
    n = state.num_qubits
    reg = state.tensor(bell_pair())
    corr, post = bell_measurement(reg, qubit, n, rng)
    post = move_qubit(post, post.num_qubits - 1, qubit)
    return TeleportResult(corr, post, 1)


def teleport_register(
    state: StateVector, qubits, rng: RngStream
) -> tuple[PauliOperator, StateVector, int]:
    """Teleport the listed qubits one by one.

    Returns the combined correction as a register-wide Pauli (identity on
    qubits that stayed put), the post-teleport register, and the EPR count.
    """
    n = state.num_qubits
    qubits = [int(q) for q in qubits]
    if len(set(qubits)) != len(qubits):
        raise ValidationError("repeated qubit in teleport list")
    x = [0] * n
    z = [0] * n
    consumed = 0
    for q in qubits:
        res = teleport(state, q, rng)
        state = res.receiver_state
        x[q] = res.correction.x_bits[0]
        z[q] = res.correction.z_bits[0]
        consumed += res.epr_consumed
    return PauliOperator(x, z, 0), state, consumed


@dataclass(frozen=True, eq=False)
class GateTeleportResult:
    state: StateVector
    correction: PauliOperator
    shifted_correction: np.ndarray
    epr_consumed: int


def teleport_gate(state: StateVector, u: np.ndarray, rng: RngStream) -> GateTeleportResult:
    """Apply a third-level gate by teleporting through a pre-rotated resource.

    The receiver momentarily holds U R |psi|; the equivalent form R' U |psi|
    with R' = U R U^dag (verified Clifford) is undone here, so the returned
    state is exactly U|psi|.
    """
    n = state.num_qubits
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (2**n, 2**n):
        raise ValidationError("gate dimension does not match the register")
    lvl = hierarchy_level(u, k_max=3)
    if lvl.level is None:
        raise ValidationError("gate is not in the third hierarchy level")

    reg = state
    for _ in range(n):
        reg = reg.tensor(bell_pair())
    # layout: payload 0..n-1, pair j = (sender half n+2j, receiver half n+2j+1)
    receivers = [n + 2 * j + 1 for j in range(n)]
    reg = apply_unitary(reg, u, receivers)
    for j in range(n):
        reg = apply_unitary(reg, CNOT, [j, n + 2 * j])
        reg = apply_unitary(reg, H, [j])
    order = list(range(n)) + [n + 2 * j for j in range(n)]
    bits, remaining = measure_computational(reg, order, rng, drop=True)
    z_bits, x_bits = bits[:n], bits[n:]
    correction = PauliOperator(x_bits, z_bits, 0)

    shifted = u @ correction.matrix() @ u.conj().T
    if not is_clifford(shifted):
        raise StrategyError("teleported correction did not drop to the Clifford level")
    out = apply_unitary(remaining, shifted.conj().T, list(range(n)))
    return GateTeleportResult(out, correction, shifted, n)


@dataclass(frozen=True, eq=False)
class PbtChannel:
    """Square-root-measurement port teleportation with precomputed kernels.

    povm_elements holds the N port elements then the completion element,
    each on the N+1 measured qubits (input first, then the sender halves).
    prob_kernels[k] is the 2x2 bilinear form giving outcome probabilities:
    p_k = psi^dag K_k psi / 2^N. recv_kernels[i] gives the unnormalized
    receiver matrix for port i by the analogous contraction.
    """

    num_ports: int
    povm_elements: list
    prob_kernels: np.ndarray
    recv_kernels: np.ndarray


def build_pbt_channel(num_ports: int) -> PbtChannel:
    n = int(num_ports)
    if n < 2 or n > 8:
        raise ValidationError("port count must be between 2 and 8")
    dim = 2 ** (n + 1)
    phi = bell_pair().amps
    bell_proj = np.outer(phi, phi.conj())
    sigmas = [embed_operator(bell_proj, [0, 1 + i], n + 1) for i in range(n)]
    total = np.zeros((dim, dim), dtype=np.complex128)
    for s in sigmas:
        total += s
    root = psd_inverse_sqrt(total)
    elements = [root @ s @ root for s in sigmas]
    completion = np.eye(dim, dtype=np.complex128)
    for e in elements:
        completion -= e
    elements.append(completion)

    acc = np.zeros((dim, dim), dtype=np.complex128)
    for idx, e in enumerate(elements):
        e = (e + e.conj().T) / 2.0
        elements[idx] = e
        low = float(np.linalg.eigvalsh(e).min())
        if low < -1e-9:
            raise ValidationError(f"POVM element {idx} has negative eigenvalue {low}")
        acc += e
    if np.max(np.abs(acc - np.eye(dim))) > 1e-8:
        raise ValidationError("POVM does not sum to identity")

    prob_kernels = np.stack([partial_trace_matrix(e, [0]) for e in elements])
    recv_kernels = np.stack(
        [partial_trace_matrix(elements[i], [0, 1 + i]).reshape(2, 2, 2, 2) for i in range(n)]
    )
    return PbtChannel(n, elements, prob_kernels, recv_kernels)


@dataclass(frozen=True, eq=False)
class PbtResult:
    """port is None when the completion outcome fired; the receiver is then
    maximally mixed, so measuring it in any basis is a fair coin."""

    port: int | None
    receiver: DensityMatrix
    epr_consumed: int


def pbt_teleport(qubit: StateVector, channel: PbtChannel, rng: RngStream) -> PbtResult:
    """One port-teleportation use: sample the POVM, return Bob's port qubit."""
    if qubit.num_qubits != 1:
        raise ValidationError("port teleportation sends one qubit at a time")
    psi = qubit.amps
    n = channel.num_ports
    scale = float(2**n)
    raw = np.einsum("c,kcd,d->k", psi.conj(), channel.prob_kernels, psi).real / scale
    probs = np.clip(raw, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValidationError("POVM probabilities do not sum to 1")
    probs = probs / total
    idx = int(rng.choice(n + 1, p=probs))
    if idx == n:
        return PbtResult(None, DensityMatrix.maximally_mixed(1), n)
    mat = np.einsum("x,y,xuyv->vu", psi.conj(), psi, channel.recv_kernels[idx])
    mat = (mat + mat.conj().T) / 2.0
    mat = mat / np.trace(mat).real
    return PbtResult(idx, DensityMatrix(mat), n)


def pbt_teleport_density(
    rho: DensityMatrix, channel: PbtChannel, rng: RngStream
) -> PbtResult:
    """Port teleportation of a mixed qubit (chained hops receive one).

    Same kernels as the pure case: probabilities are Tr(K_k rho) / 2^N and
    the receiver matrix is the bilinear contraction with rho in place of
    the pure-state dyad.
    """
    if rho.num_qubits != 1:
        raise ValidationError("port teleportation sends one qubit at a time")
    n = channel.num_ports
    scale = float(2**n)
    raw = np.einsum("kcd,dc->k", channel.prob_kernels, rho.mat).real / scale
    probs = np.clip(raw, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValidationError("POVM probabilities do not sum to 1")
    probs = probs / total
    idx = int(rng.choice(n + 1, p=probs))
    if idx == n:
        return PbtResult(None, DensityMatrix.maximally_mixed(1), n)
    mat = np.einsum("yx,xuyv->vu", rho.mat, channel.recv_kernels[idx])
    mat = (mat + mat.conj().T) / 2.0
    mat = mat / np.trace(mat).real
    return PbtResult(idx, DensityMatrix(mat), n)


def pbt_fidelity_curve(port_counts, trials: int, rng: RngStream) -> list[tuple[int, float, float]]:
    """Mean teleportation fidelity over Haar inputs for each port count.

    Completion outcomes contribute their actual (maximally mixed) fidelity
    of one half, so the curve reflects the full channel, not just successes.
    """
    if trials < 1:
        raise ValidationError("need at least one trial")
    out = []
    for i, num_ports in enumerate(port_counts):
        channel = build_pbt_channel(num_ports)
        fids = np.empty(trials)
        for t in range(trials):
            sub = rng.substream(1 + i * (2 * trials) + 2 * t)
            psi = haar_random_state(1, sub)
            res = pbt_teleport(psi, channel, rng.substream(2 + i * (2 * trials) + 2 * t))
            fids[t] = fidelity(psi, res.receiver)
        out.append((num_ports, float(fids.mean()), float(fids.std(ddof=1) / np.sqrt(trials))))
    return out
