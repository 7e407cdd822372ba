"""The two verification games: basis game G(n, family, eta) and interleaved
product game G_IP(n, t, eta_err, eta_loss).

Verifier V0 sends the quantum payload (and, in the IP game, the unitaries
u_1..u_t); V1 sends the basis description (the unitary U, or v_1..v_t whose
interleaved product with the u's reconstructs U). The prover answers both
verifiers with the same string; acceptance compares it against the secret x.

Two deliberate asymmetries, preserved from the protocol definitions:

- The basis game accepts iff d_H(x, y) <= eta*n (inclusive); the IP game
  requires errors < eta_err*n and losses < eta_loss*n (strict). A perfect
  count of zero always passes its clause, so the strict form cannot reject a
  flawless transcript at zero thresholds. Integer counts are compared against
  the real thresholds with a 1e-9 guard so float rounding of eta*n never
  flips a boundary verdict.
- Classical channels are perfect; only the quantum payload passes through
  ChannelModel (per-qubit loss, then depolarizing implemented as a uniform
  random Pauli from {I, X, Y, Z}, i.e. replacement by the maximally mixed
  state, which flips a computational measurement with probability p_dep/2).

Product-state payloads (the IP game and the bb84 family) use the per-qubit
QubitArray representation so n = 10^4 games stay cheap; the entangling basis
families (pauli, clifford, haar, explicit, layout) use full state vectors at
desk scale n <= 8.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import BankError, ValidationError
from .gates import H, I2
from .layout import CircuitLayout
from .pauli import PauliOperator, random_clifford
from .rng import RngStream
from .statevec import (
    QubitArray,
    StateVector,
    apply_unitary,
    check_unitary,
    haar_qubit_batch,
    haar_random_unitary,
    measure_computational,
    phase_invariant_distance,
)

EMPTY_SYMBOL = "-"

BASIS_FAMILIES = ("explicit", "pauli", "clifford", "bb84", "haar", "layout")


@dataclass(frozen=True)
class BasisGameSpec:
    """G(n, family, eta): guess x from U|x> given U."""

    n: int
    family: str
    eta: float = 0.0
    unitaries: tuple[np.ndarray, ...] | None = None
    layout: CircuitLayout | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be at least 1")
        if self.family not in BASIS_FAMILIES:
            raise ValidationError(f"unknown family {self.family!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValidationError("eta must lie in [0, 1]")
        if self.family == "explicit":
            if not self.unitaries:
                raise ValidationError("explicit family needs a non-empty unitary list")
            dim = 2**self.n
            mats = tuple(np.asarray(u, dtype=np.complex128) for u in self.unitaries)
            for u in mats:
                if u.shape != (dim, dim):
                    raise ValidationError("family unitary has the wrong dimension")
                check_unitary(u, name="family unitary")
            object.__setattr__(self, "unitaries", mats)
        if self.family == "layout":
            if self.layout is None:
                raise ValidationError("layout family needs a layout")
            if self.layout.n != self.n:
                raise ValidationError("layout qubit count does not match the game")


@dataclass(frozen=True)
class IPGameSpec:
    """G_IP(n, t, eta_err, eta_loss): U arrives as the product u_1 v_1 ... u_t v_t."""

    n: int
    t: int
    eta_err: float = 0.0
    eta_loss: float = 0.0
    per_qubit_unitaries: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be at least 1")
        if self.t < 1:
            raise ValidationError("t must be at least 1")
        for name in ("eta_err", "eta_loss"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class ChannelModel:
    """Independent per-qubit loss followed by depolarizing noise."""

    p_loss: float = 0.0
    p_dep: float = 0.0

    def __post_init__(self):
        for name in ("p_loss", "p_dep"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1]")

    @property
    def noiseless(self) -> bool:
        return self.p_loss == 0.0 and self.p_dep == 0.0


NOISELESS = ChannelModel(0.0, 0.0)


@dataclass(frozen=True)
class BasisShare:
    """V1's classical share for the basis game: which rotation was applied."""

    family: str
    unitary: np.ndarray | None = None
    letters: tuple[str, ...] | None = None
    layout: CircuitLayout | None = None


@dataclass(frozen=True)
class IpShare:
    """One verifier's half of the interleaved product, factors in order."""

    factors: np.ndarray  # (t, 2, 2), or (t, n, 2, 2) with per-qubit unitaries


@dataclass(frozen=True)
class Secret:
    """The verifiers' hidden record: the string and the full rotation."""

    x: tuple[int, ...]
    unitary: np.ndarray


@dataclass(frozen=True)
class Challenge:
    game: str  # "basis" | "ip"
    n: int
    quantum_payload: Union[StateVector, QubitArray]
    v0_classical: IpShare | None
    v1_classical: Union[BasisShare, IpShare]
    secret: Secret
    spec: Union[BasisGameSpec, IPGameSpec] = field(repr=False, default=None)


@dataclass(frozen=True)
class DeliveredPayload:
    """What reaches the prover side: the (possibly noisy) state plus which
    qubits the channel dropped."""

    states: Union[StateVector, QubitArray]
    lost: tuple[bool, ...]

    @classmethod
    def pristine(cls, payload, n: int) -> "DeliveredPayload":
        return cls(payload, (False,) * n)


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    error_count: int
    loss_count: int
    answers_equal: bool


@dataclass(frozen=True)
class TrialOutcome:
    """One protocol run as seen by the verifiers, plus the EPR ledger."""

    y_alice: str
    y_bob: str
    epr_consumed: int
    epr_reserved: int


def _uniform_bits(n: int, rng: RngStream) -> tuple[int, ...]:
    return tuple(int(b) for b in rng.integers(2, size=n))


def gen_basis_challenge(spec: BasisGameSpec, rng: RngStream) -> Challenge:
    """Sample (U, x) uniformly and prepare U|x>."""
    x = _uniform_bits(spec.n, rng)
    family = spec.family
    if family == "bb84":
        letters = tuple("H" if b else "I" for b in rng.integers(2, size=spec.n))
        payload = QubitArray.from_bits(x)
        mats = np.stack([H if g == "H" else I2 for g in letters])
        payload = payload.apply_each(mats)
        share = BasisShare(family, letters=letters)
        # secret unitary kept per-qubit implicitly via the letters
        secret = Secret(x, np.empty(0))
        return Challenge("basis", spec.n, payload, None, share, secret, spec)
    if family == "explicit":
        u = spec.unitaries[int(rng.integers(len(spec.unitaries)))]
    elif family == "pauli":
        x_bits = _uniform_bits(spec.n, rng)
        z_bits = _uniform_bits(spec.n, rng)
        u = PauliOperator(x_bits, z_bits, 0).matrix()
    elif family == "clifford":
        u = random_clifford(spec.n, rng)
    elif family == "haar":
        u = haar_random_unitary(2**spec.n, rng)
    else:  # layout
        u = spec.layout.composite_unitary()
    state = apply_unitary(StateVector.from_bits(x), u, tuple(range(spec.n)))
    share = BasisShare(family, unitary=u, layout=spec.layout)
    return Challenge("basis", spec.n, state, None, share, Secret(x, u), spec)


def gen_ip_challenge(spec: IPGameSpec, rng: RngStream) -> Challenge:
    """Sample u_1..u_t and v_1..v_{t-1} Haar; v_t closes the product to U."""
    x = _uniform_bits(spec.n, rng)
    copies = spec.n if spec.per_qubit_unitaries else 1
    u_all = np.empty((spec.t, copies, 2, 2), dtype=np.complex128)
    v_all = np.empty((spec.t, copies, 2, 2), dtype=np.complex128)
    target = haar_qubit_batch(copies, rng)
    for i in range(spec.t):
        u_all[i] = haar_qubit_batch(copies, rng)
        if i < spec.t - 1:
            v_all[i] = haar_qubit_batch(copies, rng)
    for q in range(copies):
        prefix = np.eye(2, dtype=np.complex128)
        for i in range(spec.t - 1):
            prefix = prefix @ u_all[i, q] @ v_all[i, q]
        prefix = prefix @ u_all[spec.t - 1, q]
        v_all[spec.t - 1, q] = prefix.conj().T @ target[q]
        product = prefix @ v_all[spec.t - 1, q]
        if phase_invariant_distance(product, target[q]) > 1e-9:
            raise ValidationError("interleaved product failed to close")
    per_qubit = target if spec.per_qubit_unitaries else np.broadcast_to(
        target[0], (spec.n, 2, 2)
    )
    # U|x_q> is column x_q of the qubit's unitary
    columns = per_qubit[np.arange(spec.n), :, np.asarray(x)]
    payload = QubitArray(columns)
    if spec.per_qubit_unitaries:
        u_share, v_share = u_all, v_all
        secret_u = target
    else:
        u_share, v_share = u_all[:, 0], v_all[:, 0]
        secret_u = target[0]
    return Challenge(
        "ip",
        spec.n,
        payload,
        IpShare(u_share),
        IpShare(v_share),
        Secret(x, secret_u),
        spec,
    )


def reconstruct_ip_unitary(
    u_share: IpShare, v_share: IpShare, qubit: int | None = None
) -> np.ndarray:
    """Multiply the interleaved factors back together: U = u_1 v_1 ... u_t v_t."""
    u = np.asarray(u_share.factors)
    v = np.asarray(v_share.factors)
    if u.ndim == 4:
        q = 0 if qubit is None else qubit
        u, v = u[:, q], v[:, q]
    out = np.eye(2, dtype=np.complex128)
    for i in range(u.shape[0]):
        out = out @ u[i] @ v[i]
    return out


def apply_channel(state, channel: ChannelModel, rng: RngStream):
    """Per-qubit loss then depolarization; returns (state, lost mask).

    Lost qubits are flagged, not removed; consumers must ignore their
    amplitudes. Depolarization applies a Pauli drawn uniformly from all four
    of {I, X, Y, Z}, which averages to the maximally mixed state.
    """
    if isinstance(state, QubitArray):
        n = state.num_qubits
        lost = rng.random(n) < channel.p_loss
        dep = ~lost & (rng.random(n) < channel.p_dep)
        which = rng.integers(4, size=n)
        if dep.any():
            paulis = np.stack(
                [
                    single_pauli_matrix(which[q]) if dep[q] else I2
                    for q in range(n)
                ]
            )
            state = state.apply_each(paulis)
        return state, tuple(bool(b) for b in lost)
    n = state.num_qubits
    lost = []
    for q in range(n):
        if rng.random() < channel.p_loss:
            lost.append(True)
            continue
        lost.append(False)
        if channel.p_dep > 0.0 and rng.random() < channel.p_dep:
            pauli = single_pauli_matrix(int(rng.integers(4)))
            state = apply_unitary(state, pauli, (q,))
    return state, tuple(lost)


def single_pauli_matrix(index: int) -> np.ndarray:
    from .gates import X, Y, Z

    return (I2, X, Y, Z)[index]


def honest_prover_basis(
    challenge: Challenge, delivered: DeliveredPayload, rng: RngStream
) -> str:
    """Undo U and measure computationally; lost qubits get a uniform guess."""
    share: BasisShare = challenge.v1_classical
    states = delivered.states
    if isinstance(states, QubitArray):
        mats = np.stack(
            [H if g == "H" else I2 for g in share.letters]
        )
        bits = states.apply_each(mats).measure_all(rng)
    else:
        inverse = share.unitary.conj().T
        undone = apply_unitary(states, inverse, tuple(range(challenge.n)))
        measured, _ = measure_computational(
            undone, tuple(range(challenge.n)), rng
        )
        bits = list(measured)
    out = []
    for q in range(challenge.n):
        if delivered.lost[q]:
            out.append(str(int(rng.integers(2))))
        else:
            out.append(str(int(bits[q])))
    return "".join(out)


def honest_prover_ip(
    challenge: Challenge, delivered: DeliveredPayload, rng: RngStream
) -> str:
    """Rebuild U from the two shares, undo it per qubit, and measure; lost
    qubits answer the empty symbol."""
    states: QubitArray = delivered.states
    per_qubit = np.asarray(challenge.v0_classical.factors).ndim == 4
    if per_qubit:
        rebuilt = np.stack(
            [
                reconstruct_ip_unitary(
                    challenge.v0_classical, challenge.v1_classical, q
                )
                for q in range(challenge.n)
            ]
        )
        inverses = np.conj(np.swapaxes(rebuilt, -1, -2))
        undone = states.apply_each(inverses)
    else:
        u = reconstruct_ip_unitary(challenge.v0_classical, challenge.v1_classical)
        undone = states.apply_same(u.conj().T)
    bits = undone.measure_all(rng)
    return "".join(
        EMPTY_SYMBOL if delivered.lost[q] else str(int(bits[q]))
        for q in range(challenge.n)
    )


def _count_clause(count: int, threshold: float, strict: bool) -> bool:
    if count == 0:
        return True
    if strict:
        return count < threshold - 1e-9
    return count <= threshold + 1e-9


def verify_basis(x: tuple[int, ...], y0: str, y1: str, eta: float) -> Verdict:
    """Accept iff both verifiers got the same y and d_H(x, y) <= eta*n."""
    n = len(x)
    _check_answer(y0, n, "01")
    _check_answer(y1, n, "01")
    answers_equal = y0 == y1
    errors = sum(1 for q in range(n) if int(y0[q]) != x[q])
    accepted = answers_equal and _count_clause(errors, eta * n, strict=False)
    return Verdict(accepted, errors, 0, answers_equal)


def verify_ip(
    x: tuple[int, ...], y0: str, y1: str, eta_err: float, eta_loss: float
) -> Verdict:
    """Accept iff answers match, errors < eta_err*n and losses < eta_loss*n
    (strict, except that a zero count always passes its clause)."""
    n = len(x)
    _check_answer(y0, n, "01" + EMPTY_SYMBOL)
    _check_answer(y1, n, "01" + EMPTY_SYMBOL)
    answers_equal = y0 == y1
    losses = sum(1 for c in y0 if c == EMPTY_SYMBOL)
    errors = sum(
        1 for q in range(n) if y0[q] != EMPTY_SYMBOL and int(y0[q]) != x[q]
    )
    accepted = (
        answers_equal
        and _count_clause(errors, eta_err * n, strict=True)
        and _count_clause(losses, eta_loss * n, strict=True)
    )
    return Verdict(accepted, errors, losses, answers_equal)


def _check_answer(y: str, n: int, alphabet: str):
    if len(y) != n:
        raise ValidationError(f"answer length {len(y)} does not match n={n}")
    if any(c not in alphabet for c in y):
        raise ValidationError("answer contains symbols outside the alphabet")


class StateBank:
    """Registry of pre-distributed challenge states, redeemable exactly once."""

    def __init__(self):
        self._records: dict[str, Challenge] = {}
        self._redeemed: set[str] = set()
        self._counter = 0

    def __len__(self) -> int:
        return len(self._records)


def bank_issue(spec: IPGameSpec, bank: StateBank, rng: RngStream) -> str:
    challenge = gen_ip_challenge(spec, rng)
    token = f"sb-{bank._counter:06d}"
    bank._counter += 1
    bank._records[token] = challenge
    return token


def bank_redeem(bank: StateBank, token: str) -> Challenge:
    if token not in bank._records:
        raise BankError(f"unknown state id {token!r}")
    if token in bank._redeemed:
        raise BankError(f"state id {token!r} was already redeemed")
    bank._redeemed.add(token)
    return bank._records[token]


class HonestProver:
    """Reference prover: applies the inverse rotation and reports the truth."""

    name = "honest"

    def run_trial(
        self, challenge: Challenge, delivered: DeliveredPayload, rng: RngStream
    ) -> TrialOutcome:
        if challenge.game == "basis":
            y = honest_prover_basis(challenge, delivered, rng)
        else:
            y = honest_prover_ip(challenge, delivered, rng)
        return TrialOutcome(y, y, 0, 0)


@dataclass(frozen=True)
class GameStats:
    """Aggregate of a Monte Carlo run; all means are exact-integer totals
    divided by the trial count, so they are independent of thread count."""

    trials: int
    wins: int
    win_rate: float
    stderr: float
    mean_error_count: float
    mean_loss_count: float
    mean_epr_consumed: float
    reserved_epr: int
    error_histogram: dict[int, int]
    trial_rows: tuple[tuple[int, bool, int, int, int], ...] | None = None


def run_game(
    spec,
    actor,
    channel: ChannelModel,
    trials: int,
    rng: RngStream,
    bank: StateBank | None = None,
    threads: int = 1,
    keep_trials: bool = False,
) -> GameStats:
    """Run `trials` independent rounds and aggregate.

    Trial i draws everything from rng.substream(1 + i), so results depend
    only on (seed, trial index), never on the thread count. With a bank, the
    payload is redeemed out-of-band and the channel only would have applied
    to the (absent) transmission, so it is skipped.
    """
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    if threads < 1:
        raise ValidationError("threads must be at least 1")
    is_basis = isinstance(spec, BasisGameSpec)
    if bank is not None and is_basis:
        raise ValidationError("the state bank only serves the IP game")

    def one_trial(i: int):
        rng_i = rng.substream(1 + i)
        if bank is not None:
            token = bank_issue(spec, bank, rng_i)
            challenge = bank_redeem(bank, token)
            delivered = DeliveredPayload.pristine(
                challenge.quantum_payload, challenge.n
            )
        else:
            if is_basis:
                challenge = gen_basis_challenge(spec, rng_i)
            else:
                challenge = gen_ip_challenge(spec, rng_i)
            state, lost = apply_channel(challenge.quantum_payload, channel, rng_i)
            delivered = DeliveredPayload(state, lost)
        outcome = actor.run_trial(challenge, delivered, rng_i)
        if is_basis:
            verdict = verify_basis(
                challenge.secret.x, outcome.y_alice, outcome.y_bob, spec.eta
            )
        else:
            verdict = verify_ip(
                challenge.secret.x,
                outcome.y_alice,
                outcome.y_bob,
                spec.eta_err,
                spec.eta_loss,
            )
        return verdict, outcome

    if threads == 1:
        results = [one_trial(i) for i in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one_trial, range(trials)))

    wins = 0
    error_total = 0
    loss_total = 0
    consumed_total = 0
    reserved_values: set[int] = set()
    histogram: dict[int, int] = {}
    for verdict, outcome in results:
        wins += int(verdict.accepted)
        error_total += verdict.error_count
        loss_total += verdict.loss_count
        consumed_total += outcome.epr_consumed
        reserved_values.add(outcome.epr_reserved)
        histogram[verdict.error_count] = histogram.get(verdict.error_count, 0) + 1
    if len(reserved_values) != 1:
        raise ValidationError("strategy reported inconsistent reserved EPR counts")
    rows = None
    if keep_trials:
        rows = tuple(
            (i, v.accepted, v.error_count, v.loss_count, o.epr_consumed)
            for i, (v, o) in enumerate(results)
        )
    win_rate = wins / trials
    stderr = float(np.sqrt(win_rate * (1.0 - win_rate) / trials))
    return GameStats(
        trials=trials,
        wins=wins,
        win_rate=win_rate,
        stderr=stderr,
        mean_error_count=error_total / trials,
        mean_loss_count=loss_total / trials,
        mean_epr_consumed=consumed_total / trials,
        reserved_epr=reserved_values.pop(),
        error_histogram=histogram,
        trial_rows=rows,
    )
