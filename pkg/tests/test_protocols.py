"""Game specs, challenge generation, channels, verification, and run_game."""

import numpy as np
import pytest

from qpv import gates
from qpv.errors import BankError, ValidationError
from qpv.layout import single_gate_layout
from qpv.pauli import try_as_pauli
from qpv.protocols import (
    BasisGameSpec,
    ChannelModel,
    DeliveredPayload,
    HonestProver,
    IPGameSpec,
    StateBank,
    TrialOutcome,
    apply_channel,
    bank_issue,
    bank_redeem,
    gen_basis_challenge,
    gen_ip_challenge,
    reconstruct_ip_unitary,
    run_game,
    verify_basis,
    verify_ip,
)
from qpv.rng import RngStream
from qpv.statevec import QubitArray, StateVector, phase_invariant_distance


def test_basis_spec_validation():
    with pytest.raises(ValidationError):
        BasisGameSpec(0, "haar")
    with pytest.raises(ValidationError):
        BasisGameSpec(2, "fourier")
    with pytest.raises(ValidationError):
        BasisGameSpec(2, "haar", eta=1.5)
    with pytest.raises(ValidationError):
        BasisGameSpec(2, "explicit")
    with pytest.raises(ValidationError):
        BasisGameSpec(2, "explicit", unitaries=(gates.T,))
    with pytest.raises(ValidationError):
        BasisGameSpec(2, "layout")
    with pytest.raises(ValidationError):
        BasisGameSpec(2, "layout", layout=single_gate_layout(gates.T, 3))


def test_ip_spec_and_channel_validation():
    with pytest.raises(ValidationError):
        IPGameSpec(0, 1)
    with pytest.raises(ValidationError):
        IPGameSpec(2, 0)
    with pytest.raises(ValidationError):
        IPGameSpec(2, 1, eta_err=-0.1)
    with pytest.raises(ValidationError):
        ChannelModel(p_loss=2.0)
    assert ChannelModel().noiseless
    assert not ChannelModel(p_dep=0.1).noiseless


def test_basis_challenge_haar_payload(rng):
    spec = BasisGameSpec(3, "haar")
    challenge = gen_basis_challenge(spec, rng)
    x = challenge.secret.x
    assert len(x) == 3 and all(b in (0, 1) for b in x)
    expected = challenge.secret.unitary[:, int("".join(map(str, x)), 2)]
    assert np.allclose(challenge.quantum_payload.amps, expected)
    assert challenge.v1_classical.unitary is challenge.secret.unitary


def test_basis_challenge_pauli_family_is_pauli(rng):
    spec = BasisGameSpec(2, "pauli")
    for _ in range(5):
        challenge = gen_basis_challenge(spec, rng)
        assert try_as_pauli(challenge.v1_classical.unitary) is not None


def test_basis_challenge_bb84_uses_letters(rng):
    spec = BasisGameSpec(4, "bb84")
    challenge = gen_basis_challenge(spec, rng)
    assert isinstance(challenge.quantum_payload, QubitArray)
    letters = challenge.v1_classical.letters
    assert len(letters) == 4 and set(letters) <= {"I", "H"}
    for q, letter in enumerate(letters):
        qubit = challenge.quantum_payload.qubit(q).amps
        column = (gates.H if letter == "H" else gates.I2)[:, challenge.secret.x[q]]
        assert np.allclose(qubit, column)


def test_basis_challenge_explicit_and_layout(rng):
    chosen = gen_basis_challenge(
        BasisGameSpec(1, "explicit", unitaries=(gates.H,)), rng
    )
    assert np.allclose(chosen.secret.unitary, gates.H)
    layout = single_gate_layout(gates.T, 3)
    placed = gen_basis_challenge(BasisGameSpec(1, "layout", layout=layout), rng)
    assert np.allclose(placed.secret.unitary, gates.T)
    assert placed.v1_classical.layout is layout


def test_ip_challenge_product_closes(rng):
    spec = IPGameSpec(3, 2)
    challenge = gen_ip_challenge(spec, rng)
    rebuilt = reconstruct_ip_unitary(
        challenge.v0_classical, challenge.v1_classical
    )
    assert phase_invariant_distance(rebuilt, challenge.secret.unitary) < 1e-9
    for q in range(3):
        column = challenge.secret.unitary[:, challenge.secret.x[q]]
        assert np.allclose(challenge.quantum_payload.qubit(q).amps, column)


def test_ip_challenge_per_qubit_unitaries(rng):
    spec = IPGameSpec(3, 2, per_qubit_unitaries=True)
    challenge = gen_ip_challenge(spec, rng)
    assert challenge.v0_classical.factors.shape == (2, 3, 2, 2)
    assert challenge.secret.unitary.shape == (3, 2, 2)
    for q in range(3):
        rebuilt = reconstruct_ip_unitary(
            challenge.v0_classical, challenge.v1_classical, q
        )
        assert phase_invariant_distance(rebuilt, challenge.secret.unitary[q]) < 1e-9


def test_apply_channel_loss_marks_all(rng):
    state = StateVector.from_bits((0, 1))
    _, lost = apply_channel(state, ChannelModel(p_loss=1.0), rng)
    assert lost == (True, True)
    _, kept = apply_channel(state, ChannelModel(), rng)
    assert kept == (False, False)


def test_apply_channel_depolarizing_flip_rate(rng):
    # a uniform Pauli flips a computational-basis qubit half the time
    trials = 4000
    array = QubitArray.from_bits((0,) * trials)
    noisy, lost = apply_channel(array, ChannelModel(p_dep=0.4), rng)
    assert not any(lost)
    flips = int(np.sum(noisy.measure_all(rng)))
    assert abs(flips / trials - 0.2) < 0.025


def test_verify_basis_inclusive_threshold():
    x = (0, 0, 0, 0)
    ok = verify_basis(x, "0001", "0001", eta=0.25)
    assert ok.accepted and ok.error_count == 1
    over = verify_basis(x, "0011", "0011", eta=0.25)
    assert not over.accepted and over.error_count == 2
    split = verify_basis(x, "0000", "0001", eta=0.25)
    assert not split.accepted and split.answers_equal is False
    with pytest.raises(ValidationError):
        verify_basis(x, "000", "000", eta=0.0)
    with pytest.raises(ValidationError):
        verify_basis(x, "00-0", "00-0", eta=0.0)


def test_verify_ip_strict_thresholds():
    x = (0, 0, 0, 0)
    # a zero count always passes, even at a zero threshold
    clean = verify_ip(x, "0000", "0000", eta_err=0.0, eta_loss=0.0)
    assert clean.accepted
    # strict: exactly eta*n errors is a rejection
    edge = verify_ip(x, "0001", "0001", eta_err=0.25, eta_loss=0.0)
    assert not edge.accepted and edge.error_count == 1
    under = verify_ip(x, "0001", "0001", eta_err=0.5, eta_loss=0.0)
    assert under.accepted
    lossy = verify_ip(x, "00-0", "00-0", eta_err=0.0, eta_loss=0.5)
    assert lossy.accepted and lossy.loss_count == 1
    drowned = verify_ip(x, "0--0", "0--0", eta_err=0.0, eta_loss=0.5)
    assert not drowned.accepted and drowned.loss_count == 2


def test_honest_prover_wins_clean_games(rng):
    for spec in (
        BasisGameSpec(3, "haar"),
        BasisGameSpec(4, "bb84"),
        BasisGameSpec(2, "clifford"),
    ):
        stats = run_game(spec, HonestProver(), ChannelModel(), 40, rng)
        assert stats.win_rate == 1.0, spec.family
    ip = run_game(IPGameSpec(3, 2), HonestProver(), ChannelModel(), 40, rng)
    assert ip.win_rate == 1.0
    assert ip.reserved_epr == 0 and ip.mean_epr_consumed == 0.0


def test_honest_prover_marks_lost_ip_qubits(rng):
    spec = IPGameSpec(4, 1)
    challenge = gen_ip_challenge(spec, rng)
    delivered = DeliveredPayload(challenge.quantum_payload, (True, False, True, False))
    outcome = HonestProver().run_trial(challenge, delivered, rng)
    assert outcome.y_alice[0] == "-" and outcome.y_alice[2] == "-"
    assert outcome.y_alice[1] in "01"


def test_honest_prover_guesses_lost_basis_qubits(rng):
    spec = BasisGameSpec(2, "haar", eta=1.0)
    stats = run_game(spec, HonestProver(), ChannelModel(p_loss=1.0), 60, rng)
    # guesses are uniform, so with eta=1 every trial still passes
    assert stats.win_rate == 1.0
    assert 0.2 < stats.mean_error_count / 2 < 0.8


def test_bank_tokens_redeem_once(rng):
    bank = StateBank()
    token = bank_issue(IPGameSpec(2, 1), bank, rng)
    assert len(bank) == 1
    challenge = bank_redeem(bank, token)
    assert challenge.game == "ip"
    with pytest.raises(BankError):
        bank_redeem(bank, token)
    with pytest.raises(BankError):
        bank_redeem(bank, "sb-999999")


def test_bank_mode_skips_the_channel(rng):
    spec = IPGameSpec(2, 1)
    lossy = ChannelModel(p_loss=1.0)
    banked = run_game(
        spec, HonestProver(), lossy, 50, rng, bank=StateBank()
    )
    assert banked.win_rate == 1.0
    shipped = run_game(spec, HonestProver(), lossy, 50, rng)
    assert shipped.win_rate == 0.0
    with pytest.raises(ValidationError):
        run_game(BasisGameSpec(2, "haar"), HonestProver(), lossy, 5, rng, bank=StateBank())


def test_run_game_deterministic_and_thread_independent():
    spec = BasisGameSpec(3, "haar", eta=0.4)
    channel = ChannelModel(p_loss=0.1, p_dep=0.1)

    def play(threads):
        return run_game(
            spec, HonestProver(), channel, 60,
            RngStream(77, 0), threads=threads, keep_trials=True,
        )

    base = play(1)
    again = play(1)
    pooled = play(3)
    assert base == again
    assert base == pooled
    assert len(base.trial_rows) == 60
    assert base.trial_rows[0][0] == 0


def test_run_game_rejects_inconsistent_ledger(rng):
    class FlakyLedger:
        name = "flaky"

        def __init__(self):
            self.calls = 0

        def run_trial(self, challenge, delivered, trial_rng):
            self.calls += 1
            y = "".join(str(b) for b in challenge.secret.x)
            return TrialOutcome(y, y, 0, self.calls % 2)

    with pytest.raises(ValidationError, match="inconsistent reserved"):
        run_game(BasisGameSpec(2, "haar"), FlakyLedger(), ChannelModel(), 4, rng)


def test_run_game_argument_validation(rng):
    spec = BasisGameSpec(2, "haar")
    with pytest.raises(ValidationError):
        run_game(spec, HonestProver(), ChannelModel(), 0, rng)
    with pytest.raises(ValidationError):
        run_game(spec, HonestProver(), ChannelModel(), 5, rng, threads=0)
