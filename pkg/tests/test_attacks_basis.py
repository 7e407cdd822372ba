"""Entangled and unentangled coalition strategies against the basis game."""

import numpy as np
import pytest

from qpv import gates
from qpv.attacks import (
    BreidbartAttack,
    CliffordAttack,
    LayoutAttack,
    PauliAttack,
    RandomGuessAttack,
    TreeAttack,
)
from qpv.errors import StrategyError, ValidationError
from qpv.layout import CircuitLayout, LayoutGate, single_gate_layout
from qpv.pauli import random_clifford
from qpv.protocols import (
    BasisGameSpec,
    ChannelModel,
    DeliveredPayload,
    IPGameSpec,
    gen_basis_challenge,
    gen_ip_challenge,
    run_game,
)
from qpv.rng import RngStream
from qpv.statevec import fidelity

CLEAN = ChannelModel()


def play(spec, attack, trials, seed=11, threads=1):
    return run_game(spec, attack, CLEAN, trials, RngStream(seed, 0), threads=threads)


def test_pauli_attack_breaks_pauli_family():
    stats = play(BasisGameSpec(4, "pauli"), PauliAttack(), 120)
    assert stats.win_rate == 1.0
    assert stats.reserved_epr == 0
    assert stats.mean_epr_consumed == 0.0


def test_pauli_attack_refuses_ip_challenges(rng):
    challenge = gen_ip_challenge(IPGameSpec(2, 1), rng)
    delivered = DeliveredPayload.pristine(challenge.quantum_payload, 2)
    with pytest.raises(ValidationError):
        PauliAttack().new_trial(challenge, delivered, rng)


def test_clifford_attack_breaks_clifford_family():
    for n in (1, 2):
        stats = play(BasisGameSpec(n, "clifford"), CliffordAttack(), 120)
        assert stats.win_rate == 1.0
        assert stats.reserved_epr == n
        assert stats.mean_epr_consumed == n


def test_clifford_attack_rejects_non_clifford_rotation(rng):
    # the stripped operator leaves the Pauli group whenever the teleport
    # correction anticommutes with T, so some trial in a batch must raise
    challenge = gen_basis_challenge(
        BasisGameSpec(1, "explicit", unitaries=(gates.T,)), rng
    )
    delivered = DeliveredPayload.pristine(challenge.quantum_payload, 1)
    with pytest.raises(StrategyError, match="not Pauli"):
        for i in range(12):
            CliffordAttack().run_trial(challenge, delivered, rng.substream(1 + i))


def tree_spec(*unitaries):
    return BasisGameSpec(1, "explicit", unitaries=tuple(unitaries))


def test_tree_attack_breaks_third_level_gates():
    rng = RngStream(3, 9)
    conjugated = tuple(
        c @ gates.T @ c.conj().T
        for c in (random_clifford(1, rng) for _ in range(3))
    )
    stats = play(
        tree_spec(gates.T, gates.H @ gates.T, *conjugated), TreeAttack(3), 150
    )
    assert stats.win_rate == 1.0
    assert stats.reserved_epr == 14
    # the realized path spends 1 pair hopping in and 2 on the burn round trip
    assert stats.mean_epr_consumed == 3.0


def test_tree_attack_depth_four():
    stats = play(tree_spec(gates.phase_gate(3)), TreeAttack(4), 40)
    assert stats.win_rate == 1.0
    assert stats.reserved_epr == 58


def test_tree_attack_constructor_validation():
    with pytest.raises(ValidationError):
        TreeAttack(2)
    with pytest.raises(ValidationError):
        TreeAttack(5)
    with pytest.raises(ValidationError):
        TreeAttack(3, engine="eager")
    with pytest.raises(ValidationError):
        TreeAttack(4, engine="full")


def test_tree_attack_rejects_out_of_level_rotation(rng):
    challenge = gen_basis_challenge(BasisGameSpec(1, "haar"), rng)
    delivered = DeliveredPayload.pristine(challenge.quantum_payload, 1)
    with pytest.raises(StrategyError, match="outside hierarchy level"):
        TreeAttack(3).new_trial(challenge, delivered, rng)


def test_tree_full_engine_matches_lazy_realized_path():
    """The lazy engine follows one branch; the full engine prepares every
    branch and keeps the one addressed by the realized corrections. Under
    the same random stream both must hold the same single-qubit state just
    before measuring, and answer identically."""
    lazy = TreeAttack(3, engine="lazy")
    full = TreeAttack(3, engine="full")
    gen_rng = RngStream(21, 4)
    for target in (gates.T, gates.H @ gates.T):
        challenge = gen_basis_challenge(tree_spec(target), gen_rng)
        delivered = DeliveredPayload.pristine(challenge.quantum_payload, 1)
        for seed in range(6):
            tl = lazy.new_trial(challenge, delivered, RngStream(seed, 2))
            tf = full.new_trial(challenge, delivered, RngStream(seed, 2))
            assert fidelity(tl.bob["premeasure"], tf.bob["premeasure"]) > 1 - 1e-9
            yl = lazy.finalize_alice(tl, lazy.round1_bob(tl))
            yf = full.finalize_alice(tf, full.round1_bob(tf))
            assert yl == yf


def test_tree_full_engine_win_rate_matches():
    spec = tree_spec(gates.T)
    assert play(spec, TreeAttack(3, engine="full"), 60).win_rate == 1.0


def test_layout_attack_sequential_layers():
    layout = CircuitLayout(
        1,
        (
            (LayoutGate(gates.T, (0,), 3),),
            (LayoutGate(gates.H, (0,), 3),),
        ),
    )
    spec = BasisGameSpec(1, "layout", layout=layout)
    stats = play(spec, LayoutAttack(layout), 60)
    assert stats.win_rate == 1.0
    assert stats.reserved_epr == 196


def test_layout_attack_parallel_gates():
    layer = (LayoutGate(gates.T, (0,), 3), LayoutGate(gates.T, (1,), 3))
    layout = CircuitLayout(2, (layer,))
    spec = BasisGameSpec(2, "layout", layout=layout)
    stats = play(spec, LayoutAttack(layout), 60)
    assert stats.win_rate == 1.0
    assert stats.reserved_epr == 28


def test_layout_attack_single_gate_matches_tree():
    layout = single_gate_layout(gates.T, 3)
    stats = play(
        BasisGameSpec(1, "layout", layout=layout), LayoutAttack(layout), 60
    )
    assert stats.win_rate == 1.0
    assert stats.reserved_epr == 14


def test_breidbart_intermediate_basis_error_rate():
    # cos^2(pi/8) overlap with both encodings: error sin^2(pi/8) = 0.1464
    stats = play(BasisGameSpec(4000, "bb84"), BreidbartAttack(), 1)
    assert stats.reserved_epr == 0
    rate = stats.mean_error_count / 4000
    assert abs(rate - 0.1464) < 0.02


def test_random_guess_error_rate():
    stats = play(BasisGameSpec(4000, "bb84"), RandomGuessAttack(), 1)
    rate = stats.mean_error_count / 4000
    assert abs(rate - 0.5) < 0.03
    # both parties emit the same pre-agreed string, so they never split
    assert stats.win_rate == 0.0


def test_random_guess_answers_always_agree(rng):
    challenge = gen_basis_challenge(BasisGameSpec(6, "haar"), rng)
    delivered = DeliveredPayload.pristine(challenge.quantum_payload, 6)
    outcome = RandomGuessAttack().run_trial(challenge, delivered, rng)
    assert outcome.y_alice == outcome.y_bob
    assert outcome.epr_consumed == 0
