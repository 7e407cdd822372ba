"""Gate-word compiler: nets, recursion guarantee, and the length profile."""

import numpy as np
import pytest

from qpv import gates
from qpv.errors import ConvergenceError, ValidationError
from qpv.pauli import hierarchy_level
from qpv.rng import RngStream
from qpv.sk import (
    GateWord,
    adjoint_letters,
    build_net,
    concat_words,
    fit_length_exponent,
    length_accuracy_profile,
    pad_to_length,
    reduce_letters,
    sk_decompose,
    su2_distance,
    to_su2,
)
from qpv.statevec import haar_random_unitary


def test_gate_word_product_and_adjoint():
    w = GateWord.from_letters(("H", "T", "T"))
    assert np.allclose(w.unitary, gates.H @ gates.T @ gates.T)
    adj = w.adjoint()
    assert adj.letters == ("Tdg", "Tdg", "H")
    assert np.allclose(adj.unitary @ w.unitary, np.eye(2), atol=1e-12)


def test_letter_reduction_cancels_inverses():
    assert reduce_letters(("T", "Tdg", "H", "H", "T")) == ("T",)
    assert adjoint_letters(("H", "T")) == ("Tdg", "H")
    padded = pad_to_length(GateWord.from_letters(("H",)), 4)
    assert padded.length == 4
    assert np.allclose(padded.unitary, gates.H, atol=1e-12)


def test_concat_words_multiplies_in_reading_order():
    a = GateWord.from_letters(("H",))
    b = GateWord.from_letters(("T",))
    c = concat_words(a, b)
    assert c.letters == ("H", "T")
    assert np.allclose(c.unitary, gates.H @ gates.T)


# frozen build oracle: sizes and covering radii of the default nets,
# deterministic because build_net seeds its own sampling stream
NET_ORACLE = {10: (812, 0.2468), 12: (1672, 0.1693), 14: (3404, 0.1489)}


def test_net_build_matches_frozen_oracle(net10):
    assert len(net10) == NET_ORACLE[10][0]
    assert abs(net10.covering_radius - NET_ORACLE[10][1]) < 5e-4
    assert net10.base_length == 10


def test_net_nearest_returns_exact_hits(net10):
    word, dist = net10.nearest(to_su2(gates.H))
    assert dist < 1e-6  # vectorized arccos path loses a few digits on hits
    assert np.allclose(
        to_su2(word.unitary), to_su2(gates.H), atol=1e-8
    ) or np.allclose(to_su2(word.unitary), -to_su2(gates.H), atol=1e-8)


def test_depth_zero_is_net_lookup(net10):
    rng = RngStream(3, 0)
    for i in range(10):
        u = haar_random_unitary(2, rng.substream(1 + i))
        word = sk_decompose(u, 0, net10)
        assert su2_distance(to_su2(u), to_su2(word.unitary)) <= net10.radius_bound + 1e-9


def test_recursion_obeys_calibrated_epsilon(net10):
    cal = net10.ensure_convergent()
    rng = RngStream(5, 0)
    for depth in (1, 2):
        eps = cal.epsilon(depth)
        for i in range(8):
            u = haar_random_unitary(2, rng.substream(100 * depth + i))
            word = sk_decompose(u, depth, net10)
            assert su2_distance(to_su2(u), to_su2(word.unitary)) <= eps


def test_deeper_recursion_is_more_accurate(net10):
    rng = RngStream(7, 0)
    better = 0
    samples = 25
    for i in range(samples):
        u = haar_random_unitary(2, rng.substream(1 + i))
        d1 = su2_distance(to_su2(u), to_su2(sk_decompose(u, 1, net10).unitary))
        d3 = su2_distance(to_su2(u), to_su2(sk_decompose(u, 3, net10).unitary))
        if d3 < d1:
            better += 1
    assert better >= int(0.95 * samples)


def test_emitted_letters_stay_in_level_three(net10):
    u = haar_random_unitary(2, RngStream(9, 0))
    word = sk_decompose(u, 2, net10)
    for letter in set(word.letters):
        m = GateWord.from_letters((letter,)).unitary
        level = hierarchy_level(m, k_max=3).level
        assert level is not None and level <= 3


def test_word_length_growth_is_five_to_depth(net10):
    u = haar_random_unitary(2, RngStream(11, 0))
    for depth in (0, 1, 2):
        word = sk_decompose(u, depth, net10)
        assert word.length <= net10.base_length * 5**depth


def test_depth_validation(net10):
    u = haar_random_unitary(2, RngStream(13, 0))
    with pytest.raises(ValidationError):
        sk_decompose(u, -1, net10)
    with pytest.raises(ValidationError):
        sk_decompose(u, 7, net10)


def test_too_coarse_net_refuses_recursion():
    net = build_net(4)
    with pytest.raises(ConvergenceError):
        net.ensure_convergent()
    u = haar_random_unitary(2, RngStream(15, 0))
    with pytest.raises(ConvergenceError):
        sk_decompose(u, 1, net)


def test_length_profile_and_exponent(net10):
    rows = length_accuracy_profile(12, (1, 2, 3), net10, RngStream(17, 0))
    assert [r.depth for r in rows] == [1, 2, 3]
    assert rows[0].mean_distance > rows[2].mean_distance
    c = fit_length_exponent(rows)
    assert np.isfinite(c) and c > 0
