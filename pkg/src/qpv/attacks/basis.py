"""Coalition strategies for the basis game.

The entangled family (pauli, clifford, tree, layout) is one algorithm at
four hierarchy depths: teleport the payload toward the party who knows the
rotation, strip the rotation, and burn the resulting operator back into the
Pauli group, where a computational measurement plus classical bookkeeping
recovers x. The non-entangled pair (breidbart, random-guess) needs no
quantum resources at all.

The tree strategy ships two engines. The lazy engine evolves only the
realized branch and fills the unselected slots of Bob's measurement record
with uniform bits, which is exactly what measuring halves of untouched Bell
pairs yields. The full engine (n=1, depth 3) materializes every branch as
one 13-qubit register: the payload, one pair per direction of the first
round trip, and a four-address final bank, with Bob measuring all four
addresses. Both produce identical records and share one decoder, so
agreement between them validates the lazy shortcut.

Reconstruction failures (a residue that is not Pauli, a rotation outside
the declared hierarchy level) raise; they signal a misconfigured strategy,
not bad luck, and must not be papered over with a guess.
"""

from __future__ import annotations

import numpy as np

from ..costs import layout_cost, tree_cost
from ..errors import StrategyError, ValidationError
from ..layout import CircuitLayout
from ..pauli import PauliOperator, hierarchy_level, try_as_pauli
from ..protocols import BasisShare, Challenge
from ..rng import RngStream
from ..statevec import (
    QubitArray,
    apply_unitary,
    bell_measurement,
    bell_pair,
    measure_computational,
    partial_trace,
)
from .base import (
    BOB,
    ChainGate,
    CoalitionStrategy,
    TrialState,
    decode_chain_answer,
    run_chain,
    shared_random_bits,
)


def _bits_string(bits) -> str:
    return "".join(str(int(b)) for b in bits)


def _with_fallback(bits: str, lost, trial: TrialState) -> str:
    """Replace lost positions with the pre-agreed shared random bits."""
    if not any(lost):
        return bits
    fallback = shared_random_bits(trial, len(bits))
    return "".join(fallback[q] if lost[q] else bits[q] for q in range(len(bits)))


def _pauli_key(p: PauliOperator) -> tuple:
    return (tuple(p.x_bits), tuple(p.z_bits))


def _require_basis(challenge: Challenge):
    if challenge.game != "basis":
        raise ValidationError("this strategy plays the basis game")


class PauliAttack(CoalitionStrategy):
    """Computational measurement beats any Pauli rotation without EPR pairs.

    A Pauli rotation maps basis states to basis states, so Alice's
    measurement outcome is x up to the rotation's bit-flip pattern, which
    Bob reads off the classical description and both sides undo.
    """

    name = "pauli"

    def reserved_epr(self, challenge: Challenge) -> int:
        return 0

    def new_trial(self, challenge, delivered, rng) -> TrialState:
        _require_basis(challenge)
        trial = self.base_trial(challenge, delivered, rng)
        states = delivered.states
        if isinstance(states, QubitArray):
            bits = tuple(int(b) for b in states.measure_all(rng))
        else:
            bits, _ = measure_computational(states, tuple(range(challenge.n)), rng)
        trial.alice["bits"] = bits
        trial.alice["lost"] = delivered.lost
        share: BasisShare = challenge.v1_classical
        pauli = try_as_pauli(share.unitary)
        if pauli is None:
            raise StrategyError("challenge rotation is not a Pauli operator")
        trial.bob["pauli"] = pauli
        return trial

    def round1_alice(self, trial) -> dict:
        return {"bits": trial.alice["bits"], "lost": trial.alice["lost"]}

    def round1_bob(self, trial) -> dict:
        return {"pauli": trial.bob["pauli"]}

    def _decode(self, trial, bits, lost, pauli: PauliOperator) -> str:
        answer = _bits_string(z ^ xb for z, xb in zip(bits, pauli.x_bits))
        return _with_fallback(answer, lost, trial)

    def finalize_alice(self, trial, bob_message) -> str:
        return self._decode(
            trial, trial.alice["bits"], trial.alice["lost"], bob_message["pauli"]
        )

    def finalize_bob(self, trial, alice_message) -> str:
        return self._decode(
            trial,
            alice_message["bits"],
            alice_message["lost"],
            trial.bob["pauli"],
        )


class ChainAttack(CoalitionStrategy):
    """Shared machinery for the teleportation-chain strategies.

    Subclasses define the strip list; this class runs the live chain, has
    Bob measure, and lets both parties decode by transcript replay.
    """

    def _gates(self, challenge: Challenge) -> list[ChainGate]:
        raise NotImplementedError

    def new_trial(self, challenge, delivered, rng) -> TrialState:
        _require_basis(challenge)
        trial = self.base_trial(challenge, delivered, rng)
        trial.alice["lost"] = delivered.lost
        engine = run_chain(
            self._gates(challenge),
            challenge.n,
            state=delivered.states,
            rng=rng,
            ledger=trial.ledger,
        )
        trial.alice["sigmas"] = engine.alice_sigmas
        trial.bob["sigmas"] = engine.bob_sigmas
        # kept for cross-engine state validation; the protocol never reads it
        trial.bob["premeasure"] = engine.state
        trial.bob["bits"] = engine.measure()
        return trial

    def round1_alice(self, trial) -> dict:
        return {"sigmas": trial.alice["sigmas"], "lost": trial.alice["lost"]}

    def round1_bob(self, trial) -> dict:
        return {"sigmas": trial.bob["sigmas"], "bits": trial.bob["bits"]}

    def _decode(self, trial, alice_sigmas, bob_sigmas, bits, lost) -> str:
        answer = decode_chain_answer(
            self._gates(trial.challenge),
            trial.challenge.n,
            alice_sigmas,
            bob_sigmas,
            bits,
        )
        return _with_fallback(_bits_string(answer), lost, trial)

    def finalize_alice(self, trial, bob_message) -> str:
        return self._decode(
            trial,
            trial.alice["sigmas"],
            bob_message["sigmas"],
            bob_message["bits"],
            trial.alice["lost"],
        )

    def finalize_bob(self, trial, alice_message) -> str:
        return self._decode(
            trial,
            alice_message["sigmas"],
            trial.bob["sigmas"],
            trial.bob["bits"],
            alice_message["lost"],
        )


class CliffordAttack(ChainAttack):
    """One teleport and one conjugation: the stripped operator stays Pauli."""

    name = "clifford"

    def reserved_epr(self, challenge: Challenge) -> int:
        return challenge.n

    def _gates(self, challenge: Challenge) -> list[ChainGate]:
        share: BasisShare = challenge.v1_classical
        return [
            ChainGate(
                share.unitary,
                tuple(range(challenge.n)),
                BOB,
                max_burns=0,
                label="clifford",
            )
        ]


class TreeAttack(ChainAttack):
    """Iterated strip for a level-k rotation: one hop in, k-2 burns, and a
    final measurement over a correction-indexed channel bank.

    Works for single-qubit challenges at depths 3 and 4. Every burn
    candidate is checked against the one-level-per-round descent.
    """

    def __init__(self, k: int, engine: str = "lazy"):
        if k not in (3, 4):
            raise ValidationError("tree depth must be 3 or 4")
        if engine not in ("lazy", "full"):
            raise ValidationError("engine must be 'lazy' or 'full'")
        if engine == "full" and k != 3:
            raise ValidationError("the full-branch engine only supports depth 3")
        self.k = k
        self.engine = engine
        self.name = f"tree:{k}"

    def reserved_epr(self, challenge: Challenge) -> int:
        return tree_cost(challenge.n, self.k).reserved_epr

    def _gates(self, challenge: Challenge) -> list[ChainGate]:
        share: BasisShare = challenge.v1_classical
        k = self.k
        return [
            ChainGate(
                share.unitary,
                tuple(range(challenge.n)),
                BOB,
                max_burns=k - 2,
                label=f"tree:{k}",
                level_checks=tuple(range(k - 1, 1, -1)),
            )
        ]

    def _check_challenge(self, challenge: Challenge):
        if challenge.n != 1:
            raise ValidationError("tree strategy runs single-qubit challenges")
        share: BasisShare = challenge.v1_classical
        if hierarchy_level(share.unitary, k_max=self.k).level is None:
            raise StrategyError(
                f"challenge rotation is outside hierarchy level {self.k}"
            )

    def new_trial(self, challenge, delivered, rng) -> TrialState:
        self._check_challenge(challenge)
        if self.engine == "full":
            return self._full_trial(challenge, delivered, rng)
        trial = super().new_trial(challenge, delivered, rng)
        self._attach_slot_record(trial, rng)
        return trial

    def _address(self, alice_sigmas) -> tuple:
        """Final-bank address: Alice's corrections before the last hop."""
        return tuple(_pauli_key(p) for p in alice_sigmas[:-1])

    def _all_addresses(self):
        cells = [((x,), (z,)) for x in (0, 1) for z in (0, 1)]
        if self.k == 3:
            return [(c,) for c in cells]
        return [(a, b) for a in cells for b in cells]

    def _attach_slot_record(self, trial, rng: RngStream):
        """Bob's measurement record covers every final-bank address; the
        unselected slots hold halves of untouched Bell pairs, so their
        outcomes are uniform bits."""
        n = trial.challenge.n
        realized = self._address(trial.alice["sigmas"])
        slots = {}
        for address in self._all_addresses():
            if address == realized:
                slots[address] = trial.bob["bits"]
            else:
                slots[address] = tuple(int(b) for b in rng.bits(n))
        trial.bob["slots"] = slots

    def round1_bob(self, trial) -> dict:
        return {"sigmas": trial.bob["sigmas"], "slots": trial.bob["slots"]}

    def finalize_alice(self, trial, bob_message) -> str:
        address = self._address(trial.alice["sigmas"])
        return self._decode(
            trial,
            trial.alice["sigmas"],
            bob_message["sigmas"],
            bob_message["slots"][address],
            trial.alice["lost"],
        )

    def finalize_bob(self, trial, alice_message) -> str:
        address = self._address(alice_message["sigmas"])
        return self._decode(
            trial,
            alice_message["sigmas"],
            trial.bob["sigmas"],
            trial.bob["slots"][address],
            alice_message["lost"],
        )

    def _full_trial(self, challenge, delivered, rng) -> TrialState:
        """Depth-3 run with every branch explicit in one 13-qubit register.

        Register labels at build time: 0 payload, (1, 2) the first round
        trip's outbound pair, (3, 4) its return pair, and (5+2s, 6+2s) the
        final bank pair for address s, the sender keeping the even-offset
        half. Bob applies the per-address correction inverse to all four
        bank halves and measures them all; only the slot matching Alice's
        first correction carries the payload.
        """
        trial = self.base_trial(challenge, delivered, rng)
        trial.alice["lost"] = delivered.lost
        share: BasisShare = challenge.v1_classical
        u = share.unitary

        reg = delivered.states
        for _ in range(6):
            reg = reg.tensor(bell_pair())
        live = list(range(13))

        def pos(label: int) -> int:
            return live.index(label)

        def hop(a: int, b: int) -> PauliOperator:
            nonlocal reg
            corr, reg = bell_measurement(reg, pos(a), pos(b), rng)
            live.remove(a)
            live.remove(b)
            trial.ledger.spend(1)
            return corr

        sigma_a1 = hop(0, 1)
        reg = apply_unitary(reg, u.conj().T, [pos(2)])
        sigma_b1 = hop(2, 4)
        addresses = self._all_addresses()
        realized = addresses.index((_pauli_key(sigma_a1),))
        sigma_a2 = hop(3, 5 + 2 * realized)

        for s, address in enumerate(addresses):
            x_bits, z_bits = address[0]
            candidate = (
                sigma_b1.matrix()
                @ u.conj().T
                @ PauliOperator(x_bits, z_bits, 0).matrix()
                @ u
            )
            reg = apply_unitary(reg, candidate.conj().T, [pos(6 + 2 * s)])
        # the realized slot is pure here (its Bell partner is consumed), so
        # its reduced matrix is the same object the lazy engine measures
        trial.bob["premeasure"] = partial_trace(
            np.outer(reg.amps, reg.amps.conj()), [pos(6 + 2 * realized)]
        )
        slots = {}
        for s, address in enumerate(addresses):
            (bit,), reg = measure_computational(reg, [pos(6 + 2 * s)], rng, drop=True)
            live.remove(6 + 2 * s)
            slots[address] = (int(bit),)

        trial.alice["sigmas"] = [sigma_a1, sigma_a2]
        trial.bob["sigmas"] = [sigma_b1]
        trial.bob["bits"] = slots[addresses[realized]]
        trial.bob["slots"] = slots
        return trial


class LayoutAttack(ChainAttack):
    """Chained strips over a fixed circuit layout, last layer first.

    Concatenation (layers in sequence) and parallelism (disjoint supports in
    one layer) both reduce to running the strip chain gate by gate; the
    reserved count multiplies across layers and adds within a layer.
    """

    def __init__(self, layout: CircuitLayout):
        if layout.n > 2:
            raise ValidationError("layout strategy runs at most 2 qubits")
        for layer in layout.layers:
            for gate in layer:
                if gate.level > 3:
                    raise ValidationError("layout gates must sit in level 3 or below")
        self.layout = layout
        self.name = "layout"

    def reserved_epr(self, challenge: Challenge) -> int:
        return layout_cost(self.layout).reserved_epr

    def _gates(self, challenge: Challenge) -> list[ChainGate]:
        gates = []
        for index in reversed(range(self.layout.depth)):
            for gate in self.layout.layers[index]:
                gates.append(
                    ChainGate(
                        gate.gate,
                        gate.targets,
                        BOB,
                        max_burns=gate.level - 2,
                        label=f"layer{index + 1}",
                    )
                )
        return gates


BREIDBART_BASIS = np.array(
    [
        [np.cos(np.pi / 8), -np.sin(np.pi / 8)],
        [np.sin(np.pi / 8), np.cos(np.pi / 8)],
    ],
    dtype=np.complex128,
)


class BreidbartAttack(CoalitionStrategy):
    """Measure every qubit in the basis halfway between the two bb84 bases.

    The intermediate basis keeps overlap cos^2(pi/8) with the encoded bit in
    either preparation basis, so the per-qubit error rate is about 0.1464
    with no entanglement at all.
    """

    name = "breidbart"

    def reserved_epr(self, challenge: Challenge) -> int:
        return 0

    def new_trial(self, challenge, delivered, rng) -> TrialState:
        _require_basis(challenge)
        if challenge.v1_classical.family != "bb84":
            raise ValidationError(
                "the intermediate-basis strategy needs bb84 challenges"
            )
        trial = self.base_trial(challenge, delivered, rng)
        states: QubitArray = delivered.states
        overlaps = np.einsum("jb,qj->qb", BREIDBART_BASIS.conj(), states.amps)
        p1 = np.abs(overlaps[:, 1]) ** 2
        bits = (rng.random(challenge.n) < p1).astype(int)
        trial.alice["bits"] = _bits_string(bits)
        trial.alice["lost"] = delivered.lost
        return trial

    def round1_alice(self, trial) -> dict:
        return {"bits": trial.alice["bits"], "lost": trial.alice["lost"]}

    def round1_bob(self, trial) -> dict:
        return {}

    def finalize_alice(self, trial, bob_message) -> str:
        return _with_fallback(trial.alice["bits"], trial.alice["lost"], trial)

    def finalize_bob(self, trial, alice_message) -> str:
        return _with_fallback(alice_message["bits"], alice_message["lost"], trial)


class RandomGuessAttack(CoalitionStrategy):
    """Both parties return one pre-agreed uniform string; error rate 1/2."""

    name = "random-guess"

    def reserved_epr(self, challenge: Challenge) -> int:
        return 0

    def new_trial(self, challenge, delivered, rng) -> TrialState:
        trial = self.base_trial(challenge, delivered, rng)
        shared_random_bits(trial, challenge.n)
        return trial

    def round1_alice(self, trial) -> dict:
        return {}

    def round1_bob(self, trial) -> dict:
        return {}

    def finalize_alice(self, trial, bob_message) -> str:
        return shared_random_bits(trial, trial.challenge.n)

    def finalize_bob(self, trial, alice_message) -> str:
        return shared_random_bits(trial, trial.challenge.n)
