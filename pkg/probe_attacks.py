import numpy as np

from qpv.gates import H, T, phase_gate
from qpv.layout import CircuitLayout, LayoutGate
from qpv.protocols import NOISELESS, BasisGameSpec, run_game
from qpv.rng import RngStream
from qpv.attacks import (
    BreidbartAttack,
    CliffordAttack,
    LayoutAttack,
    PauliAttack,
    RandomGuessAttack,
    TreeAttack,
)

def show(tag, stats, n):
    print(
        f"{tag:24s} win={stats.win_rate:.4f} err/n={stats.mean_error_count / n:.4f} "
        f"epr={stats.mean_epr_consumed:.2f} reserved={stats.reserved_epr}"
    )

# pauli attack, n=3
spec = BasisGameSpec(3, "pauli", 0.0)
stats = run_game(spec, PauliAttack(), NOISELESS, 300, RngStream(11, 0))
show("pauli n=3", stats, 3)
assert stats.win_rate == 1.0 and stats.mean_epr_consumed == 0.0

# clifford attack, n=2
spec = BasisGameSpec(2, "clifford", 0.0)
stats = run_game(spec, CliffordAttack(), NOISELESS, 200, RngStream(12, 0))
show("clifford n=2", stats, 2)
assert stats.win_rate == 1.0 and stats.mean_epr_consumed == 2.0
assert stats.reserved_epr == 2

# tree k=3 lazy on T
spec = BasisGameSpec(1, "explicit", 0.0, unitaries=(T,))
stats = run_game(spec, TreeAttack(3), NOISELESS, 300, RngStream(13, 0))
show("tree:3 lazy T", stats, 1)
assert stats.win_rate == 1.0 and stats.mean_epr_consumed == 3.0
assert stats.reserved_epr == 14

# tree k=3 full engine on T
stats = run_game(spec, TreeAttack(3, engine="full"), NOISELESS, 200, RngStream(13, 0))
show("tree:3 full T", stats, 1)
assert stats.win_rate == 1.0 and stats.mean_epr_consumed == 3.0
assert stats.reserved_epr == 14

# tree k=3 on a mix of levels 1..3
spec = BasisGameSpec(1, "explicit", 0.0, unitaries=(T, H, np.eye(2)))
stats = run_game(spec, TreeAttack(3), NOISELESS, 300, RngStream(14, 0))
show("tree:3 lazy mixed", stats, 1)
assert stats.win_rate == 1.0

# tree k=4 on the pi/8 phase gate (level 4)
spec = BasisGameSpec(1, "explicit", 0.0, unitaries=(phase_gate(4),))
stats = run_game(spec, TreeAttack(4), NOISELESS, 200, RngStream(15, 0))
show("tree:4 lazy P(pi/8)", stats, 1)
assert stats.win_rate == 1.0 and stats.mean_epr_consumed == 5.0
assert stats.reserved_epr == 58

# layout [T][H] (two layers, one qubit)
lay = CircuitLayout(1, ((LayoutGate(T, (0,), 3),), (LayoutGate(H, (0,), 3),)))
spec = BasisGameSpec(1, "layout", 0.0, layout=lay)
stats = run_game(spec, LayoutAttack(lay), NOISELESS, 300, RngStream(16, 0))
show("layout [T][H]", stats, 1)
assert stats.win_rate == 1.0
assert stats.reserved_epr == 196

# layout T || T (one layer, two qubits)
lay2 = CircuitLayout(2, ((LayoutGate(T, (0,), 3), LayoutGate(T, (1,), 3)),))
spec = BasisGameSpec(2, "layout", 0.0, layout=lay2)
stats = run_game(spec, LayoutAttack(lay2), NOISELESS, 200, RngStream(17, 0))
show("layout T||T", stats, 2)
assert stats.win_rate == 1.0
assert stats.reserved_epr == 28

# breidbart on bb84 at n=10^4: error rate ~ sin^2(pi/8) = 0.14645
spec = BasisGameSpec(10000, "bb84", 0.0)
stats = run_game(spec, BreidbartAttack(), NOISELESS, 30, RngStream(18, 0))
show("breidbart bb84", stats, 10000)
err = stats.mean_error_count / 10000
assert abs(err - np.sin(np.pi / 8) ** 2) < 0.005, err

# random guess on bb84: error rate ~ 1/2
stats = run_game(spec, RandomGuessAttack(), NOISELESS, 30, RngStream(19, 0))
show("random-guess bb84", stats, 10000)
err = stats.mean_error_count / 10000
assert abs(err - 0.5) < 0.01, err

# breidbart wins when eta is above its error rate
spec = BasisGameSpec(10000, "bb84", 0.16)
stats = run_game(spec, BreidbartAttack(), NOISELESS, 30, RngStream(20, 0))
show("breidbart eta=.16", stats, 10000)
assert stats.win_rate == 1.0

print("all basis attack probes passed")
