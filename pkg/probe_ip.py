"""Probe the interleaved-product attacks before freezing tests."""

import time

import numpy as np

from qpv.attacks.ip import (
    LossyConfidenceAttack,
    PbtAttack,
    RandomBasisAttack,
    SkAttack,
)
from qpv.protocols import NOISELESS, ChannelModel, IPGameSpec, run_game
from qpv.rng import RngStream
from qpv.statevec import DensityMatrix, StateVector, haar_qubit_batch
from qpv.teleport import build_pbt_channel, pbt_teleport, pbt_teleport_density


def check(label, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
    if not ok:
        raise SystemExit(f"probe failed: {label}")


# --- pbt_teleport_density vs pbt_teleport on pure inputs ---
rng = RngStream(7, 0)
rng_pure, rng_dens = RngStream(7, 1), RngStream(7, 2)
ch = build_pbt_channel(4)
fids_pure, fids_dens = [], []
for u in haar_qubit_batch(300, rng):
    psi = StateVector(u[:, 0])
    r1 = pbt_teleport(psi, ch, rng_pure)
    r2 = pbt_teleport_density(psi.density(), ch, rng_dens)
    for res, acc in ((r1, fids_pure), (r2, fids_dens)):
        mat = res.receiver.mat if isinstance(res.receiver, DensityMatrix) else res.receiver.density().mat
        acc.append(float(np.real(np.conj(psi.amps) @ mat @ psi.amps)))
mp, md = np.mean(fids_pure), np.mean(fids_dens)
check("density-channel agrees with pure channel", abs(mp - md) < 0.03, f"pure {mp:.4f} dens {md:.4f} (oracle 0.8581)")

# --- PBT attack t=1, ports (8), n=4 ---
t0 = time.time()
spec = IPGameSpec(n=4, t=1, eta_err=0.35, eta_loss=0.0)
stats = run_game(spec, PbtAttack((8,)), NOISELESS, 200, RngStream(11, 0))
per_qubit = stats.mean_error_count / spec.n
check("pbt t=1 reserved", stats.reserved_epr == 32, f"reserved {stats.reserved_epr}")
check("pbt t=1 consumed=reserved", stats.mean_epr_consumed == 32.0, f"{stats.mean_epr_consumed}")
check("pbt t=1 per-qubit error <= 0.25", per_qubit <= 0.25, f"error {per_qubit:.4f} win {stats.win_rate:.3f} ({time.time()-t0:.1f}s)")

# --- PBT attack t=2, ports (8,8,8), n=2 ---
t0 = time.time()
spec = IPGameSpec(n=2, t=2, eta_err=0.5, eta_loss=0.0)
stats = run_game(spec, PbtAttack((8, 8, 8)), NOISELESS, 100, RngStream(12, 0))
per_qubit = stats.mean_error_count / spec.n
check("pbt t=2 reserved", stats.reserved_epr == 2 * (8 + 64 + 512), f"reserved {stats.reserved_epr}")
check("pbt t=2 per-qubit error", per_qubit <= 0.3, f"error {per_qubit:.4f} win {stats.win_rate:.3f} ({time.time()-t0:.1f}s)")

# --- SK attack t=1 depth 2 l0=14, n=4 ---
t0 = time.time()
atk = SkAttack(2, l0=14)
built = time.time() - t0
spec = IPGameSpec(n=4, t=1, eta_err=0.1, eta_loss=0.0)
t0 = time.time()
stats = run_game(spec, atk, NOISELESS, 200, RngStream(13, 0))
per_qubit = stats.mean_error_count / spec.n
expect = 4 * 2 ** (4 * 1 * atk.word_cap)
check("sk reserved = n*2^(4*l*t)", stats.reserved_epr == expect, f"word_cap {atk.word_cap} (net {built:.1f}s)")
check("sk per-qubit error <= 0.1", per_qubit <= 0.1, f"error {per_qubit:.5f} win {stats.win_rate:.3f} ({time.time()-t0:.1f}s)")
check("sk win rate 1.0", stats.win_rate == 1.0, f"{stats.win_rate}")

# --- SK attack t=2 (multi-word chain, per-qubit error still inside budget) ---
t0 = time.time()
spec = IPGameSpec(n=2, t=2, eta_err=0.2, eta_loss=0.0)
stats = run_game(spec, atk, NOISELESS, 50, RngStream(14, 0))
per_qubit = stats.mean_error_count / spec.n
check("sk t=2 runs, small error", per_qubit <= 0.1, f"error {per_qubit:.5f} win {stats.win_rate:.3f} ({time.time()-t0:.1f}s)")

# --- random-basis: correct fraction 3/4 at n=10^4 ---
t0 = time.time()
spec = IPGameSpec(n=10**4, t=2, eta_err=0.3, eta_loss=0.0)
stats = run_game(spec, RandomBasisAttack(), NOISELESS, 3, RngStream(15, 0))
frac = 1.0 - stats.mean_error_count / spec.n
check("random-basis correct fraction", abs(frac - 0.75) < 0.015, f"correct {frac:.4f} ({time.time()-t0:.1f}s)")

# --- lossy-confidence error fraction (1-eta)/4 ---
for eta in (0.2, 0.5):
    spec = IPGameSpec(n=10**4, t=2, eta_err=0.3, eta_loss=eta)
    stats = run_game(spec, LossyConfidenceAttack(), NOISELESS, 3, RngStream(16, 0))
    frac = stats.mean_error_count / spec.n
    target = (1 - eta) / 4
    check(f"lossy-confidence error fraction eta={eta}", abs(frac - target) < 0.02,
          f"error {frac:.4f} target {target:.4f} loss_count {stats.mean_loss_count:.0f}")

# --- threshold behavior at eta_err + eta_loss/4 = 1/4 +- 0.03 ---
t0 = time.time()
for eta_loss, attack in ((0.0, RandomBasisAttack()), (0.2, LossyConfidenceAttack())):
    for sign, want in ((+1, "win"), (-1, "lose")):
        eta_err = 0.25 + sign * 0.03 - eta_loss / 4
        spec = IPGameSpec(n=10**4, t=2, eta_err=eta_err, eta_loss=eta_loss)
        stats = run_game(spec, attack, NOISELESS, 20, RngStream(17, 0))
        ok = stats.win_rate >= 0.95 if want == "win" else stats.win_rate <= 0.05
        check(f"threshold {attack.name} eta_loss={eta_loss} {want}", ok,
              f"eta_err {eta_err:.2f} win {stats.win_rate:.2f}")
print(f"threshold sweep {time.time()-t0:.1f}s")

# --- lossy-confidence with channel loss: lost positions use the budget ---
spec = IPGameSpec(n=10**4, t=1, eta_err=0.3, eta_loss=0.2)
stats = run_game(spec, LossyConfidenceAttack(), ChannelModel(p_loss=0.1, p_dep=0.0), 3, RngStream(18, 0))
check("lossy-confidence under channel loss wins", stats.win_rate == 1.0,
      f"loss_count {stats.mean_loss_count:.0f} errors {stats.mean_error_count:.0f}")

print("all ip probes passed")
