"""Zero-noise extrapolation and twirled readout correction at a fixed state.

Uses parameters from a short noiseless NFT run, then compares energy
estimates under the default noise.  ZNE evaluates folded circuits on the
slow per-shot path, so this takes a minute or two.

Run:  python demos/baselines.py
"""

from kagomelab import (
    ExactEnergy,
    NoiseModel,
    ObjectiveEvaluator,
    OptimizerState,
    ZneConfig,
    calibrate_readout,
    efficient_su2,
    estimate_energy,
    init_params,
    run_optimizer,
    trex_energy,
    zne_energy,
)
from kagomelab.harness import RunConfig, build_problem

h = build_problem(RunConfig())
circ = efficient_su2(12, 1, width=16)
exact = ExactEnergy(circ, h)
params = run_optimizer("nft", 3, ObjectiveEvaluator(lambda p, s: exact(p)), OptimizerState(init_params(circ.n_params, 0))).state.params

noise = NoiseModel()
cal = calibrate_readout(16, noise, seed=1)
rows = {
    "exact": exact(params),
    "raw": estimate_energy(circ, params, h, noise, 4096, 2),
    "T-Rex": trex_energy(circ, params, h, noise, shots=4096, seed=3, calibration=cal),
    "ZNE (1,3,5)": zne_energy(circ, params, h, noise, ZneConfig(), 1024, 4),
}
print("calibrated flip rates:", " ".join(f"{p:.3f}" for p in cal.flip_rates[:12]))
for name, e in rows.items():
    print(f"{name:12s} {e:+.4f}  ({e / rows['exact']:.3f} of exact)")
# folding amplifies gate noise only, so ZNE keeps the readout shrinkage (1 - 2p)^2
print(f"readout shrinkage (1-2p)^2 = {(1 - 2 * noise.p_readout) ** 2:.4f}")
