"""Noiseless VQE: NFT sweeps on EfficientSU2(reps=1) against exact energies.

Some starting points reach the ground state in a couple of sweeps; others
settle into a local minimum.  Run:  python demos/noiseless_nft.py
"""

import sys

from kagomelab import ExactEnergy, ObjectiveEvaluator, OptimizerState, efficient_su2, init_params, relative_error, run_optimizer
from kagomelab.harness import RunConfig, build_problem

E_GS = -18.0
seeds = range(int(sys.argv[1]) if len(sys.argv) > 1 else 3)

h = build_problem(RunConfig())
circ = efficient_su2(12, 1, width=16)
energy = ExactEnergy(circ, h)
print(f"{circ.n_params} parameters, {circ.cx_count} CX gates")

for seed in seeds:
    run = run_optimizer("nft", 20, ObjectiveEvaluator(lambda p, s: energy(p)), OptimizerState(init_params(circ.n_params, seed)))
    curve = " ".join(f"{e:.2f}" for e in run.history[:6])
    print(f"seed {seed}: {curve} ... final {run.history[-1]:.6f} (relative error {relative_error(run.history[-1], E_GS):.1e})")
