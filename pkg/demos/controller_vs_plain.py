"""Noisy VQE with and without the coupling-rescaling controller.

A handful of trials under the default noise (CX depolarizing 1.5%, readout
flips 3%).  Each controller trial takes roughly half a minute.

Run:  python demos/controller_vs_plain.py [n_trials] [out_dir]
"""

import sys
from pathlib import Path

from kagomelab import RunConfig, emit_plot_data, relative_error, run_batch

E_GS = -18.0
n = int(sys.argv[1]) if len(sys.argv) > 1 else 3
out = Path(sys.argv[2] if len(sys.argv) > 2 else "demo_results")

cfg = RunConfig(n_trials=n, seed=7, ground_energy=E_GS)
mit, mit_res = run_batch(cfg.replace(mode="controller"), out / "controller")
raw, raw_res = run_batch(cfg.replace(mode="none", max_cycles=20), out / "none")

print("controller:", mit.dumps(), sep="\n")
for i, r in enumerate(mit_res):
    print(
        f"  trial {i}: success={r.success} cycles={len(r.trace)} J={r.final_J:.2f} "
        f"error at J={r.final_relative_error:.3%}, at J=1 {relative_error(r.raw_energy_at_stop, E_GS):.1%}"
    )
print("plain VQE:", raw.dumps(), sep="\n")
for i, r in enumerate(raw_res):
    print(f"  trial {i}: best error {r.trace.min_rel_error:.1%}")

paths = emit_plot_data(mit_res[0].trace, E_GS, out / "controller_trial0_plot.csv")
print("plot:", *paths)
