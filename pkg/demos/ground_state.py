"""Build the 12-site kagome hexagram and compute its exact ground state.

Run:  python demos/ground_state.py
"""

import time

from kagomelab import build_kagome_unit_cell, ground_state_energy, sector_ground_state, set_uniform_interaction
from kagomelab.harness import RunConfig, build_problem

lattice = build_kagome_unit_cell()
h = build_problem(RunConfig())
print(f"{lattice.n_sites} sites, {len(lattice.edges)} edges, {len(h)} Pauli terms on {h.n_qubits} qubits")
print("first terms:", *h.labels[:3], sep="\n  ")

for method in ("lanczos", "dense"):
    t = time.perf_counter()
    res = ground_state_energy(h, method=method)
    print(f"{method:8s} E_gs = {res.energy:+.12f}  residual {res.residual_norm:.1e}  ({time.perf_counter() - t:.2f}s)")

print("sector search:", sector_ground_state(h))

# energies scale linearly with the uniform coupling
for J in (0.5, 2.0):
    print(f"J = {J}: E_gs = {ground_state_energy(set_uniform_interaction(h, J)).energy:+.6f}")
