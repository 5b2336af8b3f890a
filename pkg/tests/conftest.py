import pytest

from kagomelab import QubitMapping, build_heisenberg, build_kagome_unit_cell, efficient_su2

# Frozen from tests/oracles.py::kagome_ground_energy (sparse Kronecker
# Hamiltonian + eigsh): -18.00000000000002.  Bracketed analytically by the
# six-triangle lower bound (-18) and the bond-singlet product state (-18).
E_GS = -18.0


@pytest.fixture(scope="session")
def lattice():
    return build_kagome_unit_cell()


@pytest.fixture(scope="session")
def hamiltonian(lattice):
    return build_heisenberg(lattice, QubitMapping.identity(12))


@pytest.fixture(scope="session")
def ansatz():
    return efficient_su2(12, 1, width=16)
