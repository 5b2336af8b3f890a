import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kagomelab import efficient_su2, init_params
from kagomelab.ansatz import Gate, ParamCircuit


@pytest.mark.parametrize("reps", [1, 2, 3])
def test_counts(reps):
    circ = efficient_su2(12, reps, width=16)
    assert circ.cx_count == 11 * reps
    assert circ.n_params == 2 * 12 * (reps + 1)
    assert circ.n_qubits == 16
    assert circ.active_qubits == tuple(range(12))


def test_layer_order():
    names = [g.name for g in efficient_su2(3, 1).gates]
    assert names == ["RY"] * 3 + ["RZ"] * 3 + ["CX"] * 2 + ["RY"] * 3 + ["RZ"] * 3


def test_chain_on_chosen_qubits():
    circ = efficient_su2(3, 1, qubits=(4, 7, 9), width=12)
    assert [g.qubits for g in circ.gates if g.name == "CX"] == [(4, 7), (7, 9)]
    with pytest.raises(ValueError):
        efficient_su2(3, 1, qubits=(4, 7, 12), width=12)


def test_bind():
    circ = efficient_su2(2, 1)
    bound = circ.bind(np.arange(8.0))
    assert [g.angle for g in bound if g.name != "CX"] == list(np.arange(8.0))
    with pytest.raises(ValueError):
        circ.bind(np.zeros(7))


def test_invalid():
    with pytest.raises(ValueError):
        efficient_su2(1, 1)
    with pytest.raises(ValueError):
        efficient_su2(4, 0)
    with pytest.raises(ValueError):
        ParamCircuit((Gate("RY", (0,), 1),), 1, 1)


def test_dump(tmp_path):
    circ = efficient_su2(2, 1)
    circ.dump(tmp_path / "c.txt")
    lines = (tmp_path / "c.txt").read_text().splitlines()
    assert lines[0] == "RY 0 0"
    assert lines[4] == "CX 0,1 -"
    assert len(lines) == len(circ.gates)


@given(st.integers(1, 200), st.integers(0, 2**32 - 1))
def test_init_params_range_and_determinism(n, seed):
    a = init_params(n, seed)
    assert a.shape == (n,)
    assert np.all((a >= -np.pi) & (a < np.pi))
    assert np.array_equal(a, init_params(n, seed))
