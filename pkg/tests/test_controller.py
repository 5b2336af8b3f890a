import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import E_GS
from kagomelab import (
    ControllerConfig,
    ExactEnergy,
    NoiseModel,
    VqeTrace,
    init_params,
    run_mitigated_vqe,
    run_unmitigated_vqe,
)
from kagomelab.controller import TRACE_HEADER, TraceRow
from kagomelab import efficient_su2
from kagomelab.lattice import PauliSum


def constant(value):
    return lambda params, h, seed: value


def scaled(value):
    """Energy of a frozen state: linear in the Hamiltonian's J."""
    return lambda params, h, seed: value * h.uniform_interaction


def run_synthetic(energy_fn, ground=E_GS, cfg=ControllerConfig()):
    h = PauliSum(("XX", "YY", "ZZ"), (1.0, 1.0, 1.0))
    return run_mitigated_vqe(h, efficient_su2(2, 1), "frozen", None, ground, cfg, seed=0, energy_fn=energy_fn)


def test_config_validation():
    with pytest.raises(ValueError):
        ControllerConfig(stop_threshold=0.03, band_delta=0.02)
    with pytest.raises(ValueError):
        ControllerConfig(j_min=1.0)
    with pytest.raises(ValueError):
        ControllerConfig(max_recursions=6)
    with pytest.raises(ValueError):
        ControllerConfig(max_cycles_per_pass=0)


def test_on_target_stops_at_cycle_one():
    res = run_synthetic(constant(E_GS))
    assert res.success
    assert len(res.trace) == 1 and res.trace[0].cycle == 1
    assert res.final_J == 1.0 and res.recursions_used == 0


def test_constant_above_band_ratchets_to_j_max_and_fails():
    cfg = ControllerConfig(max_cycles_per_pass=100)
    res = run_synthetic(constant(0.5 * E_GS), cfg=cfg)
    J = res.trace.column("J")
    assert not res.success
    assert res.recursions_used == 5
    assert len(res.trace) == 6 * 100
    assert J.max() == 2.0 and res.final_J == 2.0
    # strictly increasing by (1 + j_step) until the clamp
    ramp = J[J < 2.0]
    assert np.allclose(ramp[1:] / ramp[:-1], 1.01)
    assert np.all(np.diff(res.trace.column("cycle")) == 1)
    assert list(np.unique(res.trace.column("recursion"))) == [0, 1, 2, 3, 4, 5]


def test_constant_above_band_with_positive_target():
    # E = 1.5 E_gs sits above the band only when E_gs > 0
    res = run_synthetic(constant(15.0), ground=10.0, cfg=ControllerConfig(max_cycles_per_pass=80))
    assert not res.success and res.recursions_used == 5 and res.final_J == 2.0


def test_constant_below_band_drives_J_down_without_recursion():
    res = run_synthetic(constant(1.5 * E_GS), cfg=ControllerConfig(max_cycles_per_pass=100))
    assert not res.success
    assert res.recursions_used == 0  # the pass ends below target
    assert res.final_J == 0.5


def test_rescaling_alone_stalls_between_stop_and_band():
    # frozen state at E(J=1) = -10: rule 3 lifts J, but one 1% step from
    # above the 2% band lands at >= 1.02% error, where no rule fires
    res = run_synthetic(scaled(-10.0), cfg=ControllerConfig(max_cycles_per_pass=100, max_recursions=0))
    e = res.trace.column("energy")
    errs = res.trace.column("rel_error")
    assert not res.success
    moving = res.trace.column("J")[1:] != res.trace.column("J")[:-1]
    assert np.all(np.diff(e)[moving] < 0)
    assert 0.0102 <= errs[-1] < 0.02
    assert res.raw_energy_at_stop == pytest.approx(-10.0)


def test_rescaling_from_inside_band():
    res = run_synthetic(scaled(-17.9))
    assert res.success and len(res.trace) == 1


def test_mechanism_with_exact_evaluator(hamiltonian, ansatz):
    # frozen parameters, exact energy above the band: rule 3 alone drives
    # the measured value down while J < j_max
    params = init_params(ansatz.n_params, 0)
    e1 = ExactEnergy(ansatz, hamiltonian)(params)
    assert E_GS + 0.02 * 18 < e1 < 0
    res = run_mitigated_vqe(
        hamiltonian, ansatz, "frozen", None, E_GS, ControllerConfig(max_recursions=0), params0=params, seed=0
    )
    e = res.trace.column("energy")
    J = res.trace.column("J")
    below_cap = J[:-1] < 2.0
    assert np.all(np.diff(e)[below_cap] < 0)
    assert np.allclose(e, J * e1, atol=1e-12)


def test_evaluator_failure_keeps_partial_trace():
    calls = {"n": 0}

    def flaky(params, h, seed):
        calls["n"] += 1
        if calls["n"] == 4:
            raise RuntimeError("backend lost")
        return 0.5 * E_GS

    res = run_synthetic(flaky)
    assert not res.success
    assert len(res.trace) == 3
    assert "backend lost" in res.error


def test_noiseless_nft_controller_succeeds(hamiltonian, ansatz):
    res = run_mitigated_vqe(hamiltonian, ansatz, "nft", None, E_GS, seed=1)
    assert res.success
    assert len(res.trace) == 7
    assert res.trace[-1].rel_error < 0.01
    assert res.final_J == pytest.approx(res.trace[-1].J)


def test_noisy_controller_is_deterministic(hamiltonian, ansatz):
    cfg = ControllerConfig(max_cycles_per_pass=2, max_recursions=0)
    a = run_mitigated_vqe(hamiltonian, ansatz, "nft", NoiseModel(), E_GS, cfg, seed=5, shots=256)
    b = run_mitigated_vqe(hamiltonian, ansatz, "nft", NoiseModel(), E_GS, cfg, seed=5, shots=256)
    assert a.trace.to_csv() == b.trace.to_csv()
    assert np.array_equal(a.params, b.params)


def test_controller_requires_unit_J(hamiltonian, ansatz):
    from kagomelab import set_uniform_interaction

    with pytest.raises(ValueError):
        run_mitigated_vqe(set_uniform_interaction(hamiltonian, 2.0), ansatz, "nft", None, E_GS)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-2.0, 0.0), min_size=1, max_size=40),
    st.integers(1, 12),
    st.integers(0, 5),
)
def test_controller_invariants(ratios, max_cycles, max_rec):
    # energies as fractions of E_gs cycle through a fixed list
    seq = [r * E_GS for r in ratios]
    k = {"i": 0}

    def fn(params, h, seed):
        v = seq[k["i"] % len(seq)]
        k["i"] += 1
        return v

    cfg = ControllerConfig(max_cycles_per_pass=max_cycles, max_recursions=max_rec)
    res = run_synthetic(fn, cfg=cfg)
    errs = res.trace.column("rel_error")
    J = res.trace.column("J")
    assert np.all((J >= cfg.j_min) & (J <= cfg.j_max))
    assert res.recursions_used <= max_rec
    assert len(res.trace) <= (max_rec + 1) * max_cycles
    assert res.success == bool(np.any(errs < cfg.stop_threshold))
    hits = np.nonzero(errs < cfg.stop_threshold)[0]
    if len(hits):
        assert hits[0] == len(res.trace) - 1
    for d in np.unique(res.trace.column("recursion")):
        cyc = res.trace.column("cycle")[res.trace.column("recursion") == d]
        assert np.all(np.diff(cyc) > 0)


def test_unmitigated_noiseless_matches_nft(hamiltonian, ansatz):
    res = run_unmitigated_vqe(hamiltonian, ansatz, "nft", None, E_GS, max_cycles=10, seed=0)
    assert len(res.trace) == 10
    assert np.all(res.trace.column("J") == 1.0)
    assert res.success == (res.trace.min_rel_error < 0.01)


def test_unmitigated_rejects_zero_cycles(hamiltonian, ansatz):
    with pytest.raises(ValueError):
        run_unmitigated_vqe(hamiltonian, ansatz, "nft", None, E_GS, max_cycles=0)


def test_trace_csv_round_trip(tmp_path):
    trace = VqeTrace([TraceRow(1, -17.5, 1.0, 0.02777, 0), TraceRow(2, -17.9, 1.01, 1 / 180, 0)])
    trace.write_csv(tmp_path / "t.csv", {"success": 1})
    text = (tmp_path / "t.csv").read_text()
    assert text.splitlines()[0] == ",".join(TRACE_HEADER)
    assert text.splitlines()[-1] == "# success=1"
    assert VqeTrace.read_csv(tmp_path / "t.csv").rows == trace.rows
    with pytest.raises(ValueError):
        VqeTrace.parse_csv("a,b\n1,2\n")


def test_min_rel_error_of_empty_trace():
    assert VqeTrace().min_rel_error == math.inf
