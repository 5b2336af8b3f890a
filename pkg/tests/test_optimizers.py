import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kagomelab import ExactEnergy, ObjectiveEvaluator, OptimizerState, SpsaSchedule, init_params, run_optimizer
from kagomelab.optimizers import fit_sinusoid, nft_sweep, spsa_step, wrap_angle

finite = st.floats(-50, 50, allow_nan=False)
phase = st.floats(-math.pi, math.pi, allow_nan=False)


@given(finite, st.floats(0, 20), phase)
def test_fit_sinusoid_recovers_curve(a, amp, ph):
    f = lambda d: a + amp * math.cos(d - ph)  # noqa: E731
    a2, amp2, ph2 = fit_sinusoid(f(0), f(math.pi / 2), f(-math.pi / 2))
    for d in np.linspace(-3, 3, 7):
        assert math.isclose(a2 + amp2 * math.cos(d - ph2), f(d), abs_tol=1e-9)


@given(st.floats(-1e3, 1e3, allow_nan=False))
def test_wrap_angle(theta):
    w = wrap_angle(theta)
    assert -math.pi < w <= math.pi
    k = (theta - w) / (2 * math.pi)
    assert math.isclose(k, round(k), abs_tol=1e-9)


def separable(params):
    # minimum -sum(amp) at theta_d = phase_d + pi
    amps = np.arange(1, len(params) + 1)
    phases = np.linspace(-1, 1, len(params))
    return float(np.sum(amps * np.cos(params - phases)))


def test_nft_solves_separable_objective_in_one_sweep():
    ev = ObjectiveEvaluator(lambda p, s: separable(p))
    state = nft_sweep(OptimizerState(np.zeros(5)), ev)
    assert math.isclose(state.energy, -15.0, abs_tol=1e-12)
    assert ev.calls == 2 * 5 + 2  # start, two probes per angle, fresh end point


def test_nft_reuses_carried_energy():
    ev = ObjectiveEvaluator(lambda p, s: separable(p))
    state = nft_sweep(OptimizerState(np.zeros(4)), ev)
    before = ev.calls
    nft_sweep(state, ev)
    assert ev.calls - before == 2 * 4 + 1


def test_nft_skips_flat_directions():
    ev = ObjectiveEvaluator(lambda p, s: float(np.cos(p[0])))
    state = nft_sweep(OptimizerState(np.zeros(3)), ev)
    assert state.flat_updates == 2
    assert state.params[1] == state.params[2] == 0.0


def test_spsa_descends_on_quadratic():
    target = np.array([0.3, -0.2, 0.1])
    ev = ObjectiveEvaluator(lambda p, s: float(np.sum((p - target) ** 2)))
    run = run_optimizer("spsa", 400, ev, OptimizerState(np.zeros(3)), schedule=SpsaSchedule(a=0.5), seed=1)
    assert np.linalg.norm(run.state.params - target) < 0.05
    assert ev.calls == 800


def test_spsa_step_uses_rademacher_probes():
    seen = []
    ev = ObjectiveEvaluator(lambda p, s: seen.append(p.copy()) or 0.0)
    spsa_step(OptimizerState(np.zeros(6)), ev, SpsaSchedule(c=0.5), np.random.default_rng(0))
    plus, minus = seen
    assert np.allclose(np.abs(plus), 0.5) and np.allclose(plus, -minus)


def test_schedule_rejects_bad_gains():
    with pytest.raises(ValueError):
        SpsaSchedule(a=0)


def test_run_optimizer_callback_stops():
    ev = ObjectiveEvaluator(lambda p, s: separable(p))
    seen = []
    run = run_optimizer("frozen", 10, ev, OptimizerState(np.zeros(2)), lambda st_: seen.append(st_.cycle) or len(seen) < 3)
    assert seen == [1, 2, 3]
    assert run.stopped and len(run.history) == 3


def test_run_optimizer_validation():
    ev = ObjectiveEvaluator(lambda p, s: 0.0)
    with pytest.raises(ValueError):
        run_optimizer("cobyla", 1, ev, OptimizerState(np.zeros(1)))
    with pytest.raises(ValueError):
        run_optimizer("nft", 0, ev, OptimizerState(np.zeros(1)))


def test_evaluator_seeds_are_deterministic():
    seeds = []
    ev = ObjectiveEvaluator(lambda p, s: seeds.append(s.generate_state(1)[0]) or 0.0, seed=7)
    ev(np.zeros(1))
    ev(np.zeros(1))
    ev2 = ObjectiveEvaluator(lambda p, s: seeds.append(s.generate_state(1)[0]) or 0.0, seed=7)
    ev2(np.zeros(1))
    assert seeds[0] != seeds[1] and seeds[0] == seeds[2]


def test_energy_slices_are_sinusoidal(hamiltonian, ansatz):
    energy = ExactEnergy(ansatz, hamiltonian)
    theta = init_params(ansatz.n_params, 0)
    probes = np.linspace(-np.pi, np.pi, 8, endpoint=False)
    basis = np.column_stack([np.ones(8), np.cos(probes), np.sin(probes)])
    for d in range(0, ansatz.n_params, 7):
        vals = []
        for p in probes:
            t = theta.copy()
            t[d] = p
            vals.append(energy(t))
        coef, *_ = np.linalg.lstsq(basis, vals, rcond=None)
        assert np.max(np.abs(basis @ coef - vals)) < 1e-9


def test_nft_noiseless_monotone(hamiltonian, ansatz):
    energy = ExactEnergy(ansatz, hamiltonian)
    run = run_optimizer("nft", 5, ObjectiveEvaluator(lambda p, s: energy(p)), OptimizerState(init_params(ansatz.n_params, 1)))
    assert np.all(np.diff(run.history) <= 1e-9)
