"""Outer-loop minimizers: NFT sequential sinusoid fitting and SPSA.

One NFT cycle is a full sweep over every parameter; one SPSA cycle is a
single two-evaluation step.  A ``"frozen"`` kind re-measures fixed parameters
once per cycle, which is useful to study the mitigation controller alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

NFT_PROBE = math.pi / 2
FLAT_TOL = 1e-12

EnergyFn = Callable[[np.ndarray, np.random.SeedSequence], float]


class ObjectiveEvaluator:
    """Counts calls and hands each one a deterministic sub-seed.

    ``energy_fn(params, seed)`` receives the ``k``-th child of ``seed`` (the
    spawn key extended by ``k``) on its ``k``-th call.
    """

    def __init__(self, energy_fn: EnergyFn, seed=None):
        self.energy_fn = energy_fn
        self.calls = 0
        if not isinstance(seed, np.random.SeedSequence):
            seed = np.random.SeedSequence(seed)
        self._base = seed

    def seed_for(self, k: int) -> np.random.SeedSequence:
        base = self._base
        return np.random.SeedSequence(base.entropy, spawn_key=(*base.spawn_key, k))

    def __call__(self, params) -> float:
        seed = self.seed_for(self.calls)
        self.calls += 1
        return float(self.energy_fn(np.asarray(params, dtype=float), seed))


@dataclass
class OptimizerState:
    params: np.ndarray
    best_energy: float = math.inf
    cycle: int = 0
    energy: float | None = None  # estimate at ``params``, reusable by the next sweep
    flat_updates: int = 0

    def __post_init__(self):
        self.params = np.array(self.params, dtype=float)


@dataclass(frozen=True)
class SpsaSchedule:
    """Standard gain sequences a/(k+1+A)^alpha and c/(k+1)^gamma."""

    a: float = 0.2
    c: float = 0.1
    A: float = 10.0
    alpha: float = 0.602
    gamma: float = 0.101

    def __post_init__(self):
        if self.a <= 0 or self.c <= 0:
            raise ValueError("SPSA gains must be positive")

    def a_k(self, k: int) -> float:
        return self.a / (k + 1 + self.A) ** self.alpha

    def c_k(self, k: int) -> float:
        return self.c / (k + 1) ** self.gamma


def wrap_angle(theta: float) -> float:
    """Map to (-pi, pi]."""
    return math.pi - (math.pi - theta) % (2 * math.pi)


def fit_sinusoid(e0: float, e_plus: float, e_minus: float) -> tuple[float, float, float]:
    """Exact fit of ``a + p cos(d) + q sin(d)`` through d = 0, +pi/2, -pi/2.

    Returns ``(a, amplitude, phase)`` with ``f(d) = a + amplitude * cos(d - phase)``.
    """
    a = 0.5 * (e_plus + e_minus)
    q = 0.5 * (e_plus - e_minus)
    p = e0 - a
    return a, math.hypot(p, q), math.atan2(q, p)


def nft_sweep(state: OptimizerState, evaluate: Callable[[np.ndarray], float]) -> OptimizerState:
    """One sequential pass of closed-form single-angle minimizations.

    The starting energy is taken from ``state.energy`` when available; each
    update then costs two evaluations and carries the fitted minimum forward.
    The returned state's ``energy`` is a fresh measurement at the new point.
    """
    theta = state.params.copy()
    e0 = evaluate(theta) if state.energy is None else state.energy
    flat = 0
    for d in range(len(theta)):
        probe = theta.copy()
        probe[d] = theta[d] + NFT_PROBE
        e_plus = evaluate(probe)
        probe[d] = theta[d] - NFT_PROBE
        e_minus = evaluate(probe)
        a, amp, phase = fit_sinusoid(e0, e_plus, e_minus)
        if amp <= FLAT_TOL * max(1.0, abs(a)):
            flat += 1
            continue
        theta[d] = wrap_angle(theta[d] + phase + math.pi)
        e0 = a - amp
    energy = evaluate(theta)
    return OptimizerState(
        theta, min(state.best_energy, energy), state.cycle + 1, energy, state.flat_updates + flat
    )


def spsa_step(
    state: OptimizerState,
    evaluate: Callable[[np.ndarray], float],
    schedule: SpsaSchedule = SpsaSchedule(),
    rng: np.random.Generator | None = None,
) -> OptimizerState:
    """One SPSA iteration; the cycle energy is the mean of the two probes."""
    rng = np.random.default_rng() if rng is None else rng
    k = state.cycle
    ck = schedule.c_k(k)
    delta = rng.choice((-1.0, 1.0), size=state.params.shape)
    e_plus = evaluate(state.params + ck * delta)
    e_minus = evaluate(state.params - ck * delta)
    grad = (e_plus - e_minus) / (2 * ck) / delta
    params = state.params - schedule.a_k(k) * grad
    energy = 0.5 * (e_plus + e_minus)
    return OptimizerState(params, min(state.best_energy, energy), k + 1, energy, state.flat_updates)


def frozen_step(state: OptimizerState, evaluate: Callable[[np.ndarray], float]) -> OptimizerState:
    energy = evaluate(state.params)
    return OptimizerState(
        state.params, min(state.best_energy, energy), state.cycle + 1, energy, state.flat_updates
    )


OPTIMIZERS = ("nft", "spsa", "frozen")


@dataclass
class OptimizerRun:
    state: OptimizerState
    history: list[float] = field(default_factory=list)
    stopped: bool = False

    def __iter__(self):
        return iter((self.state, self.history))


def run_optimizer(
    kind: str,
    max_cycles: int,
    evaluate: Callable[[np.ndarray], float],
    state: OptimizerState,
    callback: Callable[[OptimizerState], bool] | None = None,
    *,
    schedule: SpsaSchedule = SpsaSchedule(),
    seed=None,
) -> OptimizerRun:
    """Run up to ``max_cycles`` cycles.

    ``callback(state)`` runs after every cycle; returning ``False`` stops the
    run.  It may also adjust ``state.energy`` in place (the controller does so
    when it rescales the Hamiltonian).
    """
    kind = kind.lower()
    if kind not in OPTIMIZERS:
        raise ValueError(f"unknown optimizer {kind!r}; choose from {OPTIMIZERS}")
    if max_cycles < 1:
        raise ValueError("max_cycles must be >= 1")
    rng = np.random.default_rng(seed)
    run = OptimizerRun(state)
    for _ in range(max_cycles):
        if kind == "nft":
            state = nft_sweep(state, evaluate)
        elif kind == "spsa":
            state = spsa_step(state, evaluate, schedule, rng)
        else:
            state = frozen_step(state, evaluate)
        run.state = state
        run.history.append(state.energy)
        if callback is not None and callback(state) is False:
            run.stopped = True
            break
    return run
