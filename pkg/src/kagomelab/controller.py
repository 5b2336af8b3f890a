"""Adaptive uniform-interaction controller around a VQE loop.

Every cycle the measured energy (taken with the Hamiltonian at its current
uniform interaction J) is compared with the fixed ground-state target E_gs:

1. within ``stop_threshold`` relative error: stop, success;
2. below the band ``E_gs - band_delta*|E_gs|``: shrink J by ``j_step``;
3. above the band ``E_gs + band_delta*|E_gs|``: grow J by ``j_step``;
4. a pass that ends above the target restarts from its last parameters, at
   most ``max_recursions`` times.

Because the target stays at its J=1 value while J moves, part of the reported
accuracy comes from rescaling.  ``ExperimentResult.raw_energy_at_stop`` holds
the final energy divided by J so the two effects can be told apart.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ansatz import ParamCircuit, init_params
from .exact import relative_error
from .lattice import PauliSum, set_uniform_interaction
from .optimizers import ObjectiveEvaluator, OptimizerState, SpsaSchedule, run_optimizer
from .simulator import ExactEnergy, NoiseModel, estimate_energy

MAX_RECURSIONS = 5
TRACE_HEADER = ("cycle", "energy", "J", "rel_error", "recursion")

# energy_fn(params, hamiltonian, seed) -> energy
HamiltonianEnergyFn = Callable[[np.ndarray, PauliSum, np.random.SeedSequence], float]


@dataclass(frozen=True)
class ControllerConfig:
    stop_threshold: float = 0.01
    band_delta: float = 0.02
    j_step: float = 0.01
    j_min: float = 0.5
    j_max: float = 2.0
    max_recursions: int = MAX_RECURSIONS
    max_cycles_per_pass: int = 100

    def __post_init__(self):
        if not 0 < self.stop_threshold < self.band_delta:
            raise ValueError("need 0 < stop_threshold < band_delta")
        if not self.j_min < 1.0 < self.j_max:
            raise ValueError("need j_min < 1 < j_max")
        if self.j_min <= 0:
            raise ValueError("j_min must be positive")
        if not 0 < self.j_step < 1:
            raise ValueError("j_step must lie in (0, 1)")
        if not 0 <= self.max_recursions <= MAX_RECURSIONS:
            raise ValueError(f"max_recursions must lie in [0, {MAX_RECURSIONS}]")
        if self.max_cycles_per_pass < 1:
            raise ValueError("max_cycles_per_pass must be >= 1")


@dataclass(frozen=True)
class TraceRow:
    cycle: int
    energy: float
    J: float
    rel_error: float
    recursion: int


@dataclass
class VqeTrace:
    rows: list[TraceRow] = field(default_factory=list)

    def append(self, row: TraceRow) -> None:
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, k):
        return self.rows[k]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    @property
    def min_rel_error(self) -> float:
        return min((r.rel_error for r in self.rows), default=math.inf)

    def to_csv(self, summary: dict | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for r in self.rows:
            w.writerow([r.cycle, repr(r.energy), repr(r.J), repr(r.rel_error), r.recursion])
        for key, value in (summary or {}).items():
            buf.write(f"# {key}={value}\n")
        return buf.getvalue()

    def write_csv(self, path: str | Path, summary: dict | None = None) -> None:
        Path(path).write_text(self.to_csv(summary))

    @classmethod
    def read_csv(cls, path: str | Path) -> VqeTrace:
        return cls.parse_csv(Path(path).read_text())

    @classmethod
    def parse_csv(cls, text: str) -> VqeTrace:
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        reader = csv.reader(lines)
        header = tuple(next(reader))
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {header}")
        return cls(
            [
                TraceRow(int(c), float(e), float(j), float(r), int(d))
                for c, e, j, r, d in reader
            ]
        )


@dataclass
class ExperimentResult:
    success: bool
    trace: VqeTrace
    final_relative_error: float
    recursions_used: int
    final_J: float
    raw_energy_at_stop: float
    evaluations: int = 0
    params: np.ndarray | None = None
    error: str | None = None

    def summary(self) -> dict:
        return {
            "success": int(self.success),
            "cycles": len(self.trace),
            "final_relative_error": repr(self.final_relative_error),
            "recursions_used": self.recursions_used,
            "final_J": repr(self.final_J),
            "raw_energy_at_stop": repr(self.raw_energy_at_stop),
            "evaluations": self.evaluations,
        }


def make_energy_fn(
    ansatz: ParamCircuit, noise: NoiseModel | None, shots: int = 1024
) -> HamiltonianEnergyFn:
    """Energy oracle for the VQE loop: exact statevector when ``noise`` is
    ``None``, otherwise per-shot noisy sampling."""
    if noise is None:
        cache: dict[float, ExactEnergy] = {}

        def exact(params, h, seed):
            key = h.uniform_interaction
            if key not in cache:
                base = next(iter(cache.values()), None)
                cache[key] = ExactEnergy(ansatz, h) if base is None else base.with_hamiltonian(h)
            return cache[key](params)

        return exact

    def noisy(params, h, seed):
        return estimate_energy(ansatz, params, h, noise, shots, seed)

    return noisy


def _seeds(seed) -> tuple[np.random.SeedSequence, np.random.SeedSequence, np.random.SeedSequence]:
    params_seed, eval_seed, opt_seed = np.random.SeedSequence(seed).spawn(3)
    return params_seed, eval_seed, opt_seed


def run_mitigated_vqe(
    h: PauliSum,
    ansatz: ParamCircuit,
    optimizer: str,
    noise: NoiseModel | None,
    ground_energy: float,
    cfg: ControllerConfig = ControllerConfig(),
    seed=None,
    *,
    shots: int = 1024,
    params0=None,
    energy_fn: HamiltonianEnergyFn | None = None,
    schedule: SpsaSchedule = SpsaSchedule(),
) -> ExperimentResult:
    """VQE whose Hamiltonian J is steered by the four controller rules."""
    if not math.isclose(h.uniform_interaction, 1.0):
        raise ValueError("the controller expects the Hamiltonian to start at J = 1")
    if ground_energy == 0:
        raise ValueError("ground energy must be non-zero")
    energy_fn = energy_fn or make_energy_fn(ansatz, noise, shots)
    params_seed, eval_seed, opt_seed = _seeds(seed)
    params = init_params(ansatz.n_params, params_seed) if params0 is None else np.array(params0, float)

    band = cfg.band_delta * abs(ground_energy)
    live = {"h": h, "J": 1.0}
    evaluate = ObjectiveEvaluator(lambda p, s: energy_fn(p, live["h"], s), eval_seed)
    trace = VqeTrace()
    success = False
    recursion = 0

    def on_cycle(state: OptimizerState) -> bool:
        nonlocal success
        J = live["J"]
        energy = state.energy
        err = relative_error(energy, ground_energy)
        trace.append(TraceRow(len(trace) + 1, energy, J, err, recursion))
        if err < cfg.stop_threshold:
            success = True
            return False
        if energy < ground_energy - band:
            J_new = max(cfg.j_min, J * (1 - cfg.j_step))
        elif energy > ground_energy + band:
            J_new = min(cfg.j_max, J * (1 + cfg.j_step))
        else:
            J_new = J
        if J_new != J:
            live["h"] = set_uniform_interaction(live["h"], J_new)
            live["J"] = J_new
            # energy is linear in J, so the cached estimate stays consistent
            state.energy = energy * J_new / J
        return True

    opt_seeds = opt_seed.spawn(cfg.max_recursions + 1)
    error = None
    try:
        while True:
            run = run_optimizer(
                optimizer,
                cfg.max_cycles_per_pass,
                evaluate,
                OptimizerState(params),
                on_cycle,
                schedule=schedule,
                seed=opt_seeds[recursion],
            )
            params = run.state.params
            if success:
                break
            ended_above = trace[-1].energy > ground_energy
            if not ended_above or recursion >= cfg.max_recursions:
                break
            recursion += 1
    except Exception as exc:  # evaluator failure: keep the partial trace
        error = f"{type(exc).__name__}: {exc}"
        success = False

    last = trace[-1] if len(trace) else None
    return ExperimentResult(
        success=success,
        trace=trace,
        final_relative_error=last.rel_error if last else math.inf,
        recursions_used=recursion,
        final_J=live["J"] if last is None else last.J,
        raw_energy_at_stop=last.energy / last.J if last else math.nan,
        evaluations=evaluate.calls,
        params=params,
        error=error,
    )


def run_unmitigated_vqe(
    h: PauliSum,
    ansatz: ParamCircuit,
    optimizer: str,
    noise: NoiseModel | None,
    ground_energy: float,
    max_cycles: int = 150,
    seed=None,
    *,
    stop_threshold: float = 0.01,
    shots: int = 1024,
    params0=None,
    energy_fn: HamiltonianEnergyFn | None = None,
    schedule: SpsaSchedule = SpsaSchedule(),
) -> ExperimentResult:
    """Plain VQE at fixed J; succeeds if any cycle lands within ``stop_threshold``."""
    if max_cycles < 1:
        raise ValueError("max_cycles must be >= 1")
    energy_fn = energy_fn or make_energy_fn(ansatz, noise, shots)
    params_seed, eval_seed, opt_seed = _seeds(seed)
    params = init_params(ansatz.n_params, params_seed) if params0 is None else np.array(params0, float)
    evaluate = ObjectiveEvaluator(lambda p, s: energy_fn(p, h, s), eval_seed)
    trace = VqeTrace()
    J = h.uniform_interaction

    def on_cycle(state: OptimizerState) -> bool:
        err = relative_error(state.energy, ground_energy)
        trace.append(TraceRow(len(trace) + 1, state.energy, J, err, 0))
        return True

    error = None
    try:
        run = run_optimizer(
            optimizer, max_cycles, evaluate, OptimizerState(params), on_cycle,
            schedule=schedule, seed=opt_seed,
        )
        params = run.state.params
    except Exception as exc:
        error = f"{type(exc).__name__}: {exc}"

    last = trace[-1] if len(trace) else None
    return ExperimentResult(
        success=error is None and trace.min_rel_error < stop_threshold,
        trace=trace,
        final_relative_error=last.rel_error if last else math.inf,
        recursions_used=0,
        final_J=J,
        raw_energy_at_stop=last.energy / J if last else math.nan,
        evaluations=evaluate.calls,
        params=params,
        error=error,
    )


def iter_trace_rows(results: Iterable[ExperimentResult]):
    for res in results:
        yield from res.trace
