"""Batch runner, config files, summaries and plot data."""

from __future__ import annotations

import dataclasses
import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ansatz import efficient_su2
from .baselines import ZneConfig, calibrate_readout, trex_energy, zne_energy
from .controller import (
    ControllerConfig,
    ExperimentResult,
    VqeTrace,
    run_mitigated_vqe,
    run_unmitigated_vqe,
)
from .errors import ConfigError
from .exact import ground_state_energy
from .lattice import (
    DEFAULT_REGISTER_WIDTH,
    PauliSum,
    QubitMapping,
    build_heisenberg,
    build_kagome_unit_cell,
    read_lattice_file,
    read_layout_file,
)
from .optimizers import OPTIMIZERS
from .simulator import NoiseModel

MODES = ("none", "controller", "zne", "trex")
EVALUATORS = ("sampled", "exact")


@dataclass(frozen=True)
class RunConfig:
    """Flat experiment description; serialized as ``key = value`` lines."""

    lattice: str = "builtin"
    layout: str = "identity"
    n_qubits: int = DEFAULT_REGISTER_WIDTH
    reps: int = 1
    optimizer: str = "nft"
    evaluator: str = "sampled"
    p_cx: float = 0.015
    p_readout: float = 0.03
    shots: int = 1024
    mode: str = "controller"
    n_trials: int = 50
    seed: int = 0
    out_dir: str = "results"
    max_cycles: int = 100
    ground_energy: float | None = None
    stop_threshold: float = 0.01
    band_delta: float = 0.02
    j_step: float = 0.01
    j_min: float = 0.5
    j_max: float = 2.0
    max_recursions: int = 5
    zne_scales: tuple[int, ...] = (1, 3, 5)
    zne_extrapolation: str = "linear"
    calibration_shots: int = 8192
    workers: int = 1

    def __post_init__(self):
        if self.n_trials < 1:
            raise ConfigError("n_trials: must be >= 1")
        if self.mode not in MODES:
            raise ConfigError(f"mode: expected one of {MODES}, got {self.mode!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer: expected one of {OPTIMIZERS}, got {self.optimizer!r}")
        if self.evaluator not in EVALUATORS:
            raise ConfigError(f"evaluator: expected one of {EVALUATORS}, got {self.evaluator!r}")
        if self.reps < 1:
            raise ConfigError("reps: must be >= 1")
        if self.shots < 1:
            raise ConfigError("shots: must be >= 1")
        if self.max_cycles < 1:
            raise ConfigError("max_cycles: must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers: must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed: must be non-negative")
        for name in ("lattice", "layout"):
            value = getattr(self, name)
            if value not in ("builtin", "identity") and not Path(value).is_file():
                raise ConfigError(f"{name}: file {value!r} does not exist")
        try:
            self.noise()
            self.controller()
            self.zne()
        except (ValueError, ConfigError) as exc:
            raise ConfigError(str(exc)) from exc

    def noise(self) -> NoiseModel:
        return NoiseModel(self.p_cx, self.p_readout)

    def controller(self) -> ControllerConfig:
        return ControllerConfig(
            self.stop_threshold, self.band_delta, self.j_step, self.j_min, self.j_max,
            self.max_recursions, self.max_cycles,
        )

    def zne(self) -> ZneConfig:
        return ZneConfig(self.zne_scales, self.zne_extrapolation)

    def replace(self, **changes) -> RunConfig:
        return dataclasses.replace(self, **changes)

    def dumps(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                text = "auto"
            elif isinstance(value, tuple):
                text = ",".join(str(v) for v in value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{f.name} = {text}")
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str, base_dir: str | Path | None = None) -> RunConfig:
        fields = {f.name: f for f in dataclasses.fields(cls)}
        values: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in fields:
                raise ConfigError(f"{key}: unknown config key")
            if key in values:
                raise ConfigError(f"{key}: duplicate config key")
            values[key] = _parse_value(key, value, fields[key].type)
        if base_dir is not None:
            for key in ("lattice", "layout"):
                v = values.get(key)
                if v not in (None, "builtin", "identity") and not Path(v).is_absolute():
                    values[key] = str(Path(base_dir) / v)
        return cls(**values)

    @classmethod
    def read(cls, path: str | Path) -> RunConfig:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from exc
        return cls.loads(text, path.parent)


def _parse_value(key: str, value: str, annotation: str):
    try:
        if annotation.startswith("int"):
            return int(value)
        if annotation.startswith("float | None"):
            return None if value == "auto" else float(value)
        if annotation.startswith("float"):
            return float(value)
        if annotation.startswith("tuple"):
            return tuple(int(v) for v in value.split(",") if v.strip())
        return value
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {value!r}") from None


def trial_seed(master_seed: int, trial: int) -> int:
    """64-bit seed for trial ``trial``: first 8 bytes of
    SHA-256(b"<master_seed>:<trial>"), big-endian."""
    digest = hashlib.sha256(f"{master_seed}:{trial}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class ExperimentSummary:
    total: int
    failed: int
    success_rate: float
    avg_cycles: float
    total_evaluations: int
    wall_time: float

    @classmethod
    def from_results(cls, results: list[ExperimentResult], wall_time: float) -> ExperimentSummary:
        total = len(results)
        failed = sum(not r.success for r in results)
        return cls(
            total,
            failed,
            (total - failed) / total if total else math.nan,
            float(np.mean([len(r.trace) for r in results])) if total else math.nan,
            sum(r.evaluations for r in results),
            wall_time,
        )

    def dumps(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)!r}\n" for f in dataclasses.fields(self))

    @classmethod
    def loads(cls, text: str) -> ExperimentSummary:
        values = {}
        for line in text.splitlines():
            if "=" in line:
                k, v = (p.strip() for p in line.split("=", 1))
                values[k] = v
        return cls(
            int(values["total"]), int(values["failed"]), float(values["success_rate"]),
            float(values["avg_cycles"]), int(values["total_evaluations"]), float(values["wall_time"]),
        )


def build_problem(cfg: RunConfig) -> PauliSum:
    lattice = build_kagome_unit_cell() if cfg.lattice == "builtin" else read_lattice_file(cfg.lattice)
    if cfg.layout == "identity":
        mapping = QubitMapping.identity(lattice.n_sites, cfg.n_qubits)
    else:
        mapping = read_layout_file(cfg.layout, cfg.n_qubits)
    return build_heisenberg(lattice, mapping)


def reference_energy(cfg: RunConfig, h: PauliSum) -> float:
    if cfg.ground_energy is not None:
        return cfg.ground_energy
    return ground_state_energy(h).energy


def run_trial(cfg: RunConfig, trial: int, h: PauliSum | None = None, ground: float | None = None) -> ExperimentResult:
    h = build_problem(cfg) if h is None else h
    ground = reference_energy(cfg, h) if ground is None else ground
    ansatz = efficient_su2(len(h.support()), cfg.reps, qubits=h.support(), width=cfg.n_qubits)
    seed = trial_seed(cfg.seed, trial)
    noise = None if cfg.evaluator == "exact" else cfg.noise()

    if cfg.mode == "controller":
        return run_mitigated_vqe(h, ansatz, cfg.optimizer, noise, ground, cfg.controller(), seed, shots=cfg.shots)

    if cfg.mode == "none":
        energy_fn = None
    elif cfg.mode == "zne":
        zcfg = cfg.zne()

        def energy_fn(params, hh, s):
            return zne_energy(ansatz, params, hh, cfg.noise(), zcfg, cfg.shots, s)

    else:
        calibration = calibrate_readout(cfg.n_qubits, cfg.noise(), cfg.calibration_shots, seed)

        def energy_fn(params, hh, s):
            return trex_energy(ansatz, params, hh, cfg.noise(), shots=cfg.shots, seed=s, calibration=calibration)

    return run_unmitigated_vqe(
        h, ansatz, cfg.optimizer, noise, ground, cfg.max_cycles, seed,
        stop_threshold=cfg.stop_threshold, shots=cfg.shots, energy_fn=energy_fn,
    )


def _trial_job(args):
    cfg, trial, h, ground = args
    return run_trial(cfg, trial, h, ground)


def trace_path(out_dir: str | Path, trial: int) -> Path:
    return Path(out_dir) / f"trace_{trial:04d}.csv"


def run_batch(cfg: RunConfig, out_dir: str | Path | None = None) -> tuple[ExperimentSummary, list[ExperimentResult]]:
    """Run ``cfg.n_trials`` experiments and write traces plus ``summary.txt``.

    Results depend only on the master seed, never on ``workers``.  A trial
    whose trace cannot be written is recorded as failed; the batch goes on.
    """
    out = Path(cfg.out_dir if out_dir is None else out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    h = build_problem(cfg)
    ground = reference_energy(cfg, h)
    jobs = [(cfg, i, h, ground) for i in range(cfg.n_trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_trial_job, jobs))
    else:
        results = [_trial_job(job) for job in jobs]

    for i, res in enumerate(results):
        meta = {"trial": i, "seed": trial_seed(cfg.seed, i), "mode": cfg.mode, "ground_energy": repr(ground)}
        meta.update(res.summary())
        if res.error:
            meta["error"] = res.error
        try:
            res.trace.write_csv(trace_path(out, i), meta)
        except OSError as exc:
            res.success = False
            res.error = f"trace write failed: {exc}"
    summary = ExperimentSummary.from_results(results, time.perf_counter() - start)
    (out / "summary.txt").write_text(summary.dumps())
    return summary, results


def recursion_starts(trace: VqeTrace) -> list[int]:
    """Cycle numbers at which a new recursion pass begins."""
    rows = list(trace)
    return [b.cycle for a, b in zip(rows, rows[1:]) if b.recursion != a.recursion]


def emit_plot_data(trace: VqeTrace, target: float, path: str | Path, svg: bool = True) -> list[Path]:
    """Write ``cycle,energy,target`` CSV (recursion starts as ``#`` lines) and
    optionally an SVG rendering next to it."""
    if len(trace) == 0:
        raise ValueError("cannot plot an empty trace")
    path = Path(path)
    lines = ["cycle,energy,target"]
    lines += [f"{r.cycle},{r.energy!r},{target!r}" for r in trace]
    lines += [f"# recursion_start={c}" for c in recursion_starts(trace)]
    path.write_text("\n".join(lines) + "\n")
    written = [path]
    if svg:
        written.append(_render_svg(trace, target, path.with_suffix(".svg")))
    return written


def _render_svg(trace: VqeTrace, target: float, path: Path) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cycles, energy = trace.column("cycle"), trace.column("energy")
    # fixed salt keeps element ids, and so the file bytes, reproducible
    with matplotlib.rc_context({"svg.hashsalt": "kagomelab"}):
        _draw(plt, cycles, energy, target, recursion_starts(trace), path)
    return path


def _draw(plt, cycles, energy, target, starts, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(cycles, energy, marker=".", label="energy")
    ax.axhline(target, color="k", linestyle="--", label="target")
    for c in starts:
        ax.axvline(c - 0.5, color="tab:red", linestyle=":")
        ax.annotate(f"recursion @ {c}", (c - 0.5, ax.get_ylim()[1]), rotation=90,
                    va="top", ha="right", fontsize=7, color="tab:red")
    ax.set_xlabel("cycle")
    ax.set_ylabel("energy")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
