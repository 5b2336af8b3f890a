"""Desk-scale VQE laboratory for the Kagome unit-cell Heisenberg model."""

from .ansatz import BoundGate, Gate, ParamCircuit, efficient_su2, init_params
from .baselines import (
    ReadoutCalibration,
    ZneConfig,
    calibrate_readout,
    extrapolate,
    fold_gates,
    trex_energy,
    zne_energy,
)
from .controller import (
    ControllerConfig,
    ExperimentResult,
    TraceRow,
    VqeTrace,
    run_mitigated_vqe,
    run_unmitigated_vqe,
)
from .errors import CalibrationError, ConfigError, KagomeLabError, UnsupportedHamiltonianError
from .exact import GroundStateResult, ground_state_energy, relative_error, sector_ground_state
from .harness import ExperimentSummary, RunConfig, emit_plot_data, run_batch, trial_seed
from .lattice import (
    LatticeGraph,
    PauliSum,
    QubitMapping,
    build_heisenberg,
    build_kagome_unit_cell,
    set_uniform_interaction,
)
from .optimizers import ObjectiveEvaluator, OptimizerState, SpsaSchedule, run_optimizer
from .simulator import (
    Counts,
    ExactEnergy,
    NoiseModel,
    StateVector,
    apply_circuit,
    estimate_energy,
    exact_expectation,
    run_noisy_shots,
)

__version__ = "0.1.0"

__all__ = [
    "BoundGate",
    "CalibrationError",
    "ConfigError",
    "ControllerConfig",
    "Counts",
    "ExactEnergy",
    "ExperimentResult",
    "ExperimentSummary",
    "Gate",
    "GroundStateResult",
    "KagomeLabError",
    "LatticeGraph",
    "NoiseModel",
    "ObjectiveEvaluator",
    "OptimizerState",
    "ParamCircuit",
    "PauliSum",
    "QubitMapping",
    "ReadoutCalibration",
    "RunConfig",
    "SpsaSchedule",
    "StateVector",
    "TraceRow",
    "UnsupportedHamiltonianError",
    "VqeTrace",
    "ZneConfig",
    "apply_circuit",
    "build_heisenberg",
    "build_kagome_unit_cell",
    "calibrate_readout",
    "efficient_su2",
    "emit_plot_data",
    "estimate_energy",
    "exact_expectation",
    "extrapolate",
    "fold_gates",
    "ground_state_energy",
    "init_params",
    "relative_error",
    "run_batch",
    "run_mitigated_vqe",
    "run_noisy_shots",
    "run_optimizer",
    "run_unmitigated_vqe",
    "sector_ground_state",
    "set_uniform_interaction",
    "trex_energy",
    "trial_seed",
    "zne_energy",
]
