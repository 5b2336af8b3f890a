"""Reference error-mitigation baselines: zero-noise extrapolation and T-Rex."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .ansatz import BoundGate, ParamCircuit, ry
from .errors import CalibrationError, ConfigError
from .lattice import PauliSum, measurement_bases
from .simulator import (
    Counts,
    NoiseModel,
    _as_seed_sequence,
    energy_from_counts,
    qubit_mask,
    sample_gates,
)

EXTRAPOLATIONS = ("linear", "richardson")


@dataclass(frozen=True)
class ZneConfig:
    scale_factors: tuple[int, ...] = (1, 3, 5)
    extrapolation: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "scale_factors", tuple(int(s) for s in self.scale_factors))
        sf = self.scale_factors
        if not sf or sf[0] != 1:
            raise ConfigError("scale_factors must start at 1")
        if any(s % 2 == 0 or s < 1 for s in sf):
            raise ConfigError("scale_factors must be odd positive integers")
        if any(b <= a for a, b in zip(sf, sf[1:])):
            raise ConfigError("scale_factors must be strictly increasing")
        if self.extrapolation not in EXTRAPOLATIONS:
            raise ConfigError(f"extrapolation must be one of {EXTRAPOLATIONS}")
        if len(sf) < 2:
            raise ConfigError("extrapolation needs at least 2 scale factors")


def inverse_gates(gates: Sequence[BoundGate]) -> list[BoundGate]:
    return [g if g.name == "CX" else g._replace(angle=-g.angle) for g in reversed(gates)]


def fold_gates(gates: Sequence[BoundGate], scale: int) -> list[BoundGate]:
    """Global unitary folding ``G (G^dag G)^k`` with ``scale = 2k + 1``."""
    if scale < 1 or scale % 2 == 0:
        raise ValueError("scale must be an odd positive integer")
    gates = list(gates)
    inv = inverse_gates(gates)
    return gates + (inv + gates) * ((scale - 1) // 2)


def extrapolate(scales: Sequence[float], values: Sequence[float], method: str = "linear") -> float:
    """Zero-noise intercept: least-squares line, or the Lagrange polynomial
    through every point (Richardson)."""
    x = np.asarray(scales, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("need at least two (scale, value) pairs")
    if method == "linear":
        xm, ym = x.mean(), y.mean()
        slope = ((x - xm) @ (y - ym)) / ((x - xm) @ (x - xm))
        return float(ym - slope * xm)
    if method == "richardson":
        total = 0.0
        for i in range(len(x)):
            others = np.delete(x, i)
            total += y[i] * np.prod(others / (others - x[i]))
        return float(total)
    raise ValueError(f"unknown extrapolation {method!r}")


def zne_energy(
    circuit: ParamCircuit,
    params,
    h: PauliSum,
    noise: NoiseModel,
    cfg: ZneConfig = ZneConfig(),
    shots: int = 1024,
    seed=None,
    *,
    expectation: Callable[[int], float] | None = None,
) -> float:
    """Energy extrapolated to zero noise from globally folded circuits.

    ``expectation(scale)`` replaces the simulator when given, which lets the
    extrapolation be checked against a known synthetic curve.
    """
    if expectation is None:
        gates = circuit.bind(params)
        seeds = _as_seed_sequence(seed).spawn(len(cfg.scale_factors))

        def expectation(scale, _seeds=dict(zip(cfg.scale_factors, seeds))):
            folded = fold_gates(gates, scale)
            per_basis = _as_seed_sequence(_seeds[scale]).spawn(3)
            counts = {
                basis: sample_gates(folded, circuit.n_qubits, basis, noise, shots, per_basis["XYZ".index(basis)])
                for basis, _ in measurement_bases(h)
            }
            return energy_from_counts(h, counts)

    values = [expectation(s) for s in cfg.scale_factors]
    return extrapolate(cfg.scale_factors, values, cfg.extrapolation)


@dataclass(frozen=True)
class ReadoutCalibration:
    flip_rates: np.ndarray
    shots: int

    def __post_init__(self):
        p = np.asarray(self.flip_rates, dtype=float)
        object.__setattr__(self, "flip_rates", p)
        if np.any(p < 0) or np.any(p >= 0.5):
            raise CalibrationError(f"estimated flip rates must lie in [0, 0.5); got max {p.max():.3f}")

    def factor(self, qubits: Sequence[int]) -> float:
        """Multiplicative correction for a parity on ``qubits`` (always >= 1)."""
        return float(np.prod(1.0 / (1.0 - 2.0 * self.flip_rates[list(qubits)])))


def calibrate_readout(n_qubits: int, noise: NoiseModel, shots: int = 8192, seed=None) -> ReadoutCalibration:
    """Estimate per-qubit flip rates from twirled measurements of |0...0>.

    Twirling makes the readout channel symmetric, so a single preparation
    suffices: ``p_i`` is the fraction of shots reading 1 on qubit ``i``.
    """
    if shots <= 0:
        raise ValueError("calibration shots must be positive")
    # RY(0) on every qubit makes every qubit part of the sampled register
    prep = [ry(q, 0.0) for q in range(n_qubits)]
    counts = sample_gates(prep, n_qubits, "Z", noise, shots, seed, twirl=True)
    ones = np.zeros(n_qubits)
    for outcome, freq in zip(counts.outcomes, counts.frequencies):
        bits = (int(outcome) >> np.arange(n_qubits - 1, -1, -1)) & 1
        ones += freq * bits
    return ReadoutCalibration(ones / shots, shots)


def corrected_energy(h: PauliSum, counts_by_basis: dict[str, Counts], cal: ReadoutCalibration) -> float:
    total = 0.0
    coeffs = h.coefficients
    for basis, idx in measurement_bases(h):
        supports = [[q for q, ch in enumerate(h.labels[k]) if ch != "I"] for k in idx]
        parities = counts_by_basis[basis].parity_expectations(
            [qubit_mask(s, h.n_qubits) for s in supports]
        )
        factors = np.array([cal.factor(s) for s in supports])
        total += float(coeffs[idx] @ (parities * factors))
    return total


def trex_energy(
    circuit: ParamCircuit,
    params,
    h: PauliSum,
    noise: NoiseModel,
    calibration_shots: int = 8192,
    shots: int = 1024,
    seed=None,
    *,
    calibration: ReadoutCalibration | None = None,
) -> float:
    """Twirled-readout energy estimate with tensored 1/(1-2p) rescaling."""
    cal_seed, *basis_seed = _as_seed_sequence(seed).spawn(4)
    if calibration is None:
        calibration = calibrate_readout(circuit.n_qubits, noise, calibration_shots, cal_seed)
    gates = circuit.bind(params)
    counts = {
        basis: sample_gates(gates, circuit.n_qubits, basis, noise, shots, basis_seed["XYZ".index(basis)], twirl=True)
        for basis, _ in measurement_bases(h)
    }
    return corrected_energy(h, counts, calibration)
