"""Classical reference ground-state energies: dense diagonalization and Lanczos."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .lattice import PauliSum
from .simulator import StateVector, _compiled, apply_pauli_sum, restrict

DENSE_MAX_DIM = 4096
DEFAULT_MEMORY_BUDGET = 2 * 1024**3


@dataclass(frozen=True)
class GroundStateResult:
    energy: float
    residual_norm: float
    method: str
    dimension: int
    vector: np.ndarray | None = None


def _active(h: PauliSum, active_qubits) -> list[int]:
    if active_qubits is None:
        active = list(h.support())
    elif isinstance(active_qubits, int):
        active = list(range(active_qubits))
    else:
        active = sorted(int(q) for q in active_qubits)
    if len(active) > 16:
        raise ValueError("at most 16 active qubits supported")
    return active


def dense_matrix(h: PauliSum) -> np.ndarray:
    """Full 2^n x 2^n matrix; real dtype when every entry is real."""
    dim = 1 << h.n_qubits
    groups = _compiled(h)
    real = all(not np.iscomplexobj(d) or not d.imag.any() for _, d in groups)
    mat = np.zeros((dim, dim), dtype=float if real else complex)
    idx = np.arange(dim)
    for x, diag in groups:
        mat[idx ^ x, idx] += diag.real if real else diag
    return mat


def lanczos(h: PauliSum, *, tol: float = 1e-12, seed=0) -> tuple[float, np.ndarray]:
    """Lowest eigenpair by implicitly restarted Lanczos (ARPACK).

    Matrix-vector products apply the Pauli strings directly, so no matrix is
    ever stored.  The start vector is drawn from ``seed``.
    """
    n = h.n_qubits
    dim = 1 << n
    rng = np.random.default_rng(seed)
    v0 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    op = scipy.sparse.linalg.LinearOperator(
        (dim, dim), matvec=lambda x: apply_pauli_sum(StateVector(x, n), h).amplitudes, dtype=complex
    )
    evals, evecs = scipy.sparse.linalg.eigsh(op, k=1, which="SA", v0=v0, tol=tol)
    vec = evecs[:, 0]
    return float(evals[0]), vec / np.linalg.norm(vec)


def ground_state_energy(
    h: PauliSum,
    active_qubits: int | Sequence[int] | None = None,
    *,
    method: str = "auto",
    dense_max_dim: int = DENSE_MAX_DIM,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
) -> GroundStateResult:
    """Minimum eigenvalue of ``h`` on the active qubits.

    ``active_qubits`` defaults to the Hamiltonian's support; ``method`` is
    ``"dense"``, ``"lanczos"`` or ``"auto"`` (dense up to ``dense_max_dim``).
    """
    active = _active(h, active_qubits)
    hr = restrict(h, active)
    dim = 1 << len(active)
    if method == "auto":
        method = "dense" if dim <= dense_max_dim else "lanczos"
    if method == "dense":
        need = dim * dim * 16
    elif method == "lanczos":
        need = 40 * dim * 16  # ARPACK keeps ~20 complex basis vectors plus workspace
    else:
        raise ValueError(f"unknown method {method!r}")
    if need > memory_budget:
        raise MemoryError(f"{method} solve of dimension {dim} needs ~{need} bytes")

    if method == "dense":
        evals, evecs = scipy.linalg.eigh(dense_matrix(hr), subset_by_index=(0, 0))
        energy, vec = float(evals[0]), evecs[:, 0].astype(complex)
    else:
        energy, vec = lanczos(hr)
    hv = apply_pauli_sum(StateVector(vec, len(active)), hr).amplitudes
    residual = float(np.linalg.norm(hv - energy * vec))
    return GroundStateResult(energy, residual, method, dim, vec)


def sector_ground_state(h: PauliSum, magnetization: int = 0) -> float:
    """Lowest eigenvalue inside the sector with sum_i Z_i = ``magnetization``.

    Raises if ``h`` does not conserve total magnetization.
    """
    hr = restrict(h, h.support())
    n = hr.n_qubits
    idx = np.arange(1 << n)
    ups = n - np.bitwise_count(idx).astype(int)  # bit 0 -> Z = +1
    sector = idx[2 * ups - n == magnetization]
    if len(sector) == 0:
        raise ValueError(f"no states with magnetization {magnetization}")
    pos = np.full(1 << n, -1)
    pos[sector] = np.arange(len(sector))
    mat = np.zeros((len(sector), len(sector)), dtype=complex)
    for x, diag in _compiled(hr):
        target = pos[sector ^ x]
        weights = diag[sector]
        leak = (target < 0) & (weights != 0)
        if leak.any():
            raise ValueError("Hamiltonian does not conserve total magnetization")
        keep = target >= 0
        mat[target[keep], np.arange(len(sector))[keep]] += weights[keep]
    return float(scipy.linalg.eigvalsh(mat, subset_by_index=(0, 0))[0])


def relative_error(energy: float, ground_energy: float) -> float:
    if ground_energy == 0:
        raise ValueError("relative error undefined for a zero ground-state energy")
    return abs(energy - ground_energy) / abs(ground_energy)
