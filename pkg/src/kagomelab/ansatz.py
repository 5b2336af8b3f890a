"""EfficientSU2 trial circuit (RY/RZ layers, linear CX chain)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np


class Gate(NamedTuple):
    """A circuit gate. ``slot`` indexes the parameter vector; ``None`` for CX."""

    name: str
    qubits: tuple[int, ...]
    slot: int | None = None


class BoundGate(NamedTuple):
    name: str
    qubits: tuple[int, ...]
    angle: float = 0.0


def ry(q: int, theta: float) -> BoundGate:
    return BoundGate("RY", (q,), float(theta))


def rz(q: int, theta: float) -> BoundGate:
    return BoundGate("RZ", (q,), float(theta))


def cx(c: int, t: int) -> BoundGate:
    return BoundGate("CX", (c, t))


@dataclass(frozen=True)
class ParamCircuit:
    gates: tuple[Gate, ...]
    n_qubits: int
    n_params: int

    def __post_init__(self):
        slots = sorted(g.slot for g in self.gates if g.slot is not None)
        if slots != list(range(self.n_params)):
            raise ValueError("every parameter slot must appear exactly once")

    @property
    def cx_count(self) -> int:
        return sum(g.name == "CX" for g in self.gates)

    @property
    def active_qubits(self) -> tuple[int, ...]:
        return tuple(sorted({q for g in self.gates for q in g.qubits}))

    def bind(self, params: Sequence[float]) -> list[BoundGate]:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got shape {params.shape}")
        return [
            BoundGate(g.name, g.qubits, 0.0 if g.slot is None else float(params[g.slot]))
            for g in self.gates
        ]

    def dumps(self) -> str:
        """One gate per line: ``name qubits slot`` (slot ``-`` for CX)."""
        lines = []
        for g in self.gates:
            qs = ",".join(map(str, g.qubits))
            lines.append(f"{g.name} {qs} {'-' if g.slot is None else g.slot}")
        return "\n".join(lines) + "\n"

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())


def efficient_su2(
    n_qubits: int, reps: int = 1, *, qubits: Sequence[int] | None = None, width: int | None = None
) -> ParamCircuit:
    """RY+RZ layer, then ``reps`` x [CX chain, RY layer, RZ layer].

    ``qubits`` places the chain on chosen register indices (default ``0..n-1``)
    and ``width`` sets the register size; register qubits outside ``qubits``
    stay idle.
    """
    if n_qubits < 2:
        raise ValueError("efficient_su2 needs at least 2 qubits")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    qs = list(range(n_qubits)) if qubits is None else [int(q) for q in qubits]
    if len(qs) != n_qubits or len(set(qs)) != n_qubits:
        raise ValueError("qubits must list n_qubits distinct indices")
    width = max(qs) + 1 if width is None else width
    if max(qs) >= width:
        raise ValueError("qubit index outside register width")

    gates: list[Gate] = []
    slot = 0

    def rotation_layers():
        nonlocal slot
        for name in ("RY", "RZ"):
            for q in qs:
                gates.append(Gate(name, (q,), slot))
                slot += 1

    rotation_layers()
    for _ in range(reps):
        for a, b in zip(qs[:-1], qs[1:]):
            gates.append(Gate("CX", (a, b)))
        rotation_layers()
    return ParamCircuit(tuple(gates), width, slot)


def init_params(n_params: int, seed=None) -> np.ndarray:
    if n_params <= 0:
        raise ValueError("n_params must be positive")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-np.pi, np.pi, size=n_params)
    # uniform() may round up onto the open end
    theta[theta >= np.pi] = -np.pi
    return theta
