"""Kagome unit-cell graph, site-to-qubit mapping and the Heisenberg Pauli sum.

Pauli labels are read left to right: ``label[q]`` acts on register qubit ``q``.
"""

from __future__ import annotations

import csv
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, UnsupportedHamiltonianError

DEFAULT_REGISTER_WIDTH = 16


@dataclass(frozen=True)
class LatticeGraph:
    n_sites: int
    edges: tuple[tuple[int, int], ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        seen = set()
        normalized = []
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ConfigError(f"self-loop on site {i}")
            if not (0 <= i < self.n_sites and 0 <= j < self.n_sites):
                raise ConfigError(f"edge ({i}, {j}) outside site range [0, {self.n_sites})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ConfigError(f"duplicate edge {key}")
            seen.add(key)
            normalized.append(key)
        object.__setattr__(self, "edges", tuple(normalized))

    def degrees(self) -> list[int]:
        deg = [0] * self.n_sites
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg


def build_kagome_unit_cell() -> LatticeGraph:
    """Return the 12-site hexagram: six corner-sharing triangles, 18 bonds.

    Sites are numbered along the outer star, alternating inner-hexagon sites
    (even) and tips (odd), so consecutive sites are always bonded and a linear
    qubit chain follows lattice edges.
    """
    edges = []
    labels = []
    for k in range(6):
        inner, tip, next_inner = 2 * k, 2 * k + 1, (2 * k + 2) % 12
        edges += [(inner, tip), (tip, next_inner), (inner, next_inner)]
        labels += [f"hex{k}", f"tip{k}"]
    return LatticeGraph(12, tuple(edges), tuple(labels))


@dataclass(frozen=True)
class QubitMapping:
    site_to_qubit: tuple[int, ...]
    n_qubits: int = DEFAULT_REGISTER_WIDTH

    def __post_init__(self):
        targets = [int(q) for q in self.site_to_qubit]
        if len(set(targets)) != len(targets):
            raise ConfigError("qubit mapping is not injective")
        for q in targets:
            if not 0 <= q < self.n_qubits:
                raise ConfigError(f"qubit {q} outside register of width {self.n_qubits}")
        object.__setattr__(self, "site_to_qubit", tuple(targets))

    @classmethod
    def identity(cls, n_sites: int, n_qubits: int = DEFAULT_REGISTER_WIDTH) -> QubitMapping:
        return cls(tuple(range(n_sites)), n_qubits)

    @property
    def active_qubits(self) -> tuple[int, ...]:
        return tuple(sorted(self.site_to_qubit))


@dataclass(frozen=True)
class PauliSum:
    """Weighted Pauli strings sharing one uniform interaction ``J``.

    Stored coefficients are always ``J * base_weight``.
    """

    labels: tuple[str, ...]
    base_weights: tuple[float, ...]
    uniform_interaction: float = 1.0
    _compiled: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.labels) != len(self.base_weights):
            raise ValueError("labels and base_weights differ in length")
        widths = {len(lbl) for lbl in self.labels}
        if len(widths) > 1:
            raise ValueError(f"mixed label widths {sorted(widths)}")
        for lbl in self.labels:
            if set(lbl) - set("IXYZ"):
                raise ValueError(f"bad Pauli label {lbl!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.labels[0]) if self.labels else 0

    @property
    def coefficients(self) -> np.ndarray:
        return self.uniform_interaction * np.asarray(self.base_weights, dtype=float)

    @property
    def terms(self) -> list[tuple[float, str]]:
        return list(zip(self.coefficients.tolist(), self.labels))

    def __len__(self) -> int:
        return len(self.labels)

    def support(self) -> tuple[int, ...]:
        """Qubits on which at least one term acts non-trivially."""
        return tuple(sorted({q for lbl in self.labels for q, c in enumerate(lbl) if c != "I"}))


def build_heisenberg(lattice: LatticeGraph, mapping: QubitMapping, J: float = 1.0) -> PauliSum:
    if len(mapping.site_to_qubit) < lattice.n_sites:
        raise ConfigError(
            f"mapping covers {len(mapping.site_to_qubit)} sites, lattice has {lattice.n_sites}"
        )
    labels = []
    for i, j in lattice.edges:
        qi, qj = mapping.site_to_qubit[i], mapping.site_to_qubit[j]
        for flavor in "XYZ":
            chars = ["I"] * mapping.n_qubits
            chars[qi] = chars[qj] = flavor
            labels.append("".join(chars))
    return PauliSum(tuple(labels), (1.0,) * len(labels), float(J))


def set_uniform_interaction(h: PauliSum, J_new: float) -> PauliSum:
    if not J_new > 0:
        raise ValueError(f"uniform interaction must be positive, got {J_new}")
    return replace(h, uniform_interaction=float(J_new))


def term_flavor(label: str) -> str:
    flavors = set(label) - {"I"}
    if len(flavors) != 1:
        raise UnsupportedHamiltonianError(f"term {label!r} is not a single-flavor Pauli string")
    return flavors.pop()


def measurement_bases(h: PauliSum) -> list[tuple[str, list[int]]]:
    """Group homogeneous terms into X, Y and Z measurement settings."""
    groups: dict[str, list[int]] = {}
    for k, lbl in enumerate(h.labels):
        groups.setdefault(term_flavor(lbl), []).append(k)
    return [(b, groups[b]) for b in "XYZ" if b in groups]


# -- files -------------------------------------------------------------------


def read_lattice_file(path: str | Path) -> LatticeGraph:
    """Parse a lattice file: first line is the site count, then one ``i j`` edge per line."""
    lines = [
        ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()
    ]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ConfigError(f"{path}: empty lattice file")
    try:
        n_sites = int(lines[0])
        edges = []
        for ln in lines[1:]:
            a, b = ln.split()
            edges.append((int(a), int(b)))
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed lattice file ({exc})") from None
    return LatticeGraph(n_sites, tuple(edges))


def write_lattice_file(lattice: LatticeGraph, path: str | Path) -> None:
    body = [str(lattice.n_sites)] + [f"{i} {j}" for i, j in lattice.edges]
    Path(path).write_text("\n".join(body) + "\n")


def read_layout_file(path: str | Path, n_qubits: int = DEFAULT_REGISTER_WIDTH) -> QubitMapping:
    """Parse ``site qubit`` lines into a mapping; sites must be 0..n-1."""
    pairs = {}
    for ln in Path(path).read_text().splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        try:
            site, qubit = (int(x) for x in ln.split())
        except ValueError:
            raise ConfigError(f"{path}: malformed layout line {ln!r}") from None
        pairs[site] = qubit
    if sorted(pairs) != list(range(len(pairs))):
        raise ConfigError(f"{path}: layout must list sites 0..{len(pairs) - 1}")
    return QubitMapping(tuple(pairs[s] for s in range(len(pairs))), n_qubits)


def write_hamiltonian_csv(h: PauliSum, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["coefficient", "label"])
        for c, lbl in h.terms:
            w.writerow([repr(float(c)), lbl])


def pauli_sum_from_terms(terms: Sequence[tuple[float, str]], J: float = 1.0) -> PauliSum:
    """Build a sum whose base weights are ``coefficient / J``."""
    return PauliSum(tuple(t[1] for t in terms), tuple(float(t[0]) / J for t in terms), float(J))
