"""Dense statevector simulation with stochastic Pauli-trajectory noise.

Conventions: qubit 0 is the most significant bit of a flat amplitude index, and
character ``q`` of a bitstring is the outcome of qubit ``q``.

Noisy shots follow the per-shot recipe exactly: every shot draws its own
depolarizing events after each CX and its own readout flips.  Shots that drew
the same error pattern share one simulated trajectory, and every trajectory
shares the noiseless prefix up to its first error, so the cost scales with
the number of *distinct* patterns rather than with the shot count.
"""

from __future__ import annotations

import csv
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .ansatz import BoundGate, ParamCircuit
from .lattice import PauliSum, measurement_bases

MAX_QUBITS = 16

_PAULI_1Q = {
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[0, -1j], [1j, 0]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}


# -- states ------------------------------------------------------------------


@dataclass
class StateVector:
    amplitudes: np.ndarray
    n_qubits: int

    def __post_init__(self):
        if self.n_qubits > MAX_QUBITS:
            raise ValueError(f"at most {MAX_QUBITS} qubits supported")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.size != 1 << self.n_qubits:
            raise ValueError("amplitude count does not match 2**n_qubits")

    @classmethod
    def zero(cls, n_qubits: int) -> StateVector:
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return cls(amps, n_qubits)

    @classmethod
    def random(cls, n_qubits: int, seed=None) -> StateVector:
        rng = np.random.default_rng(seed)
        amps = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
        return cls(amps / np.linalg.norm(amps), n_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> StateVector:
        return StateVector(self.amplitudes.copy(), self.n_qubits)


@dataclass(frozen=True)
class NoiseModel:
    p_cx: float = 0.015
    p_readout: float = 0.03
    seed: int | None = None

    def __post_init__(self):
        for name in ("p_cx", "p_readout"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")

    @classmethod
    def calibrated(cls, p_cx: float, seed: int | None = None) -> NoiseModel:
        """Readout error set to twice the CX error, the observed hardware ratio."""
        return cls(p_cx, 2.0 * p_cx, seed)

    @classmethod
    def noiseless(cls) -> NoiseModel:
        return cls(0.0, 0.0)

    @property
    def is_noiseless(self) -> bool:
        return self.p_cx == 0.0 and self.p_readout == 0.0


class Counts(Mapping):
    """Outcome histogram; behaves as ``{bitstring: count}``."""

    def __init__(self, outcomes: np.ndarray, frequencies: np.ndarray, n_qubits: int):
        self.outcomes = np.asarray(outcomes, dtype=np.int64)
        self.frequencies = np.asarray(frequencies, dtype=np.int64)
        self.n_qubits = n_qubits

    @classmethod
    def from_samples(cls, samples: np.ndarray, n_qubits: int) -> Counts:
        outcomes, freq = np.unique(samples, return_counts=True)
        return cls(outcomes, freq, n_qubits)

    @property
    def shots(self) -> int:
        return int(self.frequencies.sum())

    def _key(self, outcome: int) -> str:
        return format(int(outcome), f"0{self.n_qubits}b")

    def __getitem__(self, bitstring: str) -> int:
        if len(bitstring) != self.n_qubits:
            raise KeyError(bitstring)
        pos = np.searchsorted(self.outcomes, int(bitstring, 2))
        if pos < len(self.outcomes) and self.outcomes[pos] == int(bitstring, 2):
            return int(self.frequencies[pos])
        raise KeyError(bitstring)

    def __iter__(self):
        return (self._key(o) for o in self.outcomes)

    def __len__(self) -> int:
        return len(self.outcomes)

    def __eq__(self, other):
        if isinstance(other, Counts):
            return (
                self.n_qubits == other.n_qubits
                and np.array_equal(self.outcomes, other.outcomes)
                and np.array_equal(self.frequencies, other.frequencies)
            )
        return super().__eq__(other)

    def __repr__(self) -> str:
        return f"Counts({dict(self)!r})"

    def parity_expectations(self, masks: Sequence[int]) -> np.ndarray:
        """Mean of (-1)^(parity of outcome & mask) for each bit mask."""
        masks = np.asarray(masks, dtype=np.int64)
        parity = np.bitwise_count(self.outcomes[None, :] & masks[:, None]) & 1
        signs = 1 - 2 * parity.astype(np.int64)
        return signs @ self.frequencies / self.shots

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["bitstring", "count"])
            for o, f in zip(self.outcomes, self.frequencies):
                w.writerow([self._key(o), int(f)])


def qubit_mask(qubits: Sequence[int], n_qubits: int) -> int:
    m = 0
    for q in qubits:
        m |= 1 << (n_qubits - 1 - q)
    return m


# -- kernels on (batch, 2**n) arrays, in place ---------------------------------


def _gate_matrix(name: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if name == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if name == "RZ":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]], dtype=complex)
    if name == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    raise ValueError(f"unknown single-qubit gate {name!r}")


def _apply_1q(batch: np.ndarray, n: int, q: int, u: np.ndarray) -> None:
    _kernels.apply_1q(batch, n, q, np.asarray(u, dtype=complex))


def _apply_cx(batch: np.ndarray, n: int, c: int, t: int) -> None:
    _kernels.apply_cx(batch, n, c, t)


def _apply_bound(batch: np.ndarray, n: int, gate: BoundGate, local: dict[int, int]) -> None:
    if gate.name == "CX":
        c, t = gate.qubits
        if c == t:
            raise ValueError("CX control and target coincide")
        _apply_cx(batch, n, local[c], local[t])
    else:
        (q,) = gate.qubits
        _apply_1q(batch, n, local[q], _gate_matrix(gate.name, gate.angle))


def _check_qubits(gate: BoundGate, n_qubits: int) -> None:
    for q in gate.qubits:
        if not 0 <= q < n_qubits:
            raise IndexError(f"{gate.name} on qubit {q} outside register of {n_qubits}")


def apply_gate(state: StateVector, gate: BoundGate) -> StateVector:
    _check_qubits(gate, state.n_qubits)
    out = state.amplitudes.copy()[None, :]
    _apply_bound(out, state.n_qubits, gate, {q: q for q in range(state.n_qubits)})
    return StateVector(out[0], state.n_qubits)


def apply_circuit(state: StateVector, gates: Sequence[BoundGate]) -> StateVector:
    out = state.amplitudes.copy()[None, :]
    ident = {q: q for q in range(state.n_qubits)}
    for g in gates:
        _check_qubits(g, state.n_qubits)
        _apply_bound(out, state.n_qubits, g, ident)
    return StateVector(out[0], state.n_qubits)


# -- Pauli algebra -----------------------------------------------------------


def _pauli_masks(label: str) -> tuple[int, int, int]:
    """Return (x-mask, z-mask, number of Y factors) of a label."""
    n = len(label)
    x = z = 0
    ny = 0
    for q, ch in enumerate(label):
        bit = 1 << (n - 1 - q)
        if ch in "XY":
            x |= bit
        if ch in "ZY":
            z |= bit
        ny += ch == "Y"
    return x, z, ny


def _pauli_phase(idx: np.ndarray, z: int, ny: int) -> np.ndarray:
    signs = 1 - 2 * (np.bitwise_count(idx & z) & 1).astype(np.int8)
    return (1j**ny) * signs


def apply_pauli(state: StateVector, label: str) -> StateVector:
    if len(label) != state.n_qubits:
        raise ValueError("label width does not match state")
    x, z, ny = _pauli_masks(label)
    idx = np.arange(1 << state.n_qubits)
    out = np.empty_like(state.amplitudes)
    out[idx ^ x] = _pauli_phase(idx, z, ny) * state.amplitudes
    return StateVector(out, state.n_qubits)


def apply_pauli_sum(state: StateVector, h: PauliSum) -> StateVector:
    if h.n_qubits != state.n_qubits:
        raise ValueError("Hamiltonian width does not match state")
    idx = np.arange(1 << state.n_qubits)
    out = np.zeros_like(state.amplitudes)
    for x, diag in _compiled(h):
        # (P psi)[i ^ x] = phase(i) psi[i]
        out[idx ^ x] += diag * state.amplitudes
    return StateVector(out, state.n_qubits)


def _compiled(h: PauliSum) -> list[tuple[int, np.ndarray]]:
    """Terms merged by x-mask into (x, sum of coefficient * phase) pairs."""
    if "groups" not in h._compiled:
        idx = np.arange(1 << h.n_qubits)
        groups: dict[int, np.ndarray] = {}
        for w, lbl in zip(h.base_weights, h.labels):
            x, z, ny = _pauli_masks(lbl)
            d = w * _pauli_phase(idx, z, ny)
            groups[x] = groups[x] + d if x in groups else d
        h._compiled["groups"] = sorted(groups.items())
    J = h.uniform_interaction
    return [(x, J * d) for x, d in h._compiled["groups"]]


def _expectation_amps(amps: np.ndarray, groups: list[tuple[int, np.ndarray]]) -> float:
    idx = np.arange(amps.size)
    total = 0.0
    for x, diag in groups:
        total += np.vdot(amps[idx ^ x] if x else amps, diag * amps).real
    return float(total)


def exact_expectation(state: StateVector, h: PauliSum) -> float:
    if h.n_qubits != state.n_qubits:
        raise ValueError(
            f"Hamiltonian width {h.n_qubits} does not match state width {state.n_qubits}"
        )
    return _expectation_amps(state.amplitudes, _compiled(h))


def restrict(h: PauliSum, keep: Sequence[int]) -> PauliSum:
    """Drop register positions not in ``keep``; they must be identity in every term."""
    keep = list(keep)
    dropped = set(range(h.n_qubits)) - set(keep)
    for lbl in h.labels:
        if any(lbl[q] != "I" for q in dropped):
            raise ValueError("term acts on a dropped qubit")
    labels = tuple("".join(lbl[q] for q in keep) for lbl in h.labels)
    return PauliSum(labels, h.base_weights, h.uniform_interaction)


class ExactEnergy:
    """Noiseless energy of ``circuit(params)`` against ``h``, simulated on the
    qubits the circuit or the Hamiltonian touch (others stay in ``|0>``)."""

    def __init__(self, circuit: ParamCircuit, h: PauliSum):
        if h.n_qubits != circuit.n_qubits:
            raise ValueError("Hamiltonian and circuit register widths differ")
        self.circuit = circuit
        self.keep = sorted(set(circuit.active_qubits) | set(h.support()))
        self.local = {q: k for k, q in enumerate(self.keep)}
        self._h = restrict(h, self.keep)

    def state(self, params) -> np.ndarray:
        n = len(self.keep)
        batch = np.zeros((1, 1 << n), dtype=complex)
        batch[0, 0] = 1.0
        for g in self.circuit.bind(params):
            _apply_bound(batch, n, g, self.local)
        return batch[0]

    def with_hamiltonian(self, h: PauliSum) -> ExactEnergy:
        out = object.__new__(ExactEnergy)
        out.circuit, out.keep, out.local = self.circuit, self.keep, self.local
        out._h = restrict(h, self.keep)
        return out

    def __call__(self, params) -> float:
        return _expectation_amps(self.state(params), _compiled(self._h))


# -- noisy sampling ----------------------------------------------------------

_BASIS_CHANGE = {
    "Z": (),
    "X": (("RY", -np.pi / 2),),
    # S^dagger then RY(-pi/2) maps |+i> to |0>
    "Y": (("RZ", -np.pi / 2), ("RY", -np.pi / 2)),
}


def basis_change_gates(basis: str, qubits: Sequence[int]) -> list[BoundGate]:
    if basis not in _BASIS_CHANGE:
        raise ValueError(f"unknown measurement basis {basis!r}")
    return [BoundGate(name, (q,), angle) for q in qubits for name, angle in _BASIS_CHANGE[basis]]


def _as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _two_qubit_pauli(code: int) -> tuple[int, int]:
    """Codes 1..15 enumerate the non-identity two-qubit Paulis (control, target)."""
    return divmod(int(code), 4)


def _fuse(gates: Sequence[BoundGate], local: dict[int, int]) -> list[tuple]:
    """Merge runs of single-qubit gates per qubit; CX order is preserved.

    Returns ops ``("u", q, U)`` and ``("cx", c, t)`` on local indices.
    """
    ops: list[tuple] = []
    pending: dict[int, np.ndarray] = {}
    for g in gates:
        if g.name == "CX":
            c, t = local[g.qubits[0]], local[g.qubits[1]]
            if c == t:
                raise ValueError("CX control and target coincide")
            for q in (c, t):
                if q in pending:
                    ops.append(("u", q, pending.pop(q)))
            ops.append(("cx", c, t))
        else:
            q = local[g.qubits[0]]
            u = _gate_matrix(g.name, g.angle)
            pending[q] = u @ pending[q] if q in pending else u
    ops.extend(("u", q, u) for q, u in sorted(pending.items()))
    return ops


def _pauli_matrix(x: bool, z: bool) -> np.ndarray:
    return _PAULI_1Q[{(1, 0): 1, (1, 1): 2, (0, 1): 3}[(int(x), int(z))]]


def _propagate_frames(ops: Sequence[tuple], codes: np.ndarray, n: int):
    """Track each error pattern as a Pauli frame pushed to the end of the circuit.

    A single-qubit op is "final" when no later CX touches its qubit.  A pattern
    stays *framed* if its frame never overlaps a non-final rotation; its
    trajectory is then ``(V F V^dag) |phi>``, with ``V`` the final rotations and
    ``|phi>`` the noiseless output.  Returns (x bits, z bits, framed flags).
    """
    last_cx = {}
    for k, op in enumerate(ops):
        if op[0] == "cx":
            last_cx[op[1]] = last_cx[op[2]] = k
    m = len(codes)
    fx = np.zeros((m, n), dtype=bool)
    fz = np.zeros((m, n), dtype=bool)
    framed = np.ones(m, dtype=bool)
    j = 0
    for k, op in enumerate(ops):
        if op[0] == "u":
            if k < last_cx.get(op[1], -1):
                framed &= ~(fx[:, op[1]] | fz[:, op[1]])
            continue
        _, c, t = op
        fx[:, t] ^= fx[:, c]
        fz[:, c] ^= fz[:, t]
        pc, pt = np.divmod(codes[:, j].astype(np.int64), 4)
        fx[:, c] ^= (pc == 1) | (pc == 2)
        fz[:, c] ^= (pc == 2) | (pc == 3)
        fx[:, t] ^= (pt == 1) | (pt == 2)
        fz[:, t] ^= (pt == 2) | (pt == 3)
        j += 1
    return fx, fz, framed


def _final_rotations(ops: Sequence[tuple], n: int) -> np.ndarray:
    """Per-qubit conjugated Paulis ``V sigma V^dag`` for sigma = X, Y, Z."""
    last_cx = {}
    for k, op in enumerate(ops):
        if op[0] == "cx":
            last_cx[op[1]] = last_cx[op[2]] = k
    v = {q: np.eye(2, dtype=complex) for q in range(n)}
    for k, op in enumerate(ops):
        if op[0] == "u" and k > last_cx.get(op[1], -1):
            v[op[1]] = op[2] @ v[op[1]]
    w = np.empty((n, 3, 2, 2), dtype=complex)
    for q in range(n):
        for k, (xb, zb) in enumerate(((1, 0), (1, 1), (0, 1))):
            w[q, k] = v[q] @ _pauli_matrix(xb, zb) @ v[q].conj().T
    return w


def _simulate_patterns(ops: Sequence[tuple], n: int, patterns: np.ndarray) -> np.ndarray:
    """Final states of the noiseless run (row 0) and of each error pattern.

    Patterns are activated at their first error so all rows share the
    noiseless prefix.
    """
    n_pat = len(patterns)
    first = np.argmax(patterns != 0, axis=1) if n_pat else np.zeros(0, dtype=np.int64)
    order = np.argsort(first, kind="stable")
    batch = np.zeros((n_pat + 1, 1 << n), dtype=complex)
    batch[:, 0] = 1.0
    live = 0
    j = 0
    for op in ops:
        view = batch[: live + 1]
        if op[0] == "u":
            _apply_1q(view, n, op[1], op[2])
            continue
        _, c, t = op
        _apply_cx(view, n, c, t)
        start = live
        while live < n_pat and first[order[live]] == j:
            live += 1
        if live > start:
            batch[start + 1 : live + 1] = batch[0]
        col = patterns[order[:live], j]
        for code in np.unique(col[col != 0]):
            rows = np.nonzero(col == code)[0] + 1
            pc, pt = _two_qubit_pauli(code)
            sub = batch[rows]
            if pc:
                _apply_1q(sub, n, c, _PAULI_1Q[pc])
            if pt:
                _apply_1q(sub, n, t, _PAULI_1Q[pt])
            batch[rows] = sub
        j += 1
    out = np.empty_like(batch)
    out[0] = batch[0]
    out[1 + order] = batch[1:]
    return out


def _cdf(amps: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(np.abs(amps) ** 2, axis=-1)
    return cdf / cdf[..., -1:]


def sample_gates(
    gates: Sequence[BoundGate],
    n_qubits: int,
    basis: str,
    noise: NoiseModel,
    shots: int,
    seed=None,
    *,
    twirl: bool = False,
) -> Counts:
    """Per-shot noisy execution of an already bound gate list.

    Each shot draws its own depolarizing events after every CX, its own
    outcome, and its own readout flips.  With ``twirl`` every shot also gets a
    random X mask just before readout, undone classically afterwards.
    """
    if shots <= 0:
        raise ValueError("shots must be positive")
    for g in gates:
        _check_qubits(g, n_qubits)
    rng = np.random.default_rng(_as_seed_sequence(noise.seed if seed is None else seed))

    active = sorted({q for g in gates for q in g.qubits}) or [0]
    local = {q: k for k, q in enumerate(active)}
    n = len(active)
    ops = _fuse(list(gates) + basis_change_gates(basis, active), local)
    n_cx = sum(op[0] == "cx" for op in ops)

    fired = rng.random((shots, n_cx)) < noise.p_cx
    which = rng.integers(1, 16, size=(shots, n_cx))
    codes = np.where(fired, which, 0).astype(np.int8)
    u_outcome = rng.random(shots)
    u_resample = rng.random(shots)

    noisy = np.nonzero(codes.any(axis=1))[0]
    fx, fz, framed = _propagate_frames(ops, codes[noisy], n)

    phi = _simulate_patterns(ops, n, codes[:0])[0]
    local_out = np.minimum(np.searchsorted(_cdf(phi), u_outcome, side="right"), (1 << n) - 1)

    fast = noisy[framed]
    if len(fast):
        local_out[fast] = _kernels.resample_framed(
            phi, n, fx[framed], fz[framed], _final_rotations(ops, n), local_out[fast], u_resample[fast]
        )
    slow = noisy[~framed]
    if len(slow):
        patterns, inverse = np.unique(codes[slow], axis=0, return_inverse=True)
        cdf = _cdf(_simulate_patterns(ops, n, patterns)[1:])
        local_out[slow] = _kernels.sample_rows(cdf, inverse.reshape(-1), u_outcome[slow])

    full = np.zeros(shots, dtype=np.int64)
    for k, q in enumerate(active):
        full |= ((local_out >> (n - 1 - k)) & 1) << (n_qubits - 1 - q)
    weights = 1 << np.arange(n_qubits - 1, -1, -1, dtype=np.int64)
    if noise.p_readout > 0:
        flips = rng.random((shots, n_qubits)) < noise.p_readout
        if twirl:
            mask = rng.integers(0, 2, size=(shots, n_qubits)) @ weights
            # X right before measurement is noiseless: it flips the ideal bit
            full ^= mask
        full ^= flips.astype(np.int64) @ weights
        if twirl:
            full ^= mask
    return Counts.from_samples(full, n_qubits)


def run_noisy_shots(
    circuit: ParamCircuit,
    bound_params,
    basis: str,
    noise: NoiseModel,
    shots: int,
    seed=None,
) -> Counts:
    return sample_gates(circuit.bind(bound_params), circuit.n_qubits, basis, noise, shots, seed)


def basis_seeds(seed, n_bases: int) -> list[np.random.SeedSequence]:
    return _as_seed_sequence(seed).spawn(n_bases)


def energy_from_counts(h: PauliSum, counts_by_basis: Mapping[str, Counts]) -> float:
    total = 0.0
    coeffs = h.coefficients
    for basis, idx in measurement_bases(h):
        counts = counts_by_basis[basis]
        masks = [
            qubit_mask([q for q, ch in enumerate(h.labels[k]) if ch != "I"], h.n_qubits)
            for k in idx
        ]
        total += float(coeffs[idx] @ counts.parity_expectations(masks))
    return total


def estimate_energy(
    circuit: ParamCircuit,
    bound_params,
    h: PauliSum,
    noise: NoiseModel,
    shots_per_basis: int = 1024,
    seed=None,
) -> float:
    """Shot-based energy: one noisy run per measurement basis, parity per term."""
    if h.n_qubits != circuit.n_qubits:
        raise ValueError("Hamiltonian and circuit register widths differ")
    groups = measurement_bases(h)
    gates = circuit.bind(bound_params)
    seeds = basis_seeds(noise.seed if seed is None else seed, 3)
    counts = {
        basis: sample_gates(gates, circuit.n_qubits, basis, noise, shots_per_basis, seeds["XYZ".index(basis)])
        for basis, _ in groups
    }
    return energy_from_counts(h, counts)
