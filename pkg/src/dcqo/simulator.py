"""Statevector simulation, diagonal expectation values, sampling, and the exact-evolution oracle."""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import ceil

import numpy as np

from . import _kernels as K
from .circuit import TWO_QUBIT as _TWO_QUBIT, Circuit, CircuitError
from .gates import H as H_MATRIX, X, Y, Z, gate_matrix
from .ising import SpinGlass, bitstring
from .schedule import CdMoments, Schedule, lam, lam_dot

MAX_QUBITS = 24
DEFAULT_SHOTS = 5000


class SimulationError(RuntimeError):
    pass


@dataclass(eq=False)
class StateVector:
    n: int
    amplitudes: np.ndarray

    @classmethod
    def zero(cls, n: int) -> "StateVector":
        psi = np.zeros(1 << n, dtype=np.complex128)
        psi[0] = 1.0
        return cls(n, psi)

    @classmethod
    def plus(cls, n: int) -> "StateVector":
        return cls(n, np.full(1 << n, 2 ** (-n / 2), dtype=np.complex128))

    @property
    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a.real**2 + a.imag**2

    def norm(self) -> float:
        return float(np.sqrt(self.probabilities.sum()))

    def fidelity(self, other: "StateVector") -> float:
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def dump(self, path) -> None:
        """Little-endian interleaved (re, im) float64 pairs."""
        self.amplitudes.astype("<c16").tofile(path)

    @classmethod
    def load(cls, path, n: int) -> "StateVector":
        amps = np.fromfile(path, dtype="<c16")
        if amps.size != 1 << n:
            raise SimulationError(f"{path}: expected {1 << n} amplitudes, found {amps.size}")
        return cls(n, amps.astype(np.complex128))


def apply_gate(psi: np.ndarray, kind: str, qubits, params) -> None:
    """Apply one gate in place to a raw amplitude array."""
    if len(qubits) != (2 if kind in _TWO_QUBIT else 1):
        raise CircuitError(f"malformed gate {kind} on {qubits}")
    if kind == "RZZ":
        K.apply_rzz(psi, qubits[0], qubits[1], params[0])
    elif kind == "RZY":
        K.apply_z_ry(psi, qubits[0], qubits[1], params[0])
    elif kind == "RYZ":
        K.apply_z_ry(psi, qubits[1], qubits[0], params[0])
    elif kind == "RY":
        K.apply_ry(psi, qubits[0], params[0])
    elif kind == "RZ":
        K.apply_rz(psi, qubits[0], params[0])
    elif kind == "RX":
        K.apply_rx(psi, qubits[0], params[0])
    elif len(qubits) == 1:
        m = gate_matrix(kind, params) if kind != "H" else H_MATRIX
        K.apply_1q(psi, qubits[0], m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    elif len(qubits) == 2:
        K.apply_2q(psi, qubits[0], qubits[1], np.ascontiguousarray(gate_matrix(kind, params)))
    else:
        raise CircuitError(f"malformed gate {kind} on {qubits}")


def run(c: Circuit, initial: StateVector | None = None, max_qubits: int = MAX_QUBITS) -> StateVector:
    """Apply ``c`` to |0...0> (or a copy of ``initial``)."""
    if c.n > max_qubits:
        raise SimulationError(f"n={c.n} exceeds statevector bound {max_qubits}")
    if initial is None:
        psi = np.zeros(1 << c.n, dtype=np.complex128)
        psi[0] = 1.0
    else:
        if initial.n != c.n:
            raise SimulationError("initial state size does not match circuit")
        psi = initial.amplitudes.astype(np.complex128, copy=True)
    for g in c.gates:
        apply_gate(psi, g.kind, g.qubits, g.params)
    return StateVector(c.n, psi)


def expectation(sg: SpinGlass, psi: StateVector) -> float:
    """<psi|H_f|psi> using the cached energy diagonal (offset excluded)."""
    if sg.n != psi.n:
        raise SimulationError("state and Hamiltonian sizes differ")
    return float(K.weighted_sum(psi.amplitudes, sg.diagonal))


@dataclass(frozen=True)
class ShotCounts:
    n: int
    counts: dict  # bitstring x_0..x_{n-1} -> count
    shots: int
    seed: int | None = None

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to the number of shots")

    def index_counts(self) -> dict[int, int]:
        return {int(s[::-1], 2): c for s, c in self.counts.items()}

    def mean_energy(self, sg: SpinGlass) -> float:
        diag = sg.diagonal
        return float(sum(diag[k] * c for k, c in self.index_counts().items()) / self.shots)

    def to_json(self, **kw) -> str:
        return json.dumps({"n": self.n, "shots": self.shots, "seed": self.seed,
                           "counts": dict(sorted(self.counts.items()))}, **kw)

    @classmethod
    def from_json(cls, text: str) -> "ShotCounts":
        d = json.loads(text)
        return cls(d["n"], {k: int(v) for k, v in d["counts"].items()}, d["shots"], d.get("seed"))


def sample(psi: StateVector, shots: int = DEFAULT_SHOTS, seed: int | None = None) -> ShotCounts:
    """Multinomial draw from |psi_x|^2; deterministic for a given seed."""
    if shots < 1:
        raise ValueError("shots must be positive")
    p = psi.probabilities
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, p)
    hit = np.flatnonzero(draws)
    return ShotCounts(psi.n, {bitstring(int(k), psi.n): int(draws[k]) for k in hit}, shots, seed)


# exact continuous-time oracle ------------------------------------------------


def pauli_operator(n: int, ops: dict) -> np.ndarray:
    """Dense operator with ``ops[q]`` (2x2) on qubit q, identity elsewhere."""
    out = np.array([[1.0 + 0j]])
    for q in reversed(range(n)):
        out = np.kron(out, ops.get(q, np.eye(2)))
    return out


def dense_terms(sg: SpinGlass) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(H_i, H_f, C) with H_i = -sum X, C = sum h Y + sum J (Y Z + Z Y)."""
    n = sg.n
    dim = 1 << n
    Hi = np.zeros((dim, dim), dtype=complex)
    C = np.zeros((dim, dim), dtype=complex)
    for q in range(n):
        Hi -= pauli_operator(n, {q: X})
        C += sg.h[q] * pauli_operator(n, {q: Y})
    for i, j, v in sg.couplings():
        C += v * (pauli_operator(n, {i: Y, j: Z}) + pauli_operator(n, {i: Z, j: Y}))
    Hf = np.diag(sg.diagonal).astype(complex)
    return Hi, Hf, C


EVOLUTION_MODES = ("adiabatic", "cd_assisted", "cd_only")


def exact_evolve(sg: SpinGlass, sched: Schedule | float, mode: str = "cd_assisted",
                 micro_step: float = 1e-4, max_qubits: int = 6) -> StateVector:
    """Time-ordered propagation from |+>^n with exponential-midpoint micro-steps.

    ``sched`` may be a bare total time; only T matters here. T = 0 returns |+>^n.
    """
    if mode not in EVOLUTION_MODES:
        raise ValueError(f"mode must be one of {EVOLUTION_MODES}")
    if sg.n > max_qubits:
        raise SimulationError(f"exact evolution limited to n <= {max_qubits}")
    psi = StateVector.plus(sg.n).amplitudes.copy()
    T = float(sched.T if isinstance(sched, Schedule) else sched)
    if T < 0:
        raise ValueError("T must be non-negative")
    if T == 0:
        return StateVector(sg.n, psi)
    steps = max(1, ceil(T / micro_step - 1e-9))
    h = T / steps
    Hi, Hf, C = dense_terms(sg)
    mom = CdMoments.of(sg)
    tm = (np.arange(steps) + 0.5) * h
    lv = lam(tm, T)
    g = -2.0 * lam_dot(tm, T) * mom.alpha1(lv) if mode != "adiabatic" else np.zeros(steps)
    for k in range(steps):
        if mode == "cd_only":
            Hk = g[k] * C
        else:
            Hk = (1 - lv[k]) * Hi + lv[k] * Hf + g[k] * C
        w, V = np.linalg.eigh(Hk)
        psi = V @ (np.exp(-1j * h * w) * (V.conj().T @ psi))
    return StateVector(sg.n, psi)
