"""Rewrite logical circuits into the trapped-ion native set {GPI, GPI2, MS}.

Every rule below lists gates in *time order* (first applied first). The
decomposition table this follows prints products like ``GPi2(pi/2) x GPi(0)``
for H; read as a matrix product that gives the wrong unitary, read as a gate
sequence it gives H up to global phase. The same reading holds for every row,
and each one is pinned by :func:`verify_equivalence` in the tests.

R_yy(theta) is realized by MS with its third argument (radians, as in the MS
matrix) kept inside [0, pi/2], using four branches that partition
[0, 2 pi):

    [0, pi/2]        MS(pi/2, pi/2, theta)
    (pi/2, pi]       GPI(pi/2) on both, then MS(3pi/2, pi/2, pi - theta)
    (pi, 3pi/2]      GPI(pi/2) on both, then MS(pi/2, pi/2, theta - pi)
    (3pi/2, 2pi)     MS(3pi/2, pi/2, 2pi - theta)

RX is not in the published table; it is added here as
GPI2(3pi/2), GPI(0), GPI(theta/2), GPI2(pi/2), checked the same way.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from .circuit import NATIVE, Circuit, CircuitError, Gate
from .gates import gate_matrix

TWO_PI = 2 * pi


class TranspileError(CircuitError):
    pass


class NativeCircuit(Circuit):
    """A circuit restricted to GPI / GPI2 / MS with MS angles in [0, pi/2]."""

    def __post_init__(self):
        super().__post_init__()
        for g in self.gates:
            if g.kind not in NATIVE:
                raise TranspileError(f"{g.kind} is not a native gate")
            if g.kind == "MS" and not (0.0 <= g.params[2] <= pi / 2 + 1e-12):
                raise TranspileError(f"MS angle {g.params[2]} outside [0, pi/2]")

    def counts(self) -> dict:
        one = sum(1 for g in self.gates if len(g.qubits) == 1)
        return {"one_qubit_native": one, "two_qubit_native": len(self.gates) - one}


def native_matrix(g: Gate) -> np.ndarray:
    if g.kind not in NATIVE:
        raise TranspileError(f"{g.kind} is not a native gate")
    return gate_matrix(g.kind, g.params)


def normalize_angle(theta: float) -> float:
    """theta mod 2 pi in [0, 2 pi); R_P(theta + 2 pi) = -R_P(theta), a global phase."""
    t = float(theta) % TWO_PI
    return 0.0 if t >= TWO_PI else t


def ryy_branch(theta: float) -> int:
    t = normalize_angle(theta)
    if t <= pi / 2:
        return 1
    if t <= pi:
        return 2
    if t <= 3 * pi / 2:
        return 3
    return 4


def _ryy(a: int, b: int, theta: float) -> list[Gate]:
    t = normalize_angle(theta)
    branch = ryy_branch(t)
    if branch == 1:
        return [Gate("MS", (a, b), (pi / 2, pi / 2, t))]
    if branch == 2:
        return [Gate("GPI", (a,), (pi / 2,)), Gate("GPI", (b,), (pi / 2,)),
                Gate("MS", (a, b), (3 * pi / 2, pi / 2, pi - t))]
    if branch == 3:
        return [Gate("GPI", (a,), (pi / 2,)), Gate("GPI", (b,), (pi / 2,)),
                Gate("MS", (a, b), (pi / 2, pi / 2, t - pi))]
    return [Gate("MS", (a, b), (3 * pi / 2, pi / 2, TWO_PI - t))]


def transpile_gate(g: Gate) -> list[Gate]:
    """Native gate sequence (time order) implementing ``g`` up to global phase."""
    k = g.kind
    if k in NATIVE:
        return [g]
    if k == "H":
        (q,) = g.qubits
        return [Gate("GPI2", (q,), (pi / 2,)), Gate("GPI", (q,), (0.0,))]
    theta = normalize_angle(g.params[0]) if g.params else 0.0
    if k == "RZ":
        (q,) = g.qubits
        return [Gate("GPI", (q,), (0.0,)), Gate("GPI", (q,), (theta / 2,))]
    if k == "RY":
        (q,) = g.qubits
        return [Gate("GPI2", (q,), (pi,)), Gate("GPI", (q,), (theta / 2,)), Gate("GPI2", (q,), (pi,))]
    if k == "RX":
        (q,) = g.qubits
        return [Gate("GPI2", (q,), (3 * pi / 2,)), Gate("GPI", (q,), (0.0,)),
                Gate("GPI", (q,), (theta / 2,)), Gate("GPI2", (q,), (pi / 2,))]
    if k == "RYY":
        return _ryy(*g.qubits, theta)
    if k == "RZZ":
        a, b = g.qubits
        return ([Gate("GPI2", (a,), (pi,)), Gate("GPI2", (b,), (pi,))] + _ryy(a, b, theta)
                + [Gate("GPI2", (a,), (0.0,)), Gate("GPI2", (b,), (0.0,))])
    if k == "RZY":
        a, b = g.qubits
        return [Gate("GPI2", (a,), (pi,))] + _ryy(a, b, theta) + [Gate("GPI2", (a,), (0.0,))]
    if k == "RYZ":
        a, b = g.qubits
        return [Gate("GPI2", (b,), (pi,))] + _ryy(a, b, theta) + [Gate("GPI2", (b,), (0.0,))]
    raise TranspileError(f"no native rule for {k}")


def transpile_circuit(c: Circuit) -> NativeCircuit:
    gates = []
    for g in c.gates:
        gates.extend(transpile_gate(g))
    meta = {"source_builder": c.metadata.get("builder"), "logical_gates": len(c.gates)}
    nc = NativeCircuit(c.n, tuple(gates), meta)
    nc.metadata.update(nc.counts())
    return nc


# verification -----------------------------------------------------------------


def circuit_unitary(c: Circuit, max_qubits: int = 8) -> np.ndarray:
    """Dense unitary by tensor contraction (independent of the statevector kernels)."""
    n = c.n
    if n > max_qubits:
        raise ValueError(f"dense unitary limited to n <= {max_qubits}")
    dim = 1 << n
    # axis k of the tensor is qubit n-1-k (C order puts the MSB first)
    U = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for g in c.gates:
        m = gate_matrix(g.kind, g.params)
        axes = [n - 1 - q for q in g.qubits]
        k = len(axes)
        m = m.reshape((2,) * (2 * k))
        U = np.tensordot(m, U, axes=(list(range(k, 2 * k)), axes))
        U = np.moveaxis(U, list(range(k)), axes)
    return U.reshape(dim, dim)


@dataclass(frozen=True)
class Equivalence:
    equal_up_to_phase: bool
    overlap: float  # |Tr(Ua^dag Ub)| / 2^n
    deviation: float  # max |Ua - e^{i phi} Ub| at the best phase


def verify_equivalence(a, b, tol: float = 1e-10) -> Equivalence:
    """Compare two circuits (or dense unitaries) up to a global phase."""
    Ua = a if isinstance(a, np.ndarray) else circuit_unitary(a)
    Ub = b if isinstance(b, np.ndarray) else circuit_unitary(b)
    if Ua.shape != Ub.shape:
        raise ValueError("unitaries act on different dimensions")
    tr = np.trace(Ua.conj().T @ Ub)
    overlap = abs(tr) / Ua.shape[0]
    phase = tr / abs(tr) if abs(tr) > 0 else 1.0
    deviation = float(np.max(np.abs(Ua * phase - Ub)))
    return Equivalence(abs(overlap - 1) <= tol and deviation <= tol, float(overlap), deviation)
