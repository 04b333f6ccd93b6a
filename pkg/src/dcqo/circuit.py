"""Gate-level circuit IR and the circuit builders.

Angle convention, global to the package: for a Pauli string P,

    R_P(theta) = exp(-i theta P / 2)

so a Trotter factor exp(-i dt c P) becomes R_P(2 dt c). Two-qubit kinds name
their Paulis in qubit order: ``RZY(a, b)`` is exp(-i theta Z_a Y_b / 2).

Every builder starts from |+>^n (an H on each qubit). Inside a Trotter step
the order is fixed: mixer RX, field RZ, coupling RZZ, then the CD block (RY
per qubit, then RZY followed by RYZ per pair). Pairs run i<j row-major.
Field and coupling terms with an exactly-zero coefficient emit no gate;
gates whose angle merely evaluates to zero are kept (prune them explicitly).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .ising import SpinGlass
from .schedule import CdProfile, Schedule, cd_profile, lam

ONE_QUBIT = {"H": 0, "RX": 1, "RY": 1, "RZ": 1, "GPI": 1, "GPI2": 1}
TWO_QUBIT = {"RZZ": 1, "RYZ": 1, "RZY": 1, "RYY": 1, "RXX": 1, "MS": 3}
ROTATIONS = frozenset({"RX", "RY", "RZ", "RZZ", "RYZ", "RZY", "RYY", "RXX"})
NATIVE = frozenset({"GPI", "GPI2", "MS"})


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple
    params: tuple = ()

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if kind in ONE_QUBIT:
            arity, npar = 1, ONE_QUBIT[kind]
        elif kind in TWO_QUBIT:
            arity, npar = 2, TWO_QUBIT[kind]
        else:
            raise CircuitError(f"unknown gate kind {kind!r}")
        if len(self.qubits) != arity:
            raise CircuitError(f"{kind} acts on {arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != arity or min(self.qubits) < 0:
            raise CircuitError(f"{kind} has invalid qubits {self.qubits}")
        if len(self.params) != npar:
            raise CircuitError(f"{kind} takes {npar} parameter(s), got {len(self.params)}")
        if not all(np.isfinite(self.params)):
            raise CircuitError(f"{kind} has non-finite angle {self.params}")

    @property
    def angle(self) -> float:
        return self.params[0]

    @property
    def is_rotation(self) -> bool:
        return self.kind in ROTATIONS

    def to_line(self) -> str:
        return " ".join([self.kind, *map(str, self.qubits), *map(repr, self.params)])

    @classmethod
    def from_line(cls, line: str) -> "Gate":
        tok = line.split()
        kind = tok[0].upper()
        arity = 1 if kind in ONE_QUBIT else 2
        return cls(kind, tuple(int(t) for t in tok[1 : 1 + arity]), tuple(float(t) for t in tok[1 + arity :]))


@dataclass(frozen=True, eq=False)
class Circuit:
    n: int
    gates: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        gates = tuple(self.gates)
        for g in gates:
            if not isinstance(g, Gate):
                raise CircuitError(f"not a Gate: {g!r}")
            if max(g.qubits) >= self.n:
                raise CircuitError(f"{g.kind} on {g.qubits} exceeds n={self.n}")
        object.__setattr__(self, "gates", gates)
        steps = self.metadata.get("step_index")
        if steps is not None and len(steps) != len(gates):
            raise CircuitError("metadata step_index must align with gates")

    def __len__(self):
        return len(self.gates)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return self.n == other.n and self.gates == other.gates and self.metadata == other.metadata

    def then(self, other: "Circuit") -> "Circuit":
        """Sequential composition (self first); metadata is dropped."""
        if other.n != self.n:
            raise CircuitError("qubit counts differ")
        return Circuit(self.n, self.gates + other.gates)

    def steps(self) -> list[int]:
        return list(self.metadata.get("step_index", [-1] * len(self.gates)))

    # serialization ---------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"# n {self.n}"]
        if self.metadata:
            lines.append("# meta " + json.dumps(self.metadata, sort_keys=True))
        lines += [g.to_line() for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        n, meta, gates = None, {}, []
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("n "):
                    n = int(body[2:])
                elif body.startswith("meta "):
                    meta = json.loads(body[5:])
                continue
            gates.append(Gate.from_line(line))
        if n is None:
            n = 1 + max((q for g in gates for q in g.qubits), default=-1)
        return cls(n, tuple(gates), meta)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "gates": [{"kind": g.kind, "qubits": list(g.qubits), "params": list(g.params)} for g in self.gates],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        gates = tuple(Gate(g["kind"], tuple(g["qubits"]), tuple(g.get("params", ()))) for g in d["gates"])
        return cls(int(d["n"]), gates, dict(d.get("metadata", {})))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


class _Builder:
    """Accumulates gates with the Trotter step they came from (-1 = preparation)."""

    def __init__(self, n):
        self.n = n
        self.gates = []
        self.steps = []

    def add(self, kind, qubits, angle=None, step=-1):
        params = () if angle is None else (float(angle),)
        self.gates.append(Gate(kind, qubits, params))
        self.steps.append(int(step))

    def plus_state(self):
        for q in range(self.n):
            self.add("H", (q,))

    def adiabatic(self, sg: SpinGlass, lam_value, dt, step):
        # H_ad = (1 - lam) (-sum X) + lam H_f
        for q in range(self.n):
            self.add("RX", (q,), -2 * dt * (1 - lam_value), step)
        for q in range(self.n):
            if sg.h[q] != 0:
                self.add("RZ", (q,), 2 * dt * lam_value * sg.h[q], step)
        for i, j, v in sg.couplings():
            self.add("RZZ", (i, j), 2 * dt * lam_value * v, step)

    def cd(self, sg: SpinGlass, strength, dt, step):
        # lambda_dot A_lambda = g (sum h Y + sum J (Y Z + Z Y)),  g = -2 lambda_dot alpha1
        for q in range(self.n):
            if sg.h[q] != 0:
                self.add("RY", (q,), 2 * dt * strength * sg.h[q], step)
        for i, j, v in sg.couplings():
            self.add("RZY", (i, j), 2 * dt * strength * v, step)
            self.add("RYZ", (i, j), 2 * dt * strength * v, step)

    def circuit(self, **meta) -> Circuit:
        meta["step_index"] = self.steps
        return Circuit(self.n, tuple(self.gates), meta)


def _sched_meta(sched: Schedule) -> dict:
    return {"T": sched.T, "dt": sched.dt, "N": sched.N}


def build_digitized_adiabatic(sg: SpinGlass, sched: Schedule) -> Circuit:
    """First-order Trotterization of (1 - lambda) H_i + lambda H_f."""
    b = _Builder(sg.n)
    b.plus_state()
    lv = lam(sched.times(), sched.T)
    for m in range(sched.N):
        b.adiabatic(sg, float(lv[m]), sched.dt, m)
    return b.circuit(builder="adiabatic", schedule=_sched_meta(sched))


def build_cd_assisted(sg: SpinGlass, sched: Schedule) -> Circuit:
    """Trotterized H_ad(t) + lambda_dot(t) A_lambda with the first-order gauge potential."""
    prof = cd_profile(sg, sched)
    b = _Builder(sg.n)
    b.plus_state()
    for m in range(sched.N):
        b.adiabatic(sg, float(prof.lam[m]), sched.dt, m)
        b.cd(sg, float(prof.cd_strength[m]), sched.dt, m)
    return b.circuit(builder="cd", schedule=_sched_meta(sched))


def build_cd_only(sg: SpinGlass, sched: Schedule, selection: Iterable[int] | None = None,
                  cutoff: float = 0.0, profile: CdProfile | None = None) -> Circuit:
    """Impulse-regime circuit: CD gates only, at the selected steps, then angle pruning.

    ``selection`` holds 0-based step indices; ``None`` keeps every step.
    """
    prof = profile if profile is not None else cd_profile(sg, sched)
    steps = range(sched.N) if selection is None else sorted(set(int(m) for m in selection))
    if not steps:
        raise CircuitError("empty step selection")
    for m in steps:
        if not 0 <= m < sched.N:
            raise CircuitError(f"step {m} outside schedule of {sched.N} steps")
    b = _Builder(sg.n)
    b.plus_state()
    for m in steps:
        b.cd(sg, float(prof.cd_strength[m]), sched.dt, m)
    c = b.circuit(builder="cd-only", schedule=_sched_meta(sched), selection=list(steps))
    return prune_small_angles(c, cutoff)


def prune_small_angles(c: Circuit, threshold: float) -> Circuit:
    """Drop rotation gates with |angle| < threshold; H and native gates are exempt."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    steps = c.steps()
    keep = [k for k, g in enumerate(c.gates) if not (g.is_rotation and abs(g.angle) < threshold)]
    meta = dict(c.metadata)
    meta["cutoff"] = float(threshold)
    meta["pruned"] = int(meta.get("pruned", 0)) + len(c.gates) - len(keep)
    if "step_index" in c.metadata:
        meta["step_index"] = [steps[k] for k in keep]
    return Circuit(c.n, tuple(c.gates[k] for k in keep), meta)


def surviving_steps(c: Circuit) -> list[int]:
    """Distinct Trotter steps that still contribute at least one rotation."""
    return sorted({s for g, s in zip(c.gates, c.steps()) if g.is_rotation and s >= 0})


def stats(c: Circuit) -> dict:
    """Gate counts and depth under greedy as-soon-as-possible layering."""
    level = [0] * c.n
    one = two = 0
    for g in c.gates:
        if len(g.qubits) == 1:
            one += 1
        else:
            two += 1
        d = 1 + max(level[q] for q in g.qubits)
        for q in g.qubits:
            level[q] = d
    return {"one_qubit_count": one, "two_qubit_count": two, "depth": max(level, default=0)}


# parameterized ansaetze ---------------------------------------------------


@dataclass(frozen=True)
class ParamGate:
    """Gate whose angle is ``multiplier * params[param] + constant`` (param None: fixed)."""

    kind: str
    qubits: tuple
    param: int | None = None
    multiplier: float = 0.0
    constant: float = 0.0


@dataclass(frozen=True, eq=False)
class Ansatz:
    n: int
    entries: tuple
    n_params: int
    names: tuple = ()
    initial: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        used = {e.param for e in self.entries if e.param is not None}
        if used != set(range(self.n_params)):
            missing = set(range(self.n_params)) - used
            raise CircuitError(f"parameters {sorted(missing)} drive no gate")
        if self.initial is not None and len(self.initial) != self.n_params:
            raise CircuitError("initial parameter vector has the wrong length")


class _AnsatzBuilder:
    def __init__(self, n):
        self.n = n
        self.entries = []

    def fixed(self, kind, qubits):
        self.entries.append(ParamGate(kind, tuple(qubits)))

    def rot(self, kind, qubits, param, multiplier):
        self.entries.append(ParamGate(kind, tuple(qubits), param, float(multiplier)))

    def problem(self, sg, k):
        for q in range(self.n):
            if sg.h[q] != 0:
                self.rot("RZ", (q,), k, 2 * sg.h[q])
        for i, j, v in sg.couplings():
            self.rot("RZZ", (i, j), k, 2 * v)

    def mixer(self, k):
        for q in range(self.n):
            self.rot("RX", (q,), k, -2.0)

    def cd_block(self, sg, k_single, k_pair, scale):
        for q in range(self.n):
            if sg.h[q] != 0:
                self.rot("RY", (q,), k_single, scale * sg.h[q])
        for i, j, v in sg.couplings():
            self.rot("RZY", (i, j), k_pair, scale * v)
            self.rot("RYZ", (i, j), k_pair, scale * v)


def build_qaoa_ansatz(sg: SpinGlass, p: int) -> Ansatz:
    """|gamma, beta> = prod_l U_i(beta_l) U_f(gamma_l) |+>; params ordered (gamma_1, beta_1, gamma_2, ...)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    a = _AnsatzBuilder(sg.n)
    for q in range(sg.n):
        a.fixed("H", (q,))
    names = []
    for layer in range(p):
        a.problem(sg, 2 * layer)
        a.mixer(2 * layer + 1)
        names += [f"gamma{layer + 1}", f"beta{layer + 1}"]
    return Ansatz(sg.n, tuple(a.entries), 2 * p, tuple(names), metadata={"builder": "qaoa", "p": p})


def build_dcqaoa_ansatz(sg: SpinGlass, p: int) -> Ansatz:
    """QAOA layers followed by a CD block U_c(alpha) = exp(-i alpha (sum hY + sum J(YZ+ZY)))."""
    if p < 1:
        raise ValueError("p must be >= 1")
    a = _AnsatzBuilder(sg.n)
    for q in range(sg.n):
        a.fixed("H", (q,))
    names = []
    for layer in range(p):
        k = 3 * layer
        a.problem(sg, k)
        a.mixer(k + 1)
        a.cd_block(sg, k + 2, k + 2, 2.0)
        names += [f"gamma{layer + 1}", f"beta{layer + 1}", f"alpha{layer + 1}"]
    return Ansatz(sg.n, tuple(a.entries), 3 * p, tuple(names), metadata={"builder": "dcqaoa", "p": p})


def build_hdcqo_ansatz(sg: SpinGlass, sched: Schedule, p: int,
                       steps: Sequence[int] | None = None) -> Ansatz:
    """CD-only variational ansatz: per layer one angle for RY and one shared by RZY/RYZ.

    Layers sit on the ``p`` steps with the largest |lambda_dot alpha1| (in time
    order) unless ``steps`` is given. The initial parameters reproduce the
    CD-only circuit at those steps exactly: a_l = b_l = 2 dt g_m.
    """
    from .schedule import select_impulse_steps

    prof = cd_profile(sg, sched)
    if steps is None:
        steps = select_impulse_steps(prof, keep=p)
    steps = sorted(int(m) for m in steps)
    if len(steps) != p:
        raise ValueError(f"need {p} steps, got {len(steps)}")
    a = _AnsatzBuilder(sg.n)
    for q in range(sg.n):
        a.fixed("H", (q,))
    names, init = [], []
    for layer, m in enumerate(steps):
        a.cd_block(sg, 2 * layer, 2 * layer + 1, 1.0)
        angle = 2 * sched.dt * float(prof.cd_strength[m])
        names += [f"alpha{layer + 1}", f"beta{layer + 1}"]
        init += [angle, angle]
    return Ansatz(sg.n, tuple(a.entries), 2 * p, tuple(names), np.array(init),
                  {"builder": "hdcqo", "p": p, "steps": steps, "schedule": _sched_meta(sched)})


def bind(a: Ansatz, params) -> Circuit:
    """Evaluate every affine angle at ``params``."""
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != a.n_params:
        raise ValueError(f"expected {a.n_params} parameters, got {params.size}")
    gates = []
    for e in a.entries:
        if e.param is None and e.kind not in ROTATIONS:
            gates.append(Gate(e.kind, e.qubits))
        else:
            val = e.constant + (0.0 if e.param is None else e.multiplier * params[e.param])
            gates.append(Gate(e.kind, e.qubits, (val,)))
    return Circuit(a.n, tuple(gates), {"builder": a.metadata.get("builder", "ansatz")})
