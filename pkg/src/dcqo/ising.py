"""Ising spin-glass problems and the portfolio-to-Ising encoding.

Bit/spin convention used everywhere in the package::

    x_i = (1 - z_i) / 2        bit 1 (asset selected)  <->  spin -1

Basis index ``k`` of a statevector carries bit ``x_i`` at position ``i``
(qubit 0 is the least significant bit).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from math import comb
from typing import Iterator

import numba
import numpy as np

MAX_BRUTE_FORCE_QUBITS = 26


class InvalidProblemError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SpinGlass:
    """H_f = sum_i h_i Z_i + sum_{i<j} J_ij Z_i Z_j, plus a tracked constant.

    ``J`` is stored as a dense strictly-upper-triangular matrix. ``offset`` is
    not part of the Hamiltonian; it maps Hamiltonian energies back to the
    objective value (``energy + offset``).
    """

    h: np.ndarray
    J: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        h = np.array(self.h, dtype=float).reshape(-1)
        n = h.size
        J = np.array(self.J, dtype=float)
        if n < 1:
            raise InvalidProblemError("spin glass needs at least one spin")
        if J.shape != (n, n):
            raise InvalidProblemError(f"J must be {n}x{n}, got {J.shape}")
        if np.any(np.tril(J) != 0):
            raise InvalidProblemError("J must be strictly upper triangular (i < j)")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(J)) and np.isfinite(self.offset)):
            raise InvalidProblemError("non-finite coefficient")
        h.flags.writeable = False
        J.flags.writeable = False
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def n(self) -> int:
        return self.h.size

    @classmethod
    def from_couplings(cls, h, couplings, offset=0.0) -> "SpinGlass":
        """Build from fields and an iterable of ``(i, j, J_ij)`` triples.

        Pairs given as ``(j, i)`` with ``j > i`` are folded onto ``(i, j)``;
        repeated pairs accumulate.
        """
        h = np.asarray(h, dtype=float)
        n = h.size
        J = np.zeros((n, n))
        for i, j, v in couplings:
            i, j = int(i), int(j)
            if i == j:
                raise InvalidProblemError(f"self-coupling on spin {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidProblemError(f"coupling ({i}, {j}) out of range for n={n}")
            a, b = min(i, j), max(i, j)
            J[a, b] += float(v)
        return cls(h, J, offset)

    @cached_property
    def J_sym(self) -> np.ndarray:
        """Symmetric coupling matrix with zero diagonal."""
        s = self.J + self.J.T
        s.flags.writeable = False
        return s

    def couplings(self) -> Iterator[tuple[int, int, float]]:
        """Nonzero couplings as ``(i, j, J_ij)`` with ``i < j``, row-major order."""
        for i, j in zip(*np.nonzero(self.J)):
            yield int(i), int(j), float(self.J[i, j])

    @cached_property
    def diagonal(self) -> np.ndarray:
        """Energies of all 2^n basis states (offset excluded), cached."""
        d = energy_diagonal(self)
        d.flags.writeable = False
        return d

    def energy(self, x) -> float:
        return energy(self, x)

    def objective(self, x) -> float:
        """Energy plus offset: the value of the encoded cost function."""
        return energy(self, x) + self.offset

    def scaled(self, factor: float) -> "SpinGlass":
        return SpinGlass(self.h * factor, self.J * factor, self.offset * factor)

    # serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "h": [float(v) for v in self.h],
            "J": [[i, j, v] for i, j, v in self.couplings()],
            "offset": self.offset,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpinGlass":
        h = d["h"]
        if "n" in d and int(d["n"]) != len(h):
            raise InvalidProblemError(f"n={d['n']} disagrees with len(h)={len(h)}")
        return cls.from_couplings(h, d.get("J", []), d.get("offset", 0.0))

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text: str) -> "SpinGlass":
        return cls.from_dict(json.loads(text))

    def same_as(self, other: "SpinGlass") -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.h, other.h)
            and np.array_equal(self.J, other.J)
            and self.offset == other.offset
        )


@dataclass(frozen=True, eq=False)
class PortfolioProblem:
    """Single-period Boolean Markowitz selection with a folded budget penalty.

    Maximizes ``theta1 * e.x - theta2 * x.c.x - theta3 * (sum(x) - B)^2``.
    """

    e: np.ndarray
    c: np.ndarray
    B: int
    theta1: float = 1.0
    theta2: float = 0.5
    theta3: float = 2.0
    tickers: tuple = field(default=())

    def __post_init__(self):
        e = np.array(self.e, dtype=float).reshape(-1)
        c = np.array(self.c, dtype=float)
        n = e.size
        if c.shape != (n, n):
            raise InvalidProblemError(f"covariance must be {n}x{n}, got {c.shape}")
        if not (np.all(np.isfinite(e)) and np.all(np.isfinite(c))):
            raise InvalidProblemError("non-finite returns or covariance")
        if np.max(np.abs(c - c.T), initial=0.0) > 1e-12:
            raise InvalidProblemError("covariance is not symmetric")
        if n and np.linalg.eigvalsh(c)[0] < -1e-9:
            raise InvalidProblemError("covariance is not positive semidefinite")
        if int(self.B) != self.B or not (0 < self.B <= n):
            raise InvalidProblemError(f"budget B={self.B} must be an integer in [1, {n}]")
        for name in ("theta1", "theta2", "theta3"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise InvalidProblemError(f"{name}={v} must be finite and nonnegative")
        if self.tickers and len(self.tickers) != n:
            raise InvalidProblemError("tickers length does not match number of assets")
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "B", int(self.B))
        object.__setattr__(self, "tickers", tuple(self.tickers))

    @property
    def n(self) -> int:
        return self.e.size

    def cost(self, x) -> float:
        """Negated objective, the quantity minimized by the Ising ground state."""
        x = np.asarray(x, dtype=float)
        ret = self.e @ x
        risk = x @ self.c @ x
        over = x.sum() - self.B
        return -(self.theta1 * ret - self.theta2 * risk - self.theta3 * over * over)


def qubo_to_spin_glass(linear, quadratic, constant=0.0) -> SpinGlass:
    """Map ``sum a_i x_i + sum_{i<j} b_ij x_i x_j + constant`` onto spins.

    ``quadratic`` is read from its strict upper triangle only.
    """
    a = np.asarray(linear, dtype=float)
    b = np.triu(np.asarray(quadratic, dtype=float), 1)
    bs = b + b.T
    h = -a / 2 - bs.sum(axis=1) / 4
    J = b / 4
    offset = float(constant) + a.sum() / 2 + b.sum() / 4
    return SpinGlass(h, J, offset)


def portfolio_to_spin_glass(p: PortfolioProblem) -> SpinGlass:
    n = p.n
    linear = -p.theta1 * p.e + p.theta2 * np.diag(p.c) + p.theta3 * (1 - 2 * p.B) * np.ones(n)
    quadratic = np.triu(2 * p.theta2 * p.c + 2 * p.theta3, 1)
    return qubo_to_spin_glass(linear, quadratic, p.theta3 * p.B * p.B)


def as_bits(x, n: int | None = None) -> np.ndarray:
    """Coerce a bitstring (``"0110"``, sequence, or array) to an int8 array.

    Strings are read left to right as ``x_0 x_1 ...``.
    """
    if isinstance(x, str):
        arr = np.array([int(ch) for ch in x], dtype=np.int8)
    else:
        arr = np.asarray(x).astype(np.int8).reshape(-1)
    if np.any((arr != 0) & (arr != 1)):
        raise ValueError(f"bitstring has entries outside {{0,1}}: {x!r}")
    if n is not None and arr.size != n:
        raise ValueError(f"bitstring length {arr.size} does not match problem size {n}")
    return arr


def bits_to_index(x) -> int:
    x = as_bits(x)
    return int(sum(int(b) << i for i, b in enumerate(x)))


def index_to_bits(k: int, n: int) -> np.ndarray:
    return np.array([(k >> i) & 1 for i in range(n)], dtype=np.int8)


def bitstring(k: int, n: int) -> str:
    """Basis index to the ``x_0 x_1 ... x_{n-1}`` string form."""
    return "".join(str((k >> i) & 1) for i in range(n))


def energy(sg: SpinGlass, x) -> float:
    """Ising energy of a bitstring, offset excluded."""
    z = 1.0 - 2.0 * as_bits(x, sg.n)
    return float(sg.h @ z + z @ sg.J @ z)


@numba.njit(cache=True)
def _gray_fill(h, Jsym, out):
    # Walk the Gray code, updating energy and local fields after each spin flip.
    n = h.size
    z = np.ones(n)
    loc = h.copy()
    for i in range(n):
        for j in range(n):
            loc[i] += Jsym[i, j]
    e = 0.0
    for i in range(n):
        e += h[i]
        for j in range(i + 1, n):
            e += Jsym[i, j]
    out[0] = e
    for k in range(1, out.size):
        i = 0
        while not (k >> i) & 1:
            i += 1
        e -= 2.0 * z[i] * loc[i]
        z[i] = -z[i]
        dz = 2.0 * z[i]
        for j in range(n):
            loc[j] += Jsym[j, i] * dz
        out[k ^ (k >> 1)] = e


def energy_diagonal(sg: SpinGlass) -> np.ndarray:
    """All 2^n basis energies via an O(n 2^n) Gray-code walk."""
    if sg.n > MAX_BRUTE_FORCE_QUBITS:
        raise ValueError(f"n={sg.n} exceeds enumeration bound {MAX_BRUTE_FORCE_QUBITS}")
    out = np.empty(1 << sg.n)
    _gray_fill(sg.h, np.ascontiguousarray(sg.J_sym), out)
    return out


@numba.njit(cache=True)
def _popcount_sums(diag, n, B):
    s_all = 0.0
    s_feas = 0.0
    cnt = 0
    for k in range(diag.size):
        s_all += diag[k]
        w = 0
        m = k
        while m:
            m &= m - 1
            w += 1
        if w == B:
            s_feas += diag[k]
            cnt += 1
    return s_all, s_feas, cnt


@dataclass(frozen=True)
class SpectrumSummary:
    n: int
    E_min: float
    E_max: float
    E_avg_uniform: float
    argmin_set: tuple  # basis indices
    E_avg_feasible: float | None = None
    budget: int | None = None

    def argmin_bitstrings(self) -> list[str]:
        return [bitstring(k, self.n) for k in self.argmin_set]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "E_min": self.E_min,
            "E_max": self.E_max,
            "E_avg_uniform": self.E_avg_uniform,
            "E_avg_feasible": self.E_avg_feasible,
            "budget": self.budget,
            "argmin": self.argmin_bitstrings(),
        }


def brute_force_spectrum(sg: SpinGlass, B: int | None = None, rtol: float = 1e-9) -> SpectrumSummary:
    """Exhaustive scan of the diagonal Hamiltonian.

    Degenerate minima (within ``rtol`` of the energy scale) are all returned.
    The uniform average is computed from the data rather than assumed zero,
    so it doubles as a tracelessness check.
    """
    if sg.n > MAX_BRUTE_FORCE_QUBITS:
        raise ValueError(f"n={sg.n} exceeds enumeration bound {MAX_BRUTE_FORCE_QUBITS}")
    if B is not None and not (0 <= B <= sg.n):
        raise ValueError(f"budget {B} outside [0, {sg.n}]")
    diag = sg.__dict__.get("diagonal")
    if diag is None:
        diag = energy_diagonal(sg)
    e_min = float(diag.min())
    e_max = float(diag.max())
    scale = max(1.0, np.abs(sg.h).sum() + np.abs(sg.J).sum())
    argmin = tuple(int(k) for k in np.flatnonzero(diag <= e_min + rtol * scale))
    s_all, s_feas, cnt = _popcount_sums(diag, sg.n, -1 if B is None else B)
    feas = None
    if B is not None:
        assert cnt == comb(sg.n, B)
        feas = s_feas / cnt
    return SpectrumSummary(sg.n, e_min, e_max, s_all / diag.size, argmin, feas, B)


def random_spin_glass(n: int, seed: int) -> SpinGlass:
    """All-to-all instance with i.i.d. standard-normal fields and couplings."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(n)
    J = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    J[iu] = rng.standard_normal(len(iu[0]))
    return SpinGlass(h, J)


def feasible_indices(n: int, B: int) -> np.ndarray:
    ks = np.arange(1 << n)
    w = np.zeros_like(ks)
    for i in range(n):
        w += (ks >> i) & 1
    return ks[w == B]
