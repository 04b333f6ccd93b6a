"""Scheduling function, first-order counterdiabatic coefficient, and impulse-step selection.

The closed form for the first-order nested-commutator coefficient is

    alpha1(lam) = -(1/4) (S_h2 + S_J2) / R(lam)
    R(lam) = (1-lam)^2 (S_h2 + 4 S_J2)
             + lam^2 (S_h4 + S_J4 + 6 S_hJ + 6 S_3)

with every coupling sum taken over *ordered* pairs i != j
(``S_J2 = sum_{i!=j} J_ij^2 = 2 sum_{i<j} J_ij^2``, likewise ``S_J4`` and
``S_hJ = sum_{i!=j} h_i^2 J_ij^2``) and ``S_3`` over unordered triples i<j<k.
That convention is the one reproduced by the dense nested-commutator
computation ``-||O1||^2 / ||O2||^2`` with ``||A||^2 = Tr(A^dag A) / 2^n``; the
numerator in particular needs the ordered-pair sum.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from math import pi

import numpy as np

from .ising import SpinGlass


class DegenerateInstanceError(ValueError):
    pass


def _check_time(t, T):
    if T <= 0:
        raise ValueError(f"total time T={T} must be positive")
    t = np.asarray(t, dtype=float)
    if np.any(t < -1e-12 * T) or np.any(t > T * (1 + 1e-12)):
        raise ValueError(f"t outside [0, T={T}]")
    return np.clip(t, 0.0, T)


def lam(t, T):
    """lambda(t) = sin^2[(pi/2) sin^2(pi t / 2T)]."""
    t = _check_time(t, T)
    return np.sin(pi / 2 * np.sin(pi * t / (2 * T)) ** 2) ** 2


def lam_dot(t, T):
    """Analytic d lambda / dt = (pi^2 / 4T) sin(2u) sin(2v), u = (pi/2) sin^2 v, v = pi t / 2T."""
    t = _check_time(t, T)
    v = pi * t / (2 * T)
    u = pi / 2 * np.sin(v) ** 2
    return pi * pi / (4 * T) * np.sin(2 * u) * np.sin(2 * v)


@dataclass(frozen=True)
class CdMoments:
    """Coefficient sums entering alpha1, precomputed once per instance."""

    h2: float
    J2: float
    h4: float
    J4: float
    hJ: float
    tri: float

    @classmethod
    def of(cls, sg: SpinGlass) -> "CdMoments":
        h2v = sg.h**2
        Q = sg.J_sym**2
        rows = Q.sum(axis=1)
        return cls(
            h2=float(h2v.sum()),
            J2=float(Q.sum()),
            h4=float((h2v**2).sum()),
            J4=float((Q**2).sum()),
            hJ=float(h2v @ rows),
            tri=float(0.5 * (rows**2 - (Q**2).sum(axis=1)).sum()),
        )

    def R(self, lam_value):
        a = self.h2 + 4 * self.J2
        b = self.h4 + self.J4 + 6 * self.hJ + 6 * self.tri
        return (1 - lam_value) ** 2 * a + lam_value**2 * b

    def alpha1(self, lam_value):
        lam_value = np.asarray(lam_value, dtype=float)
        if np.any(lam_value < 0) or np.any(lam_value > 1):
            raise ValueError("lambda must lie in [0, 1]")
        r = self.R(lam_value)
        if np.any(r <= 0):
            raise DegenerateInstanceError("R(lambda) vanishes: all-zero instance has no CD term")
        return -0.25 * (self.h2 + self.J2) / r


def alpha1(sg: SpinGlass, lam_value):
    return CdMoments.of(sg).alpha1(lam_value)


def cd_weight(sg: SpinGlass, t, T, moments: CdMoments | None = None):
    """Signed CD weight lambda_dot(t) * alpha1(lambda(t)) and its magnitude."""
    m = moments or CdMoments.of(sg)
    w = lam_dot(t, T) * m.alpha1(lam(t, T))
    return w, np.abs(w)


@dataclass(frozen=True)
class Schedule:
    T: float = 0.7
    dt: float = 0.1

    def __post_init__(self):
        if not (self.T > 0 and self.dt > 0):
            raise ValueError(f"need T > 0 and dt > 0, got T={self.T}, dt={self.dt}")
        if round(self.T / self.dt) < 1:
            raise ValueError(f"T={self.T} shorter than one step dt={self.dt}")

    @classmethod
    def from_steps(cls, N: int, dt: float = 0.1) -> "Schedule":
        return cls(T=N * dt, dt=dt)

    @property
    def N(self) -> int:
        return int(round(self.T / self.dt))

    def times(self) -> np.ndarray:
        """Right endpoints t_m = m dt, m = 1..N (clipped to T)."""
        return np.minimum(np.arange(1, self.N + 1) * self.dt, self.T)


@dataclass(frozen=True, eq=False)
class CdProfile:
    schedule: Schedule
    t: np.ndarray
    lam: np.ndarray
    lam_dot: np.ndarray
    alpha1: np.ndarray
    selected: np.ndarray  # bool per step

    @property
    def weight(self) -> np.ndarray:
        return self.lam_dot * self.alpha1

    @property
    def cd_strength(self) -> np.ndarray:
        """g_m = -2 lambda_dot alpha1, the coefficient multiplying the CD Pauli terms."""
        return -2.0 * self.weight

    def with_selection(self, indices) -> "CdProfile":
        sel = np.zeros(len(self.t), dtype=bool)
        sel[list(indices)] = True
        return CdProfile(self.schedule, self.t, self.lam, self.lam_dot, self.alpha1, sel)

    def selected_indices(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.selected)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "t", "lambda", "lambda_dot", "alpha1", "weight", "selected"])
        for m in range(len(self.t)):
            w.writerow([
                m + 1,
                repr(float(self.t[m])),
                repr(float(self.lam[m])),
                repr(float(self.lam_dot[m])),
                repr(float(self.alpha1[m])),
                repr(float(self.weight[m])),
                int(self.selected[m]),
            ])
        return buf.getvalue()


def cd_profile(sg: SpinGlass, sched: Schedule) -> CdProfile:
    """Tabulate the schedule at the step endpoints; every step starts selected."""
    t = sched.times()
    lv = lam(t, sched.T)
    ld = lam_dot(t, sched.T)
    a = CdMoments.of(sg).alpha1(lv)
    return CdProfile(sched, t, lv, ld, a, np.ones(len(t), dtype=bool))


def select_impulse_steps(profile: CdProfile, keep: int | None = None,
                         min_weight_fraction: float | None = None) -> list[int]:
    """Indices (0-based, ascending) of the steps where the CD term matters most.

    Exactly one of ``keep`` (top-p by |lambda_dot alpha1|; weights equal to
    12 significant digits tie, and ties go to the earlier step) or
    ``min_weight_fraction`` (all steps with |w| >= fraction * max|w|) must be
    given.
    """
    if (keep is None) == (min_weight_fraction is None):
        raise ValueError("give exactly one of keep or min_weight_fraction")
    mag = np.abs(profile.weight)
    N = len(mag)
    if keep is not None:
        if not (1 <= keep <= N):
            raise ValueError(f"keep={keep} must be within [1, {N}]")
        # weights equal to 12 significant digits count as tied (mirror-symmetric schedules)
        top = mag.max()
        rel = np.round(mag / top, 12) if top > 0 else mag
        order = sorted(range(N), key=lambda m: (-rel[m], m))
        chosen = order[:keep]
    else:
        if not (0 < min_weight_fraction <= 1):
            raise ValueError("min_weight_fraction must be in (0, 1]")
        top = mag.max()
        if top == 0:
            raise ValueError("empty selection: CD weight vanishes at every step")
        chosen = [m for m in range(N) if mag[m] >= min_weight_fraction * top * (1 - 1e-12)]
    if not chosen:
        raise ValueError("empty selection")
    return sorted(chosen)


def classify_regimes(profile: CdProfile, impulse_fraction=0.5, adiabatic_fraction=0.1) -> list[str]:
    """Label each step impulse / intermediate / adiabatic by relative CD weight.

    Thresholds are fractions of the peak |w|; the boundaries are qualitative.
    """
    mag = np.abs(profile.weight)
    top = mag.max() if mag.size else 0.0
    out = []
    for v in mag:
        if top > 0 and v >= impulse_fraction * top:
            out.append("impulse")
        elif top > 0 and v >= adiabatic_fraction * top:
            out.append("intermediate")
        else:
            out.append("adiabatic")
    return out
