"""Hybrid loop: parameter binding, cost evaluation, and a derivative-free minimizer.

:func:`minimize` is an unconstrained COBYLA-style method. It keeps n+1
interpolation points, fits the linear model through them, steps to the edge
of a trust region of radius ``rho`` along the model's descent direction, and
halves ``rho`` when the model stops predicting progress. A geometry step
replaces a vertex whenever the simplex degenerates. ``max_iter`` caps the
number of objective evaluations, initial simplex included.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .circuit import Ansatz, bind
from .ising import SpinGlass
from .simulator import expectation, run, sample


class NonFiniteCostError(FloatingPointError):
    def __init__(self, msg, trace):
        super().__init__(msg)
        self.trace = trace


@dataclass
class Objective:
    """<H_f> of a bound ansatz, with an evaluation trace.

    ``shots=None`` evaluates the exact statevector expectation; otherwise the
    cost is the shot-mean energy with evaluation ``k`` drawn from
    ``default_rng([seed, k])``.
    """

    ansatz: Ansatz
    sg: SpinGlass
    shots: int | None = None
    seed: int = 0
    trace: list = field(default_factory=list)

    @property
    def evaluations(self) -> int:
        return len(self.trace)

    @property
    def mode(self) -> str:
        return "statevector" if self.shots is None else "sampled"

    def __call__(self, params) -> float:
        params = np.array(params, dtype=float)
        psi = run(bind(self.ansatz, params))
        if self.shots is None:
            cost = expectation(self.sg, psi)
        else:
            counts = sample(psi, self.shots, seed=np.random.SeedSequence([self.seed, len(self.trace)]).generate_state(1)[0])
            cost = counts.mean_energy(self.sg)
        self.trace.append((params, float(cost)))
        return float(cost)

    def trace_csv(self) -> str:
        return trace_to_csv(self.trace)


def trace_to_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    npar = len(trace[0][0]) if trace else 0
    w.writerow(["iteration", *[f"p{i}" for i in range(npar)], "cost"])
    for k, (p, c) in enumerate(trace):
        w.writerow([k, *map(repr, map(float, p)), repr(c)])
    return buf.getvalue()


@dataclass
class OptResult:
    x: np.ndarray
    fun: float
    evaluations: int
    trace: list

    def best_so_far(self) -> np.ndarray:
        return np.minimum.accumulate([c for _, c in self.trace])


def minimize(fun: Callable[[np.ndarray], float], x0, max_iter: int = 200,
             rho_begin: float = 0.25, rho_end: float = 1e-6) -> OptResult:
    """Minimize ``fun`` without derivatives, using at most ``max_iter`` evaluations."""
    x0 = np.array(x0, dtype=float).reshape(-1)
    n = x0.size
    if n == 0:
        raise ValueError("empty parameter vector")
    if max_iter < 1:
        raise ValueError("max_iter must be positive")
    trace = []

    def f(x):
        v = float(fun(x))
        trace.append((np.array(x), v))
        if not np.isfinite(v):
            raise NonFiniteCostError(f"non-finite cost {v} at {x}", trace)
        return v

    def done():
        return len(trace) >= max_iter

    def result():
        k = int(np.argmin([c for _, c in trace]))
        return OptResult(trace[k][0].copy(), trace[k][1], len(trace), trace)

    rho = float(rho_begin)
    pts = [x0.copy()]
    vals = [f(x0)]
    for i in range(n):
        if done():
            return result()
        p = x0.copy()
        p[i] += rho
        pts.append(p)
        vals.append(f(p))
    pts = np.array(pts)
    vals = np.array(vals)

    while not done() and rho > rho_end:
        b = int(np.argmin(vals))
        others = [k for k in range(n + 1) if k != b]
        D = pts[others] - pts[b]
        dist = np.linalg.norm(D, axis=1)
        sv = np.linalg.svd(D / rho, compute_uv=False)

        # geometry: vertices far from the incumbent or a flattened simplex
        far = int(np.argmax(dist))
        if dist[far] > 2.0 * rho or sv[-1] < 0.25:
            j = others[far] if dist[far] > 2.0 * rho else others[_flattest(D)]
            rest = [k for k in others if k != j]
            direction = _orthogonal_direction(pts[rest] - pts[b], n)
            g = np.linalg.lstsq(D, vals[others] - vals[b], rcond=None)[0]
            # orient the new vertex downhill on the current model
            if direction @ g > 0:
                direction = -direction
            pts[j] = pts[b] + rho * direction
            vals[j] = f(pts[j])
            continue

        g = np.linalg.solve(D, vals[others] - vals[b])
        gn = np.linalg.norm(g)
        if gn == 0:
            rho *= 0.5
            continue
        step = -rho * g / gn
        trial = pts[b] + step
        ft = f(trial)
        predicted = rho * gn
        actual = vals[b] - ft

        # |bary[k]| is the volume ratio if vertex k is swapped for the trial point
        bary = np.linalg.solve(np.vstack([pts.T, np.ones(n + 1)]), np.append(trial, 1.0))
        if ft < vals[b]:
            score = np.abs(bary) * np.maximum(1.0, np.linalg.norm(pts - trial, axis=1) / rho) ** 2
            j = int(np.argmax(score))
        else:
            cand = [k for k in others if ft < vals[k] and abs(bary[k]) > 0.1]
            j = max(cand, key=lambda k: vals[k]) if cand else None
        if j is not None:
            pts[j] = trial
            vals[j] = ft
        if actual < 0.1 * predicted:
            rho *= 0.5
    return result()


def _flattest(D: np.ndarray) -> int:
    """Row of D whose removal leaves the best-conditioned set (the most redundant edge)."""
    best, best_k = -1.0, 0
    for k in range(D.shape[0]):
        rest = np.delete(D, k, axis=0)
        if rest.size == 0:
            return k
        s = np.linalg.svd(rest, compute_uv=False)
        q = s[-1] / s[0] if s[0] > 0 else 0.0
        if q > best:
            best, best_k = q, k
    return best_k


def _orthogonal_direction(E: np.ndarray, n: int) -> np.ndarray:
    """Unit vector orthogonal to the rows of E (n-1 edge vectors)."""
    if E.shape[0] == 0:
        v = np.zeros(n)
        v[0] = 1.0
        return v
    _, _, vt = np.linalg.svd(E, full_matrices=True)
    return vt[-1]


def optimize_ansatz(ansatz: Ansatz, sg: SpinGlass, init=None, max_iter: int = 200,
                    shots: int | None = None, seed: int = 0, starts: int = 1,
                    rho_begin: float = 0.25) -> tuple[OptResult, Objective]:
    """Train ``ansatz`` on ``sg``; additional starts perturb the first point.

    Without ``init`` the ansatz's own initial parameters are used, falling back
    to uniform draws in (-0.1, 0.1) from ``seed``.
    """
    rng = np.random.default_rng(seed)
    if init is None:
        init = ansatz.initial if ansatz.initial is not None else rng.uniform(-0.1, 0.1, ansatz.n_params)
    init = np.asarray(init, dtype=float)
    if init.size != ansatz.n_params:
        raise ValueError(f"init has {init.size} entries, ansatz needs {ansatz.n_params}")
    best = None
    best_obj = None
    for s in range(max(1, starts)):
        x0 = init if s == 0 else init + rng.uniform(-0.5, 0.5, init.size)
        obj = Objective(ansatz, sg, shots, seed)
        res = minimize(obj, x0, max_iter=max_iter, rho_begin=rho_begin)
        if best is None or res.fun < best.fun:
            best, best_obj = res, obj
    return best, best_obj
