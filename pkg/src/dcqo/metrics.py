"""Mean-based approximation ratio, energy histograms, run reports and comparison tables."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .ising import SpinGlass
from .simulator import ShotCounts, StateVector

REPORT_SCHEMA = "dcqo.run_report/1"


class DegenerateSpectrumError(ValueError):
    pass


def approximation_ratio(E: float, E_avg: float, E_min: float) -> float:
    """(E_avg - E) / (E_avg - E_min); not clamped, so values <= 0 are possible."""
    if not E_avg > E_min:
        raise DegenerateSpectrumError(f"E_avg={E_avg} must exceed E_min={E_min}")
    return (E_avg - E) / (E_avg - E_min)


def spectral_width_ratio(E: float, E_min: float, E_max: float) -> float:
    """Alternative (E_max - E) / (E_max - E_min), for comparison tables only."""
    if not E_max > E_min:
        raise DegenerateSpectrumError("flat spectrum")
    return (E_max - E) / (E_max - E_min)


def _merge_levels(energies: np.ndarray, weights: np.ndarray, tol: float):
    order = np.argsort(energies, kind="stable")
    e, w = energies[order], weights[order]
    out_e, out_w = [], []
    for ek, wk in zip(e, w):
        if out_e and ek - out_e[-1][0] <= tol:
            out_e[-1].append(ek)
            out_w[-1] += wk
        else:
            out_e.append([ek])
            out_w.append(wk)
    return [(float(grp[0]), float(wt)) for grp, wt in zip(out_e, out_w)]


def energy_histogram(source: StateVector | ShotCounts, sg: SpinGlass, rtol: float = 1e-9) -> list[tuple[float, float]]:
    """Weight per distinct energy level, ascending.

    Weights are probabilities (statevector) or counts (shots). Energies that
    agree to ``rtol`` times the coefficient scale are merged into one level,
    reported at the level's lowest member.
    """
    tol = rtol * max(1.0, np.abs(sg.h).sum() + np.abs(sg.J).sum())
    diag = sg.diagonal
    if isinstance(source, StateVector):
        p = source.probabilities
        keep = np.flatnonzero(p > 0)
        return _merge_levels(diag[keep], p[keep], tol)
    idx = source.index_counts()
    ks = np.fromiter(idx.keys(), dtype=np.int64, count=len(idx))
    ws = np.fromiter(idx.values(), dtype=float, count=len(idx))
    return _merge_levels(diag[ks], ws, tol)


def bin_histogram(hist, bins: int = 50, lo: float | None = None, hi: float | None = None):
    """Uniform binning of an exact-level histogram for display: (centers, weights)."""
    e = np.array([x for x, _ in hist])
    w = np.array([y for _, y in hist])
    lo = e.min() if lo is None else lo
    hi = e.max() if hi is None else hi
    weights, edges = np.histogram(e, bins=bins, range=(lo, hi), weights=w)
    return (edges[:-1] + edges[1:]) / 2, weights


def histogram_csv(hist) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["energy", "weight"])
    for e, wt in hist:
        w.writerow([repr(e), repr(wt)])
    return buf.getvalue()


@dataclass
class RunReport:
    method: str
    n: int
    config: dict
    E: float  # exact <H_f>, offset excluded
    E_min: float
    E_avg: float  # of the primary search set
    search_set: str  # "uniform" or "feasible-B"
    r_avg: float
    stats: dict
    histogram: list
    E_shot_mean: float | None = None
    shots: int | None = None
    sample_seed: int | None = None
    E_max: float | None = None
    E_avg_uniform: float | None = None
    E_avg_feasible: float | None = None
    offset: float = 0.0
    ratios: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def payload(self) -> dict:
        d = asdict(self)
        d.pop("timing")
        d["schema"] = REPORT_SCHEMA
        return d

    def payload_sha256(self) -> str:
        blob = json.dumps(self.payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_dict(self) -> dict:
        d = self.payload()
        d["payload_sha256"] = self.payload_sha256()
        d["timing"] = dict(self.timing)
        return d

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        d = dict(d)
        schema = d.pop("schema", REPORT_SCHEMA)
        if schema != REPORT_SCHEMA:
            raise ValueError(f"unsupported report schema {schema!r}")
        d.pop("payload_sha256", None)
        return cls(**d)

    def check(self, tol: float = 1e-9) -> None:
        """Raise if the stored ratio disagrees with the stored energies."""
        expected = approximation_ratio(self.E, self.E_avg, self.E_min)
        if abs(expected - self.r_avg) > tol * max(1.0, abs(expected)):
            raise ValueError(f"r_avg={self.r_avg} inconsistent with energies (expected {expected})")
        total = sum(w for _, w in self.histogram)
        target = self.shots if self.histogram_source == "shots" else 1.0
        if abs(total - target) > 1e-6 * max(1.0, target):
            raise ValueError(f"histogram total {total} != {target}")

    @property
    def histogram_source(self) -> str:
        return self.extras.get("histogram_source", "statevector")


COLUMNS = ("method", "steps_or_layers", "two_qubit", "depth", "r_avg")


def compare(reports: list[RunReport]) -> dict:
    """Aligned comparison rows; ``depth_ratio`` is relative to the first report."""
    rows = []
    base = reports[0].stats.get("depth") if reports else None
    for rep in reports:
        cfg = rep.config
        row = {
            "method": rep.method,
            "n": rep.n,
            "steps_or_layers": cfg.get("p") if rep.method in ("qaoa", "dcqaoa", "hdcqo") else rep.extras.get("steps"),
            "two_qubit": rep.stats.get("two_qubit_count"),
            "depth": rep.stats.get("depth"),
            "r_avg": rep.r_avg,
        }
        if base:
            row["depth_ratio"] = row["depth"] / base
        rows.append(row)
    return {"rows": rows, "text": format_table(rows)}


def format_table(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0].keys())

    def fmt(v):
        if isinstance(v, float):
            return f"{v:.4f}"
        return "-" if v is None else str(v)

    cells = [[fmt(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[k]) for row in cells)) for k, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines)


def rows_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    return buf.getvalue()
