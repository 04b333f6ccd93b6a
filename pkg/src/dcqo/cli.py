"""Command-line runner.

    dcqo solve      build or train one method on one problem, write a report
    dcqo benchmark  depth-matched adiabatic / cd / cd-only batch
    dcqo profile    CD schedule table (lambda, lambda_dot, alpha1, weight)
    dcqo transpile  rewrite a circuit into GPI / GPI2 / MS
    dcqo spectrum   brute-force energy summary

Settings come from an optional JSON file (``--config``); any flag given on
the command line overrides the file. Outputs go to ``--output-dir``, else
``$DCQO_OUTPUT_DIR``, else ``./dcqo_out``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .circuit import Circuit
from .ising import PortfolioProblem, SpinGlass, brute_force_spectrum, portfolio_to_spin_glass, random_spin_glass
from .marketdata import estimate_model, load_prices, sample_prices_path
from .metrics import format_table, histogram_csv, rows_csv
from .protocols import METHODS, RunSettings, depth_matched_benchmark, realize, solve, summarize
from .schedule import Schedule, cd_profile, classify_regimes
from .transpile import transpile_circuit, verify_equivalence

OUTPUT_ENV = "DCQO_OUTPUT_DIR"
DEFAULT_OUTPUT = "dcqo_out"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    # problem source: "random", "csv" (portfolio from prices) or "spinglass" (JSON file)
    source: str = "random"
    n: int = 8
    seed: int = 0
    csv: str | None = None  # None with source=csv: bundled sample prices
    spinglass: str | None = None
    theta: list = field(default_factory=lambda: [1.0, 0.5, 2.0])
    budget: int | None = None  # default n // 2 for portfolios
    search_set: str = "uniform"
    # method
    method: str = "cd-only"
    T: float = 0.7
    dt: float = 0.1
    steps: int | None = None
    cutoff: float = 0.1
    keep: int | None = None
    p: int = 1
    shots: int = 5000
    sample_seed: int = 0
    max_iter: int = 200
    starts: int = 1
    opt_seed: int = 0
    # benchmark batch
    instances: int = 10
    n_min: int = 6
    n_max: int = 10
    # io
    output_dir: str | None = None
    emit_native: bool = False
    jobs: int = 1

    def validate(self) -> list[tuple[str, str]]:
        errs = []
        if self.source not in ("random", "csv", "spinglass"):
            errs.append(("source", "must be random, csv or spinglass"))
        if self.source == "spinglass" and not self.spinglass:
            errs.append(("spinglass", "path required when source is spinglass"))
        if self.method not in METHODS:
            errs.append(("method", f"must be one of {', '.join(METHODS)}"))
        if self.n < 1:
            errs.append(("n", "must be >= 1"))
        if len(self.theta) != 3 or any(t < 0 for t in self.theta):
            errs.append(("theta", "needs three nonnegative weights"))
        if self.budget is not None and self.budget < 1:
            errs.append(("budget", "must be >= 1"))
        if self.search_set not in ("uniform", "feasible"):
            errs.append(("search_set", "must be uniform or feasible"))
        if not (self.T > 0 and self.dt > 0):
            errs.append(("T" if self.T <= 0 else "dt", "must be positive"))
        if self.steps is not None and self.steps < 1:
            errs.append(("steps", "must be >= 1"))
        if self.cutoff < 0:
            errs.append(("cutoff", "must be >= 0"))
        if self.p < 1:
            errs.append(("p", "must be >= 1"))
        if self.shots < 0:
            errs.append(("shots", "must be >= 0"))
        if self.max_iter < 1:
            errs.append(("max_iter", "must be >= 1"))
        if self.jobs < 1:
            errs.append(("jobs", "must be >= 1"))
        if not (1 <= self.n_min <= self.n_max):
            errs.append(("n_min", "need 1 <= n_min <= n_max"))
        return errs

    def settings(self) -> RunSettings:
        return RunSettings(method=self.method, T=self.T, dt=self.dt, steps=self.steps, cutoff=self.cutoff,
                           keep=self.keep, p=self.p, shots=self.shots, sample_seed=self.sample_seed,
                           max_iter=self.max_iter, starts=self.starts, opt_seed=self.opt_seed)

    def output_path(self) -> Path:
        return Path(self.output_dir or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)


FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def _line_of(text: str, key: str) -> int | None:
    for k, line in enumerate(text.splitlines(), 1):
        if f'"{key}"' in line:
            return k
    return None


def load_config(path) -> tuple[dict, str]:
    """Parse a JSON config file; unknown keys are errors reported with their line."""
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1: top level must be an object")
    for key in data:
        if key not in FIELD_NAMES:
            raise ConfigError(f"{path}:{_line_of(text, key)}: unknown key {key!r}")
    return data, text


def build_config(file_values: dict, overrides: dict, source_text: str = "", source_name: str = "<flags>") -> ExperimentConfig:
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(f"{source_name}: {exc}") from None
    errs = cfg.validate()
    if errs:
        lines = []
        for key, msg in errs:
            where = "flag" if key in overrides and overrides[key] is not None else _line_of(source_text, key)
            lines.append(f"{source_name}:{where if where is not None else '-'}: {key}: {msg}")
        raise ConfigError("\n".join(lines))
    return cfg


# problem construction ----------------------------------------------------------


def load_problem(cfg: ExperimentConfig) -> tuple[SpinGlass, dict, int | None, PortfolioProblem | None]:
    """(spin glass, provenance, budget, portfolio or None)."""
    if cfg.source == "random":
        return random_spin_glass(cfg.n, cfg.seed), {"source": "random", "n": cfg.n, "seed": cfg.seed}, cfg.budget, None
    if cfg.source == "spinglass":
        sg = SpinGlass.from_json(Path(cfg.spinglass).read_text())
        return sg, {"source": "spinglass", "path": str(cfg.spinglass)}, cfg.budget, None
    path = Path(cfg.csv) if cfg.csv else sample_prices_path()
    pt = load_prices(path)
    e, c = estimate_model(pt)
    n = len(pt.tickers)
    B = cfg.budget if cfg.budget is not None else n // 2
    if B > n:
        raise ConfigError(f"budget {B} exceeds the number of assets {n}")
    prob = PortfolioProblem(e, c, B, *cfg.theta, tickers=pt.tickers)
    prov = {"source": "csv", "path": path.name, "assets": n, "rows": len(pt.dates),
            "dropped_rows": pt.dropped_rows, "budget": B, "theta": list(cfg.theta)}
    return portfolio_to_spin_glass(prob), prov, B, prob


def _stem(cfg: ExperimentConfig, sg: SpinGlass) -> str:
    return f"{cfg.method}-n{sg.n}-{cfg.source}" + (f"-s{cfg.seed}" if cfg.source == "random" else "")


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


# subcommands -------------------------------------------------------------------


def cmd_solve(cfg: ExperimentConfig, out=None) -> dict:
    out = out or sys.stdout
    sg, prov, budget, prob = load_problem(cfg)
    if budget is not None and budget > sg.n:
        raise ConfigError(f"budget {budget} exceeds n={sg.n}")
    s = cfg.settings()
    config = {"problem": prov, "settings": s.describe(), "search_set": cfg.search_set}
    real = realize(sg, s)
    report = solve(sg, s, budget=budget, search_set=cfg.search_set, config=config, realized=real)
    if prob is not None:
        report.extras["tickers"] = list(prob.tickers)
    report.check()
    outdir = cfg.output_path()
    stem = _stem(cfg, sg)
    written = {
        "report": _write(outdir / f"{stem}.report.json", report.to_json() + "\n"),
        "histogram": _write(outdir / f"{stem}.histogram.csv", histogram_csv(report.histogram)),
    }
    if cfg.emit_native:
        written["native"] = _write(outdir / f"{stem}.native.txt", transpile_circuit(real.circuit).to_text())
    line = f"{report.method} n={report.n} E={report.E:.6g} E_min={report.E_min:.6g} r_avg={report.r_avg:.4f}"
    if "surviving_steps" in report.extras:
        line += f" steps={report.extras['steps']} surviving={report.extras['surviving_steps']}"
    line += f" two_qubit={report.stats['two_qubit_count']} depth={report.stats['depth']}"
    print(line, file=out)
    for k, p in written.items():
        print(f"  {k}: {p}", file=out)
    return {"report": report, "paths": written}


def cmd_benchmark(cfg: ExperimentConfig, out=None) -> dict:
    out = out or sys.stdout
    instances = [(cfg.n_min + k % (cfg.n_max - cfg.n_min + 1), cfg.seed + k) for k in range(cfg.instances)]
    rows = depth_matched_benchmark(instances, dt=cfg.dt, jobs=cfg.jobs)
    per_method = summarize(rows, ("method",))
    per_n = summarize(rows, ("n", "method"))
    base = next(r["mean_r"] for r in per_method if r["method"] == "adiabatic")
    for r in per_method:
        r["ratio_to_adiabatic"] = r["mean_r"] / base if base else None
    outdir = cfg.output_path()
    paths = {
        "rows": _write(outdir / "benchmark.rows.csv", rows_csv(rows)),
        "summary": _write(outdir / "benchmark.summary.json",
                          json.dumps({"per_method": per_method, "per_n": per_n}, indent=2, sort_keys=True) + "\n"),
    }
    print(format_table(per_method), file=out)
    for k, p in paths.items():
        print(f"  {k}: {p}", file=out)
    return {"rows": rows, "per_method": per_method, "per_n": per_n, "paths": paths}


def cmd_profile(cfg: ExperimentConfig, out=None) -> dict:
    out = out or sys.stdout
    sg, _, _, _ = load_problem(cfg)
    sched = Schedule.from_steps(cfg.steps, cfg.dt) if cfg.steps else Schedule(cfg.T, cfg.dt)
    prof = cd_profile(sg, sched)
    text = prof.to_csv()
    path = _write(cfg.output_path() / f"profile-n{sg.n}-{cfg.source}.csv", text)
    regimes = classify_regimes(prof)
    print(text, end="", file=out)
    print("regimes: " + " ".join(regimes), file=out)
    return {"profile": prof, "path": path, "regimes": regimes}


def cmd_transpile(cfg: ExperimentConfig, circuit_path: str | None = None, verify: bool = False, out=None) -> dict:
    out = out or sys.stdout
    if circuit_path:
        c = Circuit.from_text(Path(circuit_path).read_text())
        stem = Path(circuit_path).stem
    else:
        sg, _, _, _ = load_problem(cfg)
        c = realize(sg, cfg.settings()).circuit
        stem = _stem(cfg, sg)
    nc = transpile_circuit(c)
    path = _write(cfg.output_path() / f"{stem}.native.txt", nc.to_text())
    res = {"native": nc, "path": path, "counts": nc.counts()}
    print(f"logical gates {len(c)} -> native {len(nc)} "
          f"(1q {res['counts']['one_qubit_native']}, 2q {res['counts']['two_qubit_native']})", file=out)
    if verify:
        eq = verify_equivalence(c, nc)
        res["equivalence"] = eq
        print(f"equal up to phase: {eq.equal_up_to_phase} (overlap {eq.overlap:.12f}, deviation {eq.deviation:.2e})", file=out)
    print(f"  native: {path}", file=out)
    return res


def cmd_spectrum(cfg: ExperimentConfig, out=None) -> dict:
    out = out or sys.stdout
    sg, prov, budget, _ = load_problem(cfg)
    spec = brute_force_spectrum(sg, B=budget)
    d = {"problem": prov, "offset": sg.offset, **spec.to_dict()}
    path = _write(cfg.output_path() / f"spectrum-n{sg.n}-{cfg.source}.json", json.dumps(d, indent=2) + "\n")
    print(json.dumps(d, indent=2), file=out)
    return {"spectrum": spec, "path": path}


# argument parsing --------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    # every default is None so that unset flags never shadow config values
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--source", choices=["random", "csv", "spinglass"])
    p.add_argument("--n", type=int, help="qubits for random instances")
    p.add_argument("--seed", type=int, help="instance seed (random source)")
    p.add_argument("--csv", help="price CSV (default: bundled sample)")
    p.add_argument("--spinglass", help="spin-glass JSON file")
    p.add_argument("--theta", type=float, nargs=3, metavar=("RETURN", "RISK", "BUDGET"))
    p.add_argument("--budget", type=int, help="assets to select (default n//2)")
    p.add_argument("--search-set", dest="search_set", choices=["uniform", "feasible"])
    p.add_argument("--method", choices=list(METHODS))
    p.add_argument("--T", dest="T", type=float, help="total evolution time")
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int, help="number of Trotter steps (overrides T)")
    p.add_argument("--cutoff", type=float, help="angle pruning threshold for cd-only")
    p.add_argument("--keep", type=int, help="cd-only: keep only the top-k impulse steps")
    p.add_argument("--p", dest="p", type=int, help="variational layers")
    p.add_argument("--shots", type=int, help="0 disables sampling")
    p.add_argument("--sample-seed", dest="sample_seed", type=int)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--starts", type=int)
    p.add_argument("--opt-seed", dest="opt_seed", type=int)
    p.add_argument("--instances", type=int)
    p.add_argument("--n-min", dest="n_min", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--output-dir", "-o", dest="output_dir", help=f"default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT}")
    p.add_argument("--emit-native", dest="emit_native", action="store_const", const=True,
                   help="also write the circuit transpiled to GPI/GPI2/MS")
    p.add_argument("--jobs", "-j", type=int, help="parallel worker processes for batches")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcqo", description="Digitized counterdiabatic optimization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("solve", "run one method on one problem"),
                        ("benchmark", "depth-matched batch over random instances"),
                        ("profile", "tabulate the CD schedule"),
                        ("transpile", "rewrite a circuit into native trapped-ion gates"),
                        ("spectrum", "brute-force spectrum summary")]:
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name == "transpile":
            p.add_argument("--circuit", help="circuit text file (default: build from the config)")
            p.add_argument("--verify", action="store_true", help="check unitary equivalence (small n)")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    file_values, text, name = {}, "", "<flags>"
    if args.config:
        file_values, text = load_config(args.config)
        name = args.config
    overrides = {k: getattr(args, k, None) for k in FIELD_NAMES}
    if overrides.get("theta") is not None:
        overrides["theta"] = list(overrides["theta"])
    if args.command == "benchmark" and "method" not in file_values and overrides.get("method") is None:
        overrides["method"] = "cd-only"
    return build_config(file_values, overrides, text, name)


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "solve":
            cmd_solve(cfg)
        elif args.command == "benchmark":
            cmd_benchmark(cfg)
        elif args.command == "profile":
            cmd_profile(cfg)
        elif args.command == "transpile":
            cmd_transpile(cfg, args.circuit, args.verify)
        else:
            cmd_spectrum(cfg)
    except (ConfigError, ValueError, OSError, FloatingPointError) as exc:
        print(f"dcqo {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


def config_schema() -> dict:
    """Field names with their defaults, for documentation."""
    return asdict(ExperimentConfig())
