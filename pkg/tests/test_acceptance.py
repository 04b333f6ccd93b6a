"""Exit criteria for the package, one test per criterion.

Each test tags itself through the ``criterion`` fixture; conftest prints one
PASS/FAIL line per criterion at the end of the run. Instance seeds are pinned
so that every number below is reproducible.
"""

import json
import time
from math import pi

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dcqo.circuit import Gate, build_cd_assisted, build_cd_only
from dcqo.cli import ExperimentConfig, cmd_solve, load_problem
from dcqo.ising import random_spin_glass
from dcqo.marketdata import sample_prices_path
from dcqo.metrics import RunReport, approximation_ratio
from dcqo.protocols import (
    DEPTH_MATCHED_STEPS,
    RunSettings,
    depth_matched_benchmark,
    hybrid_batch,
    impulse_parity_batch,
    solve,
    summarize,
)
from dcqo.schedule import Schedule, alpha1
from dcqo.simulator import StateVector, apply_gate, exact_evolve, run
from dcqo.transpile import transpile_circuit, transpile_gate, verify_equivalence

import oracles

pytestmark = pytest.mark.acceptance


def test_alpha1_closed_form_matches_commutators(criterion):
    t0 = time.perf_counter()
    worst_alpha = worst_gamma = 0.0
    for k in range(50):
        sg = random_spin_glass(2 + k % 3, 1000 + k)
        gamma1_closed = 4 * (sg.h**2).sum() + 4 * (sg.J_sym**2).sum()
        for lam in (0.0, 0.25, 0.5, 0.75, 1.0):
            ref, gamma1 = oracles.alpha1_commutator(sg.h, sg.J, lam)
            worst_alpha = max(worst_alpha, abs(alpha1(sg, lam) - ref))
            worst_gamma = max(worst_gamma, abs(gamma1 - gamma1_closed))
    elapsed = time.perf_counter() - t0
    criterion(1, "alpha1 closed form vs nested commutators", max_alpha_err=f"{worst_alpha:.1e}",
              max_gamma1_err=f"{worst_gamma:.1e}", seconds=round(elapsed, 2))
    assert worst_alpha <= 1e-10
    assert worst_gamma <= 1e-10
    assert elapsed < 10


@pytest.mark.slow
def test_digitization_fidelity(criterion):
    t0 = time.perf_counter()
    dts = (0.2, 0.1, 0.05, 0.01)
    fids = np.empty((20, len(dts)))
    for k in range(20):
        sg = random_spin_glass(4, 2000 + k)
        exact = exact_evolve(sg, 1.0, "cd_assisted", micro_step=1e-4)
        for j, dt in enumerate(dts):
            fids[k, j] = run(build_cd_assisted(sg, Schedule(1.0, dt))).fidelity(exact)
    elapsed = time.perf_counter() - t0
    monotone = bool(np.all(np.diff(fids, axis=1) >= -1e-12))
    criterion(2, "Trotterized CD-assisted fidelity (T=1)", min_fidelity_dt001=f"{fids[:, -1].min():.6f}",
              monotone=monotone, seconds=round(elapsed, 1))
    assert fids[:, -1].min() >= 0.999
    assert monotone
    assert elapsed < 120


@pytest.mark.slow
def test_depth_matched_cd_advantage(criterion):
    t0 = time.perf_counter()
    rows = depth_matched_benchmark([(6 + k % 5, k) for k in range(100)], dt=0.1, steps=DEPTH_MATCHED_STEPS)
    elapsed = time.perf_counter() - t0
    mean = {r["method"]: r["mean_r"] for r in summarize(rows)}
    criterion(3, "depth-matched CD advantage", r_adiabatic=f"{mean['adiabatic']:.3f}", r_cd=f"{mean['cd']:.3f}",
              r_cd_only=f"{mean['cd-only']:.3f}", seconds=round(elapsed, 1))
    assert mean["cd"] >= 1.5 * mean["adiabatic"]
    assert mean["cd-only"] >= 1.5 * mean["adiabatic"]
    assert elapsed < 300


@pytest.mark.slow
def test_impulse_regime_parity(criterion):
    # Expected to fail on random spin glasses: the per-step CD angles at T=0.7,
    # dt=0.1 are mostly below the 0.1 cutoff, so little or nothing survives
    # pruning. The measured gap is reported rather than hidden.
    t0 = time.perf_counter()
    rows = impulse_parity_batch([(10, 500 + k) for k in range(30)], T=0.7, dt=0.1, cutoff=0.1,
                                reference_steps=80, reference_dt=0.1)
    elapsed = time.perf_counter() - t0
    r_cd = float(np.mean([r["r_cd_only"] for r in rows]))
    r_ad = float(np.mean([r["r_adiabatic"] for r in rows]))
    two_cd = float(np.mean([r["two_qubit_cd_only"] for r in rows]))
    two_ad = float(np.mean([r["two_qubit_adiabatic"] for r in rows]))
    reduction = two_ad / two_cd if two_cd else float("inf")
    criterion(4, "impulse-regime CD-only vs 80-step adiabatic", r_cd_only=f"{r_cd:.3f}", r_adiabatic=f"{r_ad:.3f}",
              gate_reduction=f"{reduction:.1f}x",
              mean_surviving_steps=f"{np.mean([r['surviving_steps'] for r in rows]):.2f}",
              seconds=round(elapsed, 1))
    assert reduction >= 10
    assert elapsed < 600
    assert r_cd >= r_ad - 0.05


@pytest.mark.slow
def test_hybrid_ordering(criterion):
    t0 = time.perf_counter()
    rows = hybrid_batch([(8, 7000 + k) for k in range(50)], hdcqo_p=1, qaoa_layers=(1, 5), max_iter=200)
    elapsed = time.perf_counter() - t0
    h = np.array([r["hdcqo_p1"] for r in rows])
    q1 = np.array([r["qaoa_p1"] for r in rows])
    q5 = np.array([r["qaoa_p5"] for r in rows])
    wins = float(np.mean(h > q1))
    ratio = float(h.mean() / q5.mean())
    criterion(5, "h-DCQO p=1 vs QAOA p=1 and p=5", r_hdcqo=f"{h.mean():.3f}", r_qaoa_p1=f"{q1.mean():.3f}",
              r_qaoa_p5=f"{q5.mean():.3f}", win_rate=f"{wins:.2f}", ratio_to_p5=f"{ratio:.3f}",
              seconds=round(elapsed, 1))
    assert max(r["hdcqo_p1_evaluations"] for r in rows) <= 200
    assert wins >= 0.8
    assert ratio >= 0.9
    assert elapsed < 900


def _native_deviation(g: Gate, n: int) -> float:
    want = oracles.circuit_matrix(n, [(g.kind, g.qubits, g.params)])
    got = oracles.circuit_matrix(n, [(x.kind, x.qubits, x.params) for x in transpile_gate(g)])
    return oracles.phase_deviation(want, got)


def test_transpilation_rules(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst = {}
    for kind in ("H", "RX", "RY", "RZ"):
        angles = [()] if kind == "H" else [(float(a),) for a in rng.uniform(0, 2 * pi, 100)]
        worst[kind] = max(_native_deviation(Gate(kind, (0,), a), 1) for a in angles)
    for kind in ("RZZ", "RZY", "RYZ"):
        worst[kind] = max(_native_deviation(Gate(kind, (0, 1), (float(a),)), 2) for a in rng.uniform(0, 2 * pi, 100))
    for b in range(4):
        lo, hi = b * pi / 2, (b + 1) * pi / 2
        worst[f"RYY_branch{b + 1}"] = max(_native_deviation(Gate("RYY", (0, 1), (float(a),)), 2)
                                          for a in rng.uniform(lo, hi, 100))
    c = build_cd_only(random_spin_glass(3, 66), Schedule(0.7, 0.1))
    whole = verify_equivalence(c, transpile_circuit(c))
    elapsed = time.perf_counter() - t0
    criterion(6, "native-gate rules and whole-circuit equivalence", max_rule_dev=f"{max(worst.values()):.1e}",
              circuit_dev=f"{whole.deviation:.1e}", seconds=round(elapsed, 2))
    assert all(v < 1e-10 for v in worst.values()), worst
    assert whole.equal_up_to_phase and whole.deviation < 1e-10
    assert elapsed < 30


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10**6), st.floats(-50, 50, allow_nan=False))
def _metric_properties(n, seed, shift):
    sg = random_spin_glass(n, seed)
    diag = sg.diagonal
    E_min = float(diag.min())
    E_avg = 0.0
    assert abs(diag.mean()) <= 1e-12 * max(1.0, np.abs(diag).max())
    if E_min < E_avg:
        assert approximation_ratio(E_min, E_avg, E_min) == 1
        assert approximation_ratio(E_avg, E_avg, E_min) == 0
        E = float(np.random.default_rng(seed).choice(diag))
        r = approximation_ratio(E, E_avg, E_min)
        assert approximation_ratio(E + shift, E_avg + shift, E_min + shift) == pytest.approx(r, abs=1e-9)


def test_metric_identities(criterion):
    t0 = time.perf_counter()
    _metric_properties()
    rep = solve(random_spin_glass(5, 77), RunSettings(method="cd", shots=0))
    assert rep.E_avg == 0.0 and rep.E_avg_uniform == 0.0
    rep.check()
    elapsed = time.perf_counter() - t0
    criterion(7, "approximation-ratio identities", seconds=round(elapsed, 2))
    assert elapsed < 5


@pytest.mark.slow
def test_performance_budget(criterion):
    n = 20
    sg = random_spin_glass(n, 2020)
    t0 = time.perf_counter()
    rep = solve(sg, RunSettings(method="cd-only", shots=5000, sample_seed=0))
    rep.check()
    json.loads(rep.to_json())
    pipeline = time.perf_counter() - t0

    psi = StateVector.plus(n).amplitudes.copy()
    apply_gate(psi, "RZZ", (0, 1), (0.1,))  # compile
    per_gate = {}
    for kind in ("RZZ", "RZY", "RYZ"):
        apply_gate(psi, kind, (3, 17), (0.2,))
        reps = 20
        t1 = time.perf_counter()
        for k in range(reps):
            apply_gate(psi, kind, (k % n, (k + 7) % n), (0.3,))
        per_gate[kind] = (time.perf_counter() - t1) / reps
    worst_ms = 1e3 * max(per_gate.values())
    criterion(8, "20-qubit pipeline and gate-update budget", pipeline_s=f"{pipeline:.2f}",
              worst_two_qubit_gate_ms=f"{worst_ms:.2f}")
    assert pipeline < 60
    assert worst_ms < 5


def test_end_to_end_sample_portfolio(criterion, tmp_path):
    t0 = time.perf_counter()
    cfg = ExperimentConfig(source="csv", method="cd-only", output_dir=str(tmp_path))
    sg, prov, budget, prob = load_problem(cfg)
    assert (prob.theta1, prob.theta2, prob.theta3, prob.B) == (1.0, 0.5, 2.0, 10)
    assert budget == 10 and sg.n == 20

    with open(tmp_path / "stdout.txt", "w") as log:
        result = cmd_solve(cfg, out=log)
    rep = RunReport.from_dict(json.loads(result["paths"]["report"].read_text()))
    rep.check()
    assert np.isfinite(rep.r_avg)
    assert rep.config["problem"]["budget"] == 10 and rep.config["problem"]["theta"] == [1.0, 0.5, 2.0]

    e, c = oracles.csv_moments(sample_prices_path())
    rng = np.random.default_rng(99)
    worst = 0.0
    for bits in rng.integers(0, 2, (1000, 20)):
        want = oracles.portfolio_cost(e, c, 10, 1.0, 0.5, 2.0, bits)
        worst = max(worst, abs(sg.objective(bits) - want) / max(1.0, abs(want)))
    elapsed = time.perf_counter() - t0
    criterion(9, "sample CSV to report", r_avg=f"{rep.r_avg:.4f}",
              surviving_steps=rep.extras.get("surviving_steps"), max_encoding_err=f"{worst:.1e}",
              seconds=round(elapsed, 1))
    assert worst <= 1e-9
    assert elapsed < 120
