"""Acceptance criteria 1 to 9, each reporting one pass/fail line with its runtime."""

import filecmp
import time

import numpy as np
import pytest

from gratingtd import checks
from gratingtd import diagnostics as diag
from gratingtd.cli import main
from gratingtd.config import build_plan, build_pulse, parse_config
from gratingtd.incidence import IncidentPulse, rho_hat
from gratingtd.oracle import oracle_convergence
from gratingtd.pipeline import baseline_key, run_metrics, simulate
from gratingtd.timedomain import invert_samples

from conftest import CONFIGS, record

SEED = 20240601
_RUNS: dict = {}


def _run(name, n=None):
    """Cached simulation of a shipped config with its wall time."""
    key = (name, n)
    if key not in _RUNS:
        cfg = parse_config(CONFIGS / f"{name}.ini")
        t0 = time.perf_counter()
        res = simulate(cfg, nx=n, nz=n)
        _RUNS[key] = (cfg, res, time.perf_counter() - t0)
    return _RUNS[key]


def _finish(key, ok, elapsed, limit, detail):
    within = limit is None or elapsed <= limit
    record(key, ok and within, elapsed, limit, detail)
    assert ok, detail
    assert within, f"runtime {elapsed:.1f}s over {limit}s"


def test_criterion_1_branches_and_negativity():
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    res = checks.check_branches(rng, 100_000) + [checks.check_tp_forms(rng, 1000)]
    elapsed = time.perf_counter() - t0
    detail = " ".join(f"{r.name}={r.worst:.3g}/{r.failures}" for r in res)
    _finish("1", all(r.passed for r in res), elapsed, 5.0, detail)


def test_criterion_2_trace_and_dtn_constants():
    rng = np.random.default_rng(SEED + 1)
    t0 = time.perf_counter()
    res = checks.check_trace_and_dtn(rng, fields=1000, frequencies=20)
    elapsed = time.perf_counter() - t0
    detail = " ".join(f"{r.name}={r.worst:.3g} n={r.samples} failures={r.failures}" for r in res)
    _finish("2", all(r.passed for r in res) and all(r.samples >= 1000 for r in res), elapsed, 30.0, detail)


def test_criterion_3_discrete_coercivity():
    rng = np.random.default_rng(SEED + 2)
    t0 = time.perf_counter()
    r = checks.check_coercivity_suite(rng, 500)
    elapsed = time.perf_counter() - t0
    _finish("3", r.passed, elapsed, 60.0, f"worst_ratio={r.worst:.4g} n={r.samples} failures={r.failures}")


def test_criterion_4_vp_bound_every_frequency():
    elapsed, worst, fails, count = 0.0, 0.0, 0, 0
    for name in ("homogeneous", "two_layer"):
        _, res, t_sim = _run(name)
        t0 = time.perf_counter()
        for f in res.sweep:
            rho = rho_hat(res.pulse, f.s, res.mesh.nx, res.mesh.period)
            rep = diag.check_vp_bound(f, rho, f.s, res.medium, res.pulse.theta)
            worst = max(worst, rep.ratio)
            fails += not rep.passed
            count += 1
        elapsed += t_sim + time.perf_counter() - t0
    _finish("4", fails == 0, elapsed, 120.0, f"frequencies={count} failures={fails} worst_ratio={worst:.4g}")


def test_criterion_5_oracle_convergence():
    pulse = IncidentPulse(order=4, sigma=0.1, delay=1.0, theta=np.pi / 3)
    t0 = time.perf_counter()
    parts, ok = [], True
    for kind in ("homogeneous", "two_layer"):
        rows = oracle_convergence(kind, pulse, 0.4 + 5.0j, (16, 32, 64), h1=0.5)
        order = min(r.observed_order for r in rows[1:])
        ok &= order >= 1.9 and rows[-1].error <= 1e-3
        parts.append(f"{kind}: error={rows[-1].error:.3g} min_order={order:.3f}")
    _finish("5", ok, time.perf_counter() - t0, 60.0, "; ".join(parts))


def test_criterion_6_dense_dtn_equivalence():
    rng = np.random.default_rng(SEED + 3)
    t0 = time.perf_counter()
    r = checks.check_dtn_equivalence(rng, sizes=(8, 16, 64, 128, 256), repeats=4)
    _finish("6", r.passed, time.perf_counter() - t0, 5.0, f"worst_relative={r.worst:.3g} n={r.samples}")


def test_criterion_7a_scalar_transform_pair():
    cfg = parse_config(CONFIGS / "homogeneous.ini")
    plan = build_plan(cfg, build_pulse(cfg))
    t0 = time.perf_counter()
    t = plan.times()
    err = np.abs(invert_samples(1.0 / (plan.s_values() + 1.0), plan) - np.exp(-t))
    k = int(np.argmax(err))
    _finish("7a", float(err.max()) <= 1e-3, time.perf_counter() - t0, None,
            f"max_error={err.max():.4g} at t={t[k]:.4g} on [0, {plan.T}] (limit 1e-3)")


@pytest.mark.parametrize("name", ["homogeneous", "two_layer"])
def test_criterion_7_full_run(name):
    _, res, t_sim = _run(name)
    t0 = time.perf_counter()
    m = run_metrics(res)
    ok = m["parseval_residual"] <= 5e-3 and m["causality"] <= 1e-4 and m["initial_value"] <= 1e-4
    key = "7b" if name == "homogeneous" else "7c"
    _finish(key, ok, t_sim + time.perf_counter() - t0, 180.0,
            f"{name}: parseval={m['parseval_residual']:.3g} causality={m['causality']:.3g} "
            f"initial={m['initial_value']:.3g}")


def test_criterion_8_energy_and_stability():
    baselines = diag.load_baselines()
    elapsed, ok, parts = 0.0, True, []
    for name in ("homogeneous", "two_layer", "lamellar"):
        cfg, fine, t_fine = _run(name)
        _, coarse, t_coarse = _run(name, 32)
        t0 = time.perf_counter()
        m = run_metrics(fine)
        energy_ok = m["e1_min"] >= 0 and m["e2_min"] >= 0 and m["e1_early"] <= 1e-6 and m["e2_early"] <= 1e-6
        base = baselines[baseline_key(cfg)]
        reps = diag.stability_report(fine.series, fine.pulse, fine.medium, fine.plan.T, base, ops=fine.ops)
        reps_c = diag.stability_report(coarse.series, coarse.pulse, coarse.medium, coarse.plan.T, base,
                                       ops=coarse.ops)
        drift = max(abs(a.lhs - b.lhs) / a.lhs for a, b in zip(reps, reps_c))
        ok &= energy_ok and all(r.passed for r in reps) and drift <= 0.2
        ratios = ",".join(f"{r.name}={r.lhs / r.constant:.3f}" for r in reps)
        parts.append(f"{name}: energy={'ok' if energy_ok else 'bad'} vs_limit[{ratios}] refine_drift={drift:.3g}")
        elapsed += t_fine + t_coarse + time.perf_counter() - t0
    _finish("8", ok, elapsed, 180.0, "; ".join(parts))


def test_criterion_9_determinism(tmp_path):
    t0 = time.perf_counter()
    cfg = str(CONFIGS / "homogeneous.ini")
    for k in (1, 2):
        assert main(["check", "--seed", "1", "--config", cfg, "--out", str(tmp_path / f"check{k}")]) == 0
        assert main(["simulate", "--config", cfg, "--out", str(tmp_path / f"sim{k}")]) == 0
    diffs = []
    for kind in ("check", "sim"):
        cmp = filecmp.dircmp(tmp_path / f"{kind}1", tmp_path / f"{kind}2")
        names = cmp.common_files
        _, mismatch, errors = filecmp.cmpfiles(tmp_path / f"{kind}1", tmp_path / f"{kind}2", names, shallow=False)
        diffs += mismatch + errors + cmp.left_only + cmp.right_only
    nfiles = len(list((tmp_path / "sim1").iterdir())) + len(list((tmp_path / "check1").iterdir()))
    _finish("9", not diffs, time.perf_counter() - t0, None, f"files_compared={nfiles} differing={diffs or 'none'}")
