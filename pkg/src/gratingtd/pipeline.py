"""End-to-end runs: frequency sweep, inversion, run metrics and the estimate report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics as diag
from .config import RunConfig, build_medium, build_plan, build_pulse
from .incidence import IncidentPulse, rho_hat
from .medium import MediumModel
from .sdomain import SDomainField, StripMesh, VolumeOperators, build_mesh, volume_operators
from .timedomain import SweepPlan, TimeSeriesField, invert_to_time, parseval_residual, run_sweep

__all__ = ["SimulationResult", "simulate", "run_metrics", "estimate_reports", "baseline_key"]


@dataclass(eq=False)
class SimulationResult:
    medium: MediumModel
    mesh: StripMesh
    pulse: IncidentPulse
    plan: SweepPlan
    ops: VolumeOperators
    sweep: list[SDomainField]
    series: TimeSeriesField
    e1: np.ndarray = field(default=None)
    e2: np.ndarray = field(default=None)


def simulate(cfg: RunConfig, threads: int = 1, nx: int | None = None, nz: int | None = None) -> SimulationResult:
    """Build the configured problem, sweep the contour and invert to the time grid."""
    medium = build_medium(cfg, nx, nz)
    mesh = build_mesh(medium, medium.nx, medium.nz)
    pulse = build_pulse(cfg)
    plan = build_plan(cfg, pulse)
    ops = volume_operators(medium, mesh, pulse.c1)
    sweep = run_sweep(medium, mesh, pulse, plan, threads)
    series = invert_to_time(sweep, plan)
    e1 = diag.energy_e1(series, medium, pulse.c1, ops)
    e2 = diag.energy_e2(series, medium, pulse.c1, ops)
    return SimulationResult(medium, mesh, pulse, plan, ops, sweep, series, e1, e2)


def run_metrics(res: SimulationResult) -> dict[str, float]:
    """Parseval gap, causality and initial-value levels, energy positivity and early energy."""
    U = res.series.values
    t = res.series.times
    amp = np.max(np.abs(U), axis=1)
    peak = float(amp.max())
    early = t <= 0.9 * res.pulse.delay
    e1p, e2p = float(res.e1.max()), float(res.e2.max())
    rel = (lambda v, p: float(v) / p if p > 0 else 0.0)
    return {
        "parseval_residual": parseval_residual(res.sweep, res.series, res.plan, res.ops.mass),
        "causality": rel(amp[early].max() if early.any() else 0.0, peak),
        "initial_value": rel(amp[0], peak),
        "peak": peak,
        "e1_min": float(res.e1.min()),
        "e2_min": float(res.e2.min()),
        "e1_early": rel(res.e1[early].max() if early.any() else 0.0, e1p),
        "e2_early": rel(res.e2[early].max() if early.any() else 0.0, e2p),
        "e1_initial": rel(res.e1[0], e1p),
        "tail": rel(amp[-1], peak),
    }


def metric_reports(metrics: dict[str, float]) -> list[diag.EstimateReport]:
    """Run metrics phrased as ``value <= limit`` report lines."""
    limits = [
        ("parseval", "parseval_residual", 5e-3),
        ("causality", "causality", 1e-4),
        ("initial_value", "initial_value", 1e-4),
        ("e1_before_arrival", "e1_early", 1e-6),
        ("e2_before_arrival", "e2_early", 1e-6),
        ("e1_initial", "e1_initial", 1e-6),
    ]
    out = [diag.EstimateReport(name, metrics[key], limit, 1.0, "relative", tol=0.0) for name, key, limit in limits]
    out.append(diag.EstimateReport("e1_nonnegative", -metrics["e1_min"], 0.0, 1.0, "min", tol=0.0))
    out.append(diag.EstimateReport("e2_nonnegative", -metrics["e2_min"], 0.0, 1.0, "min", tol=0.0))
    return out


def baseline_key(cfg: RunConfig) -> str:
    return cfg.medium.kind


def estimate_reports(res: SimulationResult, baseline: dict | None = None) -> list[diag.EstimateReport]:
    """VP bound at every sweep frequency, lemma checks on the solved traces, and ST/ES1/ES2 ratios."""
    medium, mesh, pulse = res.medium, res.mesh, res.pulse
    out = []
    for f in res.sweep:
        rho = rho_hat(pulse, f.s, mesh.nx, mesh.period)
        out.append(diag.check_vp_bound(f, rho, f.s, medium, pulse.theta))
    # lemma checks on a handful of solved fields spread over the sweep
    picks = sorted(set(np.linspace(0, len(res.sweep) - 1, 5).astype(int).tolist()))
    for k in picks:
        f = res.sweep[k]
        out += diag.check_lemma_tt(f, f.s, medium)
        for side in (1, 2):
            out.append(diag.check_lemma_dtn(f.trace(side), f.s, medium, pulse.c1))
            out.append(diag.check_lemma_tp(f.trace(side), f.s, medium, pulse.c1)[0])
        out.append(diag.check_coercivity(f, medium, f.s, pulse.theta, pulse.c1, mesh))
    out += diag.stability_report(res.series, pulse, medium, res.plan.T, baseline, ops=res.ops)
    return out
