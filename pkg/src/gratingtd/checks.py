"""Seeded property suite: symbol branches, explicit-constant inequalities, coercivity and oracle agreement."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import diagnostics as diag
from .dtn import BoundaryTrace, apply_dtn, beta_from_params
from .incidence import IncidentPulse
from .medium import MediumModel, build_binary_grating, build_layered, lamellar_profile
from .oracle import dense_dtn_reference, flat_layer_reference
from .sdomain import SDomainField, build_mesh

__all__ = [
    "PropertyResult",
    "check_branches",
    "check_tp_forms",
    "check_trace_and_dtn",
    "check_coercivity_suite",
    "check_dtn_equivalence",
    "check_layer_oracle",
    "run_suite",
]


@dataclass(frozen=True)
class PropertyResult:
    """Worst observed value of a property against its limit."""

    name: str
    worst: float
    limit: float
    samples: int
    failures: int

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def line(self) -> str:
        return f"{self.name} {'pass' if self.passed else 'FAIL'} {self.worst!r} {self.limit!r} 1.0 samples={self.samples},failures={self.failures}"


def _random_s(rng, n, s1_range=(0.1, 10.0), s2_max=50.0):
    s1 = np.exp(rng.uniform(np.log(s1_range[0]), np.log(s1_range[1]), n))
    return s1 + 1j * rng.uniform(-s2_max, s2_max, n)


def _random_trace(rng, side, nx, period):
    return BoundaryTrace(side, period, rng.normal(size=nx) + 1j * rng.normal(size=nx))


def _test_media(nx: int, nz: int, period: float, h1: float, h2: float) -> list[MediumModel]:
    mid = 0.5 * (h1 + h2)
    span = h1 - h2
    return [
        build_layered([(h1, 1.0, 1.0)], period, h1, h2, nx, nz),
        build_layered([(h1, 1.0, 1.0), (mid, 4.0, 1.0)], period, h1, h2, nx, nz),
        build_layered([(h1, 1.0, 1.0), (h2 + 0.7 * span, 2.0, 1.5), (h2 + 0.3 * span, 6.0, 1.0)], period, h1, h2,
                      nx, nz),
        build_binary_grating(lamellar_profile(h2 + 0.3 * span, h2 + 0.7 * span, 0.5, period), 1.0, 1.0, 4.0, 1.0,
                             period, h1, h2, nx, nz),
        build_binary_grating(lambda x: mid + 0.25 * span * np.sin(2 * np.pi * x / period), 1.0, 1.0, 2.25, 2.0,
                             period, h1, h2, nx, nz),
    ]


def check_branches(rng, samples: int = 100_000) -> list[PropertyResult]:
    """``Re beta < 0`` and the real/imaginary-part identities over random admissible parameters."""
    theta = rng.uniform(1e-3, math.pi - 1e-3, samples)
    eps1mu1 = rng.uniform(0.5, 4.0, samples)
    j = rng.integers(1, 3, samples)
    epsmu = np.where(j == 1, eps1mu1, eps1mu1 * rng.uniform(1.0, 8.0, samples))
    c1 = np.sqrt(eps1mu1) * np.cos(theta)
    period = rng.uniform(0.5, 10.0, samples)
    n = rng.integers(-512, 513, samples)
    alpha = 2 * np.pi * n / period
    s = _random_s(rng, samples, (1e-3, 1e2), 1e3)
    beta = np.asarray(beta_from_params(epsmu, alpha, c1, s))
    re = beta.real
    out = [PropertyResult("branch_re_beta_negative", float(re.max()), 0.0, samples, int(np.sum(re >= 0)))]
    res = diag.tp_identity_residuals(epsmu, alpha, c1, s)
    for key in ("tp1", "tp2", "tp5"):
        worst = float(np.max(res[key]))
        out.append(PropertyResult(f"identity_{key}", worst, 1e-12, samples, int(np.sum(res[key] > 1e-12))))
    return out


def check_tp_forms(rng, traces: int = 1000, nx: int = 64) -> PropertyResult:
    """``Re <(s mu_j)^-1 B_j u, u> <= 1e-14 ||u||^2`` on random traces, media, angles and frequencies."""
    worst, fails, worst_identity = -math.inf, 0, 0.0
    media = _test_media(nx, 4, 1.0, 1.0, 0.0)
    for k in range(traces):
        medium = media[k % len(media)]
        theta = rng.uniform(0.05, math.pi - 0.05)
        c1 = math.sqrt(medium.eps1 * medium.mu1) * math.cos(theta)
        s = complex(_random_s(rng, 1, (1e-2, 1e2), 200.0)[0])
        side = 1 + k % 2
        rep, ident = diag.check_lemma_tp(_random_trace(rng, side, nx, medium.period), s, medium, c1)
        worst = max(worst, rep.lhs / rep.rhs)
        worst_identity = max(worst_identity, ident)
        fails += (not rep.passed) + (ident > 1e-12)
    return PropertyResult("lemma_tp_form", worst, 1e-14, traces, fails)


def check_trace_and_dtn(rng, fields: int = 1000, frequencies: int = 20, nx: int = 32, nz: int = 32,
                        period: float = 1.0, h1: float = 0.5, h2: float = 0.0) -> list[PropertyResult]:
    """Trace inequality with C1 and DtN continuity with C2 at random ``s`` with ``s1`` in [0.1, 10]."""
    media = _test_media(nx, nz, period, h1, h2)
    mesh = build_mesh(media[0], nx, nz)
    per = max(1, fields // frequencies)
    tt_worst = dtn_worst = 0.0
    tt_fail = dtn_fail = tt_n = dtn_n = 0
    for s in _random_s(rng, frequencies):
        s = complex(s)
        for k in range(per):
            # alternate rough and smooth-in-z random fields
            if k % 2 == 0:
                vals = rng.normal(size=mesh.ndof) + 1j * rng.normal(size=mesh.ndof)
            else:
                vals = np.cumsum(rng.normal(size=(nz + 1, nx)) + 1j * rng.normal(size=(nz + 1, nx)), axis=0).ravel()
            for rep in diag.check_lemma_tt(SDomainField(mesh, s, vals), s, media[0]):
                tt_worst = max(tt_worst, rep.ratio)
                tt_fail += not rep.passed
                tt_n += 1
            medium = media[k % len(media)]
            theta = rng.uniform(0.05, math.pi - 0.05)
            c1 = math.sqrt(medium.eps1 * medium.mu1) * math.cos(theta)
            rep = diag.check_lemma_dtn(_random_trace(rng, 1 + k % 2, nx, period), s, medium, c1)
            dtn_worst = max(dtn_worst, rep.ratio)
            dtn_fail += not rep.passed
            dtn_n += 1
    return [
        PropertyResult("lemma_tt_ratio", tt_worst, 1.0, tt_n, tt_fail),
        PropertyResult("lemma_dtn_ratio", dtn_worst, 1.0, dtn_n, dtn_fail),
    ]


def check_coercivity_suite(rng, fields: int = 500, nx: int = 16, nz: int = 16, period: float = 1.0, h1: float = 0.5,
                           h2: float = 0.0, slack: float = 1e-10) -> PropertyResult:
    """Discrete coercivity with the explicit constant on layered and lamellar media."""
    media = _test_media(nx, nz, period, h1, h2)
    mesh = build_mesh(media[0], nx, nz)
    worst, fails = 0.0, 0
    for k in range(fields):
        medium = media[k % len(media)]
        theta = rng.uniform(0.05, math.pi - 0.05)
        c1 = math.sqrt(medium.eps1 * medium.mu1) * math.cos(theta)
        s = complex(_random_s(rng, 1, (0.1, 10.0), 50.0)[0])
        if k % 2 == 0:
            vals = rng.normal(size=mesh.ndof) + 1j * rng.normal(size=mesh.ndof)
        else:
            vals = np.cumsum(np.cumsum(rng.normal(size=(nz + 1, nx)), axis=0), axis=1).ravel() + 0j
        rep = diag.check_coercivity(vals, medium, s, theta, c1, mesh, slack=slack)
        worst = max(worst, rep.lhs / rep.rhs)
        fails += not rep.passed
    return PropertyResult("coercivity_ratio", worst, 1.0, fields, fails)


def check_dtn_equivalence(rng, sizes=(8, 16, 64, 128, 256), repeats: int = 4) -> PropertyResult:
    """DFT-based DtN against explicit summation, relative to ``max |B u|``."""
    medium = build_layered([(1.0, 1.0, 1.0), (0.5, 4.0, 1.0)], 1.0, 1.0, 0.0, 8, 2)
    worst, fails, count = 0.0, 0, 0
    for nx in sizes:
        for _ in range(repeats):
            side = int(rng.integers(1, 3))
            c1 = float(rng.uniform(-1, 1))
            s = complex(_random_s(rng, 1, (0.05, 20.0), 100.0)[0])
            tr = _random_trace(rng, side, nx, medium.period)
            fast = apply_dtn(tr, s, medium, c1).values
            dense = dense_dtn_reference(tr, s, medium, c1).values
            err = float(np.max(np.abs(fast - dense)) / np.max(np.abs(dense)))
            worst = max(worst, err)
            fails += err > 1e-12
            count += 1
    return PropertyResult("dtn_dense_equivalence", worst, 1e-12, count, fails)


def check_layer_oracle(rng, samples: int = 50) -> PropertyResult:
    """Interface and boundary residuals of the two-layer reference for random admissible parameters."""
    worst, fails = 0.0, 0
    for _ in range(samples):
        theta = rng.uniform(0.1, math.pi - 0.1)
        eps_lo = rng.uniform(1.0, 9.0)
        mu_lo = rng.uniform(1.0, 3.0)
        h0 = float(rng.choice([0.25, 0.5, 0.75]))
        medium = build_layered([(1.0, 1.0, 1.0), (h0, eps_lo, mu_lo)], 1.0, 1.0, 0.0, 4, 8)
        pulse = IncidentPulse(order=4, sigma=0.2, theta=theta)
        s = complex(_random_s(rng, 1, (0.1, 5.0), 20.0)[0])
        ref = flat_layer_reference(pulse, s, medium)
        w = float(max(ref.residuals.values()))
        worst = max(worst, w)
        fails += w > 1e-12
    return PropertyResult("layer_oracle_residual", worst, 1e-12, samples, fails)


def run_suite(seed: int, *, branch_samples=100_000, traces=1000, fields=1000, frequencies=20,
              coercivity_fields=500) -> list[PropertyResult]:
    """All property groups from one seeded generator, in a fixed order."""
    rng = np.random.default_rng(seed)
    out = []
    out += check_branches(rng, branch_samples)
    out.append(check_tp_forms(rng, traces))
    out += check_trace_and_dtn(rng, fields, frequencies)
    out.append(check_coercivity_suite(rng, coercivity_fields))
    out.append(check_dtn_equivalence(rng))
    out.append(check_layer_oracle(rng))
    return out
