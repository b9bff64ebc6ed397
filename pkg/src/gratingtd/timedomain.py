"""Frequency sweep on the vertical contour ``Re s = s1`` and trapezoidal Bromwich inversion."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .incidence import IncidentPulse, pulse_laplace
from .sdomain import SDomainField, SolverError, StripMesh, solve_rp, volume_operators

__all__ = [
    "SweepPlan",
    "TimeSeriesField",
    "plan_sweep",
    "make_plan",
    "run_sweep",
    "invert_samples",
    "invert_to_time",
    "parseval_sides",
    "parseval_residual",
]


@dataclass(frozen=True)
class SweepPlan:
    s1: float
    smax: float
    ns: int
    T: float
    nt: int
    alias_factor: float = 1.2

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("invalid sweep plan: " + "; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if not (self.s1 > 0 and self.T > 0 and self.smax > 0):
            out.append("s1, smax and T must be positive")
        if self.ns < 2 or self.nt < 2:
            out.append("ns and nt must be >= 2")
        if self.alias_factor < 1.2:
            out.append(f"alias_factor {self.alias_factor} < 1.2")
        if not out:
            if 2 * math.pi / self.ds2 < self.alias_factor * self.T * (1 - 1e-12):
                out.append(
                    f"aliasing guard: 2 pi / ds2 = {2 * math.pi / self.ds2:.6g} < {self.alias_factor} T"
                )
            if self.s1 * self.T > 20:
                out.append(f"s1*T = {self.s1 * self.T:.6g} exceeds 20")
        return out

    @property
    def ds2(self) -> float:
        return self.smax / (self.ns - 1)

    @property
    def dt(self) -> float:
        return self.T / (self.nt - 1)

    def s_values(self) -> np.ndarray:
        return self.s1 + 1j * self.ds2 * np.arange(self.ns)

    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.nt)


@dataclass(eq=False)
class TimeSeriesField:
    """Real nodal field ``values[k] = U(t_k)`` on a uniform time grid."""

    values: np.ndarray
    dt: float
    mesh: StripMesh

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.values.shape[0])

    @property
    def nt(self) -> int:
        return self.values.shape[0]

    def snapshot(self, k: int) -> np.ndarray:
        return self.values[k]


def _decay_root(pulse: IncidentPulse, s1: float, delta: float) -> float:
    """Smallest S with ``|f(s1 + i S)| = delta |f(s1)|`` for the closed-form pulse."""
    a = s1 + 1.0 / pulse.sigma
    return a * math.sqrt(delta ** (-2.0 / (pulse.order + 1)) - 1.0)


def _decay_scan(pulse: IncidentPulse, s1: float, delta: float, s_cap: float = 1e4) -> float:
    ref = abs(pulse_laplace(pulse, s1))
    grid = np.geomspace(1e-2, s_cap, 400)
    mags = np.abs(pulse_laplace(pulse, s1 + 1j * grid))
    # require the tail to stay below the threshold, not just touch it
    above = np.nonzero(mags > delta * ref)[0]
    if above.size == 0:
        return float(grid[0])
    if above[-1] == grid.size - 1:
        raise ValueError(f"unreachable tolerance {delta} for tabulated pulse below |s2| = {s_cap}")
    return float(grid[above[-1] + 1])


def plan_sweep(
    pulse: IncidentPulse,
    T: float,
    delta: float = 1e-6,
    *,
    kappa: float = 4.0,
    alias_factor: float = 1.2,
) -> SweepPlan:
    """Choose contour abscissa, frequency cutoff and step sizes for final time ``T``.

    ``s1 = kappa / T``; the cutoff ``S`` is where the pulse spectrum has decayed
    to ``delta`` of its value at ``s1``; the step ``ds2`` keeps the aliasing
    period ``2 pi / ds2`` at least ``alias_factor * T``; ``dt <= pi / S``.
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if not 0 < delta < 1:
        raise ValueError(f"tolerance must lie in (0, 1), got {delta}")
    s1 = kappa / T
    if pulse.shape == "polyexp":
        smax = _decay_root(pulse, s1, delta)
    else:
        smax = _decay_scan(pulse, s1, delta)
    ds2_target = 2 * math.pi / (alias_factor * T)
    ns = int(math.ceil(smax / ds2_target)) + 1
    nt = int(math.ceil(T * smax / math.pi)) + 1
    return SweepPlan(s1=s1, smax=smax, ns=ns, T=T, nt=nt, alias_factor=alias_factor)


def make_plan(pulse: IncidentPulse, T: float, *, s1=None, smax=None, ns=None, nt=None, delta=1e-6, kappa=4.0,
              alias_factor=1.2) -> SweepPlan:
    """``plan_sweep`` with optional explicit overrides (config keys ``sweep.*``, ``time.*``)."""
    base = plan_sweep(pulse, T, delta, kappa=kappa if s1 is None else s1 * T, alias_factor=alias_factor)
    smax_ = base.smax if smax is None else float(smax)
    if ns is None:
        ns = int(math.ceil(smax_ / (2 * math.pi / (alias_factor * T)))) + 1
    if nt is None:
        nt = int(math.ceil(T * smax_ / math.pi)) + 1
    return SweepPlan(s1=base.s1, smax=smax_, ns=int(ns), T=T, nt=int(nt), alias_factor=alias_factor)


def run_sweep(medium, mesh: StripMesh, pulse: IncidentPulse, plan: SweepPlan, threads: int = 1) -> list[SDomainField]:
    """Solve the strip problem at every ``s = s1 + i s2_k``, ``k = 0..ns-1``, in order."""
    ops = volume_operators(medium, mesh, pulse.c1)
    svals = plan.s_values()

    def one(s):
        try:
            return solve_rp(medium, mesh, pulse, s, ops=ops)
        except SolverError as exc:
            raise SolverError(exc.code, f"sweep aborted at s={s}: {exc}", exc.residual) from exc

    if threads <= 1:
        return [one(s) for s in svals]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, svals))


def invert_samples(samples: np.ndarray, plan: SweepPlan, times: np.ndarray | None = None) -> np.ndarray:
    """Trapezoidal Bromwich inversion of samples on the plan contour.

    ``samples`` has shape ``(ns, ...)``; returns ``(nt, ...)`` real values
    ``U(t) = e^{s1 t}/pi * Re[ds2 * sum' e^{i s2_k t} U(s1 + i s2_k)]`` where the
    primed sum halves the ``k = 0`` term.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.shape[0] != plan.ns:
        raise ValueError(f"plan mismatch: {samples.shape[0]} samples for ns={plan.ns}")
    t = plan.times() if times is None else np.asarray(times, dtype=float)
    s2 = plan.ds2 * np.arange(plan.ns)
    w = np.full(plan.ns, plan.ds2)
    w[0] *= 0.5
    kernel = np.exp(1j * np.outer(t, s2)) * w[None, :]  # (nt, ns)
    flat = samples.reshape(plan.ns, -1)
    out = np.real(kernel @ flat) * (np.exp(plan.s1 * t) / np.pi)[:, None]
    return out.reshape((t.size,) + samples.shape[1:])


def invert_to_time(sweep: list[SDomainField], plan: SweepPlan) -> TimeSeriesField:
    if len(sweep) != plan.ns:
        raise ValueError(f"plan mismatch: sweep has {len(sweep)} fields, plan expects {plan.ns}")
    expected = plan.s_values()
    if any(abs(f.s - s) > 1e-12 * max(1.0, abs(s)) for f, s in zip(sweep, expected)):
        raise ValueError("plan mismatch: sweep frequencies differ from the plan contour")
    mesh = sweep[0].mesh
    data = np.stack([f.values for f in sweep])
    return TimeSeriesField(invert_samples(data, plan), plan.dt, mesh)


def _trapz_weights(n: int, h: float, halve_last: bool = True) -> np.ndarray:
    w = np.full(n, h)
    w[0] *= 0.5
    if halve_last:
        w[-1] *= 0.5
    return w


def parseval_sides(s_samples: np.ndarray, t_samples: np.ndarray, plan: SweepPlan, gram=None) -> tuple[float, float]:
    """Both sides of the weighted Parseval identity on the plan grids.

    Time side: ``int_0^T e^{-2 s1 t} ||U(t)||^2 dt``; frequency side:
    ``(1/pi) int_0^S ||U(s1 + i s2)||^2 ds2`` (the negative half by conjugate
    symmetry).  ``gram`` is the L2 Gram matrix of the nodal basis; ``None``
    means plain Euclidean sums (scalar signals).
    """
    S = np.asarray(s_samples, dtype=complex).reshape(plan.ns, -1)
    U = np.asarray(t_samples, dtype=float).reshape(t_samples.shape[0], -1)
    if gram is None:
        s_norms = np.sum(np.abs(S) ** 2, axis=1)
        t_norms = np.sum(U**2, axis=1)
    else:
        s_norms = np.real(np.einsum("ij,ij->i", np.conj(S), (gram @ S.T).T))
        t_norms = np.einsum("ij,ij->i", U, (gram @ U.T).T)
    t = plan.dt * np.arange(U.shape[0])
    lhs = float(np.sum(_trapz_weights(U.shape[0], plan.dt) * np.exp(-2 * plan.s1 * t) * t_norms))
    w = np.full(plan.ns, plan.ds2)
    w[0] *= 0.5
    rhs = float(np.sum(w * s_norms) / np.pi)
    return lhs, rhs


def parseval_residual(sweep, series, plan: SweepPlan, gram=None) -> float:
    """Relative gap between the two sides of the Parseval identity (0 for zero data)."""
    if isinstance(sweep, list):
        sweep = np.stack([f.values for f in sweep])
    if isinstance(series, TimeSeriesField):
        series = series.values
    lhs, rhs = parseval_sides(sweep, series, plan, gram)
    scale = max(abs(lhs), abs(rhs))
    if scale == 0.0:
        return 0.0
    return abs(lhs - rhs) / scale
