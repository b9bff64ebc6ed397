"""Incident plane-wave pulse, its Laplace transform, and the boundary load rho."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import integrate, interpolate

__all__ = [
    "IncidentPulse",
    "pulse_eval",
    "pulse_laplace",
    "laplace_quadrature",
    "incident_trace_s",
    "rho_coefficient",
    "rho_hat",
    "rho_time",
    "load_pulse_table",
]


@dataclass(frozen=True, eq=False)
class IncidentPulse:
    """Causal pulse ``f`` travelling at angle ``theta`` through the upper half-plane.

    The polynomial-exponential shape is ``f(tau) = A (tau/sigma)^m exp(-tau/sigma)``
    for ``tau > 0``.  A tabulated shape interpolates ``(tau, f)`` samples with a
    cubic spline that is clamped to zero at ``tau = 0`` and vanishes after the
    last sample.

    ``direction="down"`` sends the wave toward the strip (the default);
    ``direction="up"`` uses the upward-travelling sign, which produces a zero
    boundary load.
    """

    order: int = 4
    sigma: float = 1.0
    amplitude: float = 1.0
    delay: float = 0.0
    theta: float = math.pi / 2
    eps1mu1: float = 1.0
    shape: str = "polyexp"
    direction: str = "down"
    table: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if not (0.0 < self.theta < math.pi):
            raise ValueError(f"theta must lie in the open interval (0, pi), got {self.theta}")
        if self.shape not in ("polyexp", "tabulated"):
            raise ValueError(f"unknown pulse shape {self.shape!r}")
        if self.direction not in ("down", "up"):
            raise ValueError(f"unknown incidence direction {self.direction!r}")
        if self.shape == "polyexp":
            if int(self.order) != self.order or self.order < 0:
                raise ValueError(f"pulse order must be a nonnegative integer, got {self.order}")
            if not self.sigma > 0:
                raise ValueError(f"pulse sigma must be positive, got {self.sigma}")
        elif self.table is None:
            raise ValueError("tabulated pulse needs a (tau, f) table")
        if self.delay < 0:
            raise ValueError(f"delay must be nonnegative, got {self.delay}")
        if not self.eps1mu1 > 0:
            raise ValueError("eps1*mu1 must be positive")

    @property
    def c(self) -> float:
        return 1.0 / math.sqrt(self.eps1mu1)

    @property
    def c1(self) -> float:
        return math.cos(self.theta) / self.c

    @property
    def c2(self) -> float:
        return math.sin(self.theta) / self.c

    @property
    def support_end(self) -> float:
        """Time after which f is negligible (tabulated: exactly zero)."""
        if self.shape == "tabulated":
            return float(self.table[0][-1])
        # (tau/sigma)^m e^{-tau/sigma} < 1e-16 of its peak well before this
        return self.sigma * (self.order + 40.0)

    def with_amplitude(self, amplitude: float) -> "IncidentPulse":
        return replace(self, amplitude=amplitude)

    def _spline(self):
        spl = self.__dict__.get("_spl")
        if spl is None:
            tau, f = (np.asarray(a, dtype=float) for a in self.table)
            spl = interpolate.CubicSpline(tau, f, bc_type="clamped")
            object.__setattr__(self, "_spl", spl)
        return spl


def load_pulse_table(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read a two-column ``tau,f`` CSV (an optional header row is skipped)."""
    taus, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                t, v = float(row[0]), float(row[1])
            except ValueError:
                if taus:
                    raise
                continue
            taus.append(t)
            vals.append(v)
    tau, f = np.array(taus), np.array(vals)
    if tau.size < 4 or np.any(np.diff(tau) <= 0) or tau[0] != 0.0:
        raise ValueError("pulse table needs >= 4 rows with increasing tau starting at 0")
    if f[0] != 0.0:
        raise ValueError("tabulated pulse must vanish at tau = 0 (causality)")
    return tau, f


def pulse_eval(pulse: IncidentPulse, tau, k: int = 0):
    """k-th derivative of the pulse profile at ``tau`` (scalar or array), k <= 3."""
    tau = np.asarray(tau, dtype=float)
    if k not in (0, 1, 2, 3):
        raise ValueError(f"derivative order must be 0..3, got {k}")
    if pulse.shape == "tabulated":
        spl = pulse._spline()
        inside = (tau > 0) & (tau < pulse.table[0][-1])
        out = np.where(inside, spl(np.clip(tau, 0, None), k), 0.0)
        return float(out) if out.ndim == 0 else out

    m, sig, A = int(pulse.order), pulse.sigma, pulse.amplitude
    pos = tau > 0
    x = np.where(pos, tau / sig, 1.0)
    # d^k/dtau^k [x^m e^{-x}] = sig^{-k} e^{-x} sum_j C(k,j) (-1)^{k-j} m!/(m-j)! x^{m-j}
    acc = np.zeros_like(x)
    for j in range(k + 1):
        if j > m:
            continue
        coeff = math.comb(k, j) * (-1) ** (k - j) * math.perm(m, j)
        acc = acc + coeff * x ** (m - j)
    val = A * sig ** (-k) * acc * np.exp(-x)
    out = np.where(pos, val, 0.0)
    return float(out) if out.ndim == 0 else out


def laplace_quadrature(func, s: complex, t0: float = 0.0, t1: float = np.inf, points=None) -> complex:
    """Adaptive quadrature of ``int_t0^t1 e^{-s t} func(t) dt`` for real ``func``."""
    s = complex(s)
    s1, s2 = s.real, s.imag
    opts = dict(limit=2000, epsabs=0.0, epsrel=1e-12)
    if np.isfinite(t1) and s2 != 0.0:
        re = integrate.quad(lambda t: math.exp(-s1 * t) * func(t), t0, t1, weight="cos", wvar=s2, **opts)[0]
        im = integrate.quad(lambda t: math.exp(-s1 * t) * func(t), t0, t1, weight="sin", wvar=s2, **opts)[0]
        return complex(re, -im)
    if np.isfinite(t1):
        kw = {} if points is None else {"points": points}
        re = integrate.quad(lambda t: math.exp(-s1 * t) * func(t), t0, t1, **opts, **kw)[0]
        return complex(re, 0.0)
    re = integrate.quad(lambda t: math.exp(-s1 * t) * math.cos(s2 * t) * func(t), t0, t1, **opts)[0]
    im = integrate.quad(lambda t: math.exp(-s1 * t) * math.sin(s2 * t) * func(t), t0, t1, **opts)[0]
    return complex(re, -im)


def pulse_laplace(pulse: IncidentPulse, s):
    """Laplace transform of the pulse profile; closed form for ``polyexp``.

    Accepts scalar or array ``s`` (``Re s > 0``) for the closed form; tabulated
    pulses are integrated numerically one frequency at a time.
    """
    s_arr = np.asarray(s, dtype=complex)
    if np.any(s_arr.real <= 0):
        raise ValueError("Laplace transform requires Re s > 0")
    if pulse.shape == "polyexp":
        m, sig = int(pulse.order), pulse.sigma
        out = pulse.amplitude * math.factorial(m) * sig ** (-m) / (s_arr + 1.0 / sig) ** (m + 1)
        return complex(out) if out.ndim == 0 else out
    end = pulse.support_end
    vals = [laplace_quadrature(lambda t: pulse_eval(pulse, t), sv, 0.0, end) for sv in s_arr.ravel()]
    out = np.array(vals).reshape(s_arr.shape)
    return complex(out) if out.ndim == 0 else out


def incident_trace_s(pulse: IncidentPulse, s, z, h1: float):
    """Laplace-domain incident field at height ``z <= h1`` (x-independent)."""
    z = np.asarray(z, dtype=float)
    if np.any(z > h1):
        raise ValueError(f"incident trace is defined for z <= h1={h1}")
    s = np.asarray(s, dtype=complex)
    sign = 1.0 if pulse.direction == "down" else -1.0
    out = np.exp(-s * pulse.delay) * np.exp(sign * s * pulse.c2 * (z - h1)) * pulse_laplace(pulse, s)
    return complex(out) if np.ndim(out) == 0 else out


def rho_coefficient(pulse: IncidentPulse, s):
    """Mode-0 Fourier coefficient of the Laplace-domain boundary load on the top boundary.

    Equals ``(dz U_inc - B1 U_inc)(h1)`` with the closed-form mode-0 symbol
    ``-c2 s``; every other mode vanishes because the incident field is
    x-independent after the phase change of variables.
    """
    s = np.asarray(s, dtype=complex)
    if np.any(s.real <= 0):
        raise ValueError("boundary load requires Re s > 0")
    beta0 = -pulse.c2 * s
    dz_factor = pulse.c2 * s if pulse.direction == "down" else -pulse.c2 * s
    u_top = np.exp(-s * pulse.delay) * pulse_laplace(pulse, s)
    out = (dz_factor - beta0) * u_top
    return complex(out) if np.ndim(out) == 0 else out


def rho_hat(pulse: IncidentPulse, s: complex, nx: int, period: float):
    """Boundary load as a trace on the top boundary with ``nx`` nodes."""
    from .dtn import BoundaryTrace

    values = np.full(nx, rho_coefficient(pulse, s), dtype=complex)
    return BoundaryTrace(side=1, period=period, values=values)


def rho_time(pulse: IncidentPulse, t, k: int = 0):
    """Time-domain load ``rho = 2 c2 f'(t - delay)`` and its time derivatives (k <= 2)."""
    if k not in (0, 1, 2):
        raise ValueError(f"rho derivative order must be 0..2, got {k}")
    t = np.asarray(t, dtype=float)
    if pulse.direction == "up":
        out = np.zeros_like(t)
    else:
        out = 2.0 * pulse.c2 * pulse_eval(pulse, t - pulse.delay, k + 1)
    return float(out) if np.ndim(out) == 0 else out
