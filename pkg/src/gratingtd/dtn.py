"""Fourier-side machinery on the artificial boundaries.

Mode ``n`` of a Lambda-periodic trace is ``exp(i alpha_n x)`` with
``alpha_n = 2 pi n / Lambda``.  Nodal traces use the ``numpy.fft`` ordering,
``u_n = fft(u)[n] / nx``, so ``u(x_i) = sum_n u_n exp(i alpha_n x_i)``.

The Nyquist mode of an even grid is shared by ``n = +nx/2`` and ``n = -nx/2``;
its symbol is the mean of the two, which keeps the discrete operator
compatible with real time-domain data (``B(conj s) = conj B(s)``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .medium import MediumModel

__all__ = [
    "BoundaryTrace",
    "mode_numbers",
    "alphas",
    "beta_from_params",
    "beta_symbol",
    "dtn_symbols",
    "apply_dtn",
    "boundary_inner",
    "hs_boundary_norm",
    "bilinear_x_symbols",
    "hsp_volume_norm",
    "extend_field_exterior",
]


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Complex nodal values of a field on boundary ``side`` (1 = top, 2 = bottom)."""

    side: int
    period: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 1:
            raise ValueError("trace values must be one-dimensional")
        object.__setattr__(self, "values", vals)

    @property
    def nx(self) -> int:
        return self.values.size

    def coefficients(self) -> np.ndarray:
        return np.fft.fft(self.values) / self.nx

    @classmethod
    def from_coefficients(cls, side: int, period: float, coeffs) -> "BoundaryTrace":
        coeffs = np.asarray(coeffs, dtype=complex)
        return cls(side, period, np.fft.ifft(coeffs) * coeffs.size)

    def __add__(self, other):
        _check_compatible(self, other)
        return BoundaryTrace(self.side, self.period, self.values + other.values)

    def __sub__(self, other):
        _check_compatible(self, other)
        return BoundaryTrace(self.side, self.period, self.values - other.values)

    def __mul__(self, alpha):
        return BoundaryTrace(self.side, self.period, self.values * alpha)

    __rmul__ = __mul__


def _check_compatible(a: BoundaryTrace, b: BoundaryTrace):
    if a.side != b.side or a.nx != b.nx or a.period != b.period:
        raise ValueError("dimension mismatch between boundary traces")


def mode_numbers(nx: int) -> np.ndarray:
    return np.rint(np.fft.fftfreq(nx) * nx).astype(int)


def alphas(nx: int, period: float) -> np.ndarray:
    return 2.0 * np.pi * mode_numbers(nx) / period


def beta_from_params(epsmu, alpha, c1: float, s):
    """Outgoing symbol ``-(eps mu s^2 + (alpha + i c1 s)^2)^{1/2}`` with Re < 0.

    Vectorized over ``epsmu``, ``alpha`` and ``s``.
    """
    s = np.asarray(s, dtype=complex)
    if np.any(s.real <= 0):
        raise ValueError("DtN symbols need Re s > 0")
    sq = epsmu * s**2 + (alpha + 1j * c1 * s) ** 2
    # branch cut of the principal root; unreachable for Re s > 0
    on_cut = (sq.imag == 0) & (sq.real <= 0)
    if np.any(on_cut):
        raise FloatingPointError("beta^2 on the closed negative real axis")
    root = np.sqrt(sq)
    beta = np.where(root.real >= 0, -root, root)
    return complex(beta) if np.ndim(beta) == 0 else beta


def beta_symbol(j: int, n: int, s: complex, medium: MediumModel, c1: float) -> complex:
    """Symbol ``beta_j^(n)(s)`` of the DtN operator on boundary ``j``."""
    eps_j, mu_j = medium.exterior(j)
    alpha = 2.0 * np.pi * n / medium.period
    return beta_from_params(eps_j * mu_j, alpha, c1, s)


def dtn_symbols(j: int, s: complex, medium: MediumModel, c1: float, nx: int) -> np.ndarray:
    """Symbols for the ``nx`` representable modes in FFT order (Nyquist averaged)."""
    eps_j, mu_j = medium.exterior(j)
    n = mode_numbers(nx)
    betas = beta_from_params(eps_j * mu_j, 2.0 * np.pi * n / medium.period, c1, s)
    betas = np.atleast_1d(np.asarray(betas, dtype=complex)).copy()
    if nx % 2 == 0 and nx > 1:
        plus = beta_from_params(eps_j * mu_j, 2.0 * np.pi * (nx // 2) / medium.period, c1, s)
        betas[nx // 2] = 0.5 * (betas[nx // 2] + plus)
    return betas


def apply_dtn(trace: BoundaryTrace, s: complex, medium: MediumModel, c1: float) -> BoundaryTrace:
    """DFT, multiply mode n by its symbol, inverse DFT."""
    if trace.period != medium.period:
        raise ValueError("dimension mismatch: trace period differs from medium period")
    betas = dtn_symbols(trace.side, s, medium, c1, trace.nx)
    return BoundaryTrace(trace.side, trace.period, np.fft.ifft(betas * np.fft.fft(trace.values)))


def boundary_inner(u: BoundaryTrace, v: BoundaryTrace) -> complex:
    """``<u, v>`` on the boundary with uniform weights ``dx``."""
    _check_compatible(u, v)
    return complex(u.period / u.nx * np.vdot(v.values, u.values))


def hs_boundary_norm(trace: BoundaryTrace, s: complex, lam: float) -> float:
    """Weighted trace norm ``(Lambda sum_n (|s|^2 + alpha_n^2)^lam |u_n|^2)^{1/2}``.

    The factor ``Lambda`` makes the norm dual to itself under ``boundary_inner``.
    """
    a = alphas(trace.nx, trace.period)
    w = (abs(s) ** 2 + a**2) ** lam
    return float(np.sqrt(trace.period * np.sum(w * np.abs(trace.coefficients()) ** 2)))


def bilinear_x_symbols(nx: int, period: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-mode ``(mass, stiffness)`` of a periodic piecewise-linear function in x.

    For nodal values ``exp(i alpha_n x_i)`` the interpolant has
    ``int |u|^2 dx = Lambda (2 + cos t)/3`` and ``int |u'|^2 dx = Lambda (2 - 2 cos t)/dx^2``
    with ``t = 2 pi n / nx``.
    """
    t = 2.0 * np.pi * mode_numbers(nx) / nx
    dx = period / nx
    mass = period * (2.0 + np.cos(t)) / 3.0
    stiff = period * (2.0 - 2.0 * np.cos(t)) / dx**2
    return mass, stiff


def hsp_volume_norm(values: np.ndarray, s: complex, nx: int, nz: int, period: float, height: float) -> float:
    """``(||grad u||^2 + ||s u||^2)^{1/2}`` of a bilinear field, mode by mode.

    ``values`` are nodal with index ``k * nx + i``.  Each z-line is Fourier
    transformed in x; the z-profiles are integrated exactly as piecewise-linear
    functions, and the x-direction uses the exact bilinear symbols
    (``bilinear_x_symbols``).
    """
    u = np.asarray(values, dtype=complex).reshape(nz + 1, nx)
    coeffs = np.fft.fft(u, axis=1) / nx  # (nz+1, nx)
    dz = height / nz
    a, b = coeffs[:-1], coeffs[1:]
    # exact integrals of |linear|^2 and |slope|^2 over each z-segment
    l2_z = dz / 3.0 * (np.abs(a) ** 2 + np.abs(b) ** 2 + np.real(a * np.conj(b)))
    h1_z = np.abs(b - a) ** 2 / dz
    l2_z, h1_z = l2_z.sum(axis=0), h1_z.sum(axis=0)
    mass, stiff = bilinear_x_symbols(nx, period)
    total = np.sum((abs(s) ** 2 * mass + stiff) * l2_z + mass * h1_z)
    return float(np.sqrt(max(total, 0.0)))


def extend_field_exterior(trace: BoundaryTrace, s: complex, medium: MediumModel, pulse, z: float) -> BoundaryTrace:
    """Evaluate the total field at height ``z`` outside the strip by Rayleigh expansion.

    Above the strip the scattered part ``U - U_inc`` is propagated by
    ``exp(beta_1 (z - h1))`` and the incident field is added back; below it
    the total field is propagated by ``exp(-beta_2 (z - h2))``.
    """
    from .incidence import incident_trace_s

    c1 = pulse.c1
    if z >= medium.h1 and trace.side == 1:
        dist = z - medium.h1
        u_inc_top = incident_trace_s(pulse, s, medium.h1, medium.h1)
        coeffs = trace.coefficients()
        coeffs[0] -= u_inc_top
        betas = dtn_symbols(1, s, medium, c1, trace.nx)
        coeffs = coeffs * np.exp(betas * dist)
        # the incident wave travels on toward -z, so beyond h1 it is the analytic continuation
        coeffs[0] += _incident_continued(pulse, s, z, medium.h1)
        return BoundaryTrace.from_coefficients(1, trace.period, coeffs)
    if z <= medium.h2 and trace.side == 2:
        betas = dtn_symbols(2, s, medium, c1, trace.nx)
        coeffs = trace.coefficients() * np.exp(-betas * (z - medium.h2))
        return BoundaryTrace.from_coefficients(2, trace.period, coeffs)
    raise ValueError(
        f"z={z} must lie above h1={medium.h1} with a top trace or below h2={medium.h2} with a bottom trace"
    )


def _incident_continued(pulse, s, z, h1):
    from .incidence import pulse_laplace

    sign = 1.0 if pulse.direction == "down" else -1.0
    return np.exp(-s * pulse.delay) * np.exp(sign * s * pulse.c2 * (z - h1)) * pulse_laplace(pulse, s)
