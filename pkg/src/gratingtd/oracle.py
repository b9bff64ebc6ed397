"""Independent reference solutions used by the tests and the convergence studies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dtn import BoundaryTrace, apply_dtn, beta_from_params
from .incidence import IncidentPulse, incident_trace_s, rho_coefficient
from .medium import MediumModel, build_layered
from .sdomain import StripMesh, _GP, assemble_system, build_mesh, solve_rp, solve_system

__all__ = [
    "OracleError",
    "LayerReference",
    "homogeneous_reference",
    "flat_layer_reference",
    "dense_dtn_reference",
    "ManufacturedField",
    "MMSData",
    "mms_reference",
    "solve_manufactured",
    "convergence_table",
    "ConvergenceRow",
    "oracle_convergence",
]


class OracleError(ValueError):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code


def homogeneous_reference(pulse: IncidentPulse, s: complex, z, h1: float):
    """Exact total field of a homogeneous strip: the incident field itself."""
    return incident_trace_s(pulse, s, z, h1)


@dataclass
class LayerReference:
    """Closed-form mode-``n`` solution for a flat stack with at most one interface.

    In layer ``l`` the field is ``A_l e^{b_l (z - h0)} + B_l e^{-b_l (z - h0)}``
    with ``b_l`` the layer symbol.  ``R`` is the ratio of the upward to the
    downward amplitude of the top layer at ``h0``; ``T`` the downward amplitude
    of the bottom layer over the downward amplitude of the top layer.
    """

    s: complex
    n: int
    h0: float | None
    R: complex
    T: complex
    h1: float
    h2: float
    betas: tuple
    mus: tuple
    amplitudes: np.ndarray
    residuals: dict = field(default_factory=dict)

    def _layer(self, z):
        if self.h0 is None:
            return np.zeros(np.shape(z), dtype=int)
        return np.where(np.asarray(z) >= self.h0, 0, 1)

    def __call__(self, z):
        return self._eval(z, 0)

    def dz(self, z):
        return self._eval(z, 1)

    def _eval(self, z, deriv):
        z = np.asarray(z, dtype=float)
        lay = self._layer(z)
        ref = 0.0 if self.h0 is None else self.h0
        b = np.asarray(self.betas)[lay]
        A = self.amplitudes[2 * lay]
        B = self.amplitudes[2 * lay + 1]
        up, down = np.exp(b * (z - ref)), np.exp(-b * (z - ref))
        out = A * up + B * down if deriv == 0 else b * (A * up - B * down)
        return complex(out) if out.ndim == 0 else out


def _layer_values(medium: MediumModel):
    """Distinct ``(eps, mu)`` of an x-independent stack and the interface height."""
    if not medium.is_x_independent():
        raise OracleError("not_layered", "flat_layer_reference needs an x-independent medium")
    col_e, col_m = medium.eps_cells[0], medium.mu_cells[0]
    change = np.nonzero((np.diff(col_e) != 0) | (np.diff(col_m) != 0))[0]
    if change.size > 1:
        raise OracleError("too_many_interfaces", f"found {change.size} interfaces, at most one supported")
    dz = medium.height / medium.nz
    if change.size == 0:
        return [(col_e[-1], col_m[-1])], None
    k = change[0] + 1
    return [(col_e[-1], col_m[-1]), (col_e[0], col_m[0])], medium.h2 + k * dz


def flat_layer_reference(pulse: IncidentPulse, s: complex, medium: MediumModel, n: int = 0) -> LayerReference:
    """Solve the per-mode ODE with interface conditions and both boundary conditions.

    Unknowns are the two exponential amplitudes per layer; equations are
    ``dz U = b1 U + rho_n`` at ``h1``, ``-dz U = b2 U`` at ``h2`` and, with an
    interface, continuity of ``U`` and ``mu^-1 dz U``.
    """
    s = complex(s)
    c1 = pulse.c1
    layers, h0 = _layer_values(medium)
    alpha = 2 * math.pi * n / medium.period
    betas = tuple(beta_from_params(e * m, alpha, c1, s) for e, m in layers)
    mus = tuple(m for _, m in layers)
    ext_b1 = beta_from_params(medium.eps1 * medium.mu1, alpha, c1, s)
    ext_b2 = beta_from_params(medium.eps2 * medium.mu2, alpha, c1, s)
    rho_n = rho_coefficient(pulse, s) if n == 0 else 0.0
    ref = 0.0 if h0 is None else h0
    nl = len(layers)

    def row(lay, z, kind):
        # coefficients of (A_lay, B_lay) for value (0) or derivative (1) at z
        b = betas[lay]
        up, down = np.exp(b * (z - ref)), np.exp(-b * (z - ref))
        r = np.zeros(2 * nl, dtype=complex)
        r[2 * lay : 2 * lay + 2] = (up, down) if kind == 0 else (b * up, -b * down)
        return r

    top, bot = 0, nl - 1
    rows = [row(top, medium.h1, 1) - ext_b1 * row(top, medium.h1, 0), -row(bot, medium.h2, 1) - ext_b2 * row(bot, medium.h2, 0)]
    rhs = [rho_n, 0.0]
    if nl == 2:
        rows.append(row(0, h0, 0) - row(1, h0, 0))
        rows.append(row(0, h0, 1) / mus[0] - row(1, h0, 1) / mus[1])
        rhs += [0.0, 0.0]
    mat = np.array(rows)
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > 1e14:
        raise OracleError("singular_system", f"interface system singular at s={s}, cond={cond:.3e}")
    amps = np.linalg.solve(mat, np.array(rhs, dtype=complex))
    B0 = amps[1]
    R = amps[0] / B0 if B0 != 0 else 0.0
    T = amps[2 * bot + 1] / B0 if B0 != 0 else 0.0
    out = LayerReference(s, n, h0, complex(R), complex(T), medium.h1, medium.h2, betas, mus, amps)

    scale = max(abs(rho_n), np.max(np.abs(amps)), 1e-300)
    res = {
        "tbc_top": abs(out.dz(medium.h1) - ext_b1 * out(medium.h1) - rho_n) / scale,
        "tbc_bottom": abs(-out.dz(medium.h2) - ext_b2 * out(medium.h2)) / scale,
    }
    if h0 is not None:
        # both layer expansions evaluated at h0, where the exponentials are 1
        a0, b0_, a1, b1_ = amps
        res["continuity"] = abs((a0 + b0_) - (a1 + b1_)) / scale
        res["flux"] = abs(betas[0] * (a0 - b0_) / mus[0] - betas[1] * (a1 - b1_) / mus[1]) / scale
    out.residuals = res
    return out


def dense_dtn_reference(trace: BoundaryTrace, s: complex, medium: MediumModel, c1: float) -> BoundaryTrace:
    """Apply the DtN operator by explicit summation over modes and nodes.

    The Nyquist coefficient of an even grid is split evenly between the modes
    ``+nx/2`` and ``-nx/2``, each with its own symbol.
    """
    nx = trace.nx
    eps_j, mu_j = medium.exterior(trace.side)
    idx = np.arange(nx)
    ns = list(range(-(nx // 2), nx - nx // 2))
    if nx % 2 == 0:
        ns.append(nx // 2)
    out = np.zeros(nx, dtype=complex)
    for n in ns:
        a = 2 * math.pi * n / trace.period
        # reduce n*i modulo nx in integers so the phase angle stays in [0, 2 pi)
        phase = np.exp(2j * math.pi * ((n * idx) % nx) / nx)
        coef = np.sum(trace.values * np.conj(phase)) / nx
        if nx % 2 == 0 and abs(n) == nx // 2:
            coef *= 0.5
        out += beta_from_params(eps_j * mu_j, a, c1, s) * coef * phase
    return BoundaryTrace(trace.side, trace.period, out)


@dataclass(frozen=True)
class ManufacturedField:
    """Analytic periodic field with the derivatives needed to form its load."""

    value: Callable
    dx: Callable
    dz: Callable
    laplacian: Callable


@dataclass(eq=False)
class MMSData:
    volume_load: np.ndarray
    top_load: BoundaryTrace
    bottom_load: BoundaryTrace
    exact: np.ndarray


def _gauss_points(mesh: StripMesh):
    """Physical Gauss points and the bilinear shape values of each cell."""
    x0 = mesh.dx * np.arange(mesh.nx)
    z0 = mesh.h2 + mesh.dz * np.arange(mesh.nz)
    xi, eta = np.meshgrid(_GP, _GP, indexing="ij")  # (2,2)
    X = x0[:, None, None, None] + mesh.dx * xi[None, None]
    Z = z0[None, :, None, None] + mesh.dz * eta[None, None]
    shapes = [(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta]
    return X, Z, shapes


def mms_reference(w: ManufacturedField, medium: MediumModel, s: complex, c1: float, mesh: StripMesh | None = None) -> MMSData:
    """Volume and boundary loads for which the strip problem is solved by ``w``.

    ``F = (eps - c1^2/mu) s w - (s mu)^-1 lap w + 2 c1 mu^-1 dx w`` and
    ``g_j = dnu w - B_j w``.  Test-only: uniform ``mu`` is required because the
    divergence form is taken cell by cell.
    """
    s = complex(s)
    if mesh is None:
        mesh = build_mesh(medium, medium.nx, medium.nz)
    if np.ptp(medium.mu_cells) != 0:
        raise OracleError("nonuniform_mu", "manufactured loads assume uniform mu")
    zs = np.linspace(medium.h2, medium.h1, 7)
    if not np.allclose(w.value(0.0 * zs, zs), w.value(0.0 * zs + medium.period, zs), rtol=1e-10, atol=1e-12):
        raise OracleError("non_periodic", "manufactured field is not periodic in x")

    mu = float(medium.mu_cells.flat[0])
    X, Z, shapes = _gauss_points(mesh)
    q = (medium.eps_cells - c1**2 / medium.mu_cells)[:, :, None, None]
    F = q * s * w.value(X, Z) - w.laplacian(X, Z) / (s * mu) + 2 * c1 / mu * w.dx(X, Z)
    weight = 0.25 * mesh.dx * mesh.dz
    i, k = np.meshgrid(np.arange(mesh.nx), np.arange(mesh.nz), indexing="ij")
    corners = [(i, k), (i + 1, k), (i, k + 1), (i + 1, k + 1)]
    vol = np.zeros(mesh.ndof, dtype=complex)
    for (ci, ck), phi in zip(corners, shapes):
        contrib = weight * np.sum(F * phi[None, None], axis=(2, 3))
        np.add.at(vol, mesh.node_index(ci, ck).ravel(), contrib.ravel())

    x = mesh.x()
    loads = []
    for side, z, sign in ((1, medium.h1, 1.0), (2, medium.h2, -1.0)):
        zz = np.full_like(x, z)
        vals = w.value(x, zz).astype(complex)
        bw = apply_dtn(BoundaryTrace(side, mesh.period, vals), s, medium, c1).values
        loads.append(BoundaryTrace(side, mesh.period, sign * w.dz(x, zz) - bw))
    Xn, Zn = np.meshgrid(mesh.x(), mesh.z(), indexing="xy")
    exact = w.value(Xn, Zn).astype(complex).ravel()
    return MMSData(vol, loads[0], loads[1], exact)


def solve_manufactured(w: ManufacturedField, medium: MediumModel, s: complex, c1: float) -> tuple[np.ndarray, np.ndarray]:
    """Discrete solution and exact nodal values for a manufactured field."""
    mesh = build_mesh(medium, medium.nx, medium.nz)
    data = mms_reference(w, medium, s, c1, mesh)
    system = assemble_system(medium, mesh, s, data.top_load, c1, volume_load=data.volume_load, bottom_load=data.bottom_load)
    return solve_system(system).values, data.exact


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    error: float
    observed_order: float


def convergence_table(hs, errors) -> list[ConvergenceRow]:
    """Observed orders ``log(e_{k-1}/e_k)/log(h_{k-1}/h_k)``; NaN for the first row."""
    rows = []
    for k, (h, e) in enumerate(zip(hs, errors)):
        if k == 0 or errors[k - 1] <= 0 or e <= 0:
            order = math.nan
        else:
            order = math.log(errors[k - 1] / e) / math.log(hs[k - 1] / h)
        rows.append(ConvergenceRow(float(h), float(e), order))
    return rows


def oracle_convergence(
    kind: str,
    pulse: IncidentPulse,
    s: complex,
    sizes=(16, 32, 64),
    *,
    period: float = 1.0,
    h1: float = 1.0,
    h2: float = 0.0,
    lower: tuple[float, float] = (4.0, 1.0),
) -> list[ConvergenceRow]:
    """Solver error against the closed-form references on square meshes ``n x n``.

    ``kind`` is ``"homogeneous"`` or ``"two_layer"`` (interface at mid-height,
    lower layer ``(eps, mu) = lower``).  The error is the relative Euclidean
    norm over all nodes.
    """
    errors, hs = [], []
    eps1 = pulse.eps1mu1
    for n in sizes:
        if kind == "homogeneous":
            layers = [(h1, eps1, 1.0)]
        elif kind == "two_layer":
            layers = [(h1, eps1, 1.0), (0.5 * (h1 + h2), lower[0], lower[1])]
        else:
            raise OracleError("unknown_kind", kind)
        medium = build_layered(layers, period, h1, h2, n, n)
        mesh = build_mesh(medium, n, n)
        u = solve_rp(medium, mesh, pulse, s).grid()
        if kind == "homogeneous":
            ref = homogeneous_reference(pulse, s, mesh.z(), h1)
        else:
            ref = flat_layer_reference(pulse, s, medium)(mesh.z())
        ref_grid = np.broadcast_to(np.asarray(ref)[:, None], u.shape)
        errors.append(float(np.linalg.norm(u - ref_grid) / np.linalg.norm(ref_grid)))
        hs.append(mesh.dz)
    return convergence_table(hs, errors)
