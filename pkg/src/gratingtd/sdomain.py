"""Galerkin solve of the Laplace-domain strip problem with DtN boundary coupling.

Bilinear elements on a uniform periodic grid.  Node ``(i, k)`` sits at
``(i dx, h2 + k dz)`` and has global index ``k * nx + i``; column ``nx`` is
identified with column ``0``.  Row ``b`` / column ``a`` of the system matrix
holds ``a_h(phi_a, phi_b)``, so ``A u = load`` is the discrete variational
problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .dtn import BoundaryTrace, dtn_symbols
from .medium import MediumModel

__all__ = [
    "SolverError",
    "StripMesh",
    "SDomainField",
    "SDomainSystem",
    "VolumeOperators",
    "build_mesh",
    "volume_operators",
    "assemble_system",
    "sesquilinear_apply",
    "solve_system",
    "solve_rp",
]


class SolverError(RuntimeError):
    def __init__(self, code: str, detail: str = "", residual: float | None = None):
        self.code = code
        self.residual = residual
        super().__init__(f"{code}: {detail}" if detail else code)


@dataclass(frozen=True)
class StripMesh:
    nx: int
    nz: int
    period: float
    h1: float
    h2: float

    @property
    def ndof(self) -> int:
        return self.nx * (self.nz + 1)

    @property
    def dx(self) -> float:
        return self.period / self.nx

    @property
    def dz(self) -> float:
        return (self.h1 - self.h2) / self.nz

    @property
    def height(self) -> float:
        return self.h1 - self.h2

    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    def z(self) -> np.ndarray:
        return self.h2 + np.arange(self.nz + 1) * self.dz

    def node_index(self, i, k):
        return np.asarray(k) * self.nx + np.mod(i, self.nx)

    def boundary_nodes(self, side: int) -> np.ndarray:
        k = self.nz if side == 1 else 0
        return k * self.nx + np.arange(self.nx)


@dataclass(eq=False)
class SDomainField:
    """Nodal complex field at one Laplace frequency, tagged total/scattered/incident."""

    mesh: StripMesh
    s: complex
    values: np.ndarray
    role: str = "total"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.mesh.ndof,):
            raise ValueError(f"field needs {self.mesh.ndof} values, got {self.values.shape}")
        if self.role not in ("total", "scattered", "incident"):
            raise ValueError(f"unknown field role {self.role!r}")

    def trace(self, side: int) -> BoundaryTrace:
        return BoundaryTrace(side, self.mesh.period, self.values[self.mesh.boundary_nodes(side)])

    def grid(self) -> np.ndarray:
        """Values as an ``(nz + 1, nx)`` array."""
        return self.values.reshape(self.mesh.nz + 1, self.mesh.nx)

    def __sub__(self, other: "SDomainField") -> "SDomainField":
        if other.mesh != self.mesh or other.s != self.s:
            raise ValueError("mesh or frequency mismatch")
        roles = {("total", "incident"): "scattered", ("total", "scattered"): "incident"}
        role = roles.get((self.role, other.role))
        if role is None:
            raise ValueError(f"cannot subtract a {other.role} field from a {self.role} field")
        return SDomainField(self.mesh, self.s, self.values - other.values, role)

    def __add__(self, other: "SDomainField") -> "SDomainField":
        if other.mesh != self.mesh or other.s != self.s:
            raise ValueError("mesh or frequency mismatch")
        if {self.role, other.role} != {"scattered", "incident"}:
            raise ValueError(f"cannot add {self.role} and {other.role} fields")
        return SDomainField(self.mesh, self.s, self.values + other.values, "total")


def build_mesh(medium: MediumModel, nx: int, nz: int) -> StripMesh:
    if nx < 1 or nx & (nx - 1):
        raise ValueError(f"nx_not_power_of_two: nx={nx}")
    if nz < 1:
        raise ValueError(f"nz must be >= 1, got {nz}")
    if (medium.nx, medium.nz) != (nx, nz):
        raise ValueError(f"mesh_mismatch: medium grid {(medium.nx, medium.nz)} vs mesh {(nx, nz)}")
    return StripMesh(nx, nz, medium.period, medium.h1, medium.h2)


# 1-D linear element matrices on a unit-length reference; scaled below
_M1 = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
_K1 = np.array([[1.0, -1.0], [-1.0, 1.0]])
# _D1[b, a] = int phi_a' phi_b over the element
_D1 = np.array([[-0.5, 0.5], [-0.5, 0.5]])


@dataclass(frozen=True, eq=False)
class VolumeOperators:
    """Frequency-independent volume matrices; the s-dependent operator is ``K/s + s M + S``.

    ``K`` carries ``mu^-1``, ``M`` carries ``eps - c1^2 mu^-1`` and ``S`` is the
    skew first-order term ``c1 mu^-1 (dx u vbar - u dx vbar)``.  ``mass`` and
    ``stiff`` are the unweighted L2 and H1-seminorm Gram matrices.
    """

    K: sp.csr_matrix
    M: sp.csr_matrix
    S: sp.csr_matrix
    mass: sp.csr_matrix
    stiff: sp.csr_matrix
    c1: float


def _element_dofs(mesh: StripMesh) -> np.ndarray:
    """Global dofs of each cell's local nodes (x-major local order: (0,0),(1,0),(0,1),(1,1))."""
    i, k = np.meshgrid(np.arange(mesh.nx), np.arange(mesh.nz), indexing="ij")
    i, k = i.ravel(), k.ravel()
    return np.stack(
        [
            mesh.node_index(i, k),
            mesh.node_index(i + 1, k),
            mesh.node_index(i, k + 1),
            mesh.node_index(i + 1, k + 1),
        ],
        axis=1,
    )


def _assemble(mesh: StripMesh, local: np.ndarray, coeff: np.ndarray) -> sp.csr_matrix:
    dofs = _element_dofs(mesh)
    rows = np.repeat(dofs, 4, axis=1).ravel()
    cols = np.tile(dofs, (1, 4)).ravel()
    data = (coeff[:, None, None] * local[None, :, :]).ravel()
    return sp.coo_matrix((data, (rows, cols)), shape=(mesh.ndof, mesh.ndof)).tocsr()


def volume_operators(medium: MediumModel, mesh: StripMesh, c1: float) -> VolumeOperators:
    dx, dz = mesh.dx, mesh.dz
    # local index = ix + 2*iz, hence kron(z-part, x-part)
    mass_e = np.kron(_M1 * dz, _M1 * dx)
    stiff_x = np.kron(_M1 * dz, _K1 / dx)
    stiff_z = np.kron(_K1 / dz, _M1 * dx)
    dx_e = np.kron(_M1 * dz, _D1)
    skew_e = dx_e - dx_e.T

    inv_mu = (1.0 / medium.mu_cells).ravel()
    q = (medium.eps_cells - c1**2 / medium.mu_cells).ravel()
    ones = np.ones_like(inv_mu)
    return VolumeOperators(
        K=_assemble(mesh, stiff_x + stiff_z, inv_mu),
        M=_assemble(mesh, mass_e, q),
        S=_assemble(mesh, skew_e, c1 * inv_mu),
        mass=_assemble(mesh, mass_e, ones),
        stiff=_assemble(mesh, stiff_x + stiff_z, ones),
        c1=c1,
    )


def _dtn_block(medium: MediumModel, mesh: StripMesh, s: complex, c1: float, side: int) -> np.ndarray:
    """Nodal matrix of ``v -> <(s mu_j)^-1 B_j u, v>_h`` restricted to boundary ``side``."""
    betas = dtn_symbols(side, s, medium, c1, mesh.nx)
    _, mu_j = medium.exterior(side)
    # B = F^-1 diag(beta) F is circulant with first column ifft(beta)
    circ = scipy.linalg.circulant(np.fft.ifft(betas))
    return mesh.dx / (s * mu_j) * circ


@dataclass(eq=False)
class SDomainSystem:
    matrix: sp.csr_matrix
    load: np.ndarray
    s: complex
    mesh: StripMesh
    meta: dict = field(default_factory=dict)

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u


def assemble_system(
    medium: MediumModel,
    mesh: StripMesh,
    s: complex,
    load: BoundaryTrace | None,
    c1: float,
    *,
    ops: VolumeOperators | None = None,
    volume_load: np.ndarray | None = None,
    bottom_load: BoundaryTrace | None = None,
) -> SDomainSystem:
    """Matrix of ``a_h`` at frequency ``s`` and the load ``<(s mu1)^-1 rho, v>_h``.

    ``volume_load`` (nodal vector of ``int F vbar`` values) and ``bottom_load``
    exist only for manufactured-solution tests; the scattering problem has
    neither.
    """
    s = complex(s)
    if not s.real > 0:
        raise ValueError(f"invalid s: need Re s > 0, got {s}")
    if (medium.nx, medium.nz) != (mesh.nx, mesh.nz) or medium.period != mesh.period:
        raise ValueError("mesh_mismatch between medium and mesh")
    if ops is None:
        ops = volume_operators(medium, mesh, c1)
    elif ops.c1 != c1:
        raise ValueError("volume operators were built for a different c1")

    rows, cols, data = [], [], []
    for side in (1, 2):
        nodes = mesh.boundary_nodes(side)
        block = _dtn_block(medium, mesh, s, c1, side)
        rows.append(np.repeat(nodes, mesh.nx))
        cols.append(np.tile(nodes, mesh.nx))
        data.append(-block.ravel())
    coupling = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(mesh.ndof, mesh.ndof)
    )
    A = (ops.K * (1.0 / s) + ops.M * s + ops.S + coupling).tocsr()

    rhs = np.zeros(mesh.ndof, dtype=complex)
    if load is not None:
        if load.nx != mesh.nx or load.side != 1:
            raise ValueError("mesh_mismatch: load must be a top-boundary trace on the mesh grid")
        rhs[mesh.boundary_nodes(1)] += mesh.dx / (s * medium.mu1) * load.values
    if bottom_load is not None:
        rhs[mesh.boundary_nodes(2)] += mesh.dx / (s * medium.mu2) * bottom_load.values
    if volume_load is not None:
        rhs += volume_load
    return SDomainSystem(A, rhs, s, mesh, {"c1": c1})


# 2-point Gauss rule on [0, 1]
_GP = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])


def _gauss_eval(values: np.ndarray, mesh: StripMesh):
    """Values and gradients of a bilinear field at the 2x2 Gauss points of every cell.

    Returns arrays of shape ``(nx, nz, 2, 2)`` indexed by cell then Gauss point.
    """
    g = np.asarray(values).reshape(mesh.nz + 1, mesh.nx).T  # (nx, nz+1)
    g = np.concatenate([g, g[:1]], axis=0)  # periodic wrap in x
    u00, u10 = g[:-1, :-1], g[1:, :-1]
    u01, u11 = g[:-1, 1:], g[1:, 1:]
    xi = _GP[:, None]
    eta = _GP[None, :]
    c = lambda a: a[:, :, None, None]
    val = (
        c(u00) * (1 - xi) * (1 - eta)
        + c(u10) * xi * (1 - eta)
        + c(u01) * (1 - xi) * eta
        + c(u11) * xi * eta
    )
    ux = (c(u10 - u00) * (1 - eta) + c(u11 - u01) * eta) / mesh.dx
    uz = (c(u01 - u00) * (1 - xi) + c(u11 - u10) * xi) / mesh.dz
    ux = np.broadcast_to(ux, val.shape)
    uz = np.broadcast_to(uz, val.shape)
    return val, ux, uz


def sesquilinear_apply(
    u: SDomainField | np.ndarray,
    v: SDomainField | np.ndarray,
    medium: MediumModel,
    s: complex,
    c1: float,
    mesh: StripMesh | None = None,
) -> complex:
    """Evaluate ``a_h(u, v)`` by Gauss quadrature and FFT-based DtN, without the matrix."""
    from .dtn import apply_dtn, boundary_inner

    if isinstance(u, SDomainField):
        if isinstance(v, SDomainField) and v.mesh != u.mesh:
            raise ValueError("mesh mismatch")
        mesh = u.mesh
    if mesh is None:
        mesh = StripMesh(medium.nx, medium.nz, medium.period, medium.h1, medium.h2)
    uv = u.values if isinstance(u, SDomainField) else np.asarray(u, dtype=complex)
    vv = v.values if isinstance(v, SDomainField) else np.asarray(v, dtype=complex)
    s = complex(s)

    uq, uxq, uzq = _gauss_eval(uv, mesh)
    vq, vxq, vzq = _gauss_eval(vv, mesh)
    w = 0.25 * mesh.dx * mesh.dz  # Gauss weights on the cell
    inv_mu = (1.0 / medium.mu_cells)[:, :, None, None]
    q = (medium.eps_cells - c1**2 / medium.mu_cells)[:, :, None, None]
    grad = inv_mu / s * (uxq * np.conj(vxq) + uzq * np.conj(vzq))
    zero_order = q * s * uq * np.conj(vq)
    first_order = c1 * inv_mu * (uxq * np.conj(vq) - uq * np.conj(vxq))
    total = w * np.sum(grad + zero_order + first_order)

    for side in (1, 2):
        _, mu_j = medium.exterior(side)
        tu = BoundaryTrace(side, mesh.period, uv[mesh.boundary_nodes(side)])
        tv = BoundaryTrace(side, mesh.period, vv[mesh.boundary_nodes(side)])
        total -= boundary_inner(apply_dtn(tu, s, medium, c1), tv) / (s * mu_j)
    return complex(total)


def solve_system(system: SDomainSystem, tol: float = 1e-10) -> SDomainField:
    """Sparse LU solve; raises ``SolverError('solver_failure')`` if the residual misses ``tol``."""
    b = system.load
    if not np.any(b):
        return SDomainField(system.mesh, system.s, np.zeros(system.mesh.ndof, dtype=complex))
    try:
        lu = spla.splu(system.matrix.tocsc())
        u = lu.solve(b)
    except RuntimeError as exc:  # singular factor
        raise SolverError("solver_failure", f"factorization failed at s={system.s}: {exc}") from exc
    res = float(np.linalg.norm(system.matrix @ u - b) / np.linalg.norm(b))
    if not np.isfinite(res) or res > tol:
        # one step of iterative refinement before giving up
        u = u + lu.solve(b - system.matrix @ u)
        res = float(np.linalg.norm(system.matrix @ u - b) / np.linalg.norm(b))
        if not np.isfinite(res) or res > tol:
            raise SolverError("solver_failure", f"relative residual {res:.3e} at s={system.s}", res)
    return SDomainField(system.mesh, system.s, u, "total")


def solve_rp(
    medium: MediumModel,
    mesh: StripMesh,
    pulse,
    s: complex,
    *,
    ops: VolumeOperators | None = None,
) -> SDomainField:
    """Total field at frequency ``s`` for the incident pulse."""
    from .incidence import rho_hat

    load = rho_hat(pulse, s, mesh.nx, mesh.period)
    system = assemble_system(medium, mesh, s, load, pulse.c1, ops=ops)
    field_ = solve_system(system)
    field_.role = "total"
    return field_
