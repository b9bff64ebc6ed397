"""Periodic medium on the strip h2 <= z <= h1 with cellwise-constant coefficients."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MediumError",
    "MediumModel",
    "build_layered",
    "build_binary_grating",
    "lamellar_profile",
    "validate",
    "swap_polarization",
]


class MediumError(ValueError):
    """Raised when a medium violates one of its named invariants."""

    def __init__(self, code: str, detail: str = ""):
        self.code = code
        super().__init__(f"{code}: {detail}" if detail else code)


@dataclass(frozen=True, eq=False)
class MediumModel:
    """Cellwise-constant permittivity/permeability on an ``nx`` x ``nz`` grid.

    ``eps_cells[i, k]`` is the value in the cell ``[x_i, x_{i+1}] x [z_k, z_{k+1}]``
    with ``z_0 = h2``.  The exterior half-planes carry the constants
    ``(eps1, mu1)`` above ``h1`` and ``(eps2, mu2)`` below ``h2``.
    """

    period: float
    h1: float
    h2: float
    eps_cells: np.ndarray
    mu_cells: np.ndarray
    eps1: float
    mu1: float
    eps2: float
    mu2: float
    polarization: str = "TE"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        eps = np.array(self.eps_cells, dtype=float)
        mu = np.array(self.mu_cells, dtype=float)
        if eps.ndim != 2 or eps.shape != mu.shape:
            raise MediumError("shape", f"eps {eps.shape} and mu {mu.shape} must be equal 2-D arrays")
        eps.setflags(write=False)
        mu.setflags(write=False)
        object.__setattr__(self, "eps_cells", eps)
        object.__setattr__(self, "mu_cells", mu)
        if self.polarization not in ("TE", "TM"):
            raise MediumError("polarization", f"unknown tag {self.polarization!r}")

    @property
    def nx(self) -> int:
        return self.eps_cells.shape[0]

    @property
    def nz(self) -> int:
        return self.eps_cells.shape[1]

    @property
    def height(self) -> float:
        return self.h1 - self.h2

    @property
    def eps_max(self) -> float:
        return float(max(self.eps_cells.max(), self.eps1, self.eps2))

    @property
    def mu_max(self) -> float:
        return float(max(self.mu_cells.max(), self.mu1, self.mu2))

    @property
    def eps_min(self) -> float:
        return float(min(self.eps_cells.min(), self.eps1, self.eps2))

    @property
    def mu_min(self) -> float:
        return float(min(self.mu_cells.min(), self.mu1, self.mu2))

    def exterior(self, side: int) -> tuple[float, float]:
        """``(eps_j, mu_j)`` of the half-plane adjacent to boundary ``side``."""
        if side == 1:
            return self.eps1, self.mu1
        if side == 2:
            return self.eps2, self.mu2
        raise ValueError(f"side must be 1 or 2, got {side}")

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        dx = self.period / self.nx
        dz = self.height / self.nz
        xc = (np.arange(self.nx) + 0.5) * dx
        zc = self.h2 + (np.arange(self.nz) + 0.5) * dz
        return xc, zc

    def is_x_independent(self) -> bool:
        return bool(
            np.all(self.eps_cells == self.eps_cells[:1]) and np.all(self.mu_cells == self.mu_cells[:1])
        )

    def same_as(self, other: "MediumModel") -> bool:
        return (
            self.polarization == other.polarization
            and (self.period, self.h1, self.h2) == (other.period, other.h1, other.h2)
            and (self.eps1, self.mu1, self.eps2, self.mu2) == (other.eps1, other.mu1, other.eps2, other.mu2)
            and np.array_equal(self.eps_cells, other.eps_cells)
            and np.array_equal(self.mu_cells, other.mu_cells)
        )


def validate(medium: MediumModel) -> list[str]:
    """Return the names of all violated invariants (empty when valid)."""
    problems = []
    eps, mu = medium.eps_cells, medium.mu_cells
    consts = np.array([medium.eps1, medium.mu1, medium.eps2, medium.mu2], dtype=float)

    if not (medium.period > 0 and np.isfinite(medium.period)):
        problems.append("period")
    if not (medium.h2 < medium.h1):
        problems.append("strip_bounds")
    if eps.size == 0 or not (np.all(np.isfinite(eps)) and np.all(np.isfinite(mu)) and np.all(np.isfinite(consts))):
        problems.append("finiteness")
    if not (np.all(eps > 0) and np.all(mu > 0) and np.all(consts > 0)):
        problems.append("positivity")
        # the remaining checks compare products of positive numbers
        return problems

    ref = medium.eps1 * medium.mu1
    # relative slack so that exact equality survives floating point products
    tol = 1e-12 * ref
    if np.any(eps * mu < ref - tol) or medium.eps2 * medium.mu2 < ref - tol:
        problems.append("epsmu_below_freespace")

    top_ok = np.all(eps[:, -1] == medium.eps1) and np.all(mu[:, -1] == medium.mu1)
    bottom_ok = np.all(eps[:, 0] == medium.eps2) and np.all(mu[:, 0] == medium.mu2)
    if not (top_ok and bottom_ok):
        problems.append("exterior_constancy")
    return problems


def _raise_if_invalid(medium: MediumModel) -> MediumModel:
    problems = validate(medium)
    if problems:
        raise MediumError(problems[0], "violated invariants: " + ", ".join(problems))
    return medium


def build_layered(
    layers: Sequence[tuple[float, float, float]],
    period: float,
    h1: float,
    h2: float,
    nx: int,
    nz: int,
    *,
    eps1: float | None = None,
    mu1: float | None = None,
    eps2: float | None = None,
    mu2: float | None = None,
    polarization: str = "TE",
) -> MediumModel:
    """Build an x-independent stack from ``(z_top, eps, mu)`` triples listed top-down.

    Each layer spans from its ``z_top`` down to the next layer's ``z_top``
    (the last one down to ``h2``); the first ``z_top`` must equal ``h1``.
    Cells are assigned by their midpoint.  Exterior constants default to the
    top and bottom layer values.
    """
    if not layers:
        raise MediumError("layers", "at least one layer is required")
    if not h2 < h1:
        raise MediumError("strip_bounds", f"need h2 < h1, got h2={h2}, h1={h1}")
    tops = np.array([float(l[0]) for l in layers])
    if not np.isclose(tops[0], h1, rtol=0, atol=1e-12 * max(1.0, abs(h1))):
        raise MediumError("layer_order", f"first layer must start at h1={h1}, got {tops[0]}")
    if np.any(np.diff(tops) >= 0):
        raise MediumError("layer_order", "layer tops must be strictly decreasing")
    if np.any(tops <= h2) or np.any(tops > h1 + 1e-12 * max(1.0, abs(h1))):
        raise MediumError("layer_order", "layer tops must lie in (h2, h1]")
    for _, e, m in layers:
        if not (e > 0 and m > 0):
            raise MediumError("positivity", f"layer values must be positive, got eps={e}, mu={m}")

    _, zc = _centers(period, h1, h2, nx, nz)
    # layer index of each cell: number of interior tops above the midpoint
    idx = np.searchsorted(-tops[1:], -zc, side="right")
    eps_col = np.array([layers[i][1] for i in idx], dtype=float)
    mu_col = np.array([layers[i][2] for i in idx], dtype=float)
    eps = np.tile(eps_col, (nx, 1))
    mu = np.tile(mu_col, (nx, 1))
    model = MediumModel(
        period=float(period),
        h1=float(h1),
        h2=float(h2),
        eps_cells=eps,
        mu_cells=mu,
        eps1=float(layers[0][1] if eps1 is None else eps1),
        mu1=float(layers[0][2] if mu1 is None else mu1),
        eps2=float(layers[-1][1] if eps2 is None else eps2),
        mu2=float(layers[-1][2] if mu2 is None else mu2),
        polarization=polarization,
        meta={"kind": "layered", "layers": [tuple(map(float, l)) for l in layers]},
    )
    return _raise_if_invalid(model)


def lamellar_profile(z_low: float, z_high: float, duty: float, period: float) -> Callable[[np.ndarray], np.ndarray]:
    """Square-wave interface: ``z_high`` on the first ``duty`` fraction of each period."""

    def profile(x):
        frac = np.mod(np.asarray(x, dtype=float) / period, 1.0)
        return np.where(frac < duty, z_high, z_low)

    return profile


def build_binary_grating(
    profile: Callable[[np.ndarray], np.ndarray] | Sequence[float],
    eps_above: float,
    mu_above: float,
    eps_below: float,
    mu_below: float,
    period: float,
    h1: float,
    h2: float,
    nx: int,
    nz: int,
    *,
    polarization: str = "TE",
) -> MediumModel:
    """Two materials separated by an interface ``z = profile(x)`` sampled per column.

    ``profile`` is either a callable evaluated at column midpoints or an
    array of ``nx`` heights.  A cell takes the upper material when its
    midpoint lies above the column's interface height.
    """
    if not h2 < h1:
        raise MediumError("strip_bounds", f"need h2 < h1, got h2={h2}, h1={h1}")
    xc, zc = _centers(period, h1, h2, nx, nz)
    heights = np.asarray(profile(xc) if callable(profile) else profile, dtype=float)
    if heights.shape != (nx,):
        raise MediumError("profile_shape", f"expected {nx} column heights, got shape {heights.shape}")
    if np.any(heights <= h2) or np.any(heights >= h1) or not np.all(np.isfinite(heights)):
        raise MediumError("profile_out_of_range", f"interface heights must lie in ({h2}, {h1})")
    if not (eps_above > 0 and mu_above > 0 and eps_below > 0 and mu_below > 0):
        raise MediumError("positivity", "material values must be positive")

    above = zc[None, :] > heights[:, None]
    eps = np.where(above, eps_above, eps_below)
    mu = np.where(above, mu_above, mu_below)
    model = MediumModel(
        period=float(period),
        h1=float(h1),
        h2=float(h2),
        eps_cells=eps,
        mu_cells=mu,
        eps1=float(eps_above),
        mu1=float(mu_above),
        eps2=float(eps_below),
        mu2=float(mu_below),
        polarization=polarization,
        meta={"kind": "binary", "profile": heights.tolist()},
    )
    return _raise_if_invalid(model)


def swap_polarization(medium: MediumModel) -> MediumModel:
    """Exchange the roles of eps and mu and flip the TE/TM tag."""
    return replace(
        medium,
        eps_cells=medium.mu_cells,
        mu_cells=medium.eps_cells,
        eps1=medium.mu1,
        mu1=medium.eps1,
        eps2=medium.mu2,
        mu2=medium.eps2,
        polarization="TM" if medium.polarization == "TE" else "TE",
    )


def _centers(period, h1, h2, nx, nz):
    if int(nx) != nx or int(nz) != nz or nx < 1 or nz < 1:
        raise MediumError("grid", f"grid dims must be positive integers, got nx={nx}, nz={nz}")
    xc = (np.arange(nx) + 0.5) * (period / nx)
    zc = h2 + (np.arange(nz) + 0.5) * ((h1 - h2) / nz)
    return xc, zc
