import math

import numpy as np
import pytest

from gratingtd.diagnostics import check_coercivity
from gratingtd.incidence import IncidentPulse
from gratingtd.medium import build_binary_grating, build_layered, lamellar_profile
from gratingtd.oracle import ManufacturedField, OracleError, oracle_convergence, solve_manufactured
from gratingtd.sdomain import (SDomainField, SDomainSystem, assemble_system, build_mesh, sesquilinear_apply,
                               solve_rp, solve_system)


def _medium(nx, nz, layered=False):
    layers = [(1.0, 1.0, 1.0)] + ([(0.5, 4.0, 1.0)] if layered else [])
    return build_layered(layers, 1.0, 1.0, 0.0, nx, nz)


def test_dof_counts():
    assert build_mesh(_medium(4, 2), 4, 2).ndof == 12
    assert build_mesh(_medium(2, 1), 2, 1).ndof == 4


def test_mesh_preconditions():
    with pytest.raises(ValueError, match="nx_not_power_of_two"):
        build_mesh(build_layered([(1.0, 1.0, 1.0)], 1.0, 1.0, 0.0, 3, 2), 3, 2)
    with pytest.raises(ValueError, match="mesh_mismatch"):
        build_mesh(_medium(4, 2), 8, 2)


def test_matrix_matches_sesquilinear_form_on_basis():
    m = _medium(2, 1)
    mesh = build_mesh(m, 2, 1)
    s, c1 = 0.8 + 1.7j, 0.3
    A = assemble_system(m, mesh, s, None, c1).matrix.toarray()
    assert A.shape == (4, 4) and A.dtype.kind == "c"
    eye = np.eye(4)
    for i in range(4):
        for j in range(4):
            assert abs(A[i, j] - sesquilinear_apply(eye[j], eye[i], m, s, c1, mesh)) <= 1e-13


def test_sesquilinearity(rng):
    m = build_binary_grating(lamellar_profile(0.3, 0.7, 0.5, 1.0), 1.0, 1.0, 4.0, 1.0, 1.0, 1.0, 0.0, 8, 8)
    mesh = build_mesh(m, 8, 8)
    u = rng.normal(size=mesh.ndof) + 1j * rng.normal(size=mesh.ndof)
    v = rng.normal(size=mesh.ndof) + 1j * rng.normal(size=mesh.ndof)
    alpha = complex(rng.normal(), rng.normal())
    s, c1 = 0.5 + 3.0j, 0.4
    base = sesquilinear_apply(u, v, m, s, c1, mesh)
    assert abs(sesquilinear_apply(u, alpha * v, m, s, c1, mesh) - np.conj(alpha) * base) <= 1e-13 * max(1, abs(base))
    assert sesquilinear_apply(np.zeros(mesh.ndof), np.zeros(mesh.ndof), m, s, c1, mesh) == 0


def test_coercivity_random_fields(rng):
    m = _medium(16, 16, layered=True)
    mesh = build_mesh(m, 16, 16)
    theta = 1.0
    c1 = math.cos(theta)
    for _ in range(20):
        s = complex(rng.uniform(0.1, 5), rng.uniform(-30, 30))
        u = rng.normal(size=mesh.ndof) + 1j * rng.normal(size=mesh.ndof)
        assert check_coercivity(u, m, s, theta, c1, mesh).passed


def test_zero_load_gives_zero():
    m = _medium(8, 8)
    mesh = build_mesh(m, 8, 8)
    u = solve_system(assemble_system(m, mesh, 1.0 + 1j, None, 0.2))
    assert np.all(u.values == 0)
    p = IncidentPulse(amplitude=0.0)
    assert np.all(solve_rp(m, mesh, p, 0.5 + 2j).values == 0)


def test_recovers_manufactured_vector(rng):
    m = _medium(16, 16, layered=True)
    mesh = build_mesh(m, 16, 16)
    sysm = assemble_system(m, mesh, 0.6 + 4.0j, None, 0.5)
    w = rng.normal(size=mesh.ndof) + 1j * rng.normal(size=mesh.ndof)
    u = solve_system(SDomainSystem(sysm.matrix, sysm.matrix @ w, sysm.s, mesh)).values
    assert np.linalg.norm(u - w) <= 1e-9 * np.linalg.norm(w)


def test_conjugate_symmetry():
    m = _medium(16, 16, layered=True)
    mesh = build_mesh(m, 16, 16)
    p = IncidentPulse(order=4, sigma=0.2, delay=0.3, theta=1.0)
    s = 0.4 + 5.0j
    a = solve_rp(m, mesh, p, s).values
    b = solve_rp(m, mesh, p, np.conj(s)).values
    assert np.max(np.abs(b - np.conj(a))) <= 1e-12 * np.max(np.abs(a))


def test_field_roles():
    mesh = build_mesh(_medium(4, 2), 4, 2)
    tot = SDomainField(mesh, 1.0, np.ones(12))
    inc = SDomainField(mesh, 1.0, np.full(12, 0.25), "incident")
    sc = tot - inc
    assert sc.role == "scattered" and np.allclose(sc.values, 0.75)
    assert (sc + inc).role == "total"
    with pytest.raises(ValueError):
        tot + tot
    with pytest.raises(ValueError):
        SDomainField(mesh, 1.0, np.ones(5))


def test_manufactured_periodic_field_is_recovered_at_second_order():
    k = 2 * np.pi
    w = ManufacturedField(
        value=lambda x, z: np.cos(k * x) * np.exp(-z),
        dx=lambda x, z: -k * np.sin(k * x) * np.exp(-z),
        dz=lambda x, z: -np.cos(k * x) * np.exp(-z),
        laplacian=lambda x, z: (1 - k**2) * np.cos(k * x) * np.exp(-z),
    )
    errs = []
    for n in (8, 16, 32):
        m = build_layered([(1.0, 1.0, 1.0), (0.5, 3.0, 1.0)], 1.0, 1.0, 0.0, n, n)
        u, exact = solve_manufactured(w, m, 1.0 + 2.0j, 0.3)
        errs.append(np.linalg.norm(u - exact) / np.linalg.norm(exact))
    assert errs[2] < errs[1] < errs[0]
    assert math.log2(errs[1] / errs[2]) >= 1.9


def test_manufactured_needs_periodic_field():
    bad = ManufacturedField(lambda x, z: x + 0j * z, lambda x, z: 1 + 0 * x, lambda x, z: 0 * x,
                            lambda x, z: 0 * x)
    with pytest.raises(OracleError) as exc:
        solve_manufactured(bad, _medium(8, 8), 1.0, 0.0)
    assert exc.value.code == "non_periodic"


@pytest.mark.parametrize("kind", ["homogeneous", "two_layer"])
def test_convergence_against_oracles(kind):
    p = IncidentPulse(order=4, sigma=0.1, delay=1.0, theta=math.pi / 3)
    rows = oracle_convergence(kind, p, 0.4 + 5.0j, h1=0.5)
    assert rows[-1].observed_order >= 1.9
    assert rows[-1].error <= 1e-3
