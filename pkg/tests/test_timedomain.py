import math

import numpy as np
import pytest

from gratingtd.incidence import IncidentPulse, pulse_laplace
from gratingtd.medium import build_layered
from gratingtd.sdomain import build_mesh, volume_operators
from gratingtd.timedomain import (SweepPlan, invert_samples, invert_to_time, make_plan, parseval_residual,
                                  parseval_sides, plan_sweep, run_sweep)


def _wide_plan(T=8.0, s1=0.5, S=5000.0, alias=3.0, nt=801):
    ds2 = 2 * math.pi / (alias * T)
    ns = int(S / ds2) + 1
    return SweepPlan(s1, (ns - 1) * ds2, ns, T, nt, alias_factor=alias)


def test_plan_defaults():
    p = IncidentPulse(order=4, sigma=1.0)
    plan = plan_sweep(p, 10.0, 1e-6)
    assert plan.s1 == pytest.approx(0.4)
    assert plan.violations() == []
    ratio = abs(pulse_laplace(p, plan.s1 + 1j * plan.smax)) / abs(pulse_laplace(p, plan.s1))
    assert ratio == pytest.approx(1e-6, rel=1e-9)
    assert 2 * math.pi / plan.ds2 >= 1.2 * plan.T
    assert plan.dt <= math.pi / plan.smax * (1 + 1e-12)


def test_plan_monotone_in_tolerance():
    p = IncidentPulse(order=4, sigma=1.0)
    assert plan_sweep(p, 10.0, 0.5).smax < plan_sweep(p, 10.0, 1e-6).smax


def test_doubling_T_halves_step():
    p = IncidentPulse(order=4, sigma=1.0)
    a, b = plan_sweep(p, 10.0), plan_sweep(p, 20.0)
    assert 2 * math.pi / b.ds2 >= 1.2 * 20.0
    assert b.ds2 == pytest.approx(0.5 * a.ds2, rel=0.05)


def test_plan_guards():
    with pytest.raises(ValueError, match="aliasing"):
        SweepPlan(0.5, 100.0, 10, 8.0, 100)
    with pytest.raises(ValueError, match="exceeds 20"):
        SweepPlan(3.0, 10.0, 200, 8.0, 100)
    with pytest.raises(ValueError):
        plan_sweep(IncidentPulse(), 0.0)


def test_make_plan_overrides():
    p = IncidentPulse(order=4, sigma=0.1, delay=1.0)
    plan = make_plan(p, 8.0, s1=0.6, smax=40.0, ns=100, nt=200)
    assert (plan.s1, plan.smax, plan.ns, plan.nt) == (pytest.approx(0.6), 40.0, 100, 200)


def test_zero_data():
    plan = SweepPlan(0.5, 20.0, 50, 8.0, 60)
    out = invert_samples(np.zeros((50, 7)), plan)
    assert out.shape == (60, 7) and np.all(out == 0)
    assert parseval_residual(np.zeros((50, 3)), np.zeros((60, 3)), plan) == 0.0


def test_zero_pulse_gives_zero_sweep():
    m = build_layered([(1.0, 1.0, 1.0)], 1.0, 1.0, 0.0, 8, 8)
    mesh = build_mesh(m, 8, 8)
    plan = SweepPlan(0.5, 10.0, 20, 8.0, 30)
    sweep = run_sweep(m, mesh, IncidentPulse(amplitude=0.0), plan)
    assert all(not np.any(f.values) for f in sweep)
    assert not np.any(invert_to_time(sweep, plan).values)


def test_scalar_pair_away_from_jump():
    plan = _wide_plan()
    s, t = plan.s_values(), plan.times()
    u = invert_samples(1.0 / (s + 1.0), plan)
    assert np.max(np.abs(u - np.exp(-t))[t >= 0.25]) <= 1e-3


def test_scalar_pair_at_jump_gives_midpoint():
    plan = _wide_plan()
    u0 = invert_samples(1.0 / (plan.s_values() + 1.0), plan)[0]
    assert u0 == pytest.approx(0.5, abs=1e-3)


def test_scalar_parseval_pair():
    plan = _wide_plan(T=16.0, s1=1.0)
    s, t = plan.s_values(), plan.times()
    lhs, rhs = parseval_sides(1.0 / (s + 1.0), np.exp(-t), plan)
    assert lhs == pytest.approx(0.25, abs=1e-3)
    assert rhs == pytest.approx(0.25, abs=1e-3)
    assert parseval_residual(1.0 / (s + 1.0), np.exp(-t), plan) <= 1e-3


def test_plan_mismatch():
    plan = SweepPlan(0.5, 20.0, 50, 8.0, 60)
    with pytest.raises(ValueError, match="plan mismatch"):
        invert_samples(np.zeros(49), plan)


def test_refinement_stability():
    m = build_layered([(0.5, 1.0, 1.0)], 1.0, 0.5, 0.0, 16, 16)
    mesh = build_mesh(m, 16, 16)
    p = IncidentPulse(order=4, sigma=0.1, delay=1.0, theta=math.pi / 3)
    base = make_plan(p, 6.0)
    fine = SweepPlan(base.s1, base.smax, 2 * base.ns - 1, base.T, base.nt)
    ops = volume_operators(m, mesh, p.c1)
    norms = []
    series = [invert_to_time(run_sweep(m, mesh, p, pl), pl).values for pl in (base, fine)]
    for U in series:
        norms.append(np.einsum("ti,ti->t", U, (ops.mass @ U.T).T))
    diff = series[0] - series[1]
    rel = math.sqrt(np.sum(np.einsum("ti,ti->t", diff, (ops.mass @ diff.T).T)) / np.sum(norms[1]))
    assert rel <= 0.01
