import math

import numpy as np
import pytest

from gratingtd.incidence import (IncidentPulse, incident_trace_s, laplace_quadrature, load_pulse_table,
                                 pulse_eval, pulse_laplace, rho_coefficient, rho_hat, rho_time)
from gratingtd.timedomain import SweepPlan, invert_samples


def test_pulse_values():
    assert pulse_eval(IncidentPulse(order=4, sigma=1.0), 0.0) == 0.0
    p1 = IncidentPulse(order=1, sigma=1.0)
    assert pulse_eval(p1, 1.0) == pytest.approx(math.exp(-1), rel=1e-14)
    assert pulse_eval(p1, 1.0, 1) == pytest.approx(0.0, abs=1e-15)


def test_pulse_derivatives_match_finite_differences():
    p = IncidentPulse(order=4, sigma=0.7, amplitude=2.0)
    t, h = 1.3, 1e-5
    for k in (1, 2, 3):
        fd = (pulse_eval(p, t + h, k - 1) - pulse_eval(p, t - h, k - 1)) / (2 * h)
        assert pulse_eval(p, t, k) == pytest.approx(fd, rel=1e-7)


def test_laplace_closed_forms():
    assert pulse_laplace(IncidentPulse(order=0, sigma=1.0), 1.0) == pytest.approx(0.5)
    assert pulse_laplace(IncidentPulse(order=1, sigma=1.0), 1.0) == pytest.approx(0.25)


@pytest.mark.parametrize("s", [0.5 + 0.0j, 1.0 + 3.0j, 2.0 - 7.0j])
def test_laplace_against_quadrature(s):
    p = IncidentPulse(order=4, sigma=0.3, amplitude=1.5)
    quad = laplace_quadrature(lambda t: pulse_eval(p, t), s, 0.0, p.support_end)
    assert abs(quad - pulse_laplace(p, s)) <= 1e-8 * abs(pulse_laplace(p, s))


@pytest.mark.parametrize("s", [0.8 + 1.0j, 1.5 - 4.0j])
def test_derivative_transforms(s):
    p = IncidentPulse(order=4, sigma=0.5)
    fh = pulse_laplace(p, s)
    d1 = laplace_quadrature(lambda t: pulse_eval(p, t, 1), s, 0.0, p.support_end)
    d2 = laplace_quadrature(lambda t: pulse_eval(p, t, 2), s, 0.0, p.support_end)
    assert abs(d1 - s * fh) <= 1e-10 * abs(s * fh)
    assert abs(d2 - s**2 * fh) <= 1e-10 * abs(s**2 * fh)


def test_invalid_s_rejected():
    with pytest.raises(ValueError):
        pulse_laplace(IncidentPulse(), -1.0)
    with pytest.raises(ValueError):
        rho_hat(IncidentPulse(), 0.0 + 1j, 4, 1.0)


def test_theta_open_interval():
    for theta in (0.0, math.pi):
        with pytest.raises(ValueError, match="open interval"):
            IncidentPulse(theta=theta)


def test_incident_trace_values():
    p = IncidentPulse(order=0, sigma=1.0, theta=math.pi / 2)
    assert incident_trace_s(p, 1.0, 2.0, 2.0) == pytest.approx(pulse_laplace(p, 1.0))
    assert incident_trace_s(p, 1.0, 1.0, 2.0) == pytest.approx(0.1839397, abs=1e-7)
    with pytest.raises(ValueError):
        incident_trace_s(p, 1.0, 2.5, 2.0)


def test_incident_trace_bounded(rng):
    p = IncidentPulse(order=4, sigma=0.4, delay=0.3, theta=1.1)
    s = rng.uniform(0.1, 5, 50) + 1j * rng.uniform(-20, 20, 50)
    z = rng.uniform(-3, 1, 50)
    assert np.all(np.abs(incident_trace_s(p, s, z, 1.0)) <= np.abs(pulse_laplace(p, s)) * (1 + 1e-14))


def test_rho_hat_coefficient():
    p = IncidentPulse(order=0, sigma=1.0, theta=math.pi / 2)
    tr = rho_hat(p, 1.0, 8, 1.0)
    coeffs = tr.coefficients()
    assert coeffs[0] == pytest.approx(1.0)
    assert np.max(np.abs(coeffs[1:])) < 1e-15
    assert np.all(rho_hat(p.with_amplitude(0.0), 1.0 + 2j, 8, 1.0).values == 0)


def test_rho_hat_matches_transform_of_rho_time():
    p = IncidentPulse(order=4, sigma=0.3, delay=0.4, theta=1.0)
    for s in (0.7 + 0.5j, 1.2 - 6.0j):
        quad = laplace_quadrature(lambda t: rho_time(p, t), s, p.delay, p.delay + p.support_end)
        assert abs(quad - rho_coefficient(p, s)) <= 1e-8 * abs(rho_coefficient(p, s))


def test_rho_time_values():
    assert rho_time(IncidentPulse(order=1, sigma=1.0, theta=math.pi / 2), 1.0) == pytest.approx(0.0, abs=1e-15)
    p = IncidentPulse(order=1, sigma=1.0, theta=math.pi / 6)
    assert rho_time(p, 2.0) == pytest.approx(-0.1353353, abs=1e-7)
    pd = IncidentPulse(order=4, sigma=1.0, delay=2.0)
    assert np.all(rho_time(pd, np.linspace(-1, 2, 7)) == 0.0)


def test_up_direction_gives_zero_load():
    p = IncidentPulse(direction="up")
    assert rho_coefficient(p, 1.0 + 1j) == 0
    assert np.all(rho_time(p, np.linspace(0, 5, 11)) == 0)


def test_incident_field_causal_at_depth():
    # invert the incident trace at two heights and check arrival times
    p = IncidentPulse(order=4, sigma=0.1, delay=1.0, theta=math.pi / 3)
    plan = SweepPlan(s1=0.5, smax=170.0, ns=300, T=6.0, nt=500, alias_factor=1.2)
    s = plan.s_values()
    t = plan.times()
    for depth in (0.0, 1.0):
        u = invert_samples(incident_trace_s(p, s, 1.0 - depth, 1.0), plan)
        arrival = p.delay + p.c2 * depth
        peak = np.max(np.abs(u))
        assert np.max(np.abs(u[t <= 0.9 * arrival])) <= 1e-4 * peak


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_tabulated_pulse(tmp_path):
    tau = np.linspace(0, 3, 301)
    f = tau**4 * np.exp(-tau) * (1 - tau / 3) ** 4
    path = tmp_path / "pulse.csv"
    path.write_text("tau,f\n" + "".join(f"{float(a)!r},{float(b)!r}\n" for a, b in zip(tau, f)))
    t2, f2 = load_pulse_table(path)
    p = IncidentPulse(shape="tabulated", table=(tuple(t2), tuple(f2)))
    assert pulse_eval(p, 1.5) == pytest.approx(np.interp(1.5, tau, f), rel=1e-4)
    assert pulse_eval(p, 3.5) == 0.0
    s = 0.9 + 2.0j
    ref = laplace_quadrature(lambda t: pulse_eval(p, t), s, 0.0, 3.0)
    assert abs(pulse_laplace(p, s) - ref) <= 1e-8 * abs(ref)


def test_table_must_be_causal(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,1\n1,2\n2,3\n3,0\n")
    with pytest.raises(ValueError, match="causality"):
        load_pulse_table(path)
