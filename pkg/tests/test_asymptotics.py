import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import ndtri

from cburgers.asymptotics import (ProfileError, AsymptoticProfile, constants, convergence_report, fitted_pole,
                                  profile, profile_value, sample_grid)
from cburgers.colehopf import burgers_residual, forward
from cburgers.heatfield import HeatField
from cburgers.scenario import bump
from cburgers.special import F, F_inv

from conftest import TWO_PI, scen


@pytest.fixture(scope="module")
def hf_I0(boundary_I0):
    return HeatField(forward(boundary_I0))


def test_profile_I0(boundary_I0, hf_I0):
    p = profile(boundary_I0, hf_I0)
    assert p.y_alpha == 0.0
    assert (p.a, p.b, p.alpha) == (2.0, 0.0, 0.0)
    assert p.beta.imag != 0


def test_profile_invariants(boundary_I1):
    p = profile(boundary_I1)
    assert -0.5 < p.alpha < 0.5
    assert p.beta.imag != 0
    assert float(F(p.y_alpha)) == pytest.approx(0.5 * math.tanh(0.25), abs=1e-15)
    assert p.y_alpha == pytest.approx(ndtri(0.5 + 0.5 * math.tanh(0.25)), abs=1e-12)


def test_alpha_quarter_quantile():
    assert F_inv(0.25) == pytest.approx(ndtri(0.75), abs=1e-12)
    assert F_inv(0.25) == pytest.approx(0.674490, abs=1e-6)


def test_profile_rejects_non_boundary(prop22):
    with pytest.raises(ProfileError):
        profile(prop22)


def test_profile_rejects_real_c(boundary_I0):
    import dataclasses
    dec = dataclasses.replace(forward(boundary_I0), c=1.0 + 0j)
    with pytest.raises(ProfileError):
        profile(boundary_I0, HeatField(dec))


@given(st.floats(-5, 5))
@settings(max_examples=30, deadline=None)
def test_y_alpha_odd_in_I(I):
    _, _, alpha, _ = constants(I, 1j)
    _, _, alpha_m, _ = constants(-I, 1j)
    assert alpha == pytest.approx(0.5 * math.tanh(I / 4), abs=1e-15)
    assert F_inv(alpha) == pytest.approx(-F_inv(alpha_m), abs=1e-13)


def test_gauge_real_part_zero_mass_bump():
    base = scen(bump(0.0, 1.0, 0.5 + 1j * TWO_PI))
    gauged = scen(bump(0.0, 1.0, 0.5 + 1j * TWO_PI), bump(0.3, 0.5, 1.0), bump(-0.3, 0.5, -1.0))
    assert profile(base).y_alpha == pytest.approx(profile(gauged).y_alpha, abs=1e-15)


def test_profile_value_examples():
    p = AsymptoticProfile(y_alpha=0.0, alpha=0.0, beta=1j, a=2.0, b=0.0, c=-2j, I=0.0)
    assert profile_value(p, 0.0, 7.0) == pytest.approx(2j)
    u = lambda x, t: profile_value(p, x, t)
    assert abs(burgers_residual(u, 0.4, 3.0, 1e-3)) < 1e-6


def test_pole_drift_speed():
    p = AsymptoticProfile(y_alpha=0.3, alpha=0.1, beta=0.5 + 1j, a=1.5, b=0.15, c=0j, I=1.0)
    t, h = 4.0, 1e-5
    speed = (p.pole(t + h) - p.pole(t - h)) / (2 * h)
    assert speed == pytest.approx(0.3 / math.sqrt(2 * t), rel=1e-8)


def test_sample_grid_layout(boundary_I0):
    p = profile(boundary_I0)
    x = sample_grid(p, 100.0, 1.0)
    r = math.sqrt(200.0)
    inner = x[np.abs(x) <= 6 * r]
    assert inner.size >= 4096
    assert np.sum(x > 6 * r) == 64 and np.sum(x < -6 * r) == 64


def test_convergence_report_rate(boundary_I0, hf_I0):
    rows = convergence_report(boundary_I0, [10.0, 100.0, 1000.0, 10000.0], hf_I0)
    prod = [r.sqrt_t_times_error for r in rows]
    assert max(prod) <= 1.2 * min(prod)
    assert rows[3].sup_error < rows[1].sup_error


def test_fitted_pole_no_drift(boundary_I0, hf_I0):
    p = profile(boundary_I0, hf_I0)
    for t in (100.0, 1000.0):
        xp = fitted_pole(hf_I0, t, -p.beta.real, 5.0)
        assert xp == pytest.approx(-p.beta.real, abs=0.05)
