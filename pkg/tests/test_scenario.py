import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint

from cburgers.scenario import (NonCompactError, Primitive, Scenario, ScenarioError, bump, bump_mass,
                               cumulative_mass, evaluate_u0, load_scenario, masses, mollifier)

from conftest import TWO_PI, scen


def doc(*prims, label="t"):
    return {"label": label, "primitives": [
        {"kind": k, "center": c, "radius": r, "mass_re": m.real, "mass_im": m.imag} for k, c, r, m in prims]}


def test_load_empty():
    s = load_scenario(doc())
    assert s.primitives == ()
    assert evaluate_u0(s, np.array([0.0, 3.0])).tolist() == [0, 0]


def test_load_prop22_family():
    s = load_scenario(json.dumps(doc(("bump", 0.0, 1.0, -1j * (TWO_PI + 0.25)))))
    m = masses(s)
    assert m.J == pytest.approx(-(TWO_PI + 0.25), abs=1e-15)
    assert m.absJ == pytest.approx(TWO_PI + 0.25, rel=1e-10)
    assert m.I == 0.0


def test_load_shifted_copies():
    s = load_scenario(doc(("bump", -10.0, 1.0, 1j * (math.pi + 0.1)), ("bump", 10.0, 1.0, 1j * (math.pi + 0.1))))
    assert s.L == 11.0
    assert masses(s).J == pytest.approx(2 * math.pi + 0.2, abs=1e-14)


def test_load_from_path(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps(doc(("bump", 0.0, 2.0, 1.0))))
    from pathlib import Path
    assert load_scenario(Path(p)).L == 2.0


@pytest.mark.parametrize("bad", [
    {"primitives": [{"kind": "bump", "center": 0, "radius": 0, "mass_re": 1, "mass_im": 0}]},
    {"primitives": [{"kind": "bump", "center": 0, "radius": -1, "mass_re": 1, "mass_im": 0}]},
    {"primitives": [{"kind": "bump", "center": 0, "radius": 1, "mass_re": float("nan"), "mass_im": 0}]},
    {"primitives": [{"kind": "box", "center": 0, "radius": 1, "mass_re": 1, "mass_im": 0}]},
    {"primitives": [{"kind": "bump", "center": 0, "radius": 1, "mass_re": 1}]},
    {"primitives": "nope"},
    {"primitives": [], "extra": 1},
    [],
])
def test_load_rejects(bad):
    with pytest.raises(ScenarioError):
        load_scenario(bad)


def test_load_rejects_bad_json():
    with pytest.raises(ScenarioError):
        load_scenario("{not json")


def test_u0_vanishes_on_support_boundary():
    s = scen(bump(0.5, 2.0, 3.0 - 1j))
    assert evaluate_u0(s, np.array([-1.5, 2.5, -4.0, 9.0])).tolist() == [0, 0, 0, 0]


@pytest.mark.parametrize("m", [1.0, 2.0 - 3.0j, -1j * (TWO_PI + 0.25)])
def test_bump_mass_by_quadrature(m):
    s = scen(bump(0.3, 0.7, m))
    re, _ = sint.quad(lambda x: evaluate_u0(s, x).real, -0.4, 1.0, epsabs=0, epsrel=1e-13, limit=200)
    im, _ = sint.quad(lambda x: evaluate_u0(s, x).imag, -0.4, 1.0, epsabs=0, epsrel=1e-13, limit=200)
    assert abs(complex(re, im) - m) <= 1e-12 * abs(m)


def test_bump_mass_constant():
    # int_{-1}^{1} exp(-1/(1-s^2)) ds
    import mpmath
    with mpmath.workdps(30):
        ref = float(mpmath.quad(lambda s: mpmath.exp(-1 / (1 - s * s)), [-1, 0, 1]))
    assert bump_mass() == pytest.approx(ref, rel=1e-13)
    assert mollifier(np.array([1.0, -1.0, 2.0])).tolist() == [0, 0, 0]


def test_masses_examples():
    m = masses(scen())
    assert (m.I, m.J, m.absJ) == (0, 0, 0)
    m = masses(scen(bump(-2, 1, 1j * math.pi), bump(2, 1, -1j * math.pi)))
    assert m.J == pytest.approx(0, abs=1e-15)
    assert m.absJ == pytest.approx(TWO_PI, abs=1e-10)


def test_absJ_mixed_overlapping():
    # overlapping opposite-sign bumps: absJ by an independent quadrature
    s = scen(bump(0.0, 1.0, 2j), bump(0.5, 1.0, -1j))
    ref, _ = sint.quad(lambda x: abs(evaluate_u0(s, x).imag), -1, 1.5, limit=400, epsabs=1e-13)
    assert masses(s).absJ == pytest.approx(ref, abs=1e-9)


def test_cumulative_examples():
    s = scen(bump(0.0, 1.0, 1.0))
    assert cumulative_mass(s, -5.0) == 0
    assert cumulative_mass(s, 0.0) == pytest.approx(0.5, abs=1e-14)
    s2 = scen(bump(0.0, 1.0, 1.0 + 2j), bump(3.0, 0.5, -0.5j))
    assert cumulative_mass(s2, 10.0) == pytest.approx(1.0 + 1.5j, abs=1e-15)


def test_gaussian_flagged_noncompact():
    s = scen(Primitive("gaussian", 0.0, 1.0, 1j))
    assert not s.compact
    with pytest.raises(NonCompactError):
        s.require_compact()
    # the gaussian still integrates to its mass
    val, _ = sint.quad(lambda x: evaluate_u0(s, x).imag, -np.inf, np.inf)
    assert val == pytest.approx(1.0, rel=1e-10)


prim = st.builds(lambda c, r, a, b: bump(c, r, complex(a, b)),
                 st.floats(-5, 5), st.floats(0.1, 3), st.floats(-10, 10), st.floats(-10, 10))


@given(st.lists(prim, min_size=1, max_size=3), st.floats(0, 1))
@settings(max_examples=30, deadline=None)
def test_cumulative_derivative_is_u0(prims, frac):
    s = scen(*prims)
    L = s.L
    x = -L + 2 * L * frac
    h = 1e-5
    fd = (cumulative_mass(s, x + h) - cumulative_mass(s, x - h)) / (2 * h)
    # central-difference truncation grows like mass / radius^3
    scale = sum(abs(p.mass) / p.radius ** 3 for p in prims)
    assert abs(fd - evaluate_u0(s, x)) <= 1e-8 * max(1.0, scale)


@given(st.lists(prim, min_size=1, max_size=3))
@settings(max_examples=30, deadline=None)
def test_J_equals_cumulative_at_L(prims):
    s = scen(*prims)
    assert masses(s).J == complex(cumulative_mass(s, s.L)).imag or \
        abs(masses(s).J - complex(cumulative_mass(s, s.L)).imag) <= 1e-12 * max(1, abs(masses(s).J))
    assert abs(masses(s).J) <= masses(s).absJ + 1e-9


@given(st.lists(prim, min_size=1, max_size=3), st.floats(-20, 20))
@settings(max_examples=20, deadline=None)
def test_shift_equivariance(prims, dx):
    s = scen(*prims)
    a, b = masses(s), masses(s.shifted(dx))
    assert (a.I, a.J) == pytest.approx((b.I, b.J), abs=1e-12)
    assert a.absJ == pytest.approx(b.absJ, abs=1e-8)
