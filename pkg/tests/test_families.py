import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphrect.families import (
    Endpoint, FamilyCurve, FamilyPoint, circle_angle, circle_fit_angle, fit_generalized_circle,
    heine_stieltjes, limit_modulus_extrapolate, limit_modulus_sc, mirror_family, modulus,
    modulus_agm, monotone_intervals, theta_estimate, trace_family,
)
from sphrect.netcalc import AngleQuadruple

a_vals = st.floats(1.0001, 1e4)


@given(a_vals)
def test_modulus_matches_agm(a):
    assert modulus(a) == pytest.approx(modulus_agm(a), rel=1e-12)


@given(a_vals)
def test_modulus_reciprocity(a):
    assert modulus(a) * modulus(a / (a - 1)) == pytest.approx(1.0, rel=1e-12)


def test_modulus_fixed_point():
    assert modulus(2.0) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(ValueError):
        modulus(0.5)


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0.1, 10), st.floats(0, 2 * math.pi))
def test_circle_fit_recovers_circle(cx, cy, r, phase):
    t = phase + np.linspace(0, 1.5, 9)
    pts = complex(cx, cy) + r * np.exp(1j * t)
    A, B, C, D = fit_generalized_circle(pts)
    assert -B / (2 * A) == pytest.approx(cx, abs=1e-7 * (1 + r))
    assert -C / (2 * A) == pytest.approx(cy, abs=1e-7 * (1 + r))


@given(st.floats(0.01, math.pi - 0.01))
def test_angle_between_lines(phi):
    # lines through the origin at angles 0 and phi
    l1 = np.array([0.0, 0.0, 1.0, 0.0])
    l2 = np.array([0.0, -math.sin(phi), math.cos(phi), 0.0])
    assert circle_angle(l1, l2) == pytest.approx(phi, abs=1e-9)


def _curve():
    pts = [FamilyPoint(1.0 + 0.1 * j, -1.0 - j, modulus(1.0 + 0.1 * j), 0.1 * j, 0.0) for j in range(1, 6)]
    return FamilyCurve(AngleQuadruple(0, 1, 0, 1), 0, pts, Endpoint.ModulusToZero, 0.5)


def test_mirror_is_an_involution():
    c = _curve()
    m = mirror_family(c)
    assert m.endpoint == Endpoint.ModulusToInfinity and m.kind == "second"
    for p, q in zip(c.points, reversed(m.points)):
        assert q.K == pytest.approx(1.0 / p.K)
        assert q.K == pytest.approx(modulus(q.a), rel=1e-12)
        assert q.lambda_star == p.lambda_star
    back = mirror_family(m)
    assert [p.a for p in back.points] == pytest.approx([p.a for p in c.points])
    assert back.K_crit == pytest.approx(c.K_crit)


def test_monotone_intervals():
    c = _curve()
    assert monotone_intervals(c) == 1
    c.points[2].K = 10.0
    assert monotone_intervals(c) == 3


def test_extrapolation_exact_for_polynomial_data():
    pts = [FamilyPoint(1.0, 0.0, 0.7 - 0.3 * x + 0.1 * x * x, 1.0 - x) for x in np.linspace(0.001, 0.1, 10)]
    c = FamilyCurve(AngleQuadruple(0, 1, 0, 1), 0, pts)
    r = limit_modulus_extrapolate(c)
    assert r.K_crit == pytest.approx(0.7, abs=1e-12)


def _cut_power(w, e, up):
    # w^e with a vertical cut pointing up or down, chosen away from the circle
    # so that it is never crossed
    rot = 1j if up else -1j
    return mp.exp(e * (mp.log(rot * w) - mp.log(rot)))


@settings(deadline=None, max_examples=20, report_multiple_bugs=False)
@given(st.sampled_from([(0.5, 2.5, 0.5), (1.5, -0.5, 1.5), (-1.5, 1.5, -0.5)]),
       st.floats(1.01, 50.0), st.integers(1, 3))
def test_heine_stieltjes_poles_are_residue_free(exps, b, degree):
    for _, s in heine_stieltjes(exps, b, degree):
        roots = np.roots(s[::-1])
        sing = [0.0, 1.0, b]
        gaps = [abs(r - x) for r in roots for x in sing + list(roots) if r is not x and abs(r - x) > 0]
        if len(gaps) and min(gaps) < 1e-3:
            continue
        for r in roots:
            rad = 0.3 * min(abs(r - x) for x in sing + list(roots) if abs(r - x) > 0)

            up = r.imag < -1e-12

            def f(t):
                z = r + rad * mp.exp(1j * t)
                v = _cut_power(z, exps[0], up) * _cut_power(z - 1, exps[1], up) * _cut_power(z - b, exps[2], up)
                for x in roots:
                    v /= (z - x) ** 2
                return v * 1j * rad * mp.exp(1j * t)

            res = complex(mp.quad(f, [0, mp.pi / 2, mp.pi, 3 * mp.pi / 2, 2 * mp.pi])) / (2j * math.pi)
            scale = max(abs(complex(f(t))) for t in np.linspace(0, 2 * math.pi, 8))
            assert abs(res) <= 1e-9 * scale


def test_sc_limits_three_five():
    rs = limit_modulus_sc((1, 2, 1, 2))
    assert [r.K_crit for r in rs] == pytest.approx([0.5433144, 1.193606], rel=1e-6)
    mirror = limit_modulus_sc((1, 2, 1, 2), mirror=True)
    assert sorted(1 / r.K_crit for r in mirror) == pytest.approx([0.5433144, 1.193606], rel=1e-6)


def test_sc_rejects_odd_sum():
    with pytest.raises(ValueError):
        limit_modulus_sc((0, 1, 0, 2))


def test_theta_range():
    th = theta_estimate((0, 1, 0, 1), 1.1, -0.6029797080389450)
    assert 0.0 <= th <= 1.0
    fit = circle_fit_angle((0, 1, 0, 1), 1.1, -0.6029797080389450)
    assert fit["c_vs_cp"] == pytest.approx(0.5, abs=1e-6)
    assert fit["c_vs_cpp"] == pytest.approx(0.5, abs=1e-6)
    assert min(fit["phi"], 1 - fit["phi"]) == pytest.approx(min(th, 1 - th), abs=1e-6)


@pytest.fixture(scope="module")
def family_1313():
    return trace_family((0, 1, 0, 1))


def test_family_structure(family_1313):
    (c,) = family_1313
    K = [p.K for p in c.points]
    th = [p.theta_est for p in c.points]
    assert K[0] < 0.35 and monotone_intervals(c) == 1
    assert all(np.diff(th) > 0)
    assert th[-1] > 0.999
    assert max(p.residual for p in c.points) < 1e-10
    sc = limit_modulus_sc((0, 1, 0, 1))[0]
    r = limit_modulus_extrapolate(c)
    assert abs(r.K_crit - sc.K_crit) <= r.error + sc.error + 1e-8
