import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from sphrect.darboux import DarbouxError
from sphrect.periods import (
    developing_integral, local_root, period, periods, segment_integral, solve_lambda,
    unitarity_gap,
)

quads = st.sampled_from([(0, 1, 0, 1), (1, 2, 1, 2), (1, 3, 1, 3), (2, 3, 2, 3)])


def sample(q, a, lam):
    try:
        return developing_integral(q, a, lam)
    except DarbouxError:
        assume(False)


def mp_segment(d, lo, hi):
    """PV by mpmath along straight pieces that bump over each real root in a triangle."""
    mp.mp.dps = 30
    k = mp.mpc(d.k)
    roots = [mp.mpc(r) for r in d.roots]
    e = d.exponents

    def f(z):
        v = k * mp.power(z, e[0]) * mp.power(z - 1, e[1]) * mp.power(z - d.a, e[2])
        for r in roots:
            v /= z - r
        return v

    real = sorted(float(r.real) for r in d.roots if abs(r.imag) < 1e-12 and lo < r.real < hi)
    pts = [mp.mpf(lo)]
    pv_add = 0
    for r in real:
        others = [abs(r - x) for x in list(d.roots) + [0.0, 1.0, d.a] if abs(r - x) > 0]
        h = 0.3 * min(others)
        pts += [r - h, mp.mpc(r, h), r + h]
        j = int(np.argmin(np.abs(d.roots - r)))
        pv_add += 1j * math.pi * complex(d.darboux.residues[j])
    pts.append(mp.mpf(hi))
    return complex(mp.quad(f, pts)) + pv_add


@settings(deadline=None, max_examples=25)
@given(quads, st.floats(1.05, 8.0), st.floats(-40.0, 40.0))
def test_period_parity(q, a, lam):
    d = sample(q, a, lam)
    p01, p1a = period(d, "Seg01"), period(d, "Seg1a")
    if d.darboux.k2 > 0:
        assert abs(p01.imag) <= 1e-9 * abs(p01)
        assert abs(p1a.real) <= 1e-9 * abs(p1a)
    else:
        assert abs(p01.real) <= 1e-9 * abs(p01)
        assert abs(p1a.imag) <= 1e-9 * abs(p1a)


@settings(deadline=None, max_examples=25)
@given(quads, st.floats(1.05, 8.0), st.floats(-40.0, 40.0))
def test_detour_radius_invariance(q, a, lam):
    d = sample(q, a, lam)
    for lo, hi in ((0.0, 1.0), (1.0, a)):
        s = segment_integral(d, lo, hi)
        if not s.detours:
            continue
        scale = abs(s.pv) + sum(abs(c) for _, c in s.detours)
        s2 = segment_integral(d, lo, hi, rho=0.5 * 0.25 * min(abs(r - x) for r, _ in s.detours
                                                               for x in (lo, hi)))
        s4 = segment_integral(d, lo, hi, rho=0.25 * 0.25 * min(abs(r - x) for r, _ in s.detours
                                                                for x in (lo, hi)))
        assert abs(s2.pv - s4.pv) <= 1e-10 * scale
        assert abs(s.pv - s2.pv) <= 1e-10 * scale


@settings(deadline=None, max_examples=12)
@given(quads, st.floats(1.1, 5.0), st.floats(-20.0, 20.0))
def test_periods_against_mpmath(q, a, lam):
    d = sample(q, a, lam)
    for lo, hi in ((0.0, 1.0), (1.0, a)):
        want = mp_segment(d, lo, hi)
        got = segment_integral(d, lo, hi).pv
        assert abs(got - want) <= 1e-10 * max(abs(want), abs(d.k))


def test_detours_logged():
    d = developing_integral((0, 1, 0, 1), 1.1, -0.3)   # P has a root at 0.890 inside (0, 1)
    pp = periods(d)
    assert [round(r.real, 6) for r, _ in pp.pole_detour_log] == [0.890098]
    (r, c), = pp.pole_detour_log
    assert c == pytest.approx(-1j * math.pi * d.darboux.residues[1])


def test_solve_lambda_small_a():
    roots = solve_lambda((0, 1, 0, 1), 1.1, grid=400)
    assert len(roots) == 1
    r = roots[0]
    assert r.residual < 1e-10
    assert abs(unitarity_gap((0, 1, 0, 1), 1.1, r.lambda_star)) < 1e-10
    d = developing_integral((0, 1, 0, 1), 1.1, r.lambda_star)
    assert np.allclose(np.abs(d.darboux.residues), 1.0, atol=1e-8)


def test_local_root_agrees_with_scan():
    (r,) = solve_lambda((1, 3, 1, 3), 1.005, scan=(-10.0, 10.0), grid=400)
    loc = local_root((1, 3, 1, 3), 1.005, r.lambda_star + 1e-3, 1e-4, 0.1)
    assert loc is not None
    assert loc.lambda_star == pytest.approx(r.lambda_star, abs=1e-12)


def test_second_type_roots_mirror_first():
    # the second-type root at a/(a-1) carries the same conformal data
    first = solve_lambda((0, 1, 0, 1), 1.1, grid=400)
    second = solve_lambda((0, 1, 0, 1), 11.0, grid=400, kind="second")
    assert len(first) == 1 and len(second) == 1
    assert second[0].residual < 1e-10
