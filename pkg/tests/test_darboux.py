import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from sphrect.darboux import (
    DarbouxError, build_heun, darboux_polynomial, hermite_residual, solve_darboux, w0,
)
from sphrect.netcalc import AngleQuadruple

quads = st.sampled_from([(0, 1, 0, 1), (1, 2, 1, 2), (1, 3, 1, 3), (2, 3, 2, 3), (0, 2, 0, 3), (1, 1, 0, 2)])
a_vals = st.floats(1.05, 20.0)
lam_vals = st.floats(-30.0, 30.0)


def riccati_defect(q, a, lam, d, z):
    """|u' + u^2 + p u + q_| / scale for u = y'/y, y = sqrt(P) exp(I/2), at complex z."""
    q = AngleQuadruple.of(q)
    P = np.polynomial.Polynomial(d.coeffs)
    pts = np.array([0.0, 1.0, a])
    ex = np.array([q.A0 - 0.5, q.A1 - 0.5, q.A2 - 0.5])
    W = w0(q, a, z)
    dlogW = np.sum(ex / (z - pts))
    Pz, dP, d2P = P(z), P.deriv()(z), P.deriv(2)(z)
    u = dP / (2 * Pz) + d.k * W / (2 * Pz)
    du = (d2P * Pz - dP ** 2) / (2 * Pz ** 2) + d.k * W * (dlogW * Pz - dP) / (2 * Pz ** 2)
    al = [A + 0.5 for A in q]
    p = np.sum((1 - np.array(al[:3])) / (z - pts))
    ap = (2 + al[3] - al[2] - al[1] - al[0]) / 2
    app = (2 - sum(al)) / 2
    qq = (ap * app * z - lam) / (z * (z - 1) * (z - a))
    terms = [abs(du), abs(u) ** 2, abs(p * u), abs(qq)]
    return abs(du + u * u + p * u + qq) / max(terms)


@settings(deadline=None, max_examples=80)
@given(quads, a_vals, lam_vals)
def test_degree_and_hermite_residual(q, a, lam):
    h = build_heun(q, a, lam)
    d = darboux_polynomial(h)
    assert d.degree == sum(q) and len(d.coeffs) == sum(q) + 1
    assert d.coeffs[-1] == 1.0
    assert hermite_residual(h, d.coeffs) <= 1e-10
    assert np.isrealobj(d.coeffs)


@settings(deadline=None, max_examples=60)
@given(quads, a_vals, lam_vals, st.floats(-3, 3), st.floats(0.2, 3))
def test_heun_solution_from_p(q, a, lam, x, y):
    try:
        d = solve_darboux(q, a, lam)
    except DarbouxError as exc:
        assume(exc.kind not in ("root_at_corner", "multiple_root"))
        raise
    z = complex(x * a, y)
    assert riccati_defect(q, a, lam, d, z) < 1e-7


@settings(deadline=None, max_examples=60)
@given(quads, a_vals, lam_vals)
def test_residues_are_plus_minus_one(q, a, lam):
    try:
        d = solve_darboux(q, a, lam)
    except DarbouxError as exc:
        assume(exc.kind not in ("root_at_corner", "multiple_root"))
        raise
    assert np.allclose(np.abs(d.residues), 1.0, atol=1e-8)
    assert d.rect_type == ("first" if d.k2 > 0 else "second")


def test_kernel_is_one_dimensional_almost_everywhere():
    rng = np.random.default_rng(7)
    for q in [(0, 1, 0, 1), (1, 2, 1, 2), (2, 3, 2, 3)]:
        dims = []
        for _ in range(200):
            a, lam = 1 + rng.uniform(0.05, 10), rng.uniform(-40, 40)
            try:
                dims.append(darboux_polynomial(build_heun(q, a, lam)).kernel_dim)
            except DarbouxError:
                dims.append(-1)
        assert np.mean(np.array(dims) == 1) >= 0.99


@pytest.mark.parametrize("q, a, lam", [((0, 1, 0, 1), "11/10", "-3/10"), ((1, 2, 1, 2), "3/2", "-2")])
def test_matches_exact_symbolic_kernel(q, a, lam):
    sp = pytest.importorskip("sympy")
    z = sp.symbols("z")
    a_, lam_ = sp.Rational(a), sp.Rational(lam)
    al = [sp.Rational(2 * A + 1, 2) for A in q]
    p = sum((1 - al[j]) / (z - x) for j, x in enumerate((0, 1, a_)))
    qq = ((2 + al[3] - al[2] - al[1] - al[0]) / 2 * (2 - sum(al)) / 2 * z - lam_) / (z * (z - 1) * (z - a_))
    cs = sp.symbols(f"c0:{sum(q)}")
    w = sum(c * z ** j for j, c in enumerate(cs)) + z ** sum(q)
    expr = (sp.diff(w, z, 3) + 3 * p * sp.diff(w, z, 2) + (sp.diff(p, z) + 2 * p ** 2 + 4 * qq) * sp.diff(w, z)
            + (4 * p * qq + 2 * sp.diff(qq, z)) * w)
    num = sp.Poly(sp.numer(sp.together(expr)), z)
    sol = sp.solve(num.coeffs(), cs, dict=True)
    assert len(sol) == 1
    exact = [float(sol[0][c]) for c in cs] + [1.0]
    d = solve_darboux(q, float(a_), float(lam_))
    assert d.coeffs == pytest.approx(exact, rel=1e-11, abs=1e-12)


def test_precision_modes_agree():
    dd = solve_darboux((1, 2, 1, 2), 1.5, -2.0, precision="double")
    de = solve_darboux((1, 2, 1, 2), 1.5, -2.0, precision="extended")
    assert de.precision == "extended"
    assert np.allclose(dd.coeffs, de.coeffs, rtol=1e-10, atol=1e-12)
    assert dd.k2 == pytest.approx(de.k2, rel=1e-9)


def test_errors():
    with pytest.raises(DarbouxError) as e:
        solve_darboux((0, 1, 0, 1), 0.5, 0.0)
    assert e.value.kind == "a_range"


def test_extended_real_root_residue_matches_upper_arc():
    # the real root near 1.0055 is resolved only in extended precision
    import math
    from sphrect.periods import developing_integral, integrand
    from sphrect.quadrature import gauss_legendre_arc
    d = developing_integral((2, 3, 2, 3), 1.1, -20.0)
    assert d.darboux.precision == "extended"
    for r, res in zip(d.roots, d.darboux.residues):
        if r.imag == 0 and 1.0 < r.real < 1.1:
            arc = gauss_legendre_arc(lambda z: integrand(d, z), r.real, 1e-6, math.pi, 0.0)
            assert arc == pytest.approx(-1j * math.pi * res, abs=1e-3)
