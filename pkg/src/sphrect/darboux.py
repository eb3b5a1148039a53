"""Heun equation data and its Darboux polynomial.

For angles alpha_j = A_j + 1/2 at the points (0, 1, a, oo) the Heun equation

    y'' + (sum_j (1 - alpha_j)/(z - a_j)) y' + (alpha' alpha'' z - lam)/(z (z-1) (z-a)) y = 0

has a polynomial P of degree sum A_j among the products of pairs of its
solutions.  P spans the polynomial kernel of the third-order operator

    w''' + 3 p w'' + (p' + 2 p^2 + 4 q) w' + (4 p q + 2 q') w

where p and q are the coefficients of y' and y.  The ratio of two solutions
is exp(I) with I' = k W0 / P, W0 = z^(A0-1/2) (z-1)^(A1-1/2) (z-a)^(A2-1/2),
and k chosen so that every residue of I' is +1 or -1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp
import numpy as np
from numpy.polynomial import Polynomial

from .netcalc import AngleQuadruple

__all__ = [
    "HeunParams", "HeunCoefficients", "DarbouxPolynomial", "DarbouxError",
    "build_heun", "darboux_polynomial", "residues_and_normalize", "solve_darboux",
    "w0", "hermite_residual", "darboux_k2",
]

RANK_THRESHOLD = 1e-9
RESIDUE_RTOL = 1e-9      # below this agreement the extended-precision path takes over
EXTENDED_DPS = 50


class DarbouxError(ValueError):
    """Raised with ``kind`` in {'a_range', 'no_kernel', 'kernel_dim', 'multiple_root',
    'root_at_corner', 'residue_mismatch', 'degenerate'}."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass(frozen=True)
class HeunParams:
    angles: AngleQuadruple
    a: float
    lam: float
    alpha_prime: Fraction
    alpha_dprime: Fraction

    @property
    def points(self) -> tuple[float, float, float]:
        return (0.0, 1.0, float(self.a))


@dataclass(frozen=True)
class HeunCoefficients:
    """p = p_num / p_den and q = q_num / q_den as real polynomials."""
    params: HeunParams
    p_num: Polynomial
    p_den: Polynomial
    q_num: Polynomial
    q_den: Polynomial

    @property
    def p(self):
        return (self.p_num, self.p_den)

    @property
    def q(self):
        return (self.q_num, self.q_den)


@dataclass
class DarbouxPolynomial:
    heun: HeunParams
    coeffs: np.ndarray                  # ascending, monic
    degree: int
    kernel_dim: int
    singular_values: np.ndarray
    roots: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    residues: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    raw_residues: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    scale: float = float("nan")         # common modulus of the raw residues
    k: complex = complex("nan")         # I' = k W0 / P
    k2: float = float("nan")            # k^2 from the square identity
    k2_residual: float = float("nan")
    precision: str = "double"

    @property
    def poly(self) -> Polynomial:
        return Polynomial(self.coeffs)

    @property
    def rect_type(self) -> str:
        """'first' when the (0,1) period is the real one, 'second' otherwise."""
        return "first" if self.k2 > 0 else "second"

    def to_json(self) -> dict:
        def cl(z):
            return [float(np.real(z)), float(np.imag(z))]
        return {
            "angles": self.heun.angles.to_json(),
            "a": float(self.heun.a),
            "lambda": float(self.heun.lam),
            "coefficients": [float(c) for c in self.coeffs],
            "degree": self.degree,
            "kernel_dim": self.kernel_dim,
            "roots": [cl(r) for r in self.roots],
            "residues": [cl(r) for r in self.residues],
            "scale": float(self.scale),
            "k2": float(self.k2),
            "type": self.rect_type,
            "precision": self.precision,
        }


def build_heun(angles, a: float, lam: float) -> HeunCoefficients:
    q = AngleQuadruple.of(angles)
    if not a > 1:
        raise DarbouxError("a_range", f"need a > 1, got {a}")
    al = q.alphas()
    ap = (2 + al[3] - al[2] - al[1] - al[0]) / 2
    app = (2 - sum(al)) / 2
    hp = HeunParams(q, float(a), float(lam), ap, app)
    pts = hp.points
    A = Polynomial.fromroots(pts)
    B = sum(
        float(1 - al[j]) * Polynomial.fromroots([pts[m] for m in range(3) if m != j])
        for j in range(3)
    )
    C = Polynomial([-float(lam), float(ap * app)])
    return HeunCoefficients(hp, B, A, C, A)


def _operator_matrix(h: HeunCoefficients, d: int) -> np.ndarray:
    """Matrix of A^2 (hermite operator) on polynomials of degree <= d."""
    A, B, C = h.p_den, h.p_num, h.q_num
    dA, dB, dC = A.deriv(), B.deriv(), C.deriv()
    c3 = A * A
    c2 = 3 * A * B
    c1 = dB * A - B * dA + 2 * B * B + 4 * C * A
    c0 = 4 * B * C + 2 * (dC * A - C * dA)
    M = np.zeros((d + 4, d + 1))
    for j in range(d + 1):
        e = Polynomial([0.0] * j + [1.0])
        t = c3 * e.deriv(3) + c2 * e.deriv(2) + c1 * e.deriv(1) + c0 * e
        c = t.coef
        M[: len(c), j] = c[: d + 4]
    return M


def hermite_residual(h: HeunCoefficients, coeffs) -> float:
    """max |coefficient| of the cleared operator applied to P, relative to the operator scale."""
    d = len(coeffs) - 1
    M = _operator_matrix(h, d)
    x = np.asarray(coeffs, float)
    return float(np.max(np.abs(M @ x)) / (np.max(np.abs(M)) * np.max(np.abs(x))))


def darboux_polynomial(h: HeunCoefficients, degree: int | None = None) -> DarbouxPolynomial:
    q = h.params.angles
    d = q.total if degree is None else int(degree)
    M = _operator_matrix(h, d)
    # column scaling keeps the SVD threshold meaningful
    colnorm = np.linalg.norm(M, axis=0)
    colnorm[colnorm == 0] = 1.0
    _, s, vt = np.linalg.svd(M / colnorm, full_matrices=False)
    rel = s / s[0]
    dim = int(np.sum(rel < RANK_THRESHOLD))
    if dim == 0:
        raise DarbouxError("no_kernel", f"no polynomial solution of degree {d} (sigma_min/sigma_max = {rel[-1]:.3g})")
    if dim >= 2:
        raise DarbouxError("kernel_dim", f"kernel of dimension {dim} at a={h.params.a}, lambda={h.params.lam}")
    v = vt[-1] / colnorm
    if v[-1] == 0 or abs(v[-1]) < 1e-300:
        raise DarbouxError("degenerate", "polynomial solution has lower degree than expected")
    coeffs = v / v[-1]
    return DarbouxPolynomial(h.params, coeffs, d, dim, s)


def w0(angles, a, z, offsets=None):
    """z^(A0-1/2) (z-1)^(A1-1/2) (z-a)^(A2-1/2), principal branches.

    Real arguments are taken as limits from the upper half-plane.
    ``offsets`` optionally supplies accurate (z, z-1, z-a) as a tuple.
    """
    q = AngleQuadruple.of(angles)
    z = np.asarray(z, complex)
    if offsets is None:
        d0, d1, d2 = z, z - 1.0, z - a
    else:
        d0, d1, d2 = offsets
    return (np.power(d0 + 0j, q.A0 - 0.5) * np.power(d1 + 0j, q.A1 - 0.5)
            * np.power(d2 + 0j, q.A2 - 0.5))


def _polish(poly: Polynomial, roots: np.ndarray, steps: int = 3) -> np.ndarray:
    dp = poly.deriv()
    r = roots.astype(complex)
    for _ in range(steps):
        dv = dp(r)
        ok = dv != 0
        r = np.where(ok, r - poly(r) / np.where(ok, dv, 1), r)
    return r


def residues_and_normalize(P: DarbouxPolynomial, h: HeunCoefficients | None = None,
                           rtol: float = 1e-6) -> DarbouxPolynomial:
    hp = P.heun
    q, a = hp.angles, hp.a
    poly = P.poly
    roots = _polish(poly, np.roots(P.coeffs[::-1]))
    roots = np.where(np.abs(roots.imag) < 1e-14 * np.maximum(1, np.abs(roots)), roots.real + 0j, roots)
    if len(roots) > 1:
        gaps = np.abs(roots[:, None] - roots[None, :]) + np.eye(len(roots)) * 1e300
        if np.min(gaps) < 1e-8 * max(1.0, np.max(np.abs(roots))):
            raise DarbouxError("multiple_root", "P has a multiple root")
    corner_gap = np.min(np.abs(roots[:, None] - np.array([0.0, 1.0, a])[None, :]))
    if corner_gap < 1e-9:
        raise DarbouxError("root_at_corner", "P vanishes at a singular point of the equation")
    dp = poly.deriv()(roots)
    if np.any(dp == 0) or not np.all(np.isfinite(roots)):
        raise DarbouxError("multiple_root", "P' vanishes at a root of P")
    raw = w0(q, a, roots) / dp
    mags = np.abs(raw)
    scale = float(np.exp(np.mean(np.log(mags))))
    if np.max(np.abs(mags / scale - 1)) > rtol:
        raise DarbouxError("residue_mismatch", f"residue magnitudes disagree: {mags}")
    k2, k2res = _square_identity(P, h or build_heun(q, a, hp.lam))
    k = np.sqrt(complex(k2))
    res = k * raw
    P.roots, P.raw_residues, P.residues = roots, raw, res
    P.scale, P.k, P.k2, P.k2_residual = scale, complex(k), float(k2), float(k2res)
    return P


def _square_identity(P: DarbouxPolynomial, h: HeunCoefficients) -> tuple[float, float]:
    """k^2 with A (P'^2 - 2 P P'') - 2 B P P' - 4 C P^2 = k^2 z^2A0 (z-1)^2A1 (z-a)^2A2."""
    q, a = P.heun.angles, P.heun.a
    p = P.poly
    d1, d2 = p.deriv(), p.deriv(2)
    A, B, C = h.p_den, h.p_num, h.q_num
    N = A * (d1 * d1 - 2 * p * d2) - 2 * B * p * d1 - 4 * C * p * p
    T = (Polynomial([0, 1]) ** (2 * q.A0) * Polynomial([-1, 1]) ** (2 * q.A1)
         * Polynomial([-a, 1]) ** (2 * q.A2))
    n = np.zeros(max(len(N.coef), len(T.coef)))
    t = np.zeros_like(n)
    n[: len(N.coef)] = N.coef
    t[: len(T.coef)] = T.coef
    k2 = float(n @ t / (t @ t))
    resid = float(np.max(np.abs(n - k2 * t)) / max(np.max(np.abs(n)), 1e-300))
    return k2, resid


# --- extended precision ---------------------------------------------------------
# Near a = 1 several roots of P crowd into (1, a) and double precision cannot
# resolve them from the coefficients.  The same construction is repeated with
# mpmath: least-squares kernel with the leading coefficient fixed to 1, roots
# by polyroots, residues from the root products.

def _pmul(p, r):
    out = [mp.mpf(0)] * (len(p) + len(r) - 1)
    for i, x in enumerate(p):
        for j, y in enumerate(r):
            out[i + j] += x * y
    return out


def _padd(*ps):
    n = max(len(p) for p in ps)
    return [sum((p[i] for p in ps if i < len(p)), mp.mpf(0)) for i in range(n)]


def _pscale(c, p):
    return [c * x for x in p]


def _pder(p, n=1):
    for _ in range(n):
        p = [i * p[i] for i in range(1, len(p))] or [mp.mpf(0)]
    return p


def _peval(p, z):
    return mp.polyval(p[::-1], z)


def _solve_extended(q: AngleQuadruple, a: float, lam: float, dps: int = EXTENDED_DPS,
                    k2_only: bool = False):
    with mp.workdps(dps):
        A_ = [mp.mpf(x) for x in q]
        am, lm = mp.mpf(a), mp.mpf(lam)
        al = [x + mp.mpf(1) / 2 for x in A_]
        ap = (2 + al[3] - al[2] - al[1] - al[0]) / 2
        app = (2 - sum(al)) / 2
        pts = [mp.mpf(0), mp.mpf(1), am]
        A = [mp.mpf(1)]
        for x in pts:
            A = _pmul(A, [-x, mp.mpf(1)])
        terms = []
        for j in range(3):
            t = [mp.mpf(1)]
            for m in range(3):
                if m != j:
                    t = _pmul(t, [-pts[m], mp.mpf(1)])
            terms.append(_pscale(1 - al[j], t))
        B = _padd(*terms)
        C = [-lm, ap * app]
        dA, dB, dC = _pder(A), _pder(B), _pder(C)
        c3 = _pmul(A, A)
        c2 = _pscale(3, _pmul(A, B))
        c1 = _padd(_pmul(dB, A), _pscale(-1, _pmul(B, dA)), _pscale(2, _pmul(B, B)), _pscale(4, _pmul(C, A)))
        c0 = _padd(_pscale(4, _pmul(B, C)), _pscale(2, _pmul(dC, A)), _pscale(-2, _pmul(C, dA)))
        d = q.total
        M = mp.zeros(d + 4, d + 1)
        for j in range(d + 1):
            e = [mp.mpf(0)] * j + [mp.mpf(1)]
            t = _padd(_pmul(c3, _pder(e, 3)), _pmul(c2, _pder(e, 2)), _pmul(c1, _pder(e)), _pmul(c0, e))
            for i, x in enumerate(t[: d + 4]):
                M[i, j] = x
        if d == 0:
            coeffs = [mp.mpf(1)]
        else:
            # normal equations with pivoted LU; squaring the condition number is
            # harmless at this working precision
            Ms, rhs = M[:, :d], -M[:, d]
            try:
                sol = mp.lu_solve(Ms.T * Ms, Ms.T * rhs)
            except ZeroDivisionError:
                raise DarbouxError("kernel_dim", f"rank-deficient operator at a={a}, lambda={lam}") from None
            res = mp.norm(Ms * sol - rhs)
            if res > mp.mpf(10) ** (-dps // 2) * mp.mnorm(M, 1):
                raise DarbouxError("no_kernel", f"no polynomial solution of degree {d} (residual {mp.nstr(res, 3)})")
            coeffs = [sol[i] for i in range(d)] + [mp.mpf(1)]
        if k2_only:
            return float(mp.re(_k2_at(coeffs, A, B, C, A_, am, (1 + am) / 2 + mp.mpc(0, 1))))
        roots = _roots_extended(coeffs, dps) if d else []
        # real roots come back with imaginary noise of either sign; put them on
        # the axis so that W is taken from the upper side
        roots = [mp.mpf(mp.re(r)) if abs(mp.im(r)) < mp.mpf(10) ** (-dps // 2) * max(1, abs(r)) else r
                 for r in roots]
        if d > 1:
            gap = min(abs(x - y) for i, x in enumerate(roots) for y in roots[i + 1:])
            if gap < mp.mpf(10) ** (-dps // 2) * max(1, max(abs(r) for r in roots)):
                raise DarbouxError("multiple_root", "P has a multiple root")
        if d and min(abs(r - x) for r in roots for x in pts) < 1e-9:
            raise DarbouxError("root_at_corner", "P vanishes at a singular point of the equation")

        def W(z):
            return (mp.power(z, A_[0] - mp.mpf(1) / 2) * mp.power(z - 1, A_[1] - mp.mpf(1) / 2)
                    * mp.power(z - am, A_[2] - mp.mpf(1) / 2))

        raw = []
        for i, r in enumerate(roots):
            dp = mp.mpf(1)
            for j, y in enumerate(roots):
                if j != i:
                    dp *= r - y
            raw.append(W(r) / dp)
        mags = [abs(x) for x in raw]
        scale = mp.exp(sum(mp.log(x) for x in mags) / len(mags)) if mags else mp.mpf(1)
        if mags and max(abs(x / scale - 1) for x in mags) > 1e-6:
            raise DarbouxError("residue_mismatch", f"residue magnitudes disagree: {[mp.nstr(x, 6) for x in mags]}")

        # k^2 from the square identity, evaluated at two points off the axis
        k2a = _k2_at(coeffs, A, B, C, A_, am, (1 + am) / 2 + mp.mpc(0, 1))
        k2b = _k2_at(coeffs, A, B, C, A_, am, -mp.mpf(1) / 3 + mp.mpc(0, 2))
        k2 = mp.re(k2a)
        k2res = abs(k2a - k2b) / max(abs(k2a), mp.mpf(10) ** -dps)
        k = mp.sqrt(mp.mpc(k2))
        out = DarbouxPolynomial(
            HeunParams(q, float(a), float(lam), q_alpha(q)[0], q_alpha(q)[1]),
            np.array([float(c) for c in coeffs]), d, 1, np.zeros(0),
        )
        out.roots = np.array([complex(r) for r in roots], complex)
        out.roots = np.where(np.abs(out.roots.imag) < 1e-14 * np.maximum(1, np.abs(out.roots)),
                             out.roots.real + 0j, out.roots)
        out.raw_residues = np.array([complex(x) for x in raw], complex)
        out.residues = np.array([complex(k * x) for x in raw], complex)
        out.scale, out.k = float(scale), complex(k)
        out.k2, out.k2_residual = float(k2), float(k2res)
        out.precision = "extended"
        return out


def _k2_at(coeffs, A, B, C, A_, am, z):
    """A (P'^2 - 2 P P'') - 2 B P P' - 4 C P^2 over z^2A0 (z-1)^2A1 (z-a)^2A2 at one point."""
    P, P1, P2 = _peval(coeffs, z), _peval(_pder(coeffs), z), _peval(_pder(coeffs, 2), z)
    N = _peval(A, z) * (P1 * P1 - 2 * P * P2) - 2 * _peval(B, z) * P * P1 - 4 * _peval(C, z) * P * P
    return N / (z ** (2 * A_[0]) * (z - 1) ** (2 * A_[1]) * (z - am) ** (2 * A_[2]))


def _roots_extended(coeffs, dps):
    """Roots of a monic polynomial: double-precision guesses refined by Aberth steps."""
    guess = np.roots(np.array([float(c) for c in coeffs[::-1]]))
    # clustered guesses from np.roots can coincide; spread them slightly
    guess = guess + 1e-8 * np.exp(2j * np.arange(len(guess))) * np.maximum(1, np.abs(guess))
    desc = coeffs[::-1]
    z = [mp.mpc(g) for g in guess]
    # convergence is cubic, so a step below 1e-12 leaves an error far below 1e-30
    tol = mp.mpf(10) ** (-dps // 4)
    for _ in range(100):
        biggest = mp.mpf(0)
        for i in range(len(z)):
            p, dp = mp.polyval(desc, z[i], derivative=True)
            ratio = p / dp
            repel = mp.fsum(1 / (z[i] - z[j]) for j in range(len(z)) if j != i)
            step = ratio / (1 - ratio * repel)
            z[i] -= step
            biggest = max(biggest, abs(step) / max(1, abs(z[i])))
        if biggest <= tol:
            return z
    return [mp.mpc(r) for r in mp.polyroots(coeffs[::-1], maxsteps=400, extraprec=2 * dps)]


def q_alpha(q: AngleQuadruple) -> tuple[Fraction, Fraction]:
    al = q.alphas()
    return (2 + al[3] - al[2] - al[1] - al[0]) / 2, (2 - sum(al)) / 2


_RETRY = {"residue_mismatch", "multiple_root", "kernel_dim", "no_kernel"}


def darboux_k2(angles, a: float, lam: float) -> float:
    """k^2 without roots or residues, accurate enough to fix its sign (the rectangle type)."""
    q = AngleQuadruple.of(angles)
    h = build_heun(q, a, lam)
    try:
        P = darboux_polynomial(h)
        k2, resid = _square_identity(P, h)
        # resid is relative to |k^2| times the size of the identity, so below
        # 1e-2 the sign cannot be wrong
        if resid < 1e-2:
            return k2
    except DarbouxError as e:
        if e.kind not in _RETRY:
            raise
    return _solve_extended(q, a, lam, k2_only=True)


def solve_darboux(angles, a: float, lam: float, precision: str = "auto") -> DarbouxPolynomial:
    """Heun data, Darboux polynomial and normalized residues in one call.

    precision is 'double', 'extended' or 'auto'; 'auto' repeats the
    computation in extended precision when the double-precision residues
    do not agree to RESIDUE_RTOL.
    """
    q = AngleQuadruple.of(angles)
    h = build_heun(q, a, lam)
    if precision != "extended":
        try:
            return residues_and_normalize(darboux_polynomial(h), h,
                                          rtol=RESIDUE_RTOL if precision == "auto" else 1e-6)
        except DarbouxError as e:
            if precision == "double" or e.kind not in _RETRY:
                raise
    return _solve_extended(q, a, lam)
