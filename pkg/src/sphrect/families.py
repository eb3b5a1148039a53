"""Conformal modulus, the angle theta, family tracing and limit moduli.

A first-type solution (a, lambda) gives a spherical rectangle whose
conformal modulus is that of the quadruple (0, 1, a, oo).  Following the
root of the unitarity condition in a traces a one-parameter family.  At one
end the modulus tends to 0; at the other the short arc between a1 and a3
shrinks (theta -> 1) and the modulus tends to a finite K_crit.

K_crit is found in two independent ways: by extrapolating a traced family,
and by solving the degenerate problem directly with a Schwarz-Christoffel
type integral.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .darboux import DarbouxError
from .netcalc import AngleQuadruple, count, enumerate_nets
from .netgraph import LimitStructure, limit_structure, realize
from .periods import (
    UnitaryRoot, arg_increment, developing_integral, local_root, segment_integral, solve_lambda,
)
from .quadrature import tanh_sinh

__all__ = [
    "Endpoint", "Method", "FamilyPoint", "FamilyCurve", "LimitResult",
    "modulus", "modulus_agm", "ellipk_agm", "theta_estimate", "circle_fit_angle",
    "fit_generalized_circle", "circle_angle", "trace_family", "trace_branch",
    "limit_modulus_extrapolate", "limit_modulus_sc", "mirror_family",
    "monotone_intervals", "sc_gap", "heine_stieltjes",
]

log = logging.getLogger(__name__)


class Endpoint(str, enum.Enum):
    ModulusToZero = "ModulusToZero"
    ModulusToInfinity = "ModulusToInfinity"


class Method(str, enum.Enum):
    Extrapolation = "Extrapolation"
    DegenerateSC = "DegenerateSC"


# --- modulus -------------------------------------------------------------------

def _w_integral(lo: float, hi: float, a: float) -> float:
    def f(t, tl, th):
        offs = {0.0: t, 1.0: t - 1.0, a: t - a}
        if lo in offs:
            offs[lo] = tl
        if hi in offs:
            offs[hi] = th
        return 1.0 / np.sqrt(np.abs(offs[0.0] * offs[1.0] * offs[a]))
    return tanh_sinh(f, lo, hi, tol=1e-14).value.real


def modulus(a: float) -> float:
    """Modulus K of the quadruple (0, 1, a, oo) in the upper half-plane."""
    a = float(a)
    if not a > 1:
        raise ValueError(f"modulus needs a > 1, got {a}")
    return _w_integral(1.0, a, a) / _w_integral(0.0, 1.0, a)


def ellipk_agm(m: float) -> float:
    """Complete elliptic integral of the first kind, parameter m = k^2."""
    x, y = 1.0, math.sqrt(1.0 - m)
    for _ in range(64):
        if abs(x - y) <= 4e-16 * x:
            break
        x, y = 0.5 * (x + y), math.sqrt(x * y)
    return math.pi / (x + y)


def modulus_agm(a: float) -> float:
    a = float(a)
    if not a > 1:
        raise ValueError(f"modulus needs a > 1, got {a}")
    return ellipk_agm(1.0 - 1.0 / a) / ellipk_agm(1.0 / a)


# --- theta ---------------------------------------------------------------------

def theta_estimate(angles, a: float, lam: float) -> float | None:
    """theta = 1 - alpha, alpha pi being the short arc of C from f(a1) to f(a3)."""
    try:
        d = developing_integral(angles, a, lam)
    except DarbouxError:
        return None
    phi = arg_increment(d)
    alpha = abs(((phi + math.pi) % (2 * math.pi)) - math.pi) / math.pi
    return 1.0 - alpha


def fit_generalized_circle(pts) -> np.ndarray:
    """(A, B, C, D) with A(x^2+y^2) + Bx + Cy + D = 0 closest to the points."""
    p = np.asarray(pts, complex)
    x, y = p.real, p.imag
    M = np.column_stack([x * x + y * y, x, y, np.ones_like(x)])
    M = M / np.linalg.norm(M, axis=0).clip(1e-300)
    _, s, vt = np.linalg.svd(M, full_matrices=False)
    v = vt[-1] / np.linalg.norm(np.column_stack([x * x + y * y, x, y, np.ones_like(x)]), axis=0).clip(1e-300)
    return v / np.linalg.norm(v)


def circle_angle(c1, c2) -> float:
    """Angle in [0, pi] between two generalized circles (orientation ignored)."""
    A1, B1, C1, D1 = c1
    A2, B2, C2, D2 = c2
    num = B1 * B2 + C1 * C2 - 2 * A1 * D2 - 2 * A2 * D1
    den = math.sqrt((B1 * B1 + C1 * C1 - 4 * A1 * D1) * (B2 * B2 + C2 * C2 - 4 * A2 * D2))
    return math.acos(max(-1.0, min(1.0, num / den)))


def _images(d, xs, side: str) -> np.ndarray:
    """f = exp(I) at real points, continued through the upper half-plane, f(1) = 1."""
    out = []
    for x in xs:
        if side == "L1":
            v = -segment_integral(d, x, 1.0).path
        elif side == "L2":
            v = segment_integral(d, 1.0, x).path
        else:
            v = segment_integral(d, 1.0, d.a).path + segment_integral(d, d.a, x).path
        out.append(np.exp(v))
    return np.array(out)


def _sample_points(d, lo, hi, n):
    xs = lo + (hi - lo) * (0.5 - 0.5 * np.cos(np.pi * (np.arange(n) + 0.5) / n))
    real = d.roots[np.abs(d.roots.imag) < 1e-12].real
    keep = [x for x in xs if np.all(np.abs(real - x) > 1e-3 * (hi - lo))]
    return keep


def circle_fit_angle(angles, a: float, lam: float, n: int = 16) -> dict | None:
    """Fit C', C'' and C to image points of L1, L3 and L2; report their angles in half-turns."""
    try:
        d = developing_integral(angles, a, lam)
    except DarbouxError:
        return None
    p1 = _images(d, _sample_points(d, 0.0, 1.0, n), "L1")
    p2 = _images(d, _sample_points(d, 1.0, a, n), "L2")
    tail = a + np.geomspace(1e-2, 1e2, n) * a
    p3 = _images(d, [x for x in tail if np.all(np.abs(d.roots - x) > 1e-3)], "L3")
    c1, c2, c3 = (fit_generalized_circle(p) for p in (p1, p2, p3))
    return {
        "phi": circle_angle(c1, c3) / math.pi,
        "c_vs_cp": circle_angle(c2, c1) / math.pi,
        "c_vs_cpp": circle_angle(c2, c3) / math.pi,
    }


# --- tracing -------------------------------------------------------------------

@dataclass
class FamilyPoint:
    a: float
    lambda_star: float
    K: float
    theta_est: float | None = None
    residual: float = 0.0

    def to_json(self) -> dict:
        return {"a": self.a, "lambda": self.lambda_star, "K": self.K,
                "theta": self.theta_est, "residual": self.residual}


@dataclass
class FamilyCurve:
    angles: AngleQuadruple
    branch: int
    points: list[FamilyPoint]
    endpoint: Endpoint = Endpoint.ModulusToZero
    K_crit: float | None = None
    kind: str = "first"
    lost_at: float | None = None

    def to_json(self) -> dict:
        return {
            "angles": self.angles.to_json(), "branch": self.branch, "type": self.kind,
            "endpoint": self.endpoint.value, "K_crit": self.K_crit, "lost_at": self.lost_at,
            "points": [p.to_json() for p in self.points],
        }


def _point(q, r: UnitaryRoot, with_theta=True) -> FamilyPoint:
    th = theta_estimate(q, r.a, r.lambda_star) if with_theta else None
    return FamilyPoint(r.a, r.lambda_star, modulus(r.a), th, r.residual)


def _step(q, a, prev_a, seed, slope):
    guess = seed + slope * (a - prev_a)
    move = abs(slope * (a - prev_a))
    delta = max(0.05 * move, 1e-7 * (1 + abs(guess)))
    limit = max(4 * move, 0.05 * (1 + abs(guess)))
    r = local_root(q, a, guess, delta, limit)
    # never accept a root further from the prediction than the search window
    if r is not None and abs(r.lambda_star - guess) > limit:
        return None
    return r


def _trace_one(q, start: UnitaryRoot, a_grid, bisect_steps: int = 24) -> FamilyCurve:
    pts = [_point(q, start)]
    seed = start.lambda_star
    slope = 0.0
    prev_a = start.a
    lost = None
    for a in a_grid:
        if a <= prev_a:
            continue
        r = _step(q, a, prev_a, seed, slope)
        if r is None:
            lost = a
            break
        slope = (r.lambda_star - seed) / (a - prev_a)
        seed, prev_a = r.lambda_star, a
        pts.append(_point(q, r))
    if lost is not None:
        # the family leaves the first-type region between prev_a and lost
        lo, hi = prev_a, lost
        for _ in range(bisect_steps):
            mid = 0.5 * (lo + hi)
            r = _step(q, mid, lo, seed, slope)
            if r is None:
                hi = mid
            else:
                slope = (r.lambda_star - seed) / (mid - lo)
                seed, lo = r.lambda_star, mid
                pts.append(_point(q, r))
        lost = hi
    pts.sort(key=lambda p: p.a)
    return FamilyCurve(q, -1, pts, Endpoint.ModulusToZero, None, "first", lost)


def default_a_grid(a_start: float, n: int = 32, a_max: float = 1e3) -> np.ndarray:
    return 1.0 + np.geomspace(a_start - 1.0, a_max - 1.0, n)


def trace_family(angles, a_start: float = 1.001, a_grid=None, grid: int = 2000) -> list[FamilyCurve]:
    """All first-type branches, started from a full scan at a_start, sorted by K_crit."""
    q = AngleQuadruple.of(angles)
    n = count(q).first_type_count
    starts = solve_lambda(q, a_start, grid=max(16, grid // 5))
    if len(starts) < n:
        starts = solve_lambda(q, a_start, grid=grid)
    if a_grid is None:
        a_grid = default_a_grid(a_start)
    curves = [_trace_one(q, r, a_grid) for r in starts]
    for c in curves:
        c.K_crit = limit_modulus_extrapolate(c).K_crit
    curves.sort(key=lambda c: c.K_crit)
    for j, c in enumerate(curves):
        c.branch = j
    if len(curves) != n:
        log.warning("traced %d branches for %s, expected %d", len(curves), tuple(q), n)
    return curves


def trace_branch(angles, branch: int, a_grid=None, a_start: float = 1.001) -> FamilyCurve:
    curves = trace_family(angles, a_start=a_start, a_grid=a_grid)
    if not 0 <= branch < len(curves):
        raise IndexError(f"branch {branch} out of range; {len(curves)} traced")
    return curves[branch]


def monotone_intervals(curve: FamilyCurve) -> int:
    K = np.array([p.K for p in curve.points])
    dk = np.sign(np.diff(K))
    dk = dk[dk != 0]
    return 1 + int(np.sum(dk[1:] != dk[:-1])) if len(dk) else 1


def mirror_family(curve: FamilyCurve) -> FamilyCurve:
    """Second-type partner: the reflected rectangle with its side pairs exchanged.

    A point keeps the lambda of the solution it came from; a becomes
    a/(a-1), which carries K to 1/K.  Applying this twice gives back the curve.
    """
    def flip(p):
        return replace(p, a=p.a / (p.a - 1.0), K=1.0 / p.K)
    endpoint = (Endpoint.ModulusToInfinity if curve.endpoint == Endpoint.ModulusToZero
                else Endpoint.ModulusToZero)
    return FamilyCurve(
        curve.angles, curve.branch, [flip(p) for p in reversed(curve.points)], endpoint,
        None if curve.K_crit is None else 1.0 / curve.K_crit,
        "second" if curve.kind == "first" else "first",
        None if curve.lost_at is None else curve.lost_at / (curve.lost_at - 1.0),
    )


# --- limit moduli --------------------------------------------------------------

@dataclass
class LimitResult:
    angles: AngleQuadruple
    net_index: int
    K_crit: float
    method: Method
    error: float
    b: float | None = None
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"angles": self.angles.to_json(), "net_index": self.net_index,
                "K_crit": self.K_crit, "method": self.method.value, "error": self.error,
                "b": self.b}


def limit_modulus_extrapolate(curve: FamilyCurve, theta_min: float = 0.9) -> LimitResult:
    """Extrapolate K to theta = 1 by polynomial fits in 1 - theta."""
    pts = [p for p in curve.points if p.theta_est is not None and p.theta_est >= theta_min]
    if len(pts) < 4:
        raise ValueError(f"only {len(pts)} points with theta >= {theta_min}")
    x = np.array([1.0 - p.theta_est for p in pts])
    K = np.array([p.K for p in pts])
    order = np.argsort(x)
    x, K = x[order], K[order]
    x, K = x[: min(len(x), 12)], K[: min(len(K), 12)]
    ests = []
    for deg in (1, 2, 3):
        if len(x) > deg + 1:
            ests.append(float(np.polyval(np.polyfit(x, K, deg), 0.0)))
    best = ests[-1]
    err = abs(ests[-1] - ests[-2]) if len(ests) > 1 else abs(best - K[0])
    err = max(err, 1e-12)
    return LimitResult(curve.angles, curve.branch, best, Method.Extrapolation, err,
                       detail={"estimates": ests, "closest_theta": float(1 - x[0]), "K_last": float(K[0])})


_INTERVAL = {"L1": (0.0, 1.0), "L2": (1.0, None), "L3": (None, math.inf), "L4": (-math.inf, 0.0)}


def heine_stieltjes(exponents, b: float, degree: int):
    """Real polynomials s of the given degree whose roots are residue-free double poles.

    f' = z^e0 (z-1)^e1 (z-b)^e2 / s^2 has zero residue at every simple
    root of s exactly when A s'' - A E s' = V s, with A = z(z-1)(z-b),
    E = sum e_j/(z - x_j) and V linear.  Returns [(v0, s_coeffs)] for the
    real eigen-solutions, coefficients ascending and monic.
    """
    from numpy.polynomial import Polynomial as Poly
    d = degree
    if d == 0:
        return [(0.0, np.array([1.0]))]
    xs = (0.0, 1.0, float(b))
    A = Poly.fromroots(xs)
    AE = sum(e * Poly.fromroots([xs[m] for m in range(3) if m != j]) for j, e in enumerate(exponents))
    v1 = d * (d - 1) - d * sum(exponents)
    L = np.zeros((d + 1, d + 1))
    for j in range(d + 1):
        e = Poly([0.0] * j + [1.0])
        t = A * e.deriv(2) - AE * e.deriv(1) - Poly([0.0, v1]) * e
        c = t.coef
        L[: min(len(c), d + 1), j] = c[: d + 1]
        if len(c) > d + 1:
            assert np.all(np.abs(c[d + 1:]) < 1e-9 * (1 + np.max(np.abs(c)))), c
    vals, vecs = np.linalg.eig(L)
    out = []
    for v, s in zip(vals, vecs.T):
        if abs(v.imag) > 1e-9 * (1 + abs(v)):
            continue
        s = np.real_if_close(s / s[-1], tol=1e6)
        if np.iscomplexobj(s):
            continue
        out.append((float(v.real), np.asarray(s, float)))
    out.sort(key=lambda t: t[0])
    return out


def _pattern(s_coeffs, b: float):
    r = np.roots(s_coeffs[::-1])
    real = r[np.abs(r.imag) < 1e-9 * (1 + np.abs(r))].real
    sides = []
    for x in real:
        if x < 0:
            sides.append("L4")
        elif x < 1:
            sides.append("L1")
        elif x < b:
            sides.append("L2")
        else:
            sides.append("L3")
    return tuple(sorted(sides)), (len(r) - len(real)) // 2


def _sc_solutions(st: LimitStructure, b: float):
    sols = heine_stieltjes(st.exponents, b, st.pole_degree)
    return [s for _, s in sols if _pattern(s, b) == (st.boundary_poles, st.interior_poles)]


def _ray_integral(exps, b, s_coeffs) -> complex:
    """Integral of f' from 1 to oo along a ray into the upper half-plane."""
    s_roots = np.roots(s_coeffs[::-1]) if len(s_coeffs) > 1 else np.zeros(0)
    sing = np.concatenate([[0.0, b], s_roots])
    # direction that stays well away from every singularity
    best = None
    for ang in np.linspace(0.35, math.pi - 0.35, 15):
        dv = np.exp(1j * ang)
        w = (sing - 1.0) * np.conj(dv)
        t = np.clip(w.real, 0, None)
        dist = np.abs(w - t) / np.maximum(np.abs(sing - 1.0), 1e-300)
        score = np.min(dist)
        if best is None or score > best[0]:
            best = (score, dv, sorted(set(float(x) for x in t if x > 0)))
    _, dv, ts = best

    def F(z, zm1):
        logs = (exps[0] * np.log(z) + exps[1] * np.log(zm1) + exps[2] * np.log(z - b)
                - 2 * np.sum(np.log(z[..., None] - s_roots), axis=-1))
        return np.exp(logs)

    # break the u-interval at the points of closest approach
    us = [0.0] + [t / (1 + t) for t in ts] + [1.0]
    total = 0j
    for u0, u1 in zip(us[:-1], us[1:]):
        if u1 - u0 < 1e-15:
            continue

        def piece(u, ua, ub, u0=u0, u1=u1):
            uu = np.real(u)
            om = np.where(u1 == 1.0, -np.real(ub), 1.0 - uu)
            ok = om > 1e-30
            out = np.zeros(np.shape(u), complex)
            t = np.where(u0 == 0.0, np.real(ua), uu)[ok] / om[ok]
            zm1 = t * dv
            out[ok] = F(1.0 + zm1, zm1) * dv / om[ok] ** 2
            return out

        total += tanh_sinh(piece, u0, u1, tol=1e-13).value
    return complex(total)


def sc_gap(st: LimitStructure, b: float) -> list[complex]:
    """exp(-i pi e2) times the integral of f' from 1 to oo, per matching pole polynomial.

    f' is real on (1, b) after this rotation; the images of a1 and a3 lie on
    one line orthogonal to the image of (1, b) when the imaginary part vanishes.
    """
    rot = np.exp(-1j * math.pi * st.exponents[2])
    return [rot * _ray_integral(st.exponents, b, s) for s in _sc_solutions(st, b)]


def _scan_sc(st: LimitStructure, part, bs):
    """Roots in b of part(sc_gap) for each eigen-solution index, as (b, db)."""
    vals = [sc_gap(st, b) for b in bs]
    found = []
    nmax = max((len(v) for v in vals), default=0)
    for j in range(nmax):
        def h(b, j=j):
            v = sc_gap(st, b)
            return part(v[j]) if len(v) > j else math.nan
        for b0, b1, v0, v1 in zip(bs[:-1], bs[1:], vals[:-1], vals[1:]):
            if len(v0) <= j or len(v1) <= j:
                continue
            h0, h1 = part(v0[j]), part(v1[j])
            if not (np.isfinite(h0) and np.isfinite(h1)) or h0 * h1 > 0:
                continue
            try:
                x = brentq(h, b0, b1, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            except ValueError:
                continue
            hx = h(x)
            # a sign change through a pole of h is not a root
            if not np.isfinite(hx) or abs(hx) > 1e-6 * max(abs(h0), abs(h1)):
                continue
            slope = abs(h1 - h0) / (b1 - b0)
            size = abs(sc_gap(st, x)[j])
            found.append((x, (1e-13 * size + abs(hx)) / slope + 4e-16 * x))
    return sorted(found)


def limit_modulus_sc(angles, bs=None, mirror: bool = False) -> list[LimitResult]:
    """K_crit for every net from the degenerate Schwarz-Christoffel problem."""
    q = AngleQuadruple.of(angles)
    if q.total % 2:
        raise ValueError("degenerate SC limit is only set up for even sum of A_j")
    nets = enumerate_nets(q)
    groups: dict[tuple, list] = {}
    for p in nets:
        st = limit_structure(realize(p))
        groups.setdefault(st.key(), [st, []])[1].append(p)
    if bs is None:
        bs = 1.0 + np.geomspace(1e-7, 1e5, 400)
    part = (lambda v: v.real) if mirror else (lambda v: v.imag)
    results = []
    for st, members in groups.values():
        roots = _scan_sc(st, part, bs)
        if len(roots) != len(members):
            log.warning("SC limit for %s: %d roots for %d nets", tuple(q), len(roots), len(members))
        for b, db in roots:
            K = modulus(b)
            h = 1e-6 * (b - 1.0)
            dK = abs(modulus(b + h) - modulus(b - h)) / (2 * h) * db
            results.append(LimitResult(q, -1, K, Method.DegenerateSC, max(dK, 1e-13 * K), b,
                                       {"structure": st.key(), "nets": [m.as_tuple() for m in members]}))
    results.sort(key=lambda r: r.K_crit)
    for j, r in enumerate(results):
        r.net_index = j
    n = count(q).first_type_count
    if len(results) != n:
        log.warning("SC limit for %s found %d solutions, expected %d", tuple(q), len(results), n)
    return results
