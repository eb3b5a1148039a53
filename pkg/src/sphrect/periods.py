"""Periods of the developing integral and the unitarity condition on lambda.

The developing map is f = exp(I) with I' = k W0 / P.  Along (0, 1) and
(1, a) the integrand has constant phase, so the two canonical periods are
one real and one imaginary.  Integrals are taken along the real segment,
with small semicircles in the upper half-plane over real roots of P; the
reported period is the principal value, i.e. the path integral with the
half-residue of each semicircle added back.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .darboux import DarbouxError, DarbouxPolynomial, darboux_k2, solve_darboux
from .netcalc import AngleQuadruple
from .quadrature import gauss_legendre_arc, tanh_sinh

__all__ = [
    "DevelopingIntegral", "PeriodPair", "UnitaryRoot", "developing_integral",
    "integrand", "period", "periods", "segment_integral", "unitarity_gap",
    "solve_lambda", "default_scan", "arg_increment", "local_root",
]

log = logging.getLogger(__name__)

REAL_ROOT_TOL = 1e-12


@dataclass
class DevelopingIntegral:
    angles: AngleQuadruple
    a: float
    lam: float
    darboux: DarbouxPolynomial
    z0: float

    @property
    def k(self) -> complex:
        return self.darboux.k

    @property
    def roots(self) -> np.ndarray:
        return self.darboux.roots

    @property
    def exponents(self) -> tuple[float, float, float]:
        q = self.angles
        return (q.A0 - 0.5, q.A1 - 0.5, q.A2 - 0.5)

    @property
    def branch_points(self) -> tuple[float, float, float]:
        return (0.0, 1.0, self.a)


def developing_integral(angles, a: float, lam: float) -> DevelopingIntegral:
    q = AngleQuadruple.of(angles)
    return DevelopingIntegral(q, float(a), float(lam), solve_darboux(q, a, lam), 0.5 * (1.0 + a))


def integrand(d: DevelopingIntegral, z, offsets=None):
    """k z^(A0-1/2) (z-1)^(A1-1/2) (z-a)^(A2-1/2) / P(z), upper-half-plane branches.

    Evaluated through logarithms so that very large |z| does not overflow.
    """
    z = np.asarray(z, complex)
    if offsets is None:
        offsets = (z, z - 1.0, z - d.a)
    if np.any([np.any(o == 0) for o in offsets]):
        raise ZeroDivisionError("integrand evaluated at a branch point")
    logs = sum(e * np.log(o + 0j) for e, o in zip(d.exponents, offsets))
    logs = logs - np.sum(np.log(z[..., None] - d.roots), axis=-1)
    return d.k * np.exp(logs)


@dataclass
class SegmentResult:
    pv: complex
    path: complex
    detours: list[tuple[complex, complex]]
    error: float


@dataclass
class PeriodPair:
    pi_01: complex
    pi_1a: complex
    pole_detour_log: list[tuple[complex, complex]] = field(default_factory=list)
    error: float = 0.0


def _offset_fn(d: DevelopingIntegral, lo: float, hi: float):
    """Integrand for tanh_sinh on [lo, hi] using exact offsets at branch-point ends."""
    bps = d.branch_points

    def f(z, za, zb):
        offs = []
        for x in bps:
            if x == lo:
                offs.append(za + 0j)
            elif x == hi:
                offs.append(zb + 0j)
            else:
                offs.append(z - x)
        return integrand(d, z, offs)

    return f


def _tail_fn(d: DevelopingIntegral, X: float):
    """Integrand on [X, oo) after z = X + s/(1-s), as a function on s in [0, 1]."""

    def f(s, _s, s_minus_1):
        om = -np.real(s_minus_1)
        out = np.zeros(np.shape(s), complex)
        ok = om > 1e-30  # beyond this the integrand is far below rounding
        z = X + (1.0 - om[ok]) / om[ok]
        out[ok] = integrand(d, z + 0j) / om[ok] ** 2
        return out

    return f


def segment_integral(d: DevelopingIntegral, lo: float, hi: float, rho: float | None = None,
                     tol: float = 1e-13) -> SegmentResult:
    """Integral of the developing integrand over the real segment [lo, hi] (hi may be inf)."""
    roots = d.roots
    real = np.sort(roots[np.abs(roots.imag) <= REAL_ROOT_TOL * np.maximum(1, np.abs(roots))].real)
    cplx = roots[np.abs(roots.imag) > REAL_ROOT_TOL * np.maximum(1, np.abs(roots))]
    top = hi if math.isfinite(hi) else math.inf
    inside = [r for r in real if lo < r < top]
    span = (hi - lo) if math.isfinite(hi) else max(1.0, abs(lo))
    near = sorted(float(r.real) for r in cplx
                  if lo < r.real < top and abs(r.imag) < 0.1 * span)
    # finite cut-off for an infinite segment
    if not math.isfinite(hi):
        marks = [lo] + inside + near
        X = max(2.0 * max(marks) + 1.0, lo + 1.0)
    else:
        X = hi
    others = np.concatenate([np.array(d.branch_points), roots])
    detours = []
    for r in inside:
        gap = np.min(np.abs(others[np.abs(others - r) > 0] - r))
        rad = 0.25 * gap if rho is None else min(rho, 0.4 * gap)
        detours.append((r, rad))
    # pieces of the straight path, with arcs in between
    cuts = [lo]
    for r, rad in detours:
        cuts += [r - rad, r + rad]
    cuts.append(X)
    path = 0j
    err = 0.0
    pieces = []
    for j in range(0, len(cuts), 2):
        a0, b0 = cuts[j], cuts[j + 1]
        inner = [x for x in near if a0 < x < b0]
        pts = [a0] + inner + [b0]
        pieces += list(zip(pts[:-1], pts[1:]))
    for a0, b0 in pieces:
        res = tanh_sinh(_offset_fn(d, a0, b0), a0, b0, tol=tol)
        path += res.value
        err += res.error
    log_entries = []
    for r, rad in detours:
        arc = gauss_legendre_arc(lambda z: integrand(d, z), r, rad, math.pi, 0.0)
        path += arc
        res_r = _residue(d, r)
        log_entries.append((complex(r), -1j * math.pi * res_r))
    if not math.isfinite(hi):
        res = tanh_sinh(_tail_fn(d, X), 0.0, 1.0, tol=tol)
        path += res.value
        err += res.error
    pv = path - sum(c for _, c in log_entries)
    return SegmentResult(complex(pv), complex(path), log_entries, err)


def _residue(d: DevelopingIntegral, r) -> complex:
    j = int(np.argmin(np.abs(d.roots - r)))
    return complex(d.darboux.residues[j])


def period(d: DevelopingIntegral, segment: str = "Seg01", rho: float | None = None) -> complex:
    lo, hi = {"Seg01": (0.0, 1.0), "Seg1a": (1.0, d.a)}[segment]
    return segment_integral(d, lo, hi, rho).pv


def periods(d: DevelopingIntegral, rho: float | None = None) -> PeriodPair:
    s1 = segment_integral(d, 0.0, 1.0, rho)
    s2 = segment_integral(d, 1.0, d.a, rho)
    return PeriodPair(s1.pv, s2.pv, s1.detours + s2.detours, s1.error + s2.error)


def arg_increment(d: DevelopingIntegral) -> float:
    """Im of the integral from 1 to oo along the upper side of the real axis.

    f(a3)/f(a1) = exp of that integral, so this is the argument of the
    ratio of the images of a3 and a1 on the circle C, modulo 2 pi.
    """
    s1 = segment_integral(d, 1.0, d.a)
    s2 = segment_integral(d, d.a, math.inf)
    return float((s1.path + s2.path).imag)


# --- unitarity -----------------------------------------------------------------

def _sample(angles, a: float, lam: float, kind: str) -> tuple[float, float]:
    """(k^2, gap) at lam; the gap is nan when lam is of the other type.

    The gap is the real part of the relevant period divided by |k|.  Both
    vanish together, but the undivided period also tends to 0 at the type
    boundary (k -> 0), where its sign is lost in rounding.
    """
    try:
        d = developing_integral(angles, a, lam)
    except DarbouxError:
        return math.nan, math.nan
    k2 = d.darboux.k2
    if (k2 <= 0) if kind == "first" else (k2 >= 0):
        return k2, math.nan
    lo, hi = (0.0, 1.0) if kind == "first" else (1.0, a)
    return k2, float(segment_integral(d, lo, hi).pv.real / abs(d.k))


def unitarity_gap(angles, a: float, lam: float, kind: str = "first") -> float:
    """Re of the period that must vanish, over |k|; nan if (a, lam) is of the other type."""
    return _sample(angles, a, lam, kind)[1]


@dataclass
class UnitaryRoot:
    a: float
    lambda_star: float
    residual: float
    bracket: tuple[float, float]
    kind: str = "first"
    periods: tuple[complex, complex] | None = None

    def to_json(self) -> dict:
        out = {
            "a": self.a, "lambda": self.lambda_star, "residual": self.residual,
            "bracket": list(self.bracket), "type": self.kind,
        }
        if self.periods is not None:
            out["periods"] = {
                "pi_01": [self.periods[0].real, self.periods[0].imag],
                "pi_1a": [self.periods[1].real, self.periods[1].imag],
            }
        return out


def default_scan(angles, a: float) -> tuple[float, float]:
    q = AngleQuadruple.of(angles)
    L = 10.0 * (1.0 + a) * (1.0 + q.total) ** 2
    return (-L, L)


def _k2(angles, a, lam):
    try:
        return darboux_k2(angles, a, lam)
    except DarbouxError:
        return math.nan


def _refine_type_change(angles, a, lo, hi, iters=80):
    """Locate the lambda between lo and hi where k^2 changes sign.

    k^2 vanishes where a root of P passes through a singular point, and the
    Darboux step refuses points within 1e-9 of that; such a midpoint is
    nudged towards lo and retried.
    """
    klo = _k2(angles, a, lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        km = _k2(angles, a, mid)
        nudge = 0.25 * (hi - lo)
        while not math.isfinite(km) and abs(nudge) > 1e-15 * max(1.0, abs(mid)):
            km = _k2(angles, a, mid + nudge)
            if math.isfinite(km):
                mid += nudge
            nudge *= -0.5 if nudge > 0 else 0.5
        if not math.isfinite(km):
            return mid
        if (km > 0) == (klo > 0):
            lo, klo = mid, km
        else:
            hi = mid
        if abs(hi - lo) < 4e-16 * max(1.0, abs(lo)):
            break
    return 0.5 * (lo + hi)


def solve_lambda(angles, a: float, scan: tuple[float, float] | None = None, grid: int = 2000,
                 kind: str = "first", xtol: float = 1e-14) -> list[UnitaryRoot]:
    """All lambda in the scan range where the relevant period has zero real part."""
    q = AngleQuadruple.of(angles)
    lo, hi = scan if scan is not None else default_scan(q, a)
    lams = list(np.linspace(lo, hi, grid))
    samples = [_sample(q, a, x, kind) for x in lams]
    k2 = [v[0] for v in samples]
    g = [v[1] for v in samples]
    # sample densely on both sides of every change of type
    extra = []
    step = (hi - lo) / max(grid - 1, 1)
    for j in range(len(lams) - 1):
        if math.isfinite(k2[j]) and math.isfinite(k2[j + 1]) and (k2[j] > 0) != (k2[j + 1] > 0):
            x0 = _refine_type_change(q, a, lams[j], lams[j + 1])
            for t in np.geomspace(1e-9, 1.0, 40) * step:
                extra += [x0 - t, x0 + t]
    if extra:
        lams += extra
        g += [unitarity_gap(q, a, x, kind) for x in extra]
        order = np.argsort(lams)
        lams = [lams[j] for j in order]
        g = [g[j] for j in order]
    bad = sum(1 for v in g if not math.isfinite(v))
    if bad:
        log.debug("solve_lambda: %d of %d samples skipped (other type or degenerate)", bad, len(g))
    roots = []
    fn = lambda x: unitarity_gap(q, a, x, kind)  # noqa: E731
    for j in range(len(lams) - 1):
        g0, g1 = g[j], g[j + 1]
        if not (math.isfinite(g0) and math.isfinite(g1)):
            continue
        if g0 == 0.0:
            x = lams[j]
        elif g0 * g1 < 0:
            try:
                x = brentq(fn, lams[j], lams[j + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)
            except ValueError:
                continue
        else:
            continue
        roots.append(_make_root(q, a, x, (lams[j], lams[j + 1]), kind))
    # deduplicate
    out: list[UnitaryRoot] = []
    for r in roots:
        if not out or abs(r.lambda_star - out[-1].lambda_star) > 1e-9 * max(1.0, abs(r.lambda_star)):
            out.append(r)
    return out


def _make_root(q, a, x, bracket, kind) -> UnitaryRoot:
    d = developing_integral(q, a, x)
    pp = periods(d)
    # the vanishing period measured against the other one, which stays finite
    p, other = (pp.pi_01, pp.pi_1a) if kind == "first" else (pp.pi_1a, pp.pi_01)
    return UnitaryRoot(float(a), float(x), abs(p.real) / abs(other), (float(bracket[0]), float(bracket[1])),
                       kind, (pp.pi_01, pp.pi_1a))


_BOUNDARY_GUARD = 1e-9


def local_root(angles, a: float, guess: float, delta: float, limit: float,
               kind: str = "first", xtol: float = 1e-14) -> UnitaryRoot | None:
    """The root nearest to guess, found by widening a bracket from delta up to limit.

    When a probe lands in the region of the other type, the type boundary
    is located and the gap is checked just inside it, where roots collect
    as the family degenerates.
    """
    q = AngleQuadruple.of(angles)
    fn = lambda x: unitarity_gap(q, a, x, kind)  # noqa: E731
    g0 = fn(guess)
    d = delta
    while not math.isfinite(g0) and d <= limit * (1 + 1e-12):
        # the prediction overshot into the other type; step back into this one
        for s in (+1, -1):
            g1 = fn(guess + s * d)
            if math.isfinite(g1):
                guess, g0 = guess + s * d, g1
                break
        d *= 2
    if not math.isfinite(g0):
        return None
    if g0 == 0.0:
        return _make_root(q, a, guess, (guess, guess), kind)

    def solve(lo, hi):
        lo, hi = min(lo, hi), max(lo, hi)
        x = brentq(fn, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
        return _make_root(q, a, x, (lo, hi), kind)

    blocked = {+1: False, -1: False}
    d = delta
    while d <= limit * (1 + 1e-12):
        for s in (+1, -1):
            if blocked[s]:
                continue
            x1 = guess + s * d
            g1 = fn(x1)
            if math.isfinite(g1):
                if g0 * g1 <= 0:
                    return solve(guess, x1)
                continue
            blocked[s] = True
            # the boundary lies between guess and x1: look just inside it
            xb = _refine_type_change(q, a, guess, x1)
            # closer than ~1e-9 the gap is dominated by rounding in k
            floor = _BOUNDARY_GUARD * (1 + abs(xb))
            for t in np.geomspace(1e-9, 1e-3, 7) * max(abs(x1 - guess), 1e-300):
                xin = xb - s * max(t, floor)
                if (xin - guess) * s <= 0:
                    break
                gi = fn(xin)
                if math.isfinite(gi):
                    if g0 * gi <= 0:
                        return solve(guess, xin)
                    break
        if all(blocked.values()):
            break
        d *= 2
    return None
