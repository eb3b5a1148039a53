"""Integer combinatorics of angle quadruples and net parameters.

Corner j of a rectangle has angle (A_j + 1/2) half-turns.  A net of a
first-type rectangle is encoded by seven non-negative integers
(mu, nu, kappa, i, k, l, m).
"""
from __future__ import annotations

from dataclasses import dataclass, asdict, replace
from fractions import Fraction
from itertools import product
from typing import Iterator

import numpy as np

__all__ = [
    "AngleQuadruple", "NetParams", "CountReport", "OperationError",
    "delta", "exists", "is_special", "count", "enumerate_nets",
    "brute_force_nets", "brute_force_census", "apply_operation", "applicable_operations",
    "terminal_condition", "reduce_to_terminal", "relabel_marking",
    "symmetric_count", "OPERATIONS",
]


@dataclass(frozen=True, order=True)
class AngleQuadruple:
    A0: int
    A1: int
    A2: int
    A3: int

    def __post_init__(self):
        for v in self.as_tuple():
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"angle integer parts must be non-negative ints, got {self.as_tuple()}")

    @classmethod
    def of(cls, q) -> "AngleQuadruple":
        if isinstance(q, AngleQuadruple):
            return q
        return cls(*(int(v) for v in q))

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.A0, self.A1, self.A2, self.A3)

    def __iter__(self):
        return iter(self.as_tuple())

    def __getitem__(self, j: int) -> int:
        return self.as_tuple()[j]

    @property
    def two_delta(self) -> int:
        return self.A1 + self.A3 - self.A0 - self.A2

    @property
    def total(self) -> int:
        return sum(self.as_tuple())

    def alphas(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(2 * a + 1, 2) for a in self)

    def to_json(self) -> list[int]:
        return list(self.as_tuple())


@dataclass(frozen=True, order=True)
class NetParams:
    mu: int
    nu: int
    kappa: int
    i: int
    k: int
    l: int
    m: int

    def __post_init__(self):
        vals = self.as_tuple()
        if any(not isinstance(v, int) or v < 0 for v in vals):
            raise ValueError(f"net parameters must be non-negative ints, got {vals}")
        if self.i * self.mu or self.l * self.nu:
            raise ValueError(f"need i*mu = l*nu = 0, got {vals}")

    def as_tuple(self) -> tuple[int, ...]:
        return (self.mu, self.nu, self.kappa, self.i, self.k, self.l, self.m)

    def angles(self) -> AngleQuadruple:
        mu, nu, kap, i, k, l, m = self.as_tuple()
        return AngleQuadruple(i + m, i + k + nu + 1 + 2 * kap, k + l, l + m + mu + 1 + 2 * kap)

    def to_json(self) -> dict[str, int]:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "NetParams":
        return cls(**{key: int(d[key]) for key in ("mu", "nu", "kappa", "i", "k", "l", "m")})


@dataclass(frozen=True)
class CountReport:
    exists: bool
    is_special: bool
    m1: int
    m2: int
    n_special: int
    kappa_max: int | None
    first_type_count: int
    total_marked_count: int

    def to_json(self) -> dict:
        return asdict(self)


class OperationError(ValueError):
    """An operation was requested on parameters that do not satisfy its precondition."""


def delta(q) -> Fraction:
    q = AngleQuadruple.of(q)
    return Fraction(q.two_delta, 2)


def exists(q) -> bool:
    q = AngleQuadruple.of(q)
    d2 = q.two_delta
    return (d2 >= 2 and q.A1 >= 1 and q.A3 >= 1) or (d2 <= -2 and q.A0 >= 1 and q.A2 >= 1)


def is_special(q) -> bool:
    q = AngleQuadruple.of(q)
    d2 = q.two_delta
    if d2 % 2 or (d2 // 2) % 2 == 0:
        return False
    d = d2 // 2
    return (d > 0 and q.A1 >= d and q.A3 >= d) or (d < 0 and q.A0 >= -d and q.A2 >= -d)


def _floor_min_halves(*twice: int) -> int:
    # floor(min(x_j / 2)) for integers x_j
    return min(twice) // 2


def _m1(q: AngleQuadruple) -> int:
    # [min((A1+1)/2, (A3+1)/2, (delta+1)/2)], all as halves of integers
    return max(0, min(2 * (q.A1 + 1), 2 * (q.A3 + 1), q.two_delta + 2) // 4)


def _n_special(q: AngleQuadruple) -> int:
    # min(A0+(1+d)/2, A1+(1-d)/2, A2+(1+d)/2, A3+(1-d)/2) for odd integer d
    d = q.two_delta // 2
    return min(q.A0 + (1 + d) // 2, q.A1 + (1 - d) // 2, q.A2 + (1 + d) // 2, q.A3 + (1 - d) // 2)


def relabel_marking(q) -> AngleQuadruple:
    q = AngleQuadruple.of(q)
    return AngleQuadruple(q.A1, q.A2, q.A3, q.A0)


def _first_type_view(q: AngleQuadruple) -> AngleQuadruple:
    return q if q.two_delta >= 0 else relabel_marking(q)


def count(q) -> CountReport:
    q = AngleQuadruple.of(q)
    ok = exists(q)
    special = is_special(q)
    m1 = _m1(q)
    m2 = _m1(relabel_marking(q))
    if q.two_delta >= 2:
        km = min(2 * (q.A1 - 1), 2 * (q.A3 - 1), q.two_delta - 2)
        kappa_max = km // 4 if km >= 0 else None
    else:
        kappa_max = None
    n = _n_special(_first_type_view(q)) if special else 0
    if not ok:
        first = 0
    elif special:
        first = n
    else:
        first = m1 if q.two_delta > 0 else m2
    return CountReport(ok, special, m1, m2, n, kappa_max, first, 2 * first)


def _solutions(q: AngleQuadruple) -> Iterator[NetParams]:
    # Solve the linear system for (mu, nu, kappa, i, k, l, m) given the angles.
    # For fixed (mu, nu, kappa, i) the remaining unknowns are determined:
    # m = A0 - i, k = A1 - i - nu - 1 - 2 kappa, l = A2 - k.
    A0, A1, A2, A3 = q
    bound = max(q)
    for kap in range(bound + 1):
        for mu in range(A3 + 1):
            for nu in range(A1 + 1):
                for i in range(A0 + 1):
                    if i and mu:
                        continue
                    m = A0 - i
                    k = A1 - i - nu - 1 - 2 * kap
                    l = A2 - k
                    if k < 0 or l < 0 or (l and nu):
                        continue
                    if l + m + mu + 1 + 2 * kap != A3:
                        continue
                    yield NetParams(mu, nu, kap, i, k, l, m)


def enumerate_nets(q) -> list[NetParams]:
    """All first-type nets with the given angles, in lexicographic order."""
    q = AngleQuadruple.of(q)
    if q.two_delta < 2:
        if q.two_delta <= -2:
            raise ValueError("delta <= -1: relabel the marking before enumerating")
        return []
    return sorted(_solutions(q))


def brute_force_nets(q) -> list[NetParams]:
    """Exhaustive search over the box [0, max A_j]^7; an oracle for enumerate_nets."""
    q = AngleQuadruple.of(q)
    b = max(q) + 1
    out = []
    for t in product(range(b), repeat=7):
        mu, nu, kap, i, k, l, m = t
        if i * mu or l * nu:
            continue
        p = NetParams(*t)
        if p.angles() == q:
            out.append(p)
    return out


def brute_force_census(max_a: int) -> dict[tuple[int, int, int, int], int]:
    """Number of nets per angle quadruple with every A_j <= max_a, by one sweep of the box.

    Each parameter of a net with A_j <= max_a is itself at most max_a, so
    the box [0, max_a]^7 contains all of them.
    """
    b = max_a + 1
    t = np.indices((b,) * 7, dtype=np.int16).reshape(7, -1)
    mu, nu, kap, i, k, l, m = t
    ok = (i * mu == 0) & (l * nu == 0)
    A = np.stack([i + m, i + k + nu + 1 + 2 * kap, k + l, l + m + mu + 1 + 2 * kap])[:, ok]
    A = A[:, np.all(A <= max_a, axis=0)]
    code = ((A[0] * b + A[1]) * b + A[2]) * b + A[3]
    n = np.bincount(code.astype(np.int64), minlength=b ** 4)
    return {q: int(n[((q[0] * b + q[1]) * b + q[2]) * b + q[3]])
            for q in product(range(b), repeat=4)}


# name -> (condition, transform)
def _op(p: NetParams, **kw) -> NetParams:
    return replace(p, **kw)


OPERATIONS = {
    "I": (lambda p: p.kappa > 0 and p.i >= 2 and p.l == 0 and p.mu == 0,
          lambda p: _op(p, kappa=p.kappa - 1, nu=p.nu + 4, i=p.i - 2, m=p.m + 2)),
    "InvI": (lambda p: p.l == 0 and p.m >= 2 and p.mu == 0 and p.nu >= 4,
             lambda p: _op(p, kappa=p.kappa + 1, nu=p.nu - 4, i=p.i + 2, m=p.m - 2)),
    "II": (lambda p: p.kappa > 0 and p.i == 0 and p.l >= 2 and p.nu == 0,
           lambda p: _op(p, kappa=p.kappa - 1, mu=p.mu + 4, k=p.k + 2, l=p.l - 2)),
    "InvII": (lambda p: p.i == 0 and p.k >= 2 and p.mu >= 4 and p.nu == 0,
              lambda p: _op(p, kappa=p.kappa + 1, mu=p.mu - 4, k=p.k - 2, l=p.l + 2)),
    "III": (lambda p: p.kappa > 0 and p.i == 1 and p.l == 0 and p.mu == 0,
            lambda p: _op(p, kappa=p.kappa - 1, mu=1, nu=p.nu + 3, i=0, m=p.m + 1)),
    "InvIII": (lambda p: p.i == 0 and p.l == 0 and p.m >= 1 and p.mu == 1 and p.nu >= 3,
               lambda p: _op(p, kappa=p.kappa + 1, mu=0, nu=p.nu - 3, i=1, m=p.m - 1)),
    "IV": (lambda p: p.kappa > 0 and p.i == 0 and p.l == 1 and p.nu == 0,
           lambda p: _op(p, kappa=p.kappa - 1, mu=p.mu + 3, nu=1, k=p.k + 1, l=0)),
    "InvIV": (lambda p: p.i == 0 and p.l == 0 and p.k >= 1 and p.mu >= 3 and p.nu == 1,
              lambda p: _op(p, kappa=p.kappa + 1, mu=p.mu - 3, nu=0, k=p.k - 1, l=1)),
    "V": (lambda p: p.kappa > 0 and p.i == 0 and p.l == 0,
          lambda p: _op(p, kappa=p.kappa - 1, mu=p.mu + 2, nu=p.nu + 2)),
    "InvV": (lambda p: p.i == 0 and p.l == 0 and p.mu >= 2 and p.nu >= 2,
             lambda p: _op(p, kappa=p.kappa + 1, mu=p.mu - 2, nu=p.nu - 2)),
    "VI": (lambda p: p.i > 0 and p.l > 0 and p.mu == 0 and p.nu == 0,
           lambda p: _op(p, i=p.i - 1, k=p.k + 1, l=p.l - 1, m=p.m + 1)),
    "InvVI": (lambda p: p.k > 0 and p.m > 0 and p.mu == 0 and p.nu == 0,
              lambda p: _op(p, i=p.i + 1, k=p.k - 1, l=p.l + 1, m=p.m - 1)),
}

_CONDITION_TEXT = {
    "I": "kappa>0, i>=2, l=0, mu=0", "InvI": "l=0, m>=2, mu=0, nu>=4",
    "II": "kappa>0, i=0, l>=2, nu=0", "InvII": "i=0, k>=2, mu>=4, nu=0",
    "III": "kappa>0, i=1, l=0, mu=0", "InvIII": "i=l=0, m>=1, mu=1, nu>=3",
    "IV": "kappa>0, i=0, l=1, nu=0", "InvIV": "i=l=0, k>=1, mu>=3, nu=1",
    "V": "kappa>0, i=l=0", "InvV": "i=l=0, mu>=2, nu>=2",
    "VI": "i>0, l>0, mu=nu=0", "InvVI": "k>0, m>0, mu=nu=0",
}


def apply_operation(op: str, p: NetParams) -> NetParams:
    try:
        cond, f = OPERATIONS[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    if not cond(p):
        raise OperationError(f"operation {op} needs {_CONDITION_TEXT[op]}; got {p.as_tuple()}")
    return f(p)


def applicable_operations(p: NetParams) -> list[str]:
    return [name for name, (cond, _) in OPERATIONS.items() if cond(p)]


_TERMINAL = (
    ("a", lambda p: p.mu == 0 and p.nu == 0),
    ("b", lambda p: p.mu == 0 and p.nu == 1),
    ("c", lambda p: p.mu == 1 and p.nu == 0),
    ("d", lambda p: p.mu == 1 and p.nu == 1),
    ("e", lambda p: p.mu == 0 and p.nu == 2),
    ("f", lambda p: p.mu == 2 and p.nu == 0),
    ("g", lambda p: p.mu == 0 and p.nu == 3),
    ("h", lambda p: p.mu == 3 and p.nu == 0),
    ("i", lambda p: p.mu == 1 and p.nu >= 3 and p.m == 0),
    ("j", lambda p: p.mu >= 3 and p.nu == 1 and p.k == 0),
    ("k", lambda p: p.mu == 0 and p.nu >= 4 and p.m <= 1),
    ("l", lambda p: p.mu >= 4 and p.nu == 0 and p.k <= 1),
)


def terminal_condition(p: NetParams) -> str | None:
    """Letter of the terminal condition satisfied by p, if any."""
    for name, cond in _TERMINAL:
        if cond(p):
            return name
    return None


_INVERSES = ("InvI", "InvII", "InvIII", "InvIV", "InvV")


def reduce_to_terminal(p: NetParams) -> NetParams:
    """Push p to the terminal net of its orbit.

    Operation VI is applied until min(i, l) = 0.  Then inverse operations
    I-V (each raising kappa by one) are applied while one is available; at
    most one is ever available.  The result has kappa = kappa_max.
    """
    while min(p.i, p.l) > 0:
        p = apply_operation("VI", p)
    while True:
        ops = [op for op in _INVERSES if OPERATIONS[op][0](p)]
        if not ops:
            return p
        assert len(ops) == 1, (p, ops)
        p = apply_operation(ops[0], p)


def symmetric_count(alpha_int: int, beta_int: int) -> tuple[int, int]:
    """(total, first_type) counts for angles (A, B, A, B) with alpha = A+1/2, beta = B+1/2."""
    diff = abs(beta_int - alpha_int)
    if diff < 1:
        return (0, 0)
    if diff % 2 == 0:
        return (diff, diff // 2)
    s = alpha_int + beta_int + 1  # alpha + beta
    return (s, s // 2)
