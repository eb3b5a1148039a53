import json
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from sphrect.netcalc import AngleQuadruple, enumerate_nets
from sphrect.netgraph import (
    NetGraph, canonical_code, double, equivalent, limit_structure, realize,
    symmetric_image_code, validate,
)

small = st.integers(0, 4)
first_type = st.tuples(small, small, small, small).filter(lambda t: t[1] + t[3] - t[0] - t[2] >= 2)


def nets_of(t):
    return [realize(p) for p in enumerate_nets(t)]


def test_smallest_net():
    (g,) = nets_of((0, 1, 0, 1))
    assert len(g.faces) == 4
    dot = g.to_dot()
    assert dot.startswith("graph net {") and dot.count(" -- ") == len(g.edge_ends())


@settings(deadline=None, max_examples=60)
@given(first_type)
def test_structure(t):
    q = AngleQuadruple(*t)
    for g in nets_of(t):
        assert validate(g) == []
        assert len(g.faces) == 2 * q.total
        D = double(g)
        assert D.euler() == 2
        deg = D.degree()
        assert [deg[c] for c in D.corners] == [4 * A + 2 for A in q]
        assert {deg[v] for v in D.labels if v not in D.corners} <= {4}


@settings(deadline=None, max_examples=40)
@given(first_type)
def test_nets_pairwise_inequivalent(t):
    gs = nets_of(t)
    for g in gs:
        assert equivalent(g, g)
    for g1, g2 in combinations(gs, 2):
        assert not equivalent(g1, g2)


@settings(deadline=None, max_examples=40)
@given(first_type)
def test_json_roundtrip(t):
    for g in nets_of(t):
        back = NetGraph.from_json(json.loads(json.dumps(g.to_json())))
        assert canonical_code(back) == canonical_code(g)


@settings(deadline=None, max_examples=40)
@given(st.integers(0, 4), st.integers(1, 6))
def test_symmetric_nets_are_self_symmetric(a, gap):
    b = a + gap
    for p in enumerate_nets((a, b, a, b)):
        assert (p.mu, p.i, p.k) == (p.nu, p.l, p.m)
        g = realize(p)
        assert symmetric_image_code(g) == canonical_code(g)


@settings(deadline=None, max_examples=60)
@given(first_type)
def test_limit_exponents_match_the_corner_at_infinity(t):
    # f' ~ z^(sum e - 2 deg S) at infinity must give the angle (A3 + 1/2) there
    for g in nets_of(t):
        try:
            st_ = limit_structure(g)
        except ValueError:
            continue
        assert sum(st_.exponents) - 2 * st_.pole_degree == pytest.approx(-t[3] - 1.5)


def test_limit_structure_examples():
    (g,) = nets_of((1, 3, 1, 3))
    s = limit_structure(g)
    assert s.exponents == (0.5, 2.5, 0.5)
    assert s.boundary_poles == ("L1", "L2", "L3", "L4") and s.interior_poles == 0
    (g,) = nets_of((0, 1, 0, 1))
    assert limit_structure(g).pole_degree == 0
