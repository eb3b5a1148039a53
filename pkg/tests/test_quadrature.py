import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import beta

from sphrect.quadrature import gauss_legendre_arc, tanh_sinh


@given(st.floats(-0.9, 3.0), st.floats(-0.9, 3.0))
def test_beta_integrals(p, q):
    # int_0^1 x^p (1-x)^q dx with the endpoint offsets supplied by the rule
    res = tanh_sinh(lambda x, xa, xb: np.abs(xa) ** p * np.abs(xb) ** q, 0.0, 1.0, tol=1e-14)
    assert res.value.real == pytest.approx(beta(p + 1, q + 1), rel=1e-11)


def test_complex_segment():
    res = tanh_sinh(lambda z, za, zb: np.exp(z), 0.0, 1j * math.pi, tol=1e-14)
    assert res.value == pytest.approx(-2.0, abs=1e-13)


def test_arc_residue():
    # half circle over a simple pole, clockwise: -i pi times the residue
    v = gauss_legendre_arc(lambda z: 3.0 / (z - 0.5), 0.5, 0.1, math.pi, 0.0)
    assert v == pytest.approx(-3j * math.pi, abs=1e-13)
