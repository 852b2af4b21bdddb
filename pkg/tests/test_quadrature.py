import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from bbmpaths.quadrature import (arc_from_flight, arc_from_gap, flight_F, flight_F_beta,
                                 flight_F_inverse, flight_G, flight_H, flight_tail, full_F, full_H,
                                 singular_endpoint_integral)

ps = st.floats(0.05, 1.99)
# y**p rounds near y = 1 and the integrals there are sqrt(1 - y**p)-sensitive,
# so the direct incomplete-beta oracle is only well conditioned away from 1
ys = st.floats(0.0, 1.0 - 1e-6)


@given(y=ys, p=ps)
def test_F_matches_incomplete_beta(y, p):
    # oracle: F(y) = B(1/p, 1/2)/p * I(y**p; 1/p, 1/2)
    assert flight_F(y, p) == pytest.approx(float(flight_F_beta(y, p)), rel=1e-11, abs=1e-13)


@given(y=ys, p=ps)
def test_G_matches_incomplete_beta(y, p):
    # t**p dt/sqrt(1 - t**p) = (1/p) x**(1/p) (1-x)**(-1/2) dx with x = t**p
    a, b = 1.0 / p + 1.0, 0.5
    oracle = special.beta(a, b) / p * special.betainc(a, b, y ** p)
    assert flight_G(y, p) == pytest.approx(oracle, rel=1e-11, abs=1e-13)


@pytest.mark.parametrize("p", [0.25, 0.5, 1.0, 1.5, 1.9])
def test_full_integrals(p):
    assert full_F(p) == pytest.approx(special.beta(1 / p, 0.5) / p, rel=1e-12)
    G1 = special.beta(1 / p + 1, 0.5) / p
    assert full_H(p) == pytest.approx(G1 - 0.5 * full_F(p), rel=1e-11)
    assert flight_H(1.0, p) == pytest.approx(full_H(p), rel=1e-11)


def test_p1_closed_forms():
    # p = 1: F(y) = 2(1 - sqrt(1-y)), G(y) = 4/3 - 2 sqrt(1-y) + (2/3)(1-y)**1.5
    for y in (0.1, 0.5, 0.9, 1.0):
        assert flight_F(y, 1.0) == pytest.approx(2 * (1 - math.sqrt(1 - y)), rel=1e-13)
        G = 4.0 / 3.0 - 2 * math.sqrt(1 - y) + 2.0 / 3.0 * (1 - y) ** 1.5
        assert flight_G(y, 1.0) == pytest.approx(G, rel=1e-12, abs=1e-15)


@given(w=st.floats(0.0, 1.0), p=ps)
def test_tail_is_complement(w, p):
    # complementary incomplete beta in v = 1 - (1 - w**2)**p, evaluated without cancellation
    v = -math.expm1(p * math.log1p(-w * w)) if w < 1.0 else 1.0
    oracle = special.beta(1 / p, 0.5) / p * special.betainc(0.5, 1 / p, v)
    assert flight_tail(w, p) == pytest.approx(oracle, rel=1e-9, abs=1e-13)


@given(v=st.floats(0.0, 1.0), p=ps)
def test_inverse_roundtrip(v, p):
    u = v * full_F(p)
    y = float(flight_F_inverse(u, p))
    assert float(flight_F_beta(y, p)) == pytest.approx(u, rel=1e-9, abs=1e-12)
    y2, _ = arc_from_flight(u, p)
    assert float(flight_F_beta(float(y2), p)) == pytest.approx(u, rel=1e-9, abs=1e-12)


@given(frac=st.floats(1e-12, 1.0), p=ps)
def test_gap_form_keeps_v_precise(frac, p):
    d = frac * full_F(p)
    y, v = arc_from_gap(d, p)
    assert float(v) == pytest.approx(1.0 - float(y) ** p, abs=1e-12)
    # F(1) - F(y) = B(1/p, 1/2)/p * I(v; 1/2, 1/p), computed from v without cancellation
    gap = special.beta(1 / p, 0.5) / p * special.betainc(0.5, 1 / p, float(v))
    assert gap == pytest.approx(d, rel=1e-9)


def test_singular_endpoint_integral():
    for p in (0.5, 1.0, 1.5):
        lo = 2 ** (-1 / p)
        assert singular_endpoint_integral(lo, p) == pytest.approx(full_F(p) - flight_F(lo, p), rel=1e-12)


@pytest.mark.filterwarnings("error")
@pytest.mark.parametrize("p", [0.1, 0.25, 0.5, 1.0, 1.5, 1.99])
def test_no_integration_warnings(p):
    for y in np.linspace(0, 1, 11):
        flight_F(y, p), flight_G(y, p)
    for w in np.linspace(0, 1, 11):
        flight_tail(w, p)
