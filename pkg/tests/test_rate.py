import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bbmpaths.euler_lagrange import frontier
from bbmpaths.model import reference_params
from bbmpaths.rate import (SampledPath, extinction_time, interval_contributions, presence_rate,
                           rate_functional, uniform_grid)


def K_line(a, p, t):
    # f(s) = s: int_0^t a s^p - 1/2 ds
    return a * t ** (p + 1) / (p + 1) - 0.5 * t


@pytest.mark.parametrize("p", [0.0, 0.5, 1.0, 1.5])
@pytest.mark.parametrize("a", [1.0, 2.5])
def test_straight_line_closed_form(p, a):
    P = reference_params(a, p)
    f = SampledPath.from_function(lambda s: s, 4096)
    curve = rate_functional(P, f)
    expect = K_line(a, p, curve.grid)
    np.testing.assert_allclose(curve.K_values, expect, atol=2e-6 * a)


def test_presence_rate_of_line_p1():
    P = reference_params(1.0, 1.0)
    curve = rate_functional(P, SampledPath.from_function(lambda s: s, 2048))
    # K(t) = t^2/2 - t/2 is most negative at t = 1/2
    assert presence_rate(curve, 1.0) == pytest.approx(-0.125, abs=1e-12)
    assert presence_rate(curve, 0.0) == 0.0
    assert extinction_time(curve) == 0.0
    with pytest.raises(ValueError):
        presence_rate(curve, 1.5)


@pytest.mark.parametrize("p", [1.0, 1.5])
def test_frontier_never_goes_extinct(p):
    P = reference_params(1.0, p)
    r = SampledPath.from_function(lambda s: frontier(P, s), 2048)
    curve = rate_functional(P, r)
    assert curve.K_values.min() >= -1e-9
    assert extinction_time(curve) == math.inf


def test_frontier_discretization_small_p():
    # for p < 1 the trapezoid rule on r**p under-resolves s = 0, giving a small deficit
    P = reference_params(1.0, 0.5)
    r = SampledPath.from_function(lambda s: frontier(P, s), 2048)
    assert abs(rate_functional(P, r).K_values).max() < 1e-4


def test_refinement_order_on_frontier():
    # K(r, 1) = 0 exactly; both quadrature errors are O(h^2) for the parabola r at p = 1
    P = reference_params(1.0, 1.0)
    errs = []
    for n in (64, 128, 256, 512):
        r = SampledPath.from_function(lambda s: frontier(P, s), n)
        errs.append(abs(rate_functional(P, r).final))
    orders = [math.log2(e0 / e1) for e0, e1 in zip(errs, errs[1:])]
    assert min(orders) >= 1.8


paths = arrays(np.float64, st.integers(2, 40), elements=st.floats(-5, 5, allow_nan=False))


@given(vals=paths, p=st.sampled_from([0.0, 0.5, 1.0, 1.7]))
def test_symmetry(vals, p):
    vals = np.concatenate([[0.0], vals])
    f = SampledPath(uniform_grid(vals.size - 1), vals)
    P = reference_params(1.3, p)
    np.testing.assert_array_equal(rate_functional(P, f).K_values, rate_functional(P, -f).K_values)


@given(vals=paths, k=st.integers(1, 39), p=st.sampled_from([0.0, 0.5, 1.0, 1.7]))
def test_additivity_over_split(vals, k, p):
    vals = np.concatenate([[0.0], vals])
    grid = uniform_grid(vals.size - 1)
    k = min(k, vals.size - 2)
    whole = interval_contributions(1.0, p, grid, vals).sum()
    parts = (interval_contributions(1.0, p, grid[:k + 1], vals[:k + 1]).sum()
             + interval_contributions(1.0, p, grid[k:], vals[k:]).sum())
    assert whole == pytest.approx(parts, rel=1e-12, abs=1e-12)


@given(slopes=arrays(np.float64, st.integers(1, 30), elements=st.floats(-3, 3)))
def test_p0_piecewise_linear_is_exact(slopes):
    # with p = 0 the potential term is a*t and the kinetic term is exact for piecewise-linear f
    n = slopes.size
    grid = uniform_grid(n)
    vals = np.concatenate([[0.0], np.cumsum(slopes) / n])
    K = rate_functional(reference_params(2.0, 0.0), SampledPath(grid, vals)).final
    assert K == pytest.approx(2.0 - 0.5 * np.sum(slopes ** 2) / n, rel=1e-12, abs=1e-12)


def test_never_positive_presence():
    P = reference_params(1.0, 1.0)
    curve = rate_functional(P, SampledPath.from_function(lambda s: 0.1 * s * s, 256))
    assert presence_rate(curve, 1.0) == 0.0
    assert extinction_time(curve) == math.inf


@pytest.mark.parametrize("grid,vals", [
    ([0.0, 0.5, 0.9], [0.0, 1.0, 2.0]),
    ([0.0, 0.5, 0.5, 1.0], [0.0, 1.0, 1.0, 2.0]),
    ([0.0, 1.0], [0.1, 1.0]),
    ([0.0, 1.0], [0.0, np.nan]),
])
def test_sampled_path_validation(grid, vals):
    with pytest.raises(ValueError):
        SampledPath(np.array(grid), np.array(vals))


def test_csv_roundtrip(tmp_path):
    f = SampledPath.from_function(lambda s: np.sin(3 * s), 50)
    f.to_csv(tmp_path / "f.csv", comment="x")
    g = SampledPath.from_csv(tmp_path / "f.csv")
    np.testing.assert_array_equal(f.values, g.values)
    np.testing.assert_array_equal(f.grid, g.grid)
