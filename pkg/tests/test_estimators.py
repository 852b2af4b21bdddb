import numpy as np
import pytest
from sklearn.base import clone
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from bbmpaths.estimators import GrowthProfileEstimator, RateFunctional


def test_params_and_clone():
    est = GrowthProfileEstimator(kind="almost_sure", p=1.5, m_beta=2.0)
    assert est.get_params()["p"] == 1.5
    twin = clone(est).set_params(p=0.5)
    assert twin.p == 0.5 and est.p == 1.5


def test_p1_profiles_match_closed_forms():
    z = np.array([0.0, 0.2, -0.2, 0.4])
    exp = GrowthProfileEstimator("expected").fit()
    np.testing.assert_allclose(exp.predict(z), 1 / 24 + np.abs(z) / 2 - z ** 2 / 2, atol=1e-8)
    assert (exp.z_hat_, exp.K_hat_) == (pytest.approx(0.5), pytest.approx(1 / 6))
    cols = exp.transform(z[:2])
    np.testing.assert_allclose(cols[:, 1], [0.5, 0.3], atol=1e-6)
    a_s = GrowthProfileEstimator("almost_sure").fit()
    assert a_s.z_bar_ == pytest.approx(0.5)
    K = a_s.predict([0.25, 0.6])
    assert K[0] == pytest.approx(1 / 12, abs=1e-8) and K[1] == -np.inf


def test_bad_kind():
    with pytest.raises(ValueError):
        GrowthProfileEstimator(kind="sideways").fit()


def test_rate_functional_pipeline():
    grid = np.linspace(0, 1, 65)
    X = np.vstack([0 * grid, 0.5 * grid, 3.0 * grid])
    pipe = make_pipeline(FunctionTransformer(), RateFunctional(t=1.0))
    out = pipe.fit(X).transform(X)
    # K(0, 1) = 0 for the zero path, K(s/2, 1) = 1/4 - 1/8 for the linear one
    assert out[0, 0] == pytest.approx(0.0) and out[0, 2] == np.inf
    assert out[1, 0] == pytest.approx(0.125, abs=1e-4)
    # K(3s, s) = 1.5 s^2 - 4.5 s is negative at once, with minimum -3 at s = 1
    assert out[2, 0] == pytest.approx(-3.0) and out[2, 1] == pytest.approx(-3.0) and out[2, 2] == 0.0
    with pytest.raises(ValueError):
        pipe.transform(X[:, :10])
