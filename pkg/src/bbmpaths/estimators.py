"""scikit-learn style wrappers over the path and profile solvers.

Nothing here is learned from data: ``fit`` only validates parameters and
caches derived constants, so the wrappers exist for get_params/set_params,
cloning and pipeline composition.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .euler_lagrange import DomainError, solve_constrained, solve_unconstrained, z_bar
from .model import PotentialParams, validate
from .profiles import KINDS, optimal_endpoint
from .rate import SampledPath, extinction_time, presence_rate, rate_functional


class GrowthProfileEstimator(BaseEstimator):
    """Growth profile z -> K(z) for expected or almost-sure growth.

    ``predict`` returns K(z); ``transform`` returns the columns [K(z), K'(z)].
    Negative z use the symmetry K(-z) = K(z).  For the almost-sure profile
    points with |z| > z_bar get K = -inf and K' = nan.
    """

    def __init__(self, kind: str = "expected", p: float = 1.0, m_beta: float = 1.0, n_path: int = 64):
        self.kind = kind
        self.p = p
        self.m_beta = m_beta
        self.n_path = n_path

    def _params(self) -> PotentialParams:
        return validate(PotentialParams(beta=float(self.m_beta), p=float(self.p)))

    def fit(self, X=None, y=None):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        self.params_ = self._params()
        self.z_bar_ = z_bar(self.params_)
        self.z_hat_, self.K_hat_ = optimal_endpoint(self.params_, self.kind)
        return self

    def _columns(self, X) -> np.ndarray:
        check_is_fitted(self, "params_")
        z = np.abs(check_array(X, ensure_2d=False, dtype=float).reshape(-1))
        solve = solve_unconstrained if self.kind == "expected" else solve_constrained
        out = np.empty((z.size, 2))
        for i, zi in enumerate(z):
            try:
                res = solve(self.params_, zi, n=self.n_path)
            except DomainError:
                out[i] = (-np.inf, np.nan)
                continue
            out[i] = (res.K_value, -res.endpoint_deriv)
        return out

    def predict(self, X) -> np.ndarray:
        return self._columns(X)[:, 0]

    def transform(self, X) -> np.ndarray:
        return self._columns(X)


class RateFunctional(TransformerMixin, BaseEstimator):
    """Maps sampled paths (rows of X on a uniform grid of [0, 1]) to [K(f, t), presence rate, theta_0].

    Each row must start at 0; theta_0 is inf when K(f, .) never goes negative.
    """

    def __init__(self, p: float = 1.0, m_beta: float = 1.0, t: float = 1.0):
        self.p = p
        self.m_beta = m_beta
        self.t = t

    def fit(self, X, y=None):
        self.params_ = validate(PotentialParams(beta=float(self.m_beta), p=float(self.p)))
        X = check_array(X, dtype=float)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "params_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} grid values per path, got {X.shape[1]}")
        grid = np.linspace(0.0, 1.0, X.shape[1])
        out = np.empty((X.shape[0], 3))
        for i, row in enumerate(X):
            curve = rate_functional(self.params_, SampledPath(grid, row))
            k_t = float(np.interp(self.t, curve.grid, curve.K_values))
            out[i] = (k_t, presence_rate(curve, self.t), extinction_time(curve))
        return out
