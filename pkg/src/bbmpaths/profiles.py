"""Growth profiles z -> K(z), optimal endpoints and the p = 2 parametric solution."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from . import _io
from .euler_lagrange import (DomainError, solve_constrained, solve_unconstrained, z_bar,
                             zhat_expected_scale)
from .model import PotentialParams, validate
from .quadrature import singular_endpoint_integral

KINDS = ("expected", "almost_sure")
ENDPOINT_TOL = 1e-12  # relative to the natural length scale
NEG_RADICAND_TOL = 1e-8


def _check_kind(kind: str) -> str:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    return kind


def _solver(kind):
    return solve_unconstrained if kind == "expected" else solve_constrained


def natural_scale(params: PotentialParams, kind: str) -> float:
    """z_bar for the almost-sure problem, the zero-slope endpoint for the expected one."""
    if params.p == 0.0:
        return z_bar(params)
    return zhat_expected_scale(params) if kind == "expected" else z_bar(params)


@dataclass(frozen=True)
class GrowthProfile:
    kind: str
    z_grid: np.ndarray
    K: np.ndarray
    K_prime: np.ndarray
    z_hat: float
    K_hat: float
    params: PotentialParams = field(repr=False, compare=False, default=None)

    def to_csv(self, path=None, comment: str | None = None) -> str:
        rows = zip(self.z_grid.tolist(), self.K.tolist(), self.K_prime.tolist())
        text = _io.csv_text(["z", "K", "K_prime"], rows, comment)
        if path is not None:
            _io.atomic_write_text(path, text)
        return text

    def second_differences(self) -> np.ndarray:
        """Discrete second differences of K; non-positive up to rounding when K is concave."""
        z, K = self.z_grid, self.K
        h0, h1 = np.diff(z)[:-1], np.diff(z)[1:]
        return 2.0 * (h0 * K[2:] - (h0 + h1) * K[1:-1] + h1 * K[:-2]) / (h0 * h1 * (h0 + h1))

    def fd_derivative_error(self, exclude_top: float = 0.0) -> np.ndarray:
        """|centered FD of K - K_prime| at interior grid points.

        ``exclude_top`` drops points within that fraction of the grid range of
        its upper end (K_as'' diverges at z_bar, so the FD stencil is useless there).
        """
        z, K = self.z_grid, self.K
        fd = (K[2:] - K[:-2]) / (z[2:] - z[:-2])
        err = np.abs(fd - self.K_prime[1:-1])
        cutoff = z[-1] - exclude_top * (z[-1] - z[0])
        return err[z[2:] <= cutoff + 1e-15]


def fd_cross_check(params: PotentialParams, kind: str, z_points: Sequence[float],
                   rel_step: float = 1e-3, top: float | None = None) -> np.ndarray:
    """|(K(z+h) - K(z-h))/(2h) - K'(z)| with h = rel_step * min(z, top - z).

    The step shrinks towards z = 0, where K has a kink and fast-growing higher
    derivatives, and towards ``top`` (z_bar for the almost-sure profile, where
    K'' diverges), so the truncation error stays small everywhere.
    """
    _check_kind(kind)
    solve = _solver(kind)
    if top is None:
        top = z_bar(params) if kind == "almost_sure" else math.inf
    out = []
    for z in np.asarray(z_points, dtype=float):
        h = rel_step * min(z, top - z)
        if not h > 0.0:
            raise ValueError(f"z={z} must lie strictly inside (0, {top})")
        kp = -solve(params, z, n=8).endpoint_deriv
        fd = (solve(params, z + h, n=8).K_value - solve(params, z - h, n=8).K_value) / (2.0 * h)
        out.append(abs(fd - kp))
    return np.array(out)


def default_z_grid(params: PotentialParams, kind: str, n: int = 101) -> np.ndarray:
    _check_kind(kind)
    if kind == "almost_sure":
        return np.linspace(0.0, z_bar(params), n)
    z_hat, _ = optimal_endpoint(params, "expected")
    top = 2.0 * z_hat if z_hat > 0 else z_bar(params)
    return np.linspace(0.0, top, n)


def tabulate_profile(params: PotentialParams, kind: str, z_grid: Sequence[float] | None = None,
                     n_path: int = 64) -> GrowthProfile:
    """Solve the optimal-path problem at every z of the grid and record K and K'."""
    validate(params)
    _check_kind(kind)
    z_grid = default_z_grid(params, kind) if z_grid is None else np.asarray(z_grid, dtype=float)
    if z_grid.ndim != 1 or z_grid.size == 0 or np.any(np.diff(z_grid) <= 0):
        raise ValueError("z_grid must be a non-empty increasing 1-d array")
    solve = _solver(kind)
    K = np.empty_like(z_grid)
    Kp = np.empty_like(z_grid)
    for i, z in enumerate(z_grid):
        try:
            res = solve(params, z, n=n_path)
        except (DomainError, RuntimeError) as exc:
            raise type(exc)(f"{kind} profile failed at z={z!r}: {exc}") from exc
        K[i] = res.K_value
        Kp[i] = -res.endpoint_deriv
    z_hat, K_hat = optimal_endpoint(params, kind)
    return GrowthProfile(kind, z_grid, K, Kp, z_hat, K_hat, params)


def optimal_endpoint(params: PotentialParams, kind: str) -> tuple[float, float]:
    """Endpoint where the optimal path arrives with zero slope, and the profile value there.

    Found by bisection on z, in units of the problem's natural length scale.
    """
    validate(params)
    _check_kind(kind)
    solve = _solver(kind)
    if params.p == 0.0:
        res = solve(params, 0.0, n=8)
        return 0.0, res.K_value
    L = natural_scale(params, kind)
    slope = lambda zeta: solve(params, zeta * L, n=8).endpoint_deriv
    lo, hi = 0.0, 1.0
    if kind == "expected":
        while slope(hi) < 0.0:
            lo, hi = hi, 2.0 * hi
    if slope(lo) >= 0.0:
        zeta = lo
    else:
        while hi - lo > ENDPOINT_TOL:
            mid = 0.5 * (lo + hi)
            if slope(mid) < 0.0:
                lo = mid
            else:
                hi = mid
        zeta = 0.5 * (lo + hi)
    z_hat = zeta * L
    return z_hat, solve(params, z_hat, n=8).K_value


def k_hat_formula(params: PotentialParams, z_hat: float) -> float:
    p = params.p
    return (2.0 - p) / (2.0 + p) * params.m_beta * (z_hat ** p if p > 0 else 1.0)


def closed_form_log_z_hat(params: PotentialParams, kind: str) -> float:
    """Natural log of the optimal endpoint from the Gamma-function / integral formulas."""
    validate(params)
    _check_kind(kind)
    p, a = params.p, params.m_beta
    if p == 0.0:
        raise DomainError("closed-form endpoint needs p > 0; use optimal_endpoint for p = 0")
    if kind == "expected":
        log_ratio = special.gammaln(0.5 + 1.0 / p) - 0.5 * math.log(math.pi) - special.gammaln(1.0 + 1.0 / p)
        return math.log(2.0 * a) / (2.0 - p) + 2.0 / (2.0 - p) * log_ratio
    tail = singular_endpoint_integral(2.0 ** (-1.0 / p), p)
    denom = 2.0 ** ((3.0 * p - 2.0) / (2.0 * p)) / (2.0 - p) + tail
    return 2.0 / (2.0 - p) * (0.5 * math.log(2.0 * a) - math.log(denom))


def closed_form_z_hat(params: PotentialParams, kind: str) -> float:
    return math.exp(closed_form_log_z_hat(params, kind))


@dataclass(frozen=True)
class OdeCheck:
    max_residual: float
    residuals: np.ndarray
    radicand: np.ndarray
    negative_points: np.ndarray

    @property
    def ok_domain(self) -> bool:
        return self.negative_points.size == 0


def verify_profile_ode(profile: GrowthProfile, params: PotentialParams | None = None) -> OdeCheck:
    """Residual of K' = -2z/(2-p) + sqrt(2(2+p)/(2-p) K + 4z^2/(2-p)^2 - 2 a z^p).

    Uses the stored K' (from the terminal slope), so no finite differencing enters.
    """
    params = params or profile.params
    p, a = params.p, params.m_beta
    z, K, Kp = profile.z_grid, profile.K, profile.K_prime
    zp = np.ones_like(z) if p == 0.0 else np.abs(z) ** p
    rad = 2.0 * (2.0 + p) / (2.0 - p) * K + 4.0 * z * z / (2.0 - p) ** 2 - 2.0 * a * zp
    ok = rad >= 0.0
    res = np.full_like(z, np.nan)
    res[ok] = np.abs(Kp[ok] + 2.0 * z[ok] / (2.0 - p) - np.sqrt(rad[ok]))
    neg = z[rad < -NEG_RADICAND_TOL]
    max_res = float(np.nanmax(res)) if ok.any() else float("nan")
    return OdeCheck(max_res, res, rad, neg)


def expected_origin_identity(params: PotentialParams) -> tuple[float, float]:
    """K_exp(0) and 2**(-2p/(2-p)) * K_hat_exp, which should coincide."""
    validate(params)
    lhs = solve_unconstrained(params, 0.0, n=8).K_value
    _, K_hat = optimal_endpoint(params, "expected")
    p = params.p
    return lhs, 2.0 ** (-2.0 * p / (2.0 - p)) * K_hat


@dataclass(frozen=True)
class P2Solution:
    """Parametric solution (z(phi), L(phi)) of the p = 2 profile equation."""

    C: float
    m_beta: float
    phi_grid: np.ndarray
    z_of_phi: np.ndarray
    L_of_phi: np.ndarray

    @staticmethod
    def z_at(C: float, phi):
        phi = np.asarray(phi, dtype=float)
        return C * np.exp(np.arctan(1.0 - 2.0 * phi)) / np.sqrt(2.0 * phi * phi - 2.0 * phi + 1.0)

    @property
    def L_origin(self) -> float:
        return math.sqrt(2.0 * self.m_beta) * self.C ** 2 / 2.0 * math.exp(-math.pi)

    @property
    def z_bar(self) -> float:
        return self.C * math.exp(math.pi / 4.0)

    @property
    def z_hat(self) -> float:
        return self.C * math.sqrt(2.0)

    @property
    def L_hat(self) -> float:
        return math.sqrt(2.0 * self.m_beta) * self.C ** 2 / 2.0

    def relation_errors(self) -> tuple[float, float]:
        """Max deviation of the tabulated arrays from the two parametric relations."""
        s = math.sqrt(2.0 * self.m_beta)
        eL = np.abs(self.L_of_phi - s * self.z_of_phi ** 2 * self.phi_grid ** 2).max()
        ez = np.abs(self.z_of_phi - self.z_at(self.C, self.phi_grid)).max()
        return float(eL), float(ez)

    def to_csv(self, path=None, comment: str | None = None) -> str:
        rows = zip(self.phi_grid.tolist(), self.z_of_phi.tolist(), self.L_of_phi.tolist())
        text = _io.csv_text(["phi", "z", "L"], rows, comment)
        if path is not None:
            _io.atomic_write_text(path, text)
        return text


def p2_parametric(params: PotentialParams, C: float, phi_max: float = 50.0,
                  n: int = 401) -> P2Solution:
    """Tabulate the p = 2 solution; only m*beta is read from ``params``."""
    if not C > 0.0:
        raise ValueError(f"C must be positive, got {C}")
    phi = np.concatenate([[0.0], np.logspace(-6.0, math.log10(phi_max), n - 1)])
    phi = np.union1d(phi, [0.5])
    z = P2Solution.z_at(C, phi)
    L = math.sqrt(2.0 * params.m_beta) * z * z * phi * phi
    return P2Solution(float(C), params.m_beta, phi, z, L)


P2_RATIO = math.exp(math.pi / 4.0) / math.sqrt(2.0)


def p2_limit_check(params: PotentialParams, p_sequence: Sequence[float]) -> dict[float, float]:
    """z_bar / z_hat_as for each p, to compare with the p = 2 landmark ratio.

    The ratio does not depend on m*beta, so each solve uses the m*beta that
    makes z_bar = 1; physical scales under- or overflow as p -> 2.
    """
    out = {}
    for p in p_sequence:
        if not 0.0 < p < 2.0:
            raise ValueError(f"p must lie in (0,2), got {p}")
        unit = PotentialParams(beta=2.0 / (2.0 - p) ** 2 / params.m, p=p, m=params.m,
                               offspring=params.offspring)
        z_hat, _ = optimal_endpoint(unit, "almost_sure")
        out[float(p)] = z_bar(unit) / z_hat
    return out
