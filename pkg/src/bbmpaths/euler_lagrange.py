"""Optimal growth paths from the energy first integral.

Along an Euler-Lagrange arc ``f'' + a*p*f**(p-1) = 0`` (``a = m*beta``) the
quantity ``0.5*f'**2 + a*f**p`` is a constant ``c``.  With the turning point
``X = (c/a)**(1/p)`` and ``y = f/X``, elapsed time is ``X**(1-p/2) F(y) /
sqrt(2a)`` where ``F`` is the reference flight integral in
:mod:`bbmpaths.quadrature`; the rate accumulated along the arc is
``sqrt(2a) X**(1+p/2)`` times the increment of ``H = G - F/2``.  Every solve
therefore reduces to one scalar root-find plus closed-form resampling.

Root-finding runs in nondimensional units: lengths are divided by a natural
scale ``L`` (the frontier endpoint for the constrained problem, the optimal
expected endpoint for the unconstrained one) and ``a`` becomes ``a*L**(p-2)``.
That keeps every bracket O(1) even when p is close to 2 and the physical
scales under- or overflow.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import optimize

from . import _io
from .model import PotentialParams
from .quadrature import arc_from_flight, arc_from_gap, flight_F, flight_H, flight_tail, full_F, full_H
from .rate import DEFAULT_N, SampledPath, rate_functional, uniform_grid

BVP_TOL = 1e-8
ROOT_XTOL = 1e-14


class DomainError(ValueError):
    """Requested endpoint lies outside the problem's domain."""


class SolverError(RuntimeError):
    """The boundary-value solve did not reach its endpoint tolerance."""


@dataclass(frozen=True)
class OptimalPathResult:
    path: SampledPath
    z: float
    kind: str
    s_switch: float
    energy_c: float
    K_value: float
    endpoint_deriv: float
    peak: float
    meta: dict = field(default_factory=dict)
    evaluate: Callable | None = field(default=None, compare=False, repr=False)

    def sidecar(self) -> dict:
        return {
            "z": self.z,
            "kind": self.kind,
            "s_switch": self.s_switch,
            "energy_c": self.energy_c,
            "K_value": self.K_value,
            "endpoint_deriv": self.endpoint_deriv,
        }

    def save(self, csv_path, json_path=None, comment: str | None = None):
        text = _io.csv_text(["s", "f"], zip(self.path.grid.tolist(), self.path.values.tolist()),
                            comment)
        _io.atomic_write_text(csv_path, text)
        if json_path is not None:
            _io.atomic_write_text(json_path, _io.json_text(self.sidecar()))
        return text


def frontier(params: PotentialParams, s):
    """Rescaled trajectory of the right-most particle, r(s)."""
    p = params.p
    s = np.asarray(s, dtype=float)
    out = (params.m_beta * s * s * (2.0 - p) ** 2 / 2.0) ** (1.0 / (2.0 - p))
    return out if out.ndim else float(out)


def z_bar(params: PotentialParams) -> float:
    return frontier(params, 1.0)


def _log_zbar(a: float, p: float) -> float:
    return (math.log(a / 2.0) + 2.0 * math.log(2.0 - p)) / (2.0 - p)


def _log_zhat_expected(a: float, p: float) -> float:
    # zero terminal slope: z**(1-p/2) * F(1) = sqrt(2a)
    return (0.5 * math.log(2.0 * a) - math.log(full_F(p))) / (1.0 - p / 2.0)


def zhat_expected_scale(params: PotentialParams) -> float:
    """Endpoint whose unconstrained optimal path has zero terminal slope."""
    return math.exp(_log_zhat_expected(params.m_beta, params.p))


@dataclass(frozen=True)
class _Arc:
    """Normalized Euler-Lagrange arc with turning point X.

    ``u0`` is the flight coordinate (see module docstring) at time ``s0``; it
    grows linearly in time, and values past F(1) are on the descending branch.
    """

    a: float
    p: float
    X: float
    s0: float
    u0: float

    @property
    def rate(self) -> float:
        # dF/ds along the arc
        return math.sqrt(2.0 * self.a) / self.X ** (1.0 - self.p / 2.0)

    def u_at(self, s):
        return self.u0 + self.rate * (np.asarray(s, dtype=float) - self.s0)

    def _state(self, s):
        u = self.u_at(s)
        F1 = full_F(self.p)
        y, v = arc_from_gap(np.abs(F1 - u), self.p)
        y_up, v_up = arc_from_flight(u, self.p)
        up = u <= F1
        y, v = np.where(up, y_up, y), np.where(up, v_up, v)
        sign = np.where(up, 1.0, -1.0)
        return u, y, v, sign

    def position(self, s):
        return self.X * self._state(s)[1]

    def slope(self, s):
        _, _, v, sign = self._state(s)
        return sign * self.X * self.rate * np.sqrt(v)

    def rate_gain(self, s_end: float = 1.0) -> float:
        """Integral of a f^p - f'^2/2 from s0 to s_end."""
        p = self.p
        F1, H1 = full_F(p), full_H(p)
        u1 = float(self.u_at(s_end))
        y0 = float(arc_from_flight(self.u0, p)[0])
        y1 = float(arc_from_flight(u1, p)[0] if u1 <= F1 else arc_from_gap(u1 - F1, p)[0])
        if u1 <= F1:
            dH = flight_H(y1, p) - flight_H(y0, p)
        else:
            dH = (H1 - flight_H(y0, p)) + (H1 - flight_H(y1, p))
        return math.sqrt(2.0 * self.a) * self.X ** (1.0 + p / 2.0) * dH


def _brentq(fn, lo, hi):
    return optimize.brentq(fn, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=500)


def _finish(params, kind, z, L, grid, arc_eval, s_switch, c_norm, K_norm, slope_norm, peak_norm,
            meta):
    values = L * arc_eval(grid)
    values[0] = 0.0
    path = SampledPath(grid, values)
    if abs(values[-1] - z) > BVP_TOL * max(1.0, abs(z)):
        raise SolverError(f"{kind} solve for z={z!r} ended at {values[-1]!r}")
    return OptimalPathResult(
        path=path, z=float(z), kind=kind, s_switch=float(s_switch),
        energy_c=float(L * L * c_norm), K_value=float(L * L * K_norm),
        endpoint_deriv=float(L * slope_norm), peak=float(L * peak_norm), meta=meta,
        evaluate=lambda s: L * arc_eval(np.asarray(s, dtype=float)),
    )


def _linear_solution(params, kind, z, n):
    # p = 0: the Euler-Lagrange equation is f'' = 0
    grid = uniform_grid(n)
    a = params.m_beta
    path = SampledPath(grid, z * grid)
    return OptimalPathResult(path=path, z=float(z), kind=kind, s_switch=0.0,
                             energy_c=0.5 * z * z + a, K_value=a - 0.5 * z * z,
                             endpoint_deriv=float(z), peak=float(z), meta={},
                             evaluate=lambda s: z * np.asarray(s, dtype=float))


def _turning_point_unconstrained(zeta: float, p: float) -> tuple[float, str]:
    """Turning point X of the normalized arc through (0, 0) and (1, zeta).

    Units are chosen so that zeta = 1 is the zero-terminal-slope endpoint.  The
    unknown is w = sqrt(1 - zeta/X), which stays well conditioned as zeta -> 1.
    """
    e = 1.0 - p / 2.0
    F1 = full_F(p)
    if zeta == 1.0:
        return 1.0, "monotone"
    if zeta == 0.0:
        return 2.0 ** (-1.0 / e), "peaked"
    if zeta < 1.0:
        # rises to X, turns, comes back down to zeta
        g = lambda w: (zeta / (1.0 - w * w)) ** e * (F1 + flight_tail(w, p)) - F1
        w = _brentq(g, 0.0, math.sqrt(1.0 - zeta))
        return zeta / (1.0 - w * w), "peaked"
    # still rising at s = 1
    g = lambda w: (zeta / (1.0 - w * w)) ** e * (F1 - flight_tail(w, p)) - F1
    w_mid = math.sqrt(0.5)
    if g(w_mid) < 0.0:
        w = _brentq(g, 0.0, w_mid)
        return zeta / (1.0 - w * w), "monotone"
    # far endpoint: y = zeta/X is small and 1 - w**2 would lose its digits; solve in log y
    h = lambda ly: e * (math.log(zeta) - ly) + math.log(flight_F(math.exp(ly), p)) - math.log(F1)
    top, step = math.log(0.5), 1.0
    bottom = top - step
    while h(bottom) >= 0.0:
        top, step = bottom, 2.0 * step
        bottom = max(top - step, -740.0)
        if top <= -740.0:
            raise SolverError(f"could not bracket the unconstrained arc for zeta={zeta}")
    ly = _brentq(h, bottom, top)
    return zeta / math.exp(ly), "monotone"


def solve_unconstrained(params: PotentialParams, z: float, n: int = DEFAULT_N) -> OptimalPathResult:
    """Optimal path for expected growth ending at z >= 0 (no extinction constraint)."""
    z = float(z)
    if not z >= 0.0 or not math.isfinite(z):
        raise DomainError(f"solve_unconstrained needs z >= 0 (use h_-z = -h_z), got z={z}")
    p = params.p
    if p == 0.0:
        return _linear_solution(params, "expected", z, n)
    L = zhat_expected_scale(params)
    F1 = full_F(p)
    a = F1 * F1 / 2.0  # normalized so that the zero-slope endpoint is 1
    zeta = z / L
    X, regime = _turning_point_unconstrained(zeta, p)
    arc = _Arc(a=a, p=p, X=X, s0=0.0, u0=0.0)
    slope = float(arc.slope(1.0))
    K = arc.rate_gain(1.0)
    meta = {"regime": regime, "scale": L}
    return _finish(params, "expected", z, L, uniform_grid(n), arc.position, 0.0, a * X ** p, K,
                   slope, X if regime == "peaked" else zeta, meta)


def _constrained_endpoint(sigma: float, a: float, p: float) -> float:
    """Normalized endpoint at s = 1 when leaving the frontier s**q at time sigma.

    Past a zero crossing the arc continues on the negative side, which keeps
    the map signed for bracketing.
    """
    q = 2.0 / (2.0 - p)
    X = 2.0 ** (1.0 / p) * sigma ** q
    if X == 0.0:
        return 0.0
    F1 = full_F(p)
    u = flight_F(2.0 ** (-1.0 / p), p) + math.sqrt(2.0 * a) / X ** (1.0 - p / 2.0) * (1.0 - sigma)
    if u <= 2.0 * F1:
        return X * float(arc_from_gap(abs(F1 - u), p)[0])
    return -X * float(arc_from_gap(max(3.0 * F1 - u, 0.0), p)[0])


def solve_constrained(params: PotentialParams, z: float, n: int = DEFAULT_N) -> OptimalPathResult:
    """Optimal extinction-free path ending at z in [0, z_bar].

    Rides the frontier r up to the switch time s_z, then follows the
    Euler-Lagrange arc leaving r with matching slope (so c = 2*a*r(s_z)**p).
    """
    z = float(z)
    zb = z_bar(params)
    if not (0.0 <= z <= zb * (1.0 + BVP_TOL) + BVP_TOL) or not math.isfinite(z):
        raise DomainError(f"almost-sure endpoint z={z} outside [0, z_bar={zb}]")
    z = min(z, zb)
    p = params.p
    if p == 0.0:
        return _linear_solution(params, "almost_sure", z, n)
    q = 2.0 / (2.0 - p)
    a = 2.0 / (2.0 - p) ** 2  # normalized so that r(s) = s**q and z_bar = 1
    L = zb
    zeta = z / L
    if zeta >= 1.0:
        sigma = 1.0
    else:
        g = lambda s: _constrained_endpoint(s, a, p) - zeta
        hi, lo = 1.0, 0.5
        while g(lo) >= 0.0:
            hi, lo = lo, lo / 2.0
            if lo < 1e-12:
                raise SolverError(f"could not bracket the switch time for z={z}")
        sigma = _brentq(g, lo, hi)
    r_sig = sigma ** q
    X = 2.0 ** (1.0 / p) * r_sig
    meta = {"scale": L, "peak_turn": X * L}
    if sigma >= 1.0:
        frontier_only = lambda s: np.clip(s, 0.0, 1.0) ** q
        return _finish(params, "almost_sure", z, L, uniform_grid(n), frontier_only, 1.0,
                       2.0 * a * r_sig ** p, 0.0, q, 1.0, meta)
    arc = _Arc(a=a, p=p, X=X, s0=sigma, u0=flight_F(2.0 ** (-1.0 / p), p))

    def evaluate(s):
        s = np.clip(s, 0.0, 1.0)
        return np.where(s <= sigma, s ** q, arc.position(np.maximum(s, sigma)))

    turned = float(arc.u_at(1.0)) > full_F(p)
    return _finish(params, "almost_sure", z, L, uniform_grid(n), evaluate, sigma,
                   2.0 * a * r_sig ** p, arc.rate_gain(1.0), float(arc.slope(1.0)),
                   X if turned else zeta, meta)


def _clear_of_zeros(result: OptimalPathResult, idx: np.ndarray, boundary: int) -> np.ndarray:
    # f**(p-1) is singular where the path touches 0 (s = 0, and s = 1 when z = 0),
    # so difference formulas lose their order there.
    n = result.path.n
    keep = idx >= boundary
    if result.z == 0.0:
        keep &= idx <= n - boundary
    return idx[keep]


def energy_residual(result: OptimalPathResult, params: PotentialParams,
                    boundary: int = 64) -> np.ndarray:
    """|0.5 f'^2 + a |f|^p - c| on the Euler-Lagrange segment.

    f' comes from fourth-order centered differences of the sampled path, so this
    is an independent check of the first integral rather than a restatement of it.
    Points within ``boundary`` grid steps of a zero of the path are skipped.
    """
    f = result.path.values
    grid = result.path.grid
    h = grid[1] - grid[0]
    i = np.arange(2, f.size - 2)
    i = i[grid[i - 2] >= result.s_switch] if result.s_switch > 0 else i
    i = _clear_of_zeros(result, i, boundary)
    d = (-f[i + 2] + 8 * f[i + 1] - 8 * f[i - 1] + f[i - 2]) / (12 * h)
    return np.abs(0.5 * d * d + params.m_beta * np.abs(f[i]) ** params.p - result.energy_c)


def el_residual(result: OptimalPathResult, params: PotentialParams,
                boundary: int = 64) -> tuple[np.ndarray, float]:
    """Central-difference residual of f'' + a p f^(p-1) on interior phase-2 points.

    Returns the residuals and the scale a*p*max(f^(p-1)) over the same points.
    """
    f = result.path.values
    grid = result.path.grid
    h = grid[1] - grid[0]
    i = np.arange(1, f.size - 1)
    i = i[(grid[i - 1] > result.s_switch) & (f[i] > 0)]
    i = _clear_of_zeros(result, i, boundary)
    d2 = (f[i + 1] - 2 * f[i] + f[i - 1]) / (h * h)
    a, p = params.m_beta, params.p
    src = a * p * f[i] ** (p - 1)
    return np.abs(d2 + src), float(src.max()) if src.size else 0.0


def c1_jump(result: OptimalPathResult) -> float:
    """Mismatch of one-sided slopes at the switch time (zero when there is no switch)."""
    s = result.s_switch
    if s <= 0.0 or s >= 1.0:
        return 0.0
    # second-order one-sided differences of the continuous solution
    h = 1e-5 * min(s, 1.0 - s)
    ev = result.evaluate
    fs = float(ev(s))
    left = (3 * fs - 4 * float(ev(s - h)) + float(ev(s - 2 * h))) / (2 * h)
    right = (-3 * fs + 4 * float(ev(s + h)) - float(ev(s + 2 * h))) / (2 * h)
    return abs(left - right)


def check_endpoint(result: OptimalPathResult) -> float:
    return abs(result.path.values[-1] - result.z)


def K_on_grid(result: OptimalPathResult, params: PotentialParams) -> np.ndarray:
    return rate_functional(params, result.path).K_values


def load_sidecar(json_path) -> dict:
    with open(json_path, encoding="utf-8") as fh:
        return json.load(fh)
