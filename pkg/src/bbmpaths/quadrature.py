"""Time-of-flight integrals along energy-conserving arcs.

On an arc with ``0.5*f'**2 + a*f**p = c`` the turning point is
``X = (c/a)**(1/p)`` and, writing ``y = f/X``, elapsed time and the potential
integral reduce to the reference integrals

    F(y) = int_0^y dt / sqrt(1 - t**p)
    G(y) = int_0^y t**p dt / sqrt(1 - t**p)

The integrands blow up at t = 1 (the turning point).  Substituting
``t = 1 - u**2`` makes them bounded, after which adaptive Gauss-Kronrod
quadrature converges quickly.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate, special

QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-12


def _one_minus_pow(u2: float, p: float) -> float:
    # 1 - (1 - u2)**p without cancellation for small u2
    return -math.expm1(p * math.log1p(-u2)) if u2 < 1.0 else 1.0


def _f_integrand(u: float, p: float) -> float:
    u2 = u * u
    d = _one_minus_pow(u2, p)
    if d <= 0.0:
        return 2.0 / math.sqrt(p)
    return 2.0 * u / math.sqrt(d)


def _g_integrand(u: float, p: float) -> float:
    u2 = u * u
    return (1.0 - u2) ** p * _f_integrand(u, p) if u2 < 1.0 else 0.0


def _quad(func, lo: float, hi: float, p: float) -> float:
    if hi <= lo:
        return 0.0
    val, _ = integrate.quad(func, lo, hi, args=(p,), epsabs=QUAD_EPSABS,
                            epsrel=QUAD_EPSREL, limit=200)
    return val


def _head(y: float, p: float, power: bool) -> float:
    # x = t**p turns the t-integral into int x**(1/p - 1) * g(x) dx with g smooth on
    # x <= 1/2; the algebraic weight is integrated exactly by QUADPACK's QAWS rule.
    x_hi = y ** p
    if x_hi <= 0.0:
        return 0.0
    g = (lambda x: x / math.sqrt(1.0 - x)) if power else (lambda x: 1.0 / math.sqrt(1.0 - x))
    val, _ = integrate.quad(g, 0.0, x_hi, weight="alg", wvar=(1.0 / p - 1.0, 0.0),
                            epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200)
    return val / p


def _split(p: float) -> float:
    return 0.5 ** (1.0 / p)  # t**p = 1/2


def _integral(y: float, p: float, power: bool) -> float:
    y = min(max(float(y), 0.0), 1.0)
    ts = _split(p)
    head = _head(min(y, ts), p, power)
    if y <= ts:
        return head
    func = _g_integrand if power else _f_integrand
    return head + _quad(func, math.sqrt(1.0 - y), math.sqrt(1.0 - ts), p)


def flight_F(y: float, p: float) -> float:
    """int_0^y dt/sqrt(1 - t**p) for 0 <= y <= 1, p > 0."""
    return _integral(y, p, power=False)


def flight_G(y: float, p: float) -> float:
    """int_0^y t**p dt/sqrt(1 - t**p) for 0 <= y <= 1, p > 0."""
    return _integral(y, p, power=True)


def flight_H(y: float, p: float) -> float:
    """G(y) - F(y)/2: running value of the rate integrand along a normalized arc."""
    return flight_G(y, p) - 0.5 * flight_F(y, p)


@lru_cache(maxsize=256)
def full_F(p: float) -> float:
    return flight_F(1.0, p)


@lru_cache(maxsize=256)
def full_H(p: float) -> float:
    return flight_H(1.0, p)


def singular_endpoint_integral(lo: float, p: float) -> float:
    """int_lo^1 dx/sqrt(1 - x**p) with the square-root singularity at x = 1 removed."""
    return _quad(_f_integrand, 0.0, math.sqrt(1.0 - lo), p)


def flight_F_beta(y, p: float):
    """Closed form of F through the regularized incomplete beta function."""
    y = np.clip(np.asarray(y, dtype=float), 0.0, 1.0)
    b = special.beta(1.0 / p, 0.5)
    return b / p * special.betainc(1.0 / p, 0.5, y ** p)


def flight_F_inverse(v, p: float):
    """Solve F(y) = v for y in [0, 1]; vectorized."""
    v = np.asarray(v, dtype=float)
    b = special.beta(1.0 / p, 0.5)
    frac = np.clip(v * p / b, 0.0, 1.0)
    y = special.betaincinv(1.0 / p, 0.5, frac) ** (1.0 / p)
    # betaincinv degrades for (sub)denormal fractions; there F(y) = y + y**(p+1)/(2(p+1)) + ...
    tiny = v < 1e-200
    series = v * (1.0 - np.abs(v) ** p / (2.0 * (p + 1.0)))
    return np.where(tiny, np.maximum(series, 0.0), y)


def flight_tail(w: float, p: float) -> float:
    """F(1) - F(1 - w**2): flight integral over the last stretch before the turning point."""
    w = min(max(float(w), 0.0), 1.0)
    ws = math.sqrt(1.0 - _split(p))
    if w <= ws:
        return _quad(_f_integrand, 0.0, w, p)
    return full_F(p) - flight_F(1.0 - w * w, p)


def arc_from_flight(u, p: float):
    """Position ``(y, v)`` reached after flight-distance ``u`` from the origin, u in [0, F(1)].

    Near the origin the direct inverse keeps relative precision in ``y``; near the
    turning point the gap form keeps it in ``v``.
    """
    u = np.asarray(u, dtype=float)
    full = special.beta(1.0 / p, 0.5) / p
    y_g, v_g = arc_from_gap(np.clip(full - u, 0.0, full), p)
    y_d = flight_F_inverse(np.clip(u, 0.0, full), p)
    v_d = -np.expm1(p * np.log(np.maximum(y_d, 1e-300)))
    direct = u < 0.5 * full
    return np.where(direct, y_d, y_g), np.where(direct, v_d, v_g)


def arc_from_gap(d, p: float):
    """Position on a normalized arc a flight-distance ``d`` away from its turning point.

    Returns ``(y, v)`` with ``v = 1 - y**p``, so the slope is proportional to
    sqrt(v).  Close to the turning point ``v`` comes from the complementary
    incomplete beta and keeps full relative precision.
    """
    d = np.asarray(d, dtype=float)
    a_, b_ = 1.0 / p, 0.5
    full = special.beta(a_, b_) / p  # F(1)
    frac = np.clip(d / full, 0.0, 1.0)
    near = frac <= 0.5
    v_near = special.betaincinv(b_, a_, np.where(near, frac, 0.5))
    y_far = special.betaincinv(a_, b_, np.where(near, 0.5, 1.0 - frac)) ** (1.0 / p)
    y = np.where(near, np.exp(np.log1p(-v_near) / p), y_far)
    v = np.where(near, v_near, -np.expm1(p * np.log(np.maximum(y_far, 1e-300))))
    return y, v
