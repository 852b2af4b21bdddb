"""Acceptance checks A1-A12, each returning measured values and a pass flag.

A1-A7 are deterministic numerics ("fast"); A8-A12 are Monte Carlo ("full").
Every check uses fixed seeds, so reruns give identical reports.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .euler_lagrange import solve_constrained, solve_unconstrained
from .model import PotentialParams, reference_params
from .profiles import (KINDS, P2_RATIO, closed_form_z_hat, expected_origin_identity, fd_cross_check,
                       k_hat_formula, optimal_endpoint, p2_limit_check, tabulate_profile,
                       verify_profile_ode)
from .rate import SampledPath
from .sim import (SimConfig, SmoothPath, TubeSpec, growth_rate_estimate,
                  many_to_one_check, martingale_check, presence_probability, run_bbm,
                  spine_violations, tilted_spine_path)

LEVELS = ("fast", "full")


@dataclass
class CriterionResult:
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{self.name}: {'PASS' if self.passed else 'FAIL'} ({self.seconds:.1f}s) {self.measured}"

    def to_dict(self) -> dict:
        return _plain(asdict(self))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def _timed(name, fn) -> CriterionResult:
    t0 = time.perf_counter()
    passed, measured = fn()
    return CriterionResult(name, bool(passed), measured, time.perf_counter() - t0)


# p = 1 closed forms

def h_closed(m_beta, z, s):
    return -0.5 * m_beta * s * s + (z + 0.5 * m_beta) * s


def s_switch_closed(m_beta, z):
    return 1.0 - math.sqrt(0.5 - z / m_beta)


def g_closed(m_beta, z, s):
    sz = s_switch_closed(m_beta, z)
    return np.where(s <= sz, 0.5 * m_beta * s * s,
                    -0.5 * m_beta * s * s + 2.0 * m_beta * sz * s - m_beta * sz * sz)


def K_exp_closed(m_beta, z):
    return m_beta ** 2 / 24.0 + 0.5 * m_beta * z - 0.5 * z * z


def K_as_closed(m_beta, z):
    return m_beta ** 2 * (0.5 - z / m_beta - (2.0 - 4.0 * z / m_beta) ** 1.5 / 6.0)


def a1_paths():
    P = reference_params(1.0, 1.0)
    t0 = time.perf_counter()
    sup_h = sup_g = s_err = 0.0
    for z in (0.0, 0.1, 0.25, 0.4, 0.5):
        h = solve_unconstrained(P, z)
        g = solve_constrained(P, z)
        s = h.path.grid
        sup_h = max(sup_h, float(np.max(np.abs(h.path.values - h_closed(1.0, z, s)))))
        sup_g = max(sup_g, float(np.max(np.abs(g.path.values - g_closed(1.0, z, s)))))
        s_err = max(s_err, abs(g.s_switch - s_switch_closed(1.0, z)))
    runtime = time.perf_counter() - t0
    ok = sup_h <= 1e-6 and sup_g <= 1e-6 and s_err <= 1e-8 and runtime < 5.0
    return ok, {"sup_h": sup_h, "sup_g": sup_g, "s_switch_err": s_err, "runtime_s": runtime}


def a2_profiles():
    P = reference_params(1.0, 1.0)
    exp = tabulate_profile(P, "expected")
    asu = tabulate_profile(P, "almost_sure")
    e_exp = float(np.max(np.abs(exp.K - K_exp_closed(1.0, exp.z_grid))))
    e_as = float(np.max(np.abs(asu.K - K_as_closed(1.0, asu.z_grid))))
    return e_exp <= 1e-6 and e_as <= 1e-6, {"err_K_exp": e_exp, "err_K_as": e_as,
                                             "points": int(exp.z_grid.size)}


def a3_endpoints():
    out, ok = {}, True
    found = {}
    for mb in (1.0, 2.5):
        P = reference_params(mb, 1.0)
        for kind, zt, Kt in (("expected", mb / 2, mb * mb / 6), ("almost_sure", mb / 4, mb * mb / 12)):
            z, K = optimal_endpoint(P, kind)
            found[(mb, kind)] = (z, K)
            ez, eK = abs(z - zt), abs(K - Kt)
            out[f"{kind}_mb{mb}"] = {"z_hat": z, "K_hat": K, "err_z": ez, "err_K": eK}
            ok &= ez <= 1e-6 and eK <= 1e-6
    # z scales like (m beta)**(1/(2-p)), K like (m beta)**(2/(2-p)); p = 1 here
    for kind in KINDS:
        (z1, K1), (z2, K2) = found[(1.0, kind)], found[(2.5, kind)]
        rz = abs(z2 / z1 / 2.5 - 1.0)
        rK = abs(K2 / K1 / 2.5 ** 2 - 1.0)
        out[f"{kind}_scaling_rel_err"] = max(rz, rK)
        ok &= rz <= 1e-6 and rK <= 1e-6
    return ok, out


def a4_gamma():
    out, ok = {}, True
    for p in (0.25, 0.5, 1.0, 1.5, 1.9):
        P = reference_params(1.0, p)
        for kind in KINDS:
            z, K = optimal_endpoint(P, kind)
            ez = abs(z - closed_form_z_hat(P, kind))
            eK = abs(K - k_hat_formula(P, z))
            out[f"p{p}_{kind}"] = {"err_z": ez, "err_K": eK}
            ok &= ez <= 1e-6 and eK <= 1e-8
    return ok, out


def a5_ode():
    out, ok = {}, True
    for p in (0.5, 1.0, 1.5):
        P = reference_params(1.0, p)
        for kind in KINDS:
            prof = tabulate_profile(P, kind)
            chk = verify_profile_ode(prof)
            grid_fd = prof.fd_derivative_error(exclude_top=0.1 if kind == "almost_sure" else 0.0)
            fd = fd_cross_check(P, kind, prof.z_grid[1:-1])
            # K' is stored as minus the terminal slope, so this is zero by construction
            lemma = 0.0
            for z, kp in zip(prof.z_grid[::10], prof.K_prime[::10]):
                res = (solve_unconstrained if kind == "expected" else solve_constrained)(P, z, n=8)
                lemma = max(lemma, abs(kp + res.endpoint_deriv))
            out[f"p{p}_{kind}"] = {"ode_max": chk.max_residual, "fd_max": float(fd.max()),
                                   "grid_fd_max": float(grid_fd.max()), "lemma_max": lemma}
            ok &= chk.max_residual <= 1e-4 and float(fd.max()) <= 1e-3 and lemma <= 1e-8
    return ok, out


def a6_origin():
    out, ok = {}, True
    for p in (0.5, 1.0, 1.5):
        lhs, rhs = expected_origin_identity(reference_params(1.0, p))
        out[f"p{p}"] = abs(lhs - rhs)
        ok &= abs(lhs - rhs) <= 1e-6
    return ok, out


def a7_p2():
    ratios = p2_limit_check(reference_params(1.0, 1.0), (1.0, 1.9, 1.99))
    seq = [ratios[p] for p in (1.0, 1.9, 1.99)]
    rel = abs(seq[-1] / P2_RATIO - 1.0)
    monotone = all(b < a for a, b in zip(seq, seq[1:]))
    return rel <= 0.02 and monotone, {"ratios": dict(zip(("1", "1.9", "1.99"), seq)),
                                      "target": P2_RATIO, "rel_err": rel, "monotone": monotone}


# Monte Carlo

def _yule_discrete_mean(dt, n):
    # exact mean of the simulated p = 0, A = 1 process: each step multiplies E N by 2 - e^{-dt}
    return (2.0 - math.exp(-dt)) ** n


def a8_p0_oracle():
    P = PotentialParams(beta=1.0, p=0.0)
    t0 = time.perf_counter()
    target = math.exp(2.0)
    out, ok = {}, True
    for dt in (1e-3, 5e-4):
        res = run_bbm(SimConfig(P, 2.0, 2000, seed=20080101, dt=dt))
        mean = float(res.population[:, -1].mean())
        se = float(res.population[:, -1].std(ddof=1) / math.sqrt(2000))
        bias = _yule_discrete_mean(dt, round(2.0 / dt)) - target
        out[f"dt{dt}"] = {"mean": mean, "stderr": se, "z": (mean - target) / se, "exact_bias": bias}
        ok &= abs(mean - target) <= 3 * se
    shrinks = abs(out["dt0.0005"]["exact_bias"]) < abs(out["dt0.001"]["exact_bias"])
    runtime = time.perf_counter() - t0
    out.update(bias_shrinks=shrinks, runtime_s=runtime)
    return ok and shrinks and runtime < 120.0, out


def a9_many_to_one():
    r = many_to_one_check(reference_params(1.0, 1.0), 1.0, "one", paths=5000, trees=2000, seed=31)
    comb = math.hypot(r["lhs_stderr"], r["rhs_stderr"])
    return abs(r["lhs"] - r["rhs"]) <= 3 * comb, dict(r, combined_stderr=comb)


def quarter_square() -> SmoothPath:
    return SmoothPath(lambda s: 0.25 * np.asarray(s) ** 2, lambda s: 0.5 * np.asarray(s))


def a10_martingale():
    P = reference_params(1.0, 1.0)
    mean, se = martingale_check(SimConfig(P, 1.0, 5000, seed=41), quarter_square(), 0.5, 0.5)
    return abs(mean - 1.0) <= 3 * se, {"mean": mean, "stderr": se}


def a11_spine():
    P = reference_params(1.0, 1.0)
    out, ok = {}, True
    for T, eps in ((1.0, 0.5), (2.0, 0.2)):
        paths = tilted_spine_path(P, quarter_square(), eps, T, seed=51, replicates=1000)
        v = spine_violations(paths, quarter_square(), eps, T, P.q)
        out[f"T{T}_eps{eps}"] = v
        ok &= v == 0
    return ok, out


def a12_growth():
    P = reference_params(1.0, 1.0)
    t0 = time.perf_counter()
    cfg = SimConfig(P, 5.0, 31, seed=61, max_particles=2_000_000, on_capacity="censor", chunk_size=1)
    g = growth_rate_estimate(cfg, (3.0, 4.0, 5.0))
    med = [float(v) for v in g["median"]]
    rising = med[0] < med[1] < med[2]
    below = med[2] < 1.0 / 6.0
    r5 = g["rightmost"][:, -1] / 25.0
    r_med = float(np.nanmedian(r5))
    censored = int(np.sum(~np.isnan(g["censored_at"])))
    line = TubeSpec(SampledPath.from_function(lambda s: s, 1024), 0.1)
    freq, se, theory = presence_probability(SimConfig(P, 4.0, 1000, seed=62, tube=line), 1.0)
    runtime = time.perf_counter() - t0
    out = {"median_logN_over_T3": med, "increasing": rising, "below_K_hat_exp": below,
           "median_R5_over_25": r_med, "censored_replicates": censored,
           "presence_freq": freq, "presence_stderr": se, "presence_theory": theory,
           "runtime_s": runtime}
    ok = rising and below and 0.3 <= r_med <= 0.7 and freq <= 0.05 and runtime < 1200.0
    return ok, out


FAST = [("A1", a1_paths), ("A2", a2_profiles), ("A3", a3_endpoints), ("A4", a4_gamma),
        ("A5", a5_ode), ("A6", a6_origin), ("A7", a7_p2)]
FULL = FAST + [("A8", a8_p0_oracle), ("A9", a9_many_to_one), ("A10", a10_martingale),
               ("A11", a11_spine), ("A12", a12_growth)]
CRITERIA = dict(FULL)


def run_criterion(name: str) -> CriterionResult:
    return _timed(name, CRITERIA[name])


def run_level(level: str, echo=None) -> list[CriterionResult]:
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}; expected one of {LEVELS}")
    results = []
    for name, fn in (FAST if level == "fast" else FULL):
        res = _timed(name, fn)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
