"""Monte Carlo for branching Brownian motion with breeding rate beta*|x|**p.

Fixed-step Euler-Maruyama: in each step of length dt a particle at x branches
with probability 1 - exp(-beta |x|**p dt), judged at the start of the step, and
is joined by A extra particles at the same position; every particle then takes
an independent N(0, dt) increment.

Random numbers are not drawn from a shared stream.  Each particle carries a
64-bit label derived from its ancestry (replicate, step of birth, birth order
among siblings) and its uniforms for step k are a splitmix64 hash of
(label, k).  Results therefore do not depend on how replicates are batched or
scheduled, and removing a particle never changes the randomness seen by any
other one; that is what makes kill-on-exit tube counts agree exactly with full
tracking.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from . import _io
from .model import PotentialParams, validate
from .rate import SampledPath, presence_rate, rate_functional

DEFAULT_DT = 1e-3
DEFAULT_MAX_PARTICLES = 50_000_000
BRANCH_PROB_WARN = 0.1
TAN_CLAMP = math.pi / 2 - 1e-6

_U64 = np.uint64
_GOLD = _U64(0x9E3779B97F4A7C15)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)
# domain tags keeping the per-step streams apart
_BRANCH, _NORMAL, _OFFSPRING, _CHILD, _BRIDGE = 1, 2, 3, 4, 5


class CapacityExceeded(RuntimeError):
    """Population passed ``max_particles``; ``partial`` holds everything recorded before."""

    def __init__(self, time_reached: float, partial: "SimOutcome"):
        super().__init__(f"population cap exceeded at t={time_reached:.6g}")
        self.time_reached = time_reached
        self.partial = partial


class BranchProbabilityWarning(RuntimeWarning):
    pass


def _mix(z):
    # splitmix64 finalizer; uint64 arithmetic wraps silently in numpy
    with np.errstate(over="ignore"):
        z = z + _GOLD
        z = (z ^ (z >> _U64(30))) * _M1
        z = (z ^ (z >> _U64(27))) * _M2
    return z ^ (z >> _U64(31))


def _step_key(k: int, tag: int):
    return _mix(_U64(8 * k + tag))


def _uniform(h):
    # 53 random bits, centred in their cell so the value is never 0 or 1
    return ((h >> _U64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def _root_labels(seed: int, replicates) -> np.ndarray:
    base = _mix(_U64(seed))
    return _mix(base ^ _mix(np.asarray(replicates, dtype=np.uint64) + _U64(1)))


@dataclass(frozen=True)
class TubeSpec:
    """Tube of rescaled half-width ``epsilon`` around ``f``, enforced for s <= theta.

    Membership is checked at the end of every step.  With ``bridge`` set, a
    particle inside at both ends of a step is also dropped with the probability
    that a Brownian bridge between the two points touched a wall,
    exp(-2 d0 d1 / dt) per wall; that brings the step-resolution tube close to
    the continuous-time one.
    """

    f: SampledPath
    epsilon: float
    theta: float = 1.0
    kill_on_exit: bool = True
    bridge: bool = False

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError(f"theta must lie in (0,1], got {self.theta}")

    def center(self, t: float, T: float, q: float) -> float:
        return T ** q * float(self.f(t / T))

    def half_width(self, T: float, q: float) -> float:
        return self.epsilon * T ** q

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "theta": self.theta, "kill_on_exit": self.kill_on_exit,
                "bridge": self.bridge,
                "f": {"t": self.f.grid.tolist(), "f": self.f.values.tolist()}}


@dataclass(frozen=True)
class SmoothPath:
    """A C2 rescaled path given by callables for f and f'; f(0) must be 0."""

    f: Callable
    df: Callable

    def sampled(self, n: int = 1024) -> SampledPath:
        return SampledPath.from_function(self.f, n)


@dataclass(frozen=True)
class SimConfig:
    params: PotentialParams
    horizon_T: float
    replicates: int
    seed: int
    dt: float = DEFAULT_DT
    max_particles: int = DEFAULT_MAX_PARTICLES
    tube: TubeSpec | None = None
    record_times: tuple = ()
    chunk_size: int = 1024
    workers: int = 1
    on_capacity: str = "abort"

    def __post_init__(self):
        validate(self.params)
        if not self.horizon_T > 0.0:
            raise ValueError("horizon_T must be positive")
        if not 0.0 < self.dt <= self.horizon_T:
            raise ValueError("need 0 < dt <= horizon_T")
        if int(self.replicates) < 1:
            raise ValueError("replicates must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.max_particles) < 1 or int(self.chunk_size) < 1 or int(self.workers) < 1:
            raise ValueError("max_particles, chunk_size and workers must be positive")
        if self.on_capacity not in ("abort", "censor"):
            raise ValueError("on_capacity must be 'abort' or 'censor'")
        times = tuple(float(t) for t in (self.record_times or (self.horizon_T,)))
        if any(not 0.0 <= t <= self.horizon_T * (1 + 1e-12) for t in times):
            raise ValueError("record times must lie in [0, horizon_T]")
        if list(times) != sorted(set(times)):
            raise ValueError("record times must be strictly increasing")
        object.__setattr__(self, "record_times", times)
        self.steps_for(self.horizon_T)
        for t in times:
            self.steps_for(t)

    def steps_for(self, t: float) -> int:
        k = round(t / self.dt)
        if abs(k * self.dt - t) > 1e-9 * max(1.0, t):
            raise ValueError(f"time {t} is not a multiple of dt={self.dt}")
        return int(k)

    def with_(self, **changes) -> "SimConfig":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update(changes)
        return SimConfig(**data)

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "horizon_T": self.horizon_T, "dt": self.dt,
                "replicates": int(self.replicates), "seed": int(self.seed),
                "max_particles": int(self.max_particles), "record_times": list(self.record_times),
                "on_capacity": self.on_capacity,
                "tube": None if self.tube is None else self.tube.to_dict()}


@dataclass
class SimOutcome:
    """Per-replicate records, arrays of shape (replicates, len(times)).

    ``population`` and ``rightmost`` are NaN when exiting particles were
    killed, since the untracked part of the tree is gone.  After a capacity
    abort only times before ``time_reached`` are kept.  In censoring mode a
    replicate that outgrows the cap is dropped from then on: its population
    reads +inf (known only to exceed the cap) and its other statistics NaN;
    ``censored_at`` holds the time that happened, NaN otherwise.
    """

    times: np.ndarray
    population: np.ndarray
    rightmost: np.ndarray
    tube_count: np.ndarray | None = None
    martingale: np.ndarray | None = None
    truncated: bool = False
    time_reached: float = math.nan
    config: dict = field(default_factory=dict)
    censored_at: np.ndarray | None = None

    def statistics(self) -> dict:
        out = {"population": self.population, "rightmost": self.rightmost}
        if self.tube_count is not None:
            out["tube_count"] = self.tube_count
        if self.martingale is not None:
            out["martingale"] = self.martingale
        return out

    def summary(self) -> dict:
        """Mean, standard error and median over replicates for every statistic and time.

        Censored (+inf) populations make the mean infinite but leave the median
        meaningful while fewer than half of the replicates are censored.
        """
        res = {}
        for name, arr in self.statistics().items():
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                med = np.nanmedian(arr, axis=0) if arr.shape[1] else np.zeros(0)
            res[name] = {"mean": _json_floats(_nanmean(arr)), "stderr": _json_floats(_stderr(arr)),
                         "median": _json_floats(med)}
        return res

    def to_json(self, path=None, manifest: dict | None = None) -> str:
        payload = {"times": self.times.tolist(), "truncated": self.truncated,
                   "time_reached": None if math.isnan(self.time_reached) else self.time_reached,
                   "replicates": int(self.population.shape[0]), "config": self.config,
                   "censored": 0 if self.censored_at is None
                   else int(np.sum(~np.isnan(self.censored_at))),
                   "statistics": self.summary()}
        if manifest is not None:
            payload["manifest"] = manifest
        text = _io.json_text(payload)
        if path is not None:
            _io.atomic_write_text(path, text)
        return text

    def to_csv(self, path=None, comment: str | None = None) -> str:
        rows = []
        for name, arr in self.statistics().items():
            for r in range(arr.shape[0]):
                for j, t in enumerate(self.times):
                    rows.append((r, float(t), name, float(arr[r, j])))
        rows.sort(key=lambda row: (row[0], row[1], row[2]))
        text = _io.csv_text(["replicate", "time", "statistic", "value"], rows, comment)
        if path is not None:
            _io.atomic_write_text(path, text)
        return text


def _json_floats(arr) -> list:
    # JSON has no inf/nan; use strings so the output stays standard
    return [float(v) if math.isfinite(v) else str(float(v)) for v in np.asarray(arr, dtype=float)]


def _nanmean(arr):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return np.nanmean(arr, axis=0)


def _stderr(arr):
    n = np.sum(~np.isnan(arr), axis=0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sd = np.nanstd(arr, axis=0, ddof=1)
    return np.where(n > 1, sd / np.sqrt(np.maximum(n, 1)), np.nan)


@dataclass(frozen=True)
class _Martingale:
    path: SmoothPath
    epsilon: float


def _offspring_counts(law, u):
    if len(law.pmf) == 1:
        return np.full(u.shape, law.pmf[0][0], dtype=np.int64)
    cdf = np.cumsum(law.probs)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
    return law.support[idx]


def _run_chunk(cfg: SimConfig, reps: np.ndarray, mart: _Martingale | None, terminal=None):
    """Advance one batch of replicates; returns per-replicate records and the abort step."""
    P = cfg.params
    beta, p, dt, T, q = P.beta, P.p, cfg.dt, cfg.horizon_T, P.q
    nrep = reps.size
    nsteps = cfg.steps_for(cfg.record_times[-1])  # T only sets the scaling
    rec_steps = [cfg.steps_for(t) for t in cfg.record_times]
    rec_index = {k: j for j, k in enumerate(rec_steps)}
    nrec = len(rec_steps)
    tube = cfg.tube
    kill = tube is not None and tube.kill_on_exit
    if tube is not None:
        tube_steps = int(math.floor(tube.theta * T / dt + 1e-9))
        half = tube.half_width(T, q)
        centers = T ** q * tube.f(np.arange(tube_steps + 1) * dt / T)
    sqdt = math.sqrt(dt)

    pop = np.full((nrep, nrec), np.nan)
    right = np.full((nrep, nrec), np.nan)
    tcount = np.full((nrep, nrec), np.nan) if tube is not None else None
    zmart = np.full((nrep, nrec), np.nan) if mart is not None else None

    x = np.zeros(nrep)
    rep = np.arange(nrep)
    label = _root_labels(cfg.seed, reps)
    inside = np.ones(nrep, dtype=bool)
    censored_at = np.full(nrep, np.nan)
    if mart is not None:
        m_beta = P.m_beta
        kw = math.pi / (2.0 * mart.epsilon * T ** q)
        fprime = T ** (q - 1) * np.asarray(mart.path.df(np.arange(nsteps + 1) * dt / T), dtype=float)
        fcenter = T ** q * np.asarray(mart.path.f(np.arange(nsteps + 1) * dt / T), dtype=float)
        quad_var = np.concatenate([[0.0], np.cumsum(fprime[:-1] ** 2) * dt])
        occup = np.zeros(nrep)
        ito = np.zeros(nrep)
    warned = False

    def record(k):
        j = rec_index[k]
        if not kill:
            pop[:, j] = np.bincount(rep, minlength=nrep)
            r = np.full(nrep, -np.inf)
            np.maximum.at(r, rep, x)
            right[:, j] = r
        if tcount is not None:
            tcount[:, j] = np.bincount(rep[inside], minlength=nrep)
        if zmart is not None:
            t = k * dt
            expo = (math.pi ** 2 * t / (8.0 * mart.epsilon ** 2 * T ** (2 * q)) + ito
                    - 0.5 * quad_var[k] - m_beta * occup)
            w = np.exp(expo) * np.cos(kw * (x - fcenter[k])) * inside
            zmart[:, j] = np.bincount(rep, weights=w, minlength=nrep)
        gone = ~np.isnan(censored_at)
        if gone.any():
            pop[gone, j] = np.inf
            right[gone, j] = np.nan
            for arr in (tcount, zmart):
                if arr is not None:
                    arr[gone, j] = np.nan

    if 0 in rec_index:
        record(0)
    for k in range(nsteps):
        absx = np.abs(x)
        intensity = np.full_like(x, beta) if p == 0.0 else beta * absx ** p
        prob = -np.expm1(-intensity * dt)
        if not warned and prob.size and prob.max() > BRANCH_PROB_WARN:
            warnings.warn(f"per-step branch probability {prob.max():.3g} exceeds "
                          f"{BRANCH_PROB_WARN}; reduce dt", BranchProbabilityWarning, stacklevel=3)
            warned = True
        if mart is not None:
            occup += (np.ones_like(x) if p == 0.0 else absx ** p) * dt
        branched = np.flatnonzero(_uniform(_mix(label ^ _step_key(k, _BRANCH))) < prob)
        if branched.size:
            plab = label[branched]
            extra = _offspring_counts(P.offspring, _uniform(_mix(plab ^ _step_key(k, _OFFSPRING))))
            parent = np.repeat(branched, extra)
            order = np.arange(parent.size) - np.repeat(np.cumsum(extra) - extra, extra)
            kids = _mix(np.repeat(plab, extra) ^ _mix(_step_key(k, _CHILD) + order.astype(np.uint64)))
            x = np.concatenate([x, x[parent]])
            rep = np.concatenate([rep, rep[parent]])
            label = np.concatenate([label, kids])
            inside = np.concatenate([inside, inside[parent]])
            if mart is not None:
                occup = np.concatenate([occup, occup[parent]])
                ito = np.concatenate([ito, ito[parent]])
            if x.size > cfg.max_particles:
                sizes = np.bincount(rep, minlength=nrep)
                over = sizes > cfg.max_particles
                if over.any() and cfg.on_capacity == "abort":
                    return (pop, right, tcount, zmart, censored_at), k
                if over.any():
                    censored_at[over] = k * dt
                    keep = ~over[rep]
                    x, rep, label, inside = x[keep], rep[keep], label[keep], inside[keep]
                    if mart is not None:
                        occup, ito = occup[keep], ito[keep]
        dw = special.ndtri(_uniform(_mix(label ^ _step_key(k, _NORMAL)))) * sqdt
        if mart is not None:
            ito += fprime[k] * dw
        x_old, x = x, x + dw
        if tube is not None and k + 1 <= tube_steps:
            ok = np.abs(x - centers[k + 1]) < half
            if tube.bridge:
                d0, d1 = x_old - centers[k], x - centers[k + 1]
                with np.errstate(over="ignore", invalid="ignore"):
                    stay = ((1.0 - np.exp(-2.0 * (half - d0) * (half - d1) / dt))
                            * (1.0 - np.exp(-2.0 * (half + d0) * (half + d1) / dt)))
                ok &= _uniform(_mix(label ^ _step_key(k, _BRIDGE))) < stay
            if kill:
                x, rep, label, inside = x[ok], rep[ok], label[ok], inside[ok]
                if mart is not None:
                    occup, ito = occup[ok], ito[ok]
            else:
                inside &= ok
        if k + 1 in rec_index:
            record(k + 1)
    if terminal is not None:
        terminal(rep, x)
    return (pop, right, tcount, zmart, censored_at), None


def _workers(cfg: SimConfig) -> int:
    env = os.environ.get("BBM_THREADS")
    cap = int(env) if env and env.isdigit() and int(env) > 0 else cfg.workers
    return max(1, min(cfg.workers, cap))


def _simulate(cfg: SimConfig, mart: _Martingale | None = None) -> SimOutcome:
    chunks = [np.arange(i, min(i + cfg.chunk_size, cfg.replicates), dtype=np.uint64)
              for i in range(0, cfg.replicates, cfg.chunk_size)]
    run = lambda reps: _run_chunk(cfg, reps, mart)
    workers = _workers(cfg)
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]
    parts = [np.concatenate([r[0][i] for r in results]) if results[0][0][i] is not None else None
             for i in range(5)]
    times = np.array(cfg.record_times)
    aborts = [k for _, k in results if k is not None]
    out = SimOutcome(times, parts[0], parts[1], parts[2], parts[3], config=cfg.to_dict(),
                     censored_at=parts[4])
    if aborts:
        k = min(aborts)
        keep = times <= k * cfg.dt + 1e-12
        out.times = times[keep]
        out.population, out.rightmost = out.population[:, keep], out.rightmost[:, keep]
        if out.tube_count is not None:
            out.tube_count = out.tube_count[:, keep]
        if out.martingale is not None:
            out.martingale = out.martingale[:, keep]
        out.truncated, out.time_reached = True, k * cfg.dt
        raise CapacityExceeded(out.time_reached, out)
    return out


def run_bbm(config: SimConfig) -> SimOutcome:
    """Population size and rightmost position at each record time, per replicate."""
    if config.tube is not None and config.tube.kill_on_exit:
        config = config.with_(tube=TubeSpec(config.tube.f, config.tube.epsilon,
                                            config.tube.theta, kill_on_exit=False))
    return _simulate(config)


def tube_count(config: SimConfig) -> SimOutcome:
    """Number of particles whose path has stayed in the tube (up to theta*T)."""
    if config.tube is None:
        raise ValueError("tube_count needs config.tube")
    return _simulate(config)


def growth_rate_estimate(config: SimConfig, times) -> dict:
    """log N(T) / T**(2q-1) per replicate for each T in ``times`` (one run, nested horizons)."""
    times = tuple(float(t) for t in times)
    if list(times) != sorted(set(times)):
        raise ValueError("times must be strictly increasing")
    cfg = config.with_(horizon_T=times[-1], record_times=times, tube=None)
    out = run_bbm(cfg)
    expo = cfg.params.growth_exponent
    values = np.log(out.population) / np.array(times) ** expo
    return {"times": np.array(times), "values": values, "mean": _nanmean(values),
            "stderr": _stderr(values), "median": np.median(values, axis=0),
            "rightmost": out.rightmost, "censored_at": out.censored_at}


def martingale_check(config: SimConfig, path: SmoothPath, epsilon: float, t: float,
                     bridge: bool = True):
    """Replicate mean and standard error of Z_T(t), T = config.horizon_T; the target is 1.

    Z_T carries the indicator that a particle never left the tube in continuous
    time; checking only at step ends biases the mean upward by O(sqrt(dt)),
    hence the bridge correction by default.
    """
    if not 0.0 <= t <= config.horizon_T:
        raise ValueError("need 0 <= t <= horizon_T")
    tube = TubeSpec(path.sampled(), epsilon, theta=1.0, kill_on_exit=True, bridge=bridge)
    out = _simulate(config.with_(record_times=(float(t),), tube=tube), _Martingale(path, epsilon))
    z = out.martingale[:, 0]
    return float(z.mean()), (float(z.std(ddof=1) / math.sqrt(z.size)) if z.size > 1 else math.nan)


def many_to_one_check(params: PotentialParams, t: float, g: Callable | str = "one", *,
                      paths: int = 5000, trees: int = 2000, seed: int = 0, dt: float = DEFAULT_DT):
    """Both sides of E[sum_u g(X_u(t))] = E[exp(m beta int_0^t |xi|^p ds) g(xi_t)].

    ``g`` maps terminal positions to values; "one" and "positive" (indicator of
    x > 0) are built in.  The left side averages over simulated trees, the right
    side over single Brownian paths on the same time grid.
    """
    g = _STATISTICS[g] if isinstance(g, str) else g
    cfg = SimConfig(params, horizon_T=t, replicates=trees, seed=seed, dt=dt, record_times=(t,))
    lhs_samples = np.zeros(trees)
    for reps in np.array_split(np.arange(trees, dtype=np.uint64), max(1, trees // cfg.chunk_size)):
        lhs_samples[reps.astype(np.int64)] = _terminal_sums(cfg, reps, g)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    n = cfg.steps_for(t)
    xi = np.zeros(paths)
    occup = np.zeros(paths)
    for _ in range(n):
        occup += (1.0 if params.p == 0.0 else np.abs(xi) ** params.p) * dt
        xi += rng.standard_normal(paths) * math.sqrt(dt)
    rhs_samples = np.exp(params.m_beta * occup) * g(xi)
    se = lambda a: float(a.std(ddof=1) / math.sqrt(a.size))
    return {"lhs": float(lhs_samples.mean()), "lhs_stderr": se(lhs_samples),
            "rhs": float(rhs_samples.mean()), "rhs_stderr": se(rhs_samples)}


_STATISTICS = {
    "one": lambda x: np.ones_like(x),
    "positive": lambda x: (x > 0).astype(float),
}


def _terminal_sums(cfg: SimConfig, reps: np.ndarray, g: Callable) -> np.ndarray:
    # reuse the chunk engine through a one-off martingale-free run that records positions
    sums = np.zeros(reps.size)
    _run_chunk(cfg, reps, None, terminal=lambda rep, x: np.add.at(sums, rep, g(x)))
    return sums


def tilted_spine_path(params: PotentialParams, path: SmoothPath, epsilon: float, T: float,
                      seed: int, *, dt: float = DEFAULT_DT, replicates: int = 1) -> np.ndarray:
    """Spine paths under the tilted measure, shape (replicates, steps + 1).

    The drift T**(q-1) f'(t/T) - k tan(k (x - T**q f(t/T))), k = pi/(2 eps T**q),
    is stiff near the tube wall, so the step is drift-implicit in
    theta = k (x - centre): theta' + k**2 dt tan(theta') = theta + k dW, solved
    by bisection.  The left side is increasing and onto R, so theta' stays in
    (-pi/2, pi/2) and the path never leaves the tube.
    """
    q = params.q
    k = math.pi / (2.0 * epsilon * T ** q)
    n = round(T / dt)
    s = np.arange(n + 1) * dt / T
    centre = T ** q * np.asarray(path.f(s), dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))
    theta = np.zeros(replicates)
    out = np.empty((replicates, n + 1))
    out[:, 0] = centre[0]
    stiff = k * k * dt
    for i in range(n):
        rhs = theta + k * math.sqrt(dt) * rng.standard_normal(replicates)
        lo = np.full(replicates, -TAN_CLAMP)
        hi = np.full(replicates, TAN_CLAMP)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            above = mid + stiff * np.tan(mid) > rhs
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        theta = 0.5 * (lo + hi)
        out[:, i + 1] = centre[i + 1] + theta / k
    return out


def spine_violations(paths: np.ndarray, path: SmoothPath, epsilon: float, T: float, q: float,
                     dt: float = DEFAULT_DT) -> int:
    s = np.arange(paths.shape[1]) * dt / T
    centre = T ** q * np.asarray(path.f(s), dtype=float)
    return int(np.sum(np.abs(paths - centre) > epsilon * T ** q))


def presence_probability(config: SimConfig, t: float):
    """(frequency, stderr, theory) for a nonempty tube population at rescaled time t.

    ``theory`` is exp(T**(2q-1) * inf_{s<=t} K(f, s)), the large-deviation
    approximation, meant for qualitative comparison only.
    """
    tube = config.tube
    if tube is None:
        raise ValueError("presence_probability needs config.tube")
    T = config.horizon_T
    abs_t = round(t * T / config.dt) * config.dt
    cfg = config.with_(record_times=(abs_t,), tube=TubeSpec(tube.f, tube.epsilon,
                                                            min(max(t, 1e-300), tube.theta), True))
    out = _simulate(cfg)
    hit = (out.tube_count[:, 0] > 0).astype(float)
    freq = float(hit.mean())
    se = math.sqrt(max(freq * (1 - freq), 0.0) / hit.size)
    theory = math.exp(T ** config.params.growth_exponent
                      * presence_rate(rate_functional(config.params, tube.f), t))
    return freq, se, theory
