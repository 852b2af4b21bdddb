import json
import math
import warnings

import numpy as np
import pytest

from bbmpaths.model import reference_params
from bbmpaths.rate import SampledPath
from bbmpaths.sim import (BranchProbabilityWarning, CapacityExceeded, SimConfig, SmoothPath, TubeSpec,
                          martingale_check, presence_probability, run_bbm, spine_violations,
                          tilted_spine_path, tube_count)

P1 = reference_params(1.0, 1.0)
ZERO = SmoothPath(lambda s: 0.0 * np.asarray(s, dtype=float), lambda s: 0.0 * np.asarray(s, dtype=float))


def cfg(**kw):
    base = dict(params=P1, horizon_T=1.0, replicates=20, seed=3, dt=0.01,
                record_times=(0.0, 0.5, 1.0))
    base.update(kw)
    return SimConfig(**base)


def test_initial_state_and_monotone_population():
    out = run_bbm(cfg())
    assert np.all(out.population[:, 0] == 1) and np.all(out.rightmost[:, 0] == 0)
    assert np.all(np.diff(out.population, axis=1) >= 0)
    assert np.all(out.rightmost[:, -1] >= -10)


def test_reproducible_and_chunk_invariant():
    a = run_bbm(cfg())
    b = run_bbm(cfg())
    c = run_bbm(cfg(chunk_size=3, workers=2))
    for x in (b, c):
        np.testing.assert_array_equal(a.population, x.population)
        np.testing.assert_array_equal(a.rightmost, x.rightmost)
    d = run_bbm(cfg(seed=4))
    assert not np.array_equal(a.rightmost, d.rightmost)


def test_kill_and_tracking_tube_counts_agree():
    f = SampledPath.from_function(lambda s: 0.3 * s, 64)
    kill = tube_count(cfg(tube=TubeSpec(f, 0.4, kill_on_exit=True)))
    track = tube_count(cfg(tube=TubeSpec(f, 0.4, kill_on_exit=False)))
    np.testing.assert_array_equal(kill.tube_count, track.tube_count)
    assert np.all(np.isnan(kill.population))
    assert np.all(track.tube_count <= track.population)


def test_constant_rate_mean():
    # E N(t) = e^t for binary branching at rate 1; the discrete chain has mean (2 - e^-dt)^n
    P0 = reference_params(1.0, 0.0)
    out = run_bbm(cfg(params=P0, replicates=2000, record_times=(1.0,)))
    exact = (2.0 - math.exp(-0.01)) ** 100
    mean = out.population[:, 0].mean()
    se = out.population[:, 0].std(ddof=1) / math.sqrt(2000)
    assert abs(mean - exact) < 4 * se


def test_capacity_abort_and_censor():
    c = cfg(params=reference_params(1.0, 0.0), horizon_T=4.0, replicates=4, max_particles=30,
            record_times=(1.0, 2.0, 3.0, 4.0), dt=0.01)
    with pytest.raises(CapacityExceeded) as info:
        run_bbm(c)
    part = info.value.partial
    assert part.truncated and part.times.size == part.population.shape[1] < 4
    assert np.all(part.times < info.value.time_reached)
    cen = run_bbm(c.with_(on_capacity="censor", chunk_size=1))
    assert np.any(np.isinf(cen.population))
    hit = ~np.isnan(cen.censored_at)
    assert np.all(np.isinf(cen.population[hit, -1])) and np.all(np.isnan(cen.rightmost[hit, -1]))


def test_branch_probability_warning():
    with pytest.warns(BranchProbabilityWarning):
        run_bbm(cfg(params=reference_params(50.0, 0.0), horizon_T=0.1, dt=0.05,
                    record_times=(0.1,), replicates=1, max_particles=10**6))
    with warnings.catch_warnings():
        warnings.simplefilter("error", BranchProbabilityWarning)
        run_bbm(cfg(replicates=2))


def test_config_validation():
    with pytest.raises(ValueError):
        cfg(record_times=(0.5, 0.25))
    with pytest.raises(ValueError):
        cfg(record_times=(0.333,))
    with pytest.raises(ValueError):
        cfg(on_capacity="ignore")
    with pytest.raises(ValueError):
        TubeSpec(SampledPath.from_function(lambda s: 0 * s, 8), 0.0)


def test_martingale_at_time_zero():
    mean, se = martingale_check(cfg(replicates=5), ZERO, 0.5, 0.0)
    assert mean == pytest.approx(1.0) and se == pytest.approx(0.0)


def test_spine_stays_in_tube_and_matches_free_variance():
    T, eps = 1.0, 0.5
    paths = tilted_spine_path(P1, ZERO, eps, T, seed=1, dt=0.01, replicates=400)
    assert paths.shape == (400, 101)
    assert spine_violations(paths, ZERO, eps, T, P1.q, dt=0.01) == 0
    # the sine-tilted spine in a symmetric tube has stationary density cos^2,
    # whose variance is w^2 (1/3 - 2/pi^2) with w the half width
    var_end = paths[:, -1].var()
    assert var_end < eps ** 2 * (1 / 3 - 2 / math.pi ** 2) * 1.5


def test_presence_at_time_zero():
    tube = TubeSpec(SampledPath.from_function(lambda s: 0 * s, 8), 0.5)
    freq, se, theory = presence_probability(cfg(tube=tube, replicates=10), 0.0)
    assert freq == 1.0 and se == 0.0 and theory == pytest.approx(1.0)


def test_outcome_serialisation(tmp_path):
    out = run_bbm(cfg(replicates=3))
    payload = json.loads(out.to_json(tmp_path / "o.json", manifest={"digest": "x"}))
    assert payload["replicates"] == 3 and payload["manifest"]["digest"] == "x"
    assert payload["statistics"]["population"]["mean"][0] == 1.0
    lines = out.to_csv(tmp_path / "o.csv", comment="c").splitlines()
    assert lines[:2] == ["# c", "replicate,time,statistic,value"]
    assert len(lines) == 2 + 3 * 3 * 2
