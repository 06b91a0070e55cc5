import math

import numpy as np
import pytest

from levy_passage import (
    DomainError,
    Exponential,
    LevyModel,
    PassageSampleSet,
    ScaleEvaluator,
    SimConfig,
    UnsupportedInputError,
    empirical_laplace,
    empirical_moment,
    passage_moment,
    sample_passage_times,
    tail_index,
)
from levy_passage.simulate import block_generator, hill, thread_cap

CL = LevyModel.cramer_lundberg(2.0, 1.0, Exponential(1.0))
# root of the CDF of x/sqrt(2 pi z^3) exp(-x^2/2z) at 1/2 for x = 1 (mpmath)
LEVY_MEDIAN = 2.19810933831773240399967795308


def _set(times):
    times = np.asarray(times, dtype=float)
    return PassageSampleSet(times, 0, 1.0, "-", 0, times.size, 1e4, "synthetic")


def test_config_validation():
    for bad in (dict(n_paths=0), dict(n_paths=10, t_max=0.0), dict(n_paths=10, diffusion_step=-1.0),
                dict(n_paths=10, workers=0), dict(n_paths=10, seed=-1), dict(n_paths=10**12)):
        with pytest.raises(DomainError):
            SimConfig(**bad)


def test_stable_is_unsupported():
    with pytest.raises(UnsupportedInputError):
        sample_passage_times(LevyModel.stable(1.5), 1.0, SimConfig(10))


def test_zero_level_needs_bounded_variation():
    with pytest.raises(DomainError):
        sample_passage_times(LevyModel.brownian(1.0), 0.0, SimConfig(10))


def test_counts_add_up():
    s = sample_passage_times(CL, 1.0, SimConfig(5000, seed=3, t_max=50.0, block_size=700))
    assert s.n_finite + s.censored_count == 5000
    assert np.all(s.finite_times > 0)


def test_determinism_across_workers():
    cfg = SimConfig(30000, seed=11, t_max=100.0, block_size=2000)
    a = sample_passage_times(CL, 1.0, cfg)
    for w in (2, 5):
        b = sample_passage_times(CL, 1.0, SimConfig(30000, seed=11, t_max=100.0, block_size=2000, workers=w))
        assert np.array_equal(a.finite_times, b.finite_times)
        assert np.array_equal(a.undershoots, b.undershoots)


def test_seed_changes_stream():
    assert not np.array_equal(block_generator(1, 0).random(4), block_generator(2, 0).random(4))
    assert not np.array_equal(block_generator(1, 0).random(4), block_generator(1, 1).random(4))


def test_censoring_monotone_in_t_max():
    osc = LevyModel.cramer_lundberg(1.0, 1.0, Exponential(1.0))
    counts = [sample_passage_times(osc, 1.0, SimConfig(4000, seed=5, t_max=t, block_size=500)).censored_count
              for t in (5.0, 10.0, 20.0, 40.0)]
    assert counts == sorted(counts, reverse=True)
    assert counts[-1] < counts[0]


def test_cl_passage_only_at_claims():
    # a passage strictly between claims would leave no undershoot
    s = sample_passage_times(CL, 1.0, SimConfig(20000, seed=2, t_max=200.0))
    assert np.all(s.undershoots > 0)


@pytest.mark.parametrize("x", [0.0, 1.0])
def test_cl_ruin_frequency(x):
    n = 100_000
    s = sample_passage_times(CL, x, SimConfig(n, seed=17, t_max=500.0))
    r = ScaleEvaluator(CL).ruin_probability(x)
    se = math.sqrt(r * (1 - r) / n)
    assert abs(s.n_finite / n - r) < 3 * se


def test_cl_conditional_mean_matches_analytics():
    s = sample_passage_times(CL, 1.0, SimConfig(200_000, seed=23, t_max=500.0))
    m = empirical_moment(s, 1.0)
    exact = passage_moment(ScaleEvaluator(CL), 1.0, 1.0)
    assert abs(m.estimate - exact) < 3 * m.std_error
    assert not m.divergence_suspected


@pytest.mark.parametrize("model", [CL, LevyModel.brownian(0.5, 1.0),
                                   LevyModel.cramer_lundberg(2.0, 1.0, __import__("levy_passage").Pareto(2.5, 0.6))])
def test_laplace_transform_agreement(model):
    s = sample_passage_times(model, 1.0, SimConfig(50_000, seed=29, t_max=500.0))
    ev = ScaleEvaluator(model)
    for q in (0.5, 1.0, 2.0):
        v, se = empirical_laplace(s, q)
        assert abs(v - ev.passage_lt(q, 1.0)) < 4 * se


def test_brownian_driftless_median_and_certain_passage():
    s = sample_passage_times(LevyModel.brownian(0.0), 1.0, SimConfig(1_000_000, seed=31, t_max=1e12))
    assert s.censored_fraction < 1e-5
    assert np.median(s.finite_times) == pytest.approx(LEVY_MEDIAN, rel=0.01)
    assert tail_index(s) == pytest.approx(0.5, abs=0.05)


def test_brownian_conditional_mean():
    p, x = 1.5, 2.0
    s = sample_passage_times(LevyModel.brownian(p), x, SimConfig(200_000, seed=37))
    m = empirical_moment(s, 1.0)
    assert abs(m.estimate - x / p) < 3 * m.std_error
    r = math.exp(-2 * p * x)
    assert abs(s.n_finite / 200_000 - r) < 3 * math.sqrt(r * (1 - r) / 200_000)


def test_brownian_divergent_moment_grows():
    m = LevyModel.brownian(0.0)
    est = [empirical_moment(sample_passage_times(m, 1.0, SimConfig(n, seed=41, t_max=1e15)), 0.6).estimate
           for n in (10**4, 10**5, 10**6)]
    assert est[0] < est[1] < est[2]


def test_jump_diffusion_flagged_and_close():
    jd = LevyModel.jump_diffusion(1.0, 0.5, 1.0, Exponential(2.0))
    s = sample_passage_times(jd, 1.0, SimConfig(4000, seed=43, t_max=30.0, diffusion_step=1e-2))
    assert s.approximate and s.method == "jump-diffusion-euler"
    assert "bias_estimate_mean_tau" in s.metadata
    r = ScaleEvaluator(jd).ruin_probability(1.0)
    assert abs(s.n_finite / 4000 - r) < 4 * math.sqrt(r * (1 - r) / 4000)


def test_moment_of_constant_sample():
    m = empirical_moment(_set([2.0] * 50), 1.5)
    assert m.estimate == pytest.approx(2.0**1.5)
    assert m.std_error == 0.0


def test_moment_flags_dominant_sample():
    m = empirical_moment(_set([1.0] * 10 + [1e6]), 1.0)
    assert m.divergence_suspected


def test_moment_needs_samples():
    with pytest.raises(DomainError):
        empirical_moment(_set([1.0]), 0.5)


def test_hill_recovers_pareto_exponent():
    rng = np.random.default_rng(7)
    samples = 1.0 + rng.pareto(2.0, 200_000)
    assert hill(samples) == pytest.approx(2.0, abs=0.1)
    with pytest.raises(DomainError):
        tail_index(_set(samples[:50]))


def test_csv_and_json_exports(tmp_path):
    s = sample_passage_times(CL, 1.0, SimConfig(500, seed=1, t_max=100.0))
    text = s.to_csv(tmp_path / "s.csv")
    lines = text.splitlines()
    assert lines[0].startswith("# model_digest: ")
    header_end = lines.index("tau,undershoot")
    assert len(lines) - header_end - 1 == s.n_finite
    assert (tmp_path / "s.csv").read_text() == text
    import json
    d = json.loads(s.to_json())
    assert d["n_paths"] == "500" and "quantiles" in d


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("LEVY_PASSAGE_THREADS", "2")
    assert thread_cap(8) == 2
    monkeypatch.setenv("LEVY_PASSAGE_THREADS", "zero")
    with pytest.raises(DomainError):
        thread_cap(8)
