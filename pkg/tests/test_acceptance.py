"""Acceptance criteria, one test per criterion.

Each test records its criterion title and wall time; ``conftest.py`` prints
one PASS/FAIL line per criterion at the end of the run. Runtime budgets are
asserted as part of each criterion.
"""
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate, special

from levy_passage import (
    Exponential,
    InverseExponent,
    LevyModel,
    Pareto,
    Regime,
    ScaleEvaluator,
    SimConfig,
    Verdict,
    classify_moment,
    empirical_exponential_moment,
    exponential_moment_abscissa,
    laplace_exponent,
    passage_moment,
    regime,
    sample_passage_times,
    tail_index,
)
from levy_passage.cli import cmd_simulate
from levy_passage.suites import richardson_derivative, standard_models

MODELS = Path(__file__).resolve().parent.parent / "models"


@pytest.fixture
def criterion(record_property):
    state = {}

    def start(number, title, budget):
        record_property("criterion", f"{number:>2}. {title}")
        state.update(t0=time.perf_counter(), budget=budget)

    yield start
    elapsed = time.perf_counter() - state["t0"]
    record_property("elapsed", elapsed)
    assert elapsed < state["budget"], f"took {elapsed:.1f}s, budget {state['budget']}s"


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_01_brownian_laplace_transform(criterion):
    criterion(1, "Brownian passage Laplace transform to 1e-6", 5)
    worst = 0.0
    for p in (0.5, 1.0, 2.0):
        ev = ScaleEvaluator(LevyModel.brownian(p, 1.0))
        for x in (0.1, 1.0, 5.0):
            for q in (0.1, 1.0, 10.0):
                exact = math.exp(-(math.sqrt(p * p + 2 * q) + p) * x)
                worst = max(worst, _rel(ev.passage_lt(q, x), exact))
    assert worst <= 1e-6


def test_criterion_02_inverse_round_trip(criterion):
    criterion(2, "psi(Phi(q)) = q to 1e-10 on a 50-point grid", 5)
    grid = np.linspace(0.0, 100.0, 50)
    families = set()
    for model in standard_models().values():
        families.add(model.kind)
        inv = InverseExponent(model)
        for q in grid:
            v = laplace_exponent(model, inv.phi(q))
            assert (abs(v) <= 1e-12) if q == 0 else _rel(v, q) <= 1e-10, (model, q)
    assert families == {"brownian", "cramer-lundberg", "jump-diffusion", "stable"}


def test_criterion_03_conjugacy(criterion):
    criterion(3, "theta*phi(theta) = psi(theta) and phi(Phi(q)) = eta(q) to 1e-8", 10)
    checked = 0
    for model in standard_models().values():
        if regime(model) is Regime.DRIFTS_DOWN:
            continue
        inv = InverseExponent(model)
        for th in (0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0):
            assert _rel(th * inv.conjugate_exponent(th), laplace_exponent(model, th)) <= 1e-8
        for q in (0.01, 0.1, 1.0, 10.0):
            assert _rel(inv.conjugate_exponent(inv.phi(q)), inv.eta(q)) <= 1e-8
        checked += 1
    assert checked >= 8


def test_criterion_04_bell_recursion(criterion):
    criterion(4, "Phi^(n) vs Richardson differences to 1e-5", 5)
    for model in (LevyModel.brownian(1.0, 1.0), LevyModel.cramer_lundberg(2.0, 1.0, Exponential(1.0))):
        inv = InverseExponent(model)
        for q in (0.25, 1.0, 4.0):
            for n in (2, 3, 4):
                fd = richardson_derivative(inv.phi, q, n, h=0.05 * min(q, 1.0))
                assert _rel(fd, inv.phi_derivative(q, n)) <= 1e-5, (model.kind, q, n)


def _brownian_moment_oracle(kappa):
    # E[tau^kappa] from the passage density x/sqrt(2 pi t^3) exp(-x^2/2t), x = 1
    dens = lambda t: t**kappa * math.exp(-0.5 / t) / math.sqrt(2 * math.pi * t**3)
    a, _ = integrate.quad(dens, 0, 1, limit=200)
    b, _ = integrate.quad(dens, 1, np.inf, limit=200)
    return a + b


# frozen values of the oracle above (also 2^-k Gamma(1/2 - k)/Gamma(1/2))
BROWNIAN_P0 = {0.1: 1.1676558087878139, 0.25: 1.7200799746490391, 0.4: 4.0677451819491921}


def test_criterion_05_brownian_fractional_moments(criterion):
    criterion(5, "Brownian p=0 fractional moments to 1e-4, +inf for kappa >= 1/2", 30)
    ev = ScaleEvaluator(LevyModel.brownian(0.0, 1.0))
    for kappa, frozen in BROWNIAN_P0.items():
        oracle = _brownian_moment_oracle(kappa)
        assert _rel(oracle, frozen) <= 1e-8
        assert _rel(oracle, 2**-kappa * special.gamma(0.5 - kappa) / math.sqrt(math.pi)) <= 1e-8
        assert _rel(passage_moment(ev, 1.0, kappa), oracle) <= 1e-4
    for kappa in (0.5, 0.6, 0.9):
        assert passage_moment(ev, 1.0, kappa) == math.inf


PARETO_CL = LevyModel.cramer_lundberg(2.0, 1.0, Pareto(2.5, 0.6))


def test_criterion_06_pareto_claims(criterion):
    criterion(6, "CL Pareto(2.5): verdicts and Monte Carlo tail index in [1.3, 1.7]", 180)
    for kappa in (0.5, 1.0, 1.4):
        assert classify_moment(PARETO_CL, kappa, 1.0).verdict is Verdict.FINITE
    for kappa in (1.5, 2.0):
        assert classify_moment(PARETO_CL, kappa, 1.0).verdict is Verdict.INFINITE
    s = sample_passage_times(PARETO_CL, 1.0, SimConfig(1_000_000, seed=2024, t_max=1e3))
    assert 1.3 <= tail_index(s) <= 1.7


def test_criterion_07_exponential_moments(criterion):
    criterion(7, "Brownian p=-1: abscissa 1/2, E[exp(tau/4)] stable under doubling", 60)
    model = LevyModel.brownian(-1.0, 1.0)
    assert exponential_moment_abscissa(model) == 0.5
    est = []
    for n in (100_000, 200_000):
        s = sample_passage_times(model, 1.0, SimConfig(n, seed=7, t_max=1e4))
        v, se = empirical_exponential_moment(s, 0.25)
        assert math.isfinite(v) and math.isfinite(se)
        est.append(v)
    assert 0.95 <= est[1] / est[0] <= 1.05


def test_criterion_08_ruin_probabilities(criterion):
    criterion(8, "CL exponential ruin: closed form to 1e-8, Monte Carlo within 3 SE", 120)
    p, lam, mu, n = 2.0, 1.0, 1.0, 200_000
    model = LevyModel.cramer_lundberg(p, lam, Exponential(mu))
    ev = ScaleEvaluator(model)
    for x in (0.0, 1.0, 5.0):
        exact = lam / (p * mu) * math.exp(-(mu - lam / p) * x)
        assert _rel(ev.ruin_probability(x), exact) <= 1e-8
        s = sample_passage_times(model, x, SimConfig(n, seed=int(10 * x) + 1, t_max=1e3))
        assert abs(s.n_finite / n - exact) <= 3 * math.sqrt(exact * (1 - exact) / n), x


# (model, kappa) pairs with a definite verdict; each is compared with the numerics
CONCORDANCE = (
    [("brownian-up", k) for k in (0.5, 1.0, 2.0, 3.0)]
    + [("brownian-osc", 0.25), ("brownian-osc", 0.75), ("brownian-down", 0.5), ("brownian-down", 2.0)]
    + [("cl-exp-up", k) for k in (1.0, 2.0, 3.0)]
    + [("cl-exp-osc", 0.7), ("cl-exp-down", 0.5)]
    + [("cl-pareto-up", 1.0), ("cl-pareto-up", 2.0)]
    + [("cl-lognormal-up", 1.0), ("cl-lognormal-up", 2.0), ("cl-det-up", 1.0), ("cl-det-up", 2.0)]
    + [("jd-exp-up", 1.0), ("jd-exp-up", 2.0), ("jd-exp-down", 0.5)]
    + [("stable-osc", 0.3), ("stable-osc", 0.8), ("stable-up", 1.0)]
)


def test_criterion_09_classifier_concordance(criterion):
    criterion(9, f"classifier vs numerics over {len(CONCORDANCE)} model-kappa pairs", 300)
    assert len(CONCORDANCE) >= 20
    models = standard_models()
    contradictions = []
    for name, kappa in CONCORDANCE:
        verdict = classify_moment(models[name], kappa, 1.0)
        assert verdict.finite is not None, (name, kappa)
        value = passage_moment(ScaleEvaluator(models[name]), 1.0, kappa)
        if verdict.finite != math.isfinite(value):
            contradictions.append((name, kappa, str(verdict.verdict), value))
    assert not contradictions


def test_criterion_10_determinism(criterion):
    criterion(10, "simulate CSV byte-identical across 1, 4 and 8 workers", 60)
    csvs = [cmd_simulate(MODELS / "cl_exp.toml", 1.0, 100_000, 99, t_max=1e3, workers=w).csv
            for w in (1, 4, 8)]
    assert csvs[0] == csvs[1] == csvs[2]
    assert csvs[0].count("\n") > 10_000
