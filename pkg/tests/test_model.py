import math

import pytest
from hypothesis import given, strategies as st

from levy_passage import (
    Deterministic,
    DomainError,
    Exponential,
    LevyModel,
    LogNormal,
    ModelError,
    Pareto,
    Regime,
    jump_moment,
    laplace_exponent,
    laplace_exponent_derivative,
    mean,
    regime,
)
from levy_passage.model import laplace_exponent_complex

# psi values from mpmath integration against the claim densities (30 digits)
FROZEN_PSI = [
    (LevyModel.cramer_lundberg(2.0, 1.0, Pareto(2.5, 0.6)), 0.7, 0.93051294675894414889),
    (LevyModel.cramer_lundberg(2.0, 1.0, LogNormal(-0.5, 1.0)), 2.0, 3.3324849008472685444),
    (LevyModel.jump_diffusion(1.0, 0.5, 1.0, Exponential(2.0)), 1.3, 1.3285606060606060606),
    (LevyModel.cramer_lundberg(2.0, 1.0, Deterministic(1.5)), 0.4, 0.34881163609402643263),
    (LevyModel.cramer_lundberg(1.0, 1.0, Exponential(1.0)), 1e-9, 9.9999999899993783676e-19),
    (LevyModel.brownian(1.0, 1.0), 3.0, 7.5),
    (LevyModel.stable(1.5), 2.0, 2.0**1.5),
]


@pytest.mark.parametrize("model,theta,expected", FROZEN_PSI)
def test_psi_against_frozen_values(model, theta, expected):
    assert laplace_exponent(model, theta) == pytest.approx(expected, rel=1e-12)


def test_psi_zero_and_complex_agree(models):
    for m in models.values():
        assert laplace_exponent(m, 0.0) == 0.0
        for th in (0.3, 2.0):
            z = complex(laplace_exponent_complex(m, th))
            assert z.real == pytest.approx(laplace_exponent(m, th), rel=1e-9)
            assert abs(z.imag) < 1e-12


@given(st.floats(0.01, 20), st.floats(0.01, 20))
def test_psi_convex(models, a, b):
    for m in models.values():
        mid = laplace_exponent(m, 0.5 * (a + b))
        chord = 0.5 * (laplace_exponent(m, a) + laplace_exponent(m, b))
        assert mid <= chord + 1e-10 * (1 + abs(chord))


@pytest.mark.parametrize("name", ["brownian-up", "cl-exp-up", "cl-pareto-up", "jd-exp-up", "stable-up",
                                  "cl-lognormal-up"])
def test_derivative_matches_finite_difference(models, name):
    m = models[name]
    th, h = 1.1, 1e-5
    fd = (laplace_exponent(m, th + h) - laplace_exponent(m, th - h)) / (2 * h)
    assert laplace_exponent_derivative(m, th, 1) == pytest.approx(fd, rel=1e-7)
    fd2 = (laplace_exponent_derivative(m, th + h, 1) - laplace_exponent_derivative(m, th - h, 1)) / (2 * h)
    assert laplace_exponent_derivative(m, th, 2) == pytest.approx(fd2, rel=1e-6)


def test_regimes(models):
    assert regime(models["brownian-up"]) is Regime.DRIFTS_UP
    assert regime(models["cl-exp-osc"]) is Regime.OSCILLATES
    assert regime(models["cl-exp-down"]) is Regime.DRIFTS_DOWN
    assert regime(models["stable-osc"]) is Regime.OSCILLATES
    # lognormal mean exp(m + s^2/2) = 1 exactly for m = -1/2, s = 1
    assert regime(LevyModel.cramer_lundberg(1.0, 1.0, LogNormal(-0.5, 1.0))) is Regime.OSCILLATES
    assert mean(models["cl-exp-up"]) == 1.0


def test_derivative_at_zero_infinite_for_heavy_tails(models):
    m = models["cl-pareto-up"]
    assert math.isfinite(laplace_exponent_derivative(m, 0.0, 2))  # alpha = 2.5 > 2
    assert laplace_exponent_derivative(m, 0.0, 3) == -math.inf


def test_jump_moment():
    m = LevyModel.cramer_lundberg(2.0, 1.0, Pareto(2.5, 0.6))
    assert math.isinf(jump_moment(m, 2.5))
    assert math.isfinite(jump_moment(m, 2.4))
    assert jump_moment(LevyModel.brownian(0.0), 3.0) == 0.0


@pytest.mark.parametrize("build", [
    lambda: LevyModel(gaussian_var=-1.0),
    lambda: LevyModel(gaussian_var=0.0, drift=1.0),
    lambda: LevyModel.cramer_lundberg(0.0, 1.0, Exponential(1.0)),
    lambda: Exponential(-1.0),
    lambda: Pareto(0.5, 1.0),
    lambda: LevyModel.stable(2.5),
])
def test_invalid_parameters(build):
    with pytest.raises(ModelError):
        build()


def test_negative_theta_rejected(models):
    with pytest.raises(DomainError):
        laplace_exponent(models["brownian-up"], -1.0)


def test_digest_is_stable_and_parameter_sensitive():
    a = LevyModel.cramer_lundberg(2.0, 1.0, Exponential(1.0))
    b = LevyModel.cramer_lundberg(2.0, 1.0, Exponential(1.0))
    c = LevyModel.cramer_lundberg(2.0, 1.0, Exponential(1.5))
    assert a.digest == b.digest != c.digest
