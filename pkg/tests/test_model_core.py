"""
Tests for the Laplace exponent, the Malthusian parameter and tilting.
"""

import math

import numpy as np
import pytest
from scipy import integrate

from app.errors import SplittingTreeError, SubcriticalModelError
from app.rng import stream
from app.schemas import (
    DiracFinite,
    DiracInfinite,
    Exponential,
    GammaDist,
    GenericDensity,
    LifespanModel,
    Uniform,
)
from app.services import model_core

EXP = LifespanModel(birth_rate=2.0, lifespan=Exponential(rate=1.0))
IMMORTAL = LifespanModel(birth_rate=1.0, lifespan=DiracInfinite())
FIXED = LifespanModel(birth_rate=2.0, lifespan=DiracFinite(a=1.0))
GAMMA = LifespanModel(birth_rate=2.0, lifespan=GammaDist(shape=2.0, rate=1.0))
UNIFORM = LifespanModel(birth_rate=1.5, lifespan=Uniform(lo=0.0, hi=2.0))


def test_exponential_params():
    params = model_core.malthusian(EXP)
    assert params.eta == pytest.approx(1.0, abs=1e-12)
    assert params.c == pytest.approx(0.5, abs=1e-12)
    assert params.m == pytest.approx(2.0)
    assert params.p_ext == pytest.approx(0.5, abs=1e-12)


def test_immortal_params_omit_m():
    params = model_core.malthusian(IMMORTAL)
    assert (params.eta, params.c, params.p_ext) == (1.0, 1.0, 0.0)
    assert math.isinf(params.m)
    assert params.as_public_dict() == {"eta": 1.0, "c": 1.0, "p_ext": 0.0}


def test_fixed_lifespan_root():
    params = model_core.malthusian(FIXED)
    assert abs(model_core.psi(FIXED, params.eta)) <= 1e-12
    assert 1.59 < params.eta < 1.60
    # ψ'(η) = 1 - 2e^{-η} and e^{-η} = 1 - η/2
    assert params.c == pytest.approx(params.eta - 1.0, abs=1e-12)


@pytest.mark.parametrize("rate", [2.0, 1.0])
def test_subcritical_and_critical_rejected(rate):
    model = LifespanModel(birth_rate=1.0, lifespan=Exponential(rate=rate))
    with pytest.raises(SubcriticalModelError):
        model_core.malthusian(model)


def test_psi_closed_forms():
    # ψ(λ) = λ - bλ/(λ+d)
    assert model_core.psi(EXP, 3.0) == pytest.approx(1.5)
    assert model_core.lifespan_laplace(GAMMA, 1.0) == pytest.approx(0.25)
    assert model_core.lifespan_laplace(IMMORTAL, 0.5) == 0.0
    assert model_core.psi(EXP, 0.0) == 0.0


def test_offspring_pgf():
    assert model_core.offspring_pgf(EXP, 1.0) == pytest.approx(1.0)
    assert model_core.offspring_pgf(EXP, 0.0) == pytest.approx(1.0 / 3.0)
    with pytest.raises(ValueError):
        model_core.offspring_pgf(EXP, 1.5)


@pytest.mark.parametrize("model", [EXP, FIXED, GAMMA, UNIFORM])
def test_malthusian_identity(model):
    params = model_core.malthusian(model)
    assert model_core.malthusian_identity(model, params) == pytest.approx(1.0, abs=1e-8)


def test_generic_density_matches_uniform():
    generic = LifespanModel(birth_rate=1.5, lifespan=GenericDensity(density=lambda x: 1.0, upper=2.0))
    expected = model_core.malthusian(UNIFORM)
    params = model_core.malthusian(generic)
    assert params.eta == pytest.approx(expected.eta, rel=1e-7)
    assert params.c == pytest.approx(expected.c, rel=1e-7)


def test_birth_intensity_measure():
    assert model_core.birth_intensity_measure(EXP, 0.0) == pytest.approx(2.0)
    assert model_core.birth_intensity_measure(FIXED, 1.5) == 0.0
    assert model_core.birth_intensity_measure(UNIFORM, 1.0) == pytest.approx(0.75)


def test_tilt_exponential():
    params = model_core.malthusian(EXP)
    tilted = model_core.tilt(EXP, params)
    assert tilted.birth_rate == pytest.approx(1.0)
    assert isinstance(tilted.lifespan, Exponential)
    assert tilted.lifespan.rate == pytest.approx(2.0, rel=1e-12)
    assert model_core.mean_offspring(tilted) == pytest.approx(1.0 - params.c)


def test_tilt_uniform_keeps_mass():
    params = model_core.malthusian(UNIFORM)
    tilted = model_core.tilt(UNIFORM, params)
    assert isinstance(tilted.lifespan, GenericDensity)
    assert tilted.birth_rate == pytest.approx(UNIFORM.birth_rate - params.eta)
    assert model_core.mean_offspring(tilted) < 1


def test_tilt_immortal_rejected():
    with pytest.raises(SplittingTreeError):
        model_core.tilt(IMMORTAL, model_core.malthusian(IMMORTAL))


def test_sample_lifespans():
    rng = stream(3)
    assert np.mean(model_core.sample_lifespans(GAMMA, rng, 100_000)) == pytest.approx(2.0, abs=0.05)
    assert np.all(model_core.sample_lifespans(FIXED, rng, 5) == 1.0)
    draws = model_core.sample_lifespans(UNIFORM, rng, 1000)
    assert draws.min() >= 0.0 and draws.max() <= 2.0


def test_r_marginal_density_is_a_probability_density():
    params = model_core.malthusian(EXP)
    # e^{-ηr} Λ([r,∞)) integrates to 1 when ψ(η) = 0
    xs = np.linspace(0.0, 40.0, 4001)
    ys = np.array([model_core.r_marginal_density(EXP, params, x) for x in xs])
    assert integrate.trapezoid(ys, xs) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("model", [EXP, FIXED, GAMMA, UNIFORM])
def test_psi_sign_around_eta(model):
    params = model_core.malthusian(model)
    assert model_core.psi(model, 0.0) == 0.0
    assert all(model_core.psi(model, f * params.eta) < 0 for f in np.linspace(0.01, 0.99, 50))
    assert all(model_core.psi(model, f * params.eta) > 0 for f in np.linspace(1.01, 5.0, 50))


@pytest.mark.parametrize("model", [EXP, FIXED, GAMMA, UNIFORM])
def test_psi_is_convex(model):
    triples = np.sort(stream(11).uniform(0.0, 10.0, size=(500, 3)), axis=1)
    for l1, l2, l3 in triples:
        w = (l2 - l1) / (l3 - l1)
        chord = (1.0 - w) * model_core.psi(model, l1) + w * model_core.psi(model, l3)
        assert model_core.psi(model, l2) <= chord + 1e-10


@pytest.mark.parametrize("model", [EXP, FIXED, GAMMA, UNIFORM])
def test_c_matches_finite_difference(model):
    params = model_core.malthusian(model)
    h = 1e-6
    slope = (model_core.psi(model, params.eta + h) - model_core.psi(model, params.eta - h)) / (2 * h)
    assert params.c == pytest.approx(slope, rel=1e-6)
