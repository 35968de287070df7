"""
Tests for the scale function solver and the laws of X(t) built on it.
"""

import math

import numpy as np
import pytest

from app.errors import ConfigError, GridRangeError
from app.schemas import DiracFinite, DiracInfinite, Exponential, LifespanModel
from app.services import model_core
from app.services.scale_function import (
    ancestor_mixture_pmf,
    laplace_check,
    limit_gap,
    scale_closed_form,
    solve_scale,
    w_at,
    x_t_pmf,
    x_t_pmf_given_ancestor,
    x_u_pmf,
)

EXP = LifespanModel(birth_rate=2.0, lifespan=Exponential(rate=1.0))
IMMORTAL = LifespanModel(birth_rate=1.0, lifespan=DiracInfinite())
FIXED = LifespanModel(birth_rate=2.0, lifespan=DiracFinite(a=1.0))


def _solve(model, horizon, h=1e-3):
    params = model_core.malthusian(model)
    return solve_scale(model, params, horizon, h), params


@pytest.mark.parametrize("model", [EXP, IMMORTAL, FIXED])
def test_matches_closed_form(model):
    grid, params = _solve(model, 5.0)
    for t in (0.5, 1.0, 2.5, 5.0):
        exact = scale_closed_form(model, params, t)
        assert w_at(grid, t)[0] == pytest.approx(exact, rel=1e-5)


def test_grid_starts_at_one_and_increases():
    grid, _ = _solve(FIXED, 3.0)
    assert grid.values[0] == 1.0
    assert np.all(np.diff(grid.values) > 0)
    assert grid.horizon == pytest.approx(3.0)


def test_fixed_lifespan_closed_form_before_first_death():
    params = model_core.malthusian(FIXED)
    assert scale_closed_form(FIXED, params, 0.5) == pytest.approx(math.e)


def test_bad_step_is_config_error():
    params = model_core.malthusian(EXP)
    with pytest.raises(ConfigError):
        solve_scale(EXP, params, 1.0, h=-0.1)
    with pytest.raises(ConfigError):
        solve_scale(EXP, params, 0.01, h=0.1)


def test_outside_grid_raises():
    grid, _ = _solve(EXP, 1.0)
    with pytest.raises(GridRangeError):
        w_at(grid, 2.0)


def test_extinction_probability_exponential():
    grid, params = _solve(EXP, 1.0)
    # W(ln 2) = 3 and W'(ln 2) = 4
    assert x_t_pmf(grid, params, math.log(2.0), 0) == pytest.approx(1.0 / 3.0, abs=1e-6)


def test_x_t_pmf_sums_to_one():
    grid, params = _solve(EXP, 2.0)
    total = math.fsum(x_t_pmf(grid, params, 1.0, n) for n in range(2000))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_x_u_pmf_sums_to_one():
    grid, params = _solve(EXP, 2.0)
    total = math.fsum(x_u_pmf(grid, params, 1.5, n) for n in range(3000))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_immortal_ancestor_never_leaves_an_empty_tree():
    grid, _ = _solve(EXP, 2.0)
    assert x_t_pmf_given_ancestor(grid, math.inf, 1.0, 0) == 0.0


@pytest.mark.parametrize("model,t,tol", [(EXP, math.log(2.0), 1e-5), (FIXED, 1.5, 1e-9)])
def test_ancestor_mixture_recovers_law(model, t, tol):
    grid, params = _solve(model, 3.0)
    for n in range(4):
        assert ancestor_mixture_pmf(grid, model, t, n) == pytest.approx(x_t_pmf(grid, params, t, n), abs=tol)


def test_laplace_transform_is_inverse_psi():
    params = model_core.malthusian(EXP)
    grid = solve_scale(EXP, params, 12.0)
    numeric, exact = laplace_check(grid, params, EXP, 2.0)
    assert exact == pytest.approx(1.5)
    assert numeric == pytest.approx(exact, rel=2e-3)


def test_laplace_check_needs_lambda_above_eta():
    grid, params = _solve(EXP, 1.0)
    with pytest.raises(ValueError):
        laplace_check(grid, params, EXP, 0.5)


@pytest.mark.parametrize("model", [EXP, FIXED])
def test_exponential_growth_limit(model):
    params = model_core.malthusian(model)
    grid = solve_scale(model, params, 12.0 / params.eta)
    assert limit_gap(grid, params) < 1e-3


@pytest.mark.parametrize("model", [EXP, IMMORTAL, FIXED])
def test_extinction_probability_non_decreasing(model):
    grid, params = _solve(model, 4.0)
    ext = [x_t_pmf(grid, params, t, 0) for t in np.linspace(0.01, 3.9, 400)]
    assert np.all(np.diff(ext) >= -1e-9)
    assert ext[-1] <= params.p_ext + 1e-9
