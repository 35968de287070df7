"""
Tests for the forest engine, the spine decomposition and its oracles.
"""

import math

import numpy as np
import pytest

from app.errors import NotSubcriticalError, PopulationCapError
from app.rng import stream
from app.schemas import DiracInfinite, Exponential, LifespanModel
from app.services import model_core
from app.services.cmj_sim import (
    SURVIVAL_PROXY,
    sample_AR,
    sample_offspring_counts,
    scaled_limit_sample,
    simulate_conditioned_spine,
    simulate_forest,
    simulate_surviving_tree,
    simulate_tree,
    spine_config,
    total_progeny_subcritical,
    yule_second_moment,
)

EXP = LifespanModel(birth_rate=2.0, lifespan=Exponential(rate=1.0))
IMMORTAL = LifespanModel(birth_rate=1.0, lifespan=DiracInfinite())
SUBCRITICAL = LifespanModel(birth_rate=1.0, lifespan=Exponential(rate=2.0))


def test_time_zero_is_the_ancestor_alone():
    result = simulate_tree(EXP, 0.0, stream(1))
    assert result.population_at_t == 1
    assert result.total_births == 0
    assert not result.extinct_by_t


def test_same_stream_same_tree():
    a = simulate_tree(EXP, 3.0, stream(5, 2))
    b = simulate_tree(EXP, 3.0, stream(5, 2))
    assert a == b


def test_exponential_mean_and_extinction():
    rng = stream(11)
    pops = np.array([simulate_tree(EXP, math.log(2.0), rng).population_at_t for _ in range(4000)])
    # E[X(t)] = e^{ηt} = 2, P(X(t) = 0) = 1/3
    assert pops.mean() == pytest.approx(2.0, abs=0.2)
    assert np.mean(pops == 0) == pytest.approx(1.0 / 3.0, abs=0.03)


def test_immortal_population_never_dies():
    rng = stream(12)
    pops = np.array([simulate_tree(IMMORTAL, 1.0, rng).population_at_t for _ in range(2000)])
    assert pops.min() >= 1
    assert pops.mean() == pytest.approx(math.e, abs=0.2)


def test_forest_observes_several_times():
    rng = stream(13)
    run = simulate_forest(IMMORTAL, [0.0, 0.5, 2.0], 3.0, rng, observe=[0.0, 1.0, 3.0])
    assert run.alive.shape == (3, 3)
    # roots born after an observation time are not counted there
    assert list(run.alive[:, 0]) == [1, 0, 0]
    assert run.alive[2, 1] == 0 and run.alive[2, 2] >= 1


def test_root_lifespans_are_used():
    run = simulate_forest(EXP, [0.0, 0.0], 5.0, stream(14), root_lifespans=[0.0, 0.0])
    assert run.total_births == 0
    assert run.alive.sum() == 0


def test_population_cap():
    with pytest.raises(PopulationCapError):
        simulate_tree(IMMORTAL, 10.0, stream(15), cap=2)


def test_sup_scaled_recorded_with_params():
    params = model_core.malthusian(EXP)
    result = simulate_tree(EXP, 2.0, stream(16), params=params)
    # the ancestor alone at time 0 already gives 1
    assert result.sup_scaled >= 1.0
    assert simulate_tree(EXP, 2.0, stream(16)).sup_scaled is None


def test_scaled_limit_sample():
    params = model_core.malthusian(EXP)
    rng = stream(17)
    draws = [scaled_limit_sample(EXP, params, 2.0, rng) for _ in range(200)]
    alive = [d for d in draws if d is not None]
    assert alive and all(d > 0 for d in alive)


def test_total_progeny_subcritical():
    rng = stream(18)
    totals = np.array([total_progeny_subcritical(SUBCRITICAL, rng) for _ in range(4000)])
    # m = 1/2, so the mean progeny is 1/(1-m) = 2
    assert totals.min() >= 1
    assert totals.mean() == pytest.approx(2.0, abs=0.2)


def test_total_progeny_rejects_supercritical():
    with pytest.raises(NotSubcriticalError):
        total_progeny_subcritical(EXP, stream(19))


def test_offspring_counts_mean():
    counts = sample_offspring_counts(EXP, stream(20), 50_000)
    assert counts.mean() == pytest.approx(2.0, abs=0.05)


def test_sample_AR_moments():
    params = model_core.malthusian(EXP)
    a, r = sample_AR(EXP, params, stream(21), 20_000)
    assert a.min() >= 0 and r.min() >= 0
    # E[A] = (m-1)/η = 1 and E[R] = c/η = 1/2
    assert a.mean() == pytest.approx(1.0, abs=0.05)
    assert r.mean() == pytest.approx(0.5, abs=0.03)


def test_spine_config_mass_identity():
    params = model_core.malthusian(EXP)
    cfg = spine_config(EXP, params)
    assert cfg.graft_right_rate == pytest.approx(1.0)
    assert cfg.conditioned_mass == pytest.approx(1.0, abs=1e-10)
    assert isinstance(cfg.conditioned.lifespan, Exponential)
    assert cfg.conditioned.lifespan.rate == pytest.approx(2.0, rel=1e-12)


def test_spine_config_immortal():
    cfg = spine_config(IMMORTAL, model_core.malthusian(IMMORTAL))
    assert cfg.conditioned is None
    assert cfg.graft_right_rate == 0.0


def test_spine_tree_dominates_its_spine():
    params = model_core.malthusian(EXP)
    rng = stream(22)
    runs = [simulate_conditioned_spine(EXP, params, 1.0, rng) for _ in range(3000)]
    assert all(r.population_at_t >= r.spine_count >= 1 for r in runs)
    assert all(not r.extinct_by_t for r in runs)
    # E[X(t) | survival] = e^{ηt} / (η/b) = 2e
    assert np.mean([r.population_at_t for r in runs]) == pytest.approx(2 * math.e, abs=0.5)
    assert np.mean([r.spine_count for r in runs]) == pytest.approx(math.e, abs=0.15)


def test_rejection_oracle_mean():
    params = model_core.malthusian(EXP)
    rng = stream(23)
    pops = [simulate_surviving_tree(EXP, params, 1.0, rng) for _ in range(3000)]
    assert min(pops) >= 0
    assert np.mean(pops) == pytest.approx(2 * math.e, abs=0.5)


def test_yule_second_moment():
    assert yule_second_moment(1.0, 0.0) == 1.0
    rng = stream(24)
    yule = LifespanModel(birth_rate=1.0, lifespan=DiracInfinite())
    pops = np.array([simulate_tree(yule, 1.0, rng).population_at_t for _ in range(20_000)], dtype=float)
    assert np.mean(pops**2) == pytest.approx(yule_second_moment(1.0, 1.0), rel=0.08)


def test_survival_horizon_misclassifies_few_trees():
    # linear birth-death: P(alive at s) = (b - d) / (b - d e^{-(b-d)s}), P(survive) = 1 - d/b
    params = model_core.malthusian(EXP)
    b, d = 2.0, 1.0
    s = 3.0 + SURVIVAL_PROXY / params.eta
    alive = (b - d) / (b - d * math.exp(-(b - d) * s))
    doomed = 1.0 - (1.0 - params.p_ext) / alive
    assert doomed == pytest.approx(params.p_ext * math.exp(-params.eta * s), rel=1e-9)
    assert doomed < 1e-3
