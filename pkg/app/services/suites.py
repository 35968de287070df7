"""
Validation suites. Each suite runs a fixed list of checks against known
scenarios and returns their TestReports in a fixed order; every check draws
from its own seed, derived from the run seed and the check's name.

Scenarios:
  exponential   b=2, lifespans Exp(1)        η=1, c=1/2
  immortal      b=1, no deaths               η=1, c=1
  fixed         b=2, lifespans exactly 1
  gamma         b=2, lifespans Gamma(2, 1)   η=√3
  uniform       b=1.5, lifespans U(0, 2)
and the immigration schemes built on the exponential model.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache, partial
from typing import Callable, Optional

import numpy as np
from scipy import stats as sps

from app.errors import ConfigError
from app.rng import label_seed, stream
from app.schemas import (
    DiracFinite,
    DiracInfinite,
    Exponential,
    FisherLogSeries,
    GammaDist,
    ImmigrationConfig,
    LifespanModel,
    ModelII,
    ModelIII,
    RunConfig,
    ScaleGrid,
    TestReport,
    Uniform,
)
from app.services import model_core
from app.services.cmj_sim import (
    sample_AR,
    sample_offspring_counts,
    simulate_conditioned_spine,
    simulate_surviving_tree,
    simulate_tree,
    spine_config,
    total_progeny_subcritical,
    yule_second_moment,
)
from app.services.estimation import estimate_alpha_from_sticks
from app.services.immigration import (
    i_t_mean,
    i_t_pmf,
    model2_type_limits,
    model2_type_probability,
    ranked_surviving_fractions,
    simulate_immigration,
    surviving_arrival_times,
    type_aggregated_fractions,
)
from app.services.limit_laws import (
    expected_image_count,
    gamma_limit_cdf,
    gem_sample,
    image_atoms,
    model1_ppp_sample,
    model2_limit_sample,
    model3_ppp_sample,
    model3_tail_F,
    sample_sup_poisson,
    sigma_laplace,
    sigma_mean,
    sup_poisson_tail,
)
from app.services.replicates import run_replicates
from app.services.scale_function import (
    ancestor_mixture_pmf,
    default_step,
    laplace_check,
    limit_gap,
    scale_closed_form,
    solve_scale,
    w_at,
    x_t_pmf,
    x_u_pmf,
)
from app.services.stats import (
    Z_MAX,
    bin_counts,
    chi_square_pmf_test,
    ks_test,
    ks_two_sample,
    log_sup_diagnostic,
    moment_z,
    poisson_dispersion,
    tolerance_check,
    two_sample_chi_square,
)

logger = logging.getLogger(__name__)

EXPONENTIAL = LifespanModel(birth_rate=2.0, lifespan=Exponential(rate=1.0))
IMMORTAL = LifespanModel(birth_rate=1.0, lifespan=DiracInfinite())
FIXED = LifespanModel(birth_rate=2.0, lifespan=DiracFinite(a=1.0))
GAMMA = LifespanModel(birth_rate=2.0, lifespan=GammaDist(shape=2.0, rate=1.0))
UNIFORM = LifespanModel(birth_rate=1.5, lifespan=Uniform(lo=0.0, hi=2.0))

CLOSED_FORM_SCENARIOS = {"exponential": EXPONENTIAL, "immortal": IMMORTAL, "fixed": FIXED}
TILT_SCENARIOS = {
    "exponential": EXPONENTIAL,
    "fixed": FIXED,
    "gamma": GAMMA,
    "uniform": UNIFORM,
}
# one scenario per built-in lifespan family, with the time X(t) is observed at
TRANSIENT_SCENARIOS = (
    ("exponential", EXPONENTIAL, math.log(2.0)),
    ("immortal", IMMORTAL, 2.0),
    ("fixed", FIXED, 1.5),
    ("gamma", GAMMA, 1.0),
    ("uniform", UNIFORM, 2.0),
)

SCALE_STEP = 1e-3
SCALE_HORIZON = 10.0
LIMIT_SCALE = 8.0  # ηt at which limit laws are compared
SPLIT_LEVEL = 5e-3  # two-sample comparisons of two approximations


@dataclass(frozen=True)
class SuiteContext:
    config: RunConfig
    seed: int
    workers: int = 1
    scale: float = 1.0  # fraction of the full sample sizes

    def n(self, full: int, floor: int = 200) -> int:
        return max(floor, int(round(full * self.scale)))

    def draw(self, label: str, task: Callable, n: int) -> list:
        return run_replicates(task, n, label_seed(self.seed, label), self.workers)

    def rng(self, label: str) -> np.random.Generator:
        return stream(label_seed(self.seed, label))


@lru_cache(maxsize=32)
def _grid(model: LifespanModel, horizon: float, h: Optional[float] = None) -> ScaleGrid:
    params = model_core.malthusian(model)
    return solve_scale(model, params, horizon, h if h is not None else default_step(params))


# --- replicate tasks (module level so they pickle) ---------------------------


def _population(model, t, rng) -> int:
    return simulate_tree(model, t, rng).population_at_t


def _survival(model, params, t, rng) -> tuple[int, Optional[float]]:
    run = simulate_tree(model, t, rng, params=params)
    return run.population_at_t, run.sup_scaled


def _immigration_total(model, config, t, rng) -> int:
    return simulate_immigration(model, config, t, rng).total


def _family_sizes(model, config, t, rng) -> list[int]:
    return [f.abundance for f in simulate_immigration(model, config, t, rng).families]


def _surviving_families(model, config, t, rng) -> int:
    return int(surviving_arrival_times(simulate_immigration(model, config, t, rng)).size)


def _oldest_fraction(model, config, t, rng) -> Optional[float]:
    snapshot = simulate_immigration(model, config, t, rng)
    if snapshot.total == 0:
        return None
    return float(ranked_surviving_fractions(snapshot)[0])


def _type_view(model, params, config, t, rng) -> tuple[Optional[tuple[float, float]], float]:
    """((fraction of type 1, fraction of type 2) or None, e^{-ηt} I_1(t))."""
    snapshot = simulate_immigration(model, config, t, rng)
    first = sum(f.abundance for f in snapshot.families if f.type_label == "1")
    scaled = math.exp(-params.eta * t) * first
    if snapshot.total == 0:
        return None, scaled
    fractions = type_aggregated_fractions(snapshot)
    return (fractions.get("1", 0.0), fractions.get("2", 0.0)), scaled


def _type_arrivals(model, config, t, label, rng) -> int:
    return sum(1 for f in simulate_immigration(model, config, t, rng).families if f.type_label == label)


def _type_indices(model, config, t, rng) -> list[int]:
    return [f.type_index for f in simulate_immigration(model, config, t, rng).families]


def _model3_view(model, params, config, t, rng) -> tuple[float, Optional[float]]:
    """(e^{-ηt} I(t), largest species fraction or None)."""
    snapshot = simulate_immigration(model, config, t, rng)
    scaled = math.exp(-params.eta * t) * snapshot.total
    if snapshot.total == 0:
        return scaled, None
    return scaled, max(f.abundance for f in snapshot.families) / snapshot.total


def _spine_run(model, params, t, rng) -> tuple[int, int]:
    run = simulate_conditioned_spine(model, params, t, rng)
    return run.population_at_t, run.spine_count


def _rejection_run(model, params, t, rng) -> int:
    return simulate_surviving_tree(model, params, t, rng)


def _progeny(model, rng) -> int:
    return total_progeny_subcritical(model, rng)


def _image_count(rho, r, c, horizon, u, rng) -> int:
    return int(np.count_nonzero(image_atoms(rho, r, c, horizon, rng) >= u))


def _binned_pmf(pmf: Callable[[int], float], top: int) -> list[float]:
    head = [pmf(k) for k in range(top)]
    return head + [max(1.0 - math.fsum(head), 0.0)]


# --- suites ------------------------------------------------------------------


def scale_suite(ctx: SuiteContext) -> list[TestReport]:
    reports = []
    scenarios = dict(CLOSED_FORM_SCENARIOS)
    if ctx.config.model not in scenarios.values():
        scenarios["config"] = ctx.config.model

    for name, model in scenarios.items():
        params = model_core.malthusian(model)
        if name in CLOSED_FORM_SCENARIOS:
            grid = _grid(model, SCALE_HORIZON, SCALE_STEP)
            idx = np.arange(0, grid.values.size, 10)
            exact = np.array([scale_closed_form(model, params, float(t)) for t in grid.times[idx]])
            worst = float(np.max(np.abs(grid.values[idx] - exact) / exact))
            reports.append(tolerance_check(f"scale.closed_form.{name}", worst, 0.0, 1e-4, n=idx.size))

        grid = _grid(model, 12.0 / params.eta)
        reports.append(tolerance_check(f"scale.limit.{name}", limit_gap(grid, params), 0.0, 1e-3))
        numeric, exact_laplace = laplace_check(grid, params, model, 2.0 * params.eta)
        reports.append(tolerance_check(f"scale.laplace.{name}", numeric, exact_laplace, 2e-3, relative=True))

    # mixing over the ancestor's lifespan recovers the one-ancestor law
    for name, model, t, tol in (("exponential", EXPONENTIAL, math.log(2.0), 1e-5), ("fixed", FIXED, 1.5, 1e-9)):
        params = model_core.malthusian(model)
        grid = _grid(model, SCALE_HORIZON, SCALE_STEP)
        worst = max(abs(ancestor_mixture_pmf(grid, model, t, k) - x_t_pmf(grid, params, t, k)) for k in range(4))
        reports.append(tolerance_check(f"scale.mixing.{name}", worst, 0.0, tol))
    return reports


def transient_suite(ctx: SuiteContext) -> list[TestReport]:
    reports = []

    for name, model, t in TRANSIENT_SCENARIOS:
        params = model_core.malthusian(model)
        grid = _grid(model, t + 1.0)
        pops = ctx.draw(f"transient.x_t.{name}", partial(_population, model, t), ctx.n(10_000))
        pmf = _binned_pmf(lambda k: x_t_pmf(grid, params, t, k), 10)
        reports.append(chi_square_pmf_test(bin_counts(pops, 10), pmf, name=f"transient.x_t.{name}"))

    model = EXPONENTIAL
    grid = _grid(model, 4.0)
    schemes = (
        ("model1_theta2", ImmigrationConfig(theta=2.0), math.log(2.0)),
        ("model1_theta1", ImmigrationConfig(theta=1.0), 1.0),
        ("model2_theta2", ImmigrationConfig(theta=2.0, model=ModelII(p=[0.5, 0.5])), math.log(2.0)),
    )
    for name, config, t in schemes:
        totals = ctx.draw(f"transient.i_t.{name}", partial(_immigration_total, model, config, t), ctx.n(10_000))
        pmf = _binned_pmf(lambda k: i_t_pmf(grid, config, t, k), 40)
        reports.append(chi_square_pmf_test(bin_counts(totals, 40), pmf, name=f"transient.i_t.{name}"))
        reports.append(moment_z(totals, i_t_mean(grid, config, t), name=f"transient.i_t_mean.{name}"))

    # family sizes of Model I are i.i.d. copies of X(U)
    params = model_core.malthusian(model)
    config, t = ImmigrationConfig(theta=2.0), 1.5
    per_run = ctx.draw("transient.families", partial(_family_sizes, model, config, t), ctx.n(10_000))
    pooled = [size for sizes in per_run for size in sizes]
    pmf = _binned_pmf(lambda k: x_u_pmf(grid, params, t, k), 15)
    reports.append(chi_square_pmf_test(bin_counts(pooled, 15), pmf, name="transient.x_u.model1"))

    # two families picked at random from one population are independent
    pick = ctx.rng("transient.family_pairs")
    mean_size = (w_at(grid, t)[0] - 1.0) / (model.birth_rate * t)
    products = []
    for sizes in per_run:
        if len(sizes) >= 2:
            i, j = pick.choice(len(sizes), 2, replace=False)
            products.append((sizes[i] - mean_size) * (sizes[j] - mean_size))
    reports.append(moment_z(products, 0.0, name="transient.family_independence"))
    return reports


def limits_suite(ctx: SuiteContext) -> list[TestReport]:
    model = EXPONENTIAL
    params = model_core.malthusian(model)
    t = LIMIT_SCALE / params.eta
    reports = []

    runs = ctx.draw("limits.survival", partial(_survival, model, params, t), ctx.n(10_000))
    alive = [1.0 if pop > 0 else 0.0 for pop, _ in runs]
    report = moment_z(alive, params.eta / model.birth_rate, name="limits.survival_probability")
    diagnostic = log_sup_diagnostic([sup for pop, sup in runs if pop > 0])
    reports.append(report.model_copy(update={"metadata": {**report.metadata, "log_sup": diagnostic}}))

    scaled = [math.exp(-params.eta * t) * pop for pop, _ in runs if pop > 0]
    reports.append(
        ks_test(scaled, lambda x: sps.expon.cdf(x, scale=1.0 / params.c), name="limits.scaled_survivor")
    )

    config = ImmigrationConfig(theta=2.0)
    totals = ctx.draw("limits.immigration", partial(_immigration_total, model, config, t), ctx.n(5_000))
    scaled_totals = math.exp(-params.eta * t) * np.asarray(totals, dtype=float)
    shape = config.theta / model.birth_rate
    reports.append(
        ks_test(scaled_totals, lambda x: gamma_limit_cdf(shape, params.c, x), name="limits.immigration_gamma")
    )
    return reports


def gem_suite(ctx: SuiteContext) -> list[TestReport]:
    model = EXPONENTIAL
    params = model_core.malthusian(model)
    t = LIMIT_SCALE / params.eta
    reports = []

    for alpha in (1.0, 2.0):
        tag = f"alpha{alpha:g}"
        config = ImmigrationConfig(theta=alpha * model.birth_rate)
        draws = ctx.draw(f"gem.model1.{tag}", partial(_oldest_fraction, model, config, t), ctx.n(2_000))
        oldest = [f for f in draws if f is not None]
        reports.append(
            tolerance_check(f"gem.oldest_mean.{tag}", float(np.mean(oldest)), 1.0 / (1.0 + alpha), 0.02, n=len(oldest))
        )
        reports.append(ks_test(oldest, lambda x: sps.beta.cdf(x, 1.0, alpha), name=f"gem.oldest_law.{tag}"))

        # size-ranked GEM and the normalised Model I point process agree
        rng = ctx.rng(f"gem.ranked.{tag}")
        n = ctx.n(2_000)
        from_sticks = [max(gem_sample(alpha, 200, rng).sigma_points) for _ in range(n)]
        from_ppp = []
        for _ in range(n):
            sample = model1_ppp_sample(alpha, params.c, rng)
            from_ppp.append(sample.sigma_points[0] / sample.sigma_total)
        reports.append(ks_two_sample(from_sticks, from_ppp, name=f"gem.largest_atom.{tag}", level=SPLIT_LEVEL))

    rng = ctx.rng("gem.stick_means")
    firsts = np.array([gem_sample(1.0, 3, rng).sigma_points for _ in range(ctx.n(100_000))])
    for i in range(3):
        reports.append(moment_z(firsts[:, i], 2.0 ** -(i + 1), name=f"gem.stick_mean.{i + 1}"))

    rng = ctx.rng("gem.first_stick")
    first = [gem_sample(2.0, 1, rng).sigma_points[0] for _ in range(ctx.n(10_000))]
    reports.append(ks_test(first, lambda x: sps.beta.cdf(x, 1.0, 2.0), name="gem.first_stick_law"))

    k = ctx.n(10_000, floor=1_000)
    estimate = estimate_alpha_from_sticks(ctx.rng("gem.estimate").beta(1.0, 2.0, k))
    tol = max(0.1, Z_MAX * 2.0 / math.sqrt(k))
    reports.append(tolerance_check("gem.estimate_alpha", estimate.alpha_hat, 2.0, tol, n=k))
    return reports


def model2_suite(ctx: SuiteContext) -> list[TestReport]:
    model = EXPONENTIAL
    params = model_core.malthusian(model)
    t = LIMIT_SCALE / params.eta
    config = ImmigrationConfig(theta=2.0, model=ModelII(p=[0.5, 0.5]))
    theta_over_b = config.theta / model.birth_rate
    reports = []

    views = ctx.draw("model2.types", partial(_type_view, model, params, config, t), ctx.n(2_000))
    fractions = np.array([f for f, _ in views if f is not None])
    half = theta_over_b * 0.5
    reports.append(ks_test(fractions[:, 0], lambda x: sps.beta.cdf(x, half, half), name="model2.type1_fraction"))
    for i in range(2):
        reports.append(moment_z(fractions[:, i], 0.5, name=f"model2.type_mean.{i + 1}"))
    shape, rate = model2_type_limits(config, params)[0]
    scaled = [s for _, s in views]
    reports.append(ks_test(scaled, lambda x: gamma_limit_cdf(shape, rate, x), name="model2.type1_gamma"))

    t_short = 1.0
    arrivals = ctx.draw("model2.arrivals", partial(_type_arrivals, model, config, t_short, "1"), ctx.n(10_000))
    mean = config.theta * 0.5 * t_short
    pmf = _binned_pmf(lambda k: float(sps.poisson.pmf(k, mean)), 10)
    reports.append(chi_square_pmf_test(bin_counts(arrivals, 10), pmf, name="model2.type1_arrivals"))

    # types beyond the head: shared label, geometric type index
    tail_config = ImmigrationConfig(theta=20.0, model=ModelII(p=[0.3], tail_ratio=0.5))
    per_run = ctx.draw("model2.tail_types", partial(_type_indices, model, tail_config, t_short), ctx.n(2_000))
    indices = [k for run in per_run for k in run]
    pmf = _binned_pmf(lambda k: model2_type_probability(tail_config.model, k), 12)
    reports.append(chi_square_pmf_test(bin_counts(indices, 12), pmf, name="model2.tail_types"))

    p = [0.2, 0.3, 0.5]
    rng = ctx.rng("model2.limit")
    limits = np.array([model2_limit_sample(2.0, p, 3, rng) for _ in range(ctx.n(10_000))])
    reports.append(ks_test(limits[:, 1], lambda x: sps.beta.cdf(x, 0.6, 1.4), name="model2.limit_marginal"))
    for i, pi in enumerate(p):
        reports.append(moment_z(limits[:, i], pi, name=f"model2.limit_mean.{i + 1}"))
    return reports


def model3_suite(ctx: SuiteContext) -> list[TestReport]:
    model = EXPONENTIAL
    params = model_core.malthusian(model)
    t = LIMIT_SCALE / params.eta
    config = ImmigrationConfig(theta=1.0, model=ModelIII(abundance=FisherLogSeries(a=1.0)))
    reports = []

    views = ctx.draw("model3.population", partial(_model3_view, model, params, config, t), ctx.n(2_000))
    scaled = np.array([s for s, _ in views])
    reports.append(moment_z(scaled, sigma_mean(config, params), name="model3.sigma_mean"))
    for s in (0.5, 1.0, 2.0):
        reports.append(moment_z(np.exp(-s * scaled), sigma_laplace(config, params, s), name=f"model3.sigma_laplace.s{s:g}"))

    # F(v) against direct simulation of G | Δ ~ Gamma(Δ/b, c)
    rng = ctx.rng("model3.tail")
    n = ctx.n(1_000_000, floor=10_000)
    delta = rng.exponential(1.0 / config.model.abundance.a, n)
    g = rng.gamma(delta / model.birth_rate, 1.0 / params.c)
    for v in (0.5, 2.0):
        reports.append(moment_z((g >= v).astype(float), model3_tail_F(config, params, v), name=f"model3.tail_F.v{v:g}"))

    rng = ctx.rng("model3.ppp")
    samples = [model3_ppp_sample(config, params, rng) for _ in range(ctx.n(2_000))]
    reports.append(moment_z([s.sigma_total for s in samples], sigma_mean(config, params), name="model3.ppp_total"))
    largest_sim = [f for _, f in views if f is not None]
    largest_ppp = [max(s.sigma_points) / s.sigma_total for s in samples if s.sigma_points]
    reports.append(ks_two_sample(largest_sim, largest_ppp, name="model3.largest_species", level=SPLIT_LEVEL))
    return reports


def spine_suite(ctx: SuiteContext) -> list[TestReport]:
    model = EXPONENTIAL
    params = model_core.malthusian(model)
    reports = []

    a, r = sample_AR(model, params, ctx.rng("spine.ar"), ctx.n(100_000))
    reports.append(moment_z(a, (params.m - 1.0) / params.eta, name="spine.mean_A"))
    reports.append(moment_z(r, params.c / params.eta, name="spine.mean_R"))

    t = 3.0
    n = ctx.n(5_000)
    spine = ctx.draw("spine.spine", partial(_spine_run, model, params, t), n)
    rejected = ctx.draw("spine.rejection", partial(_rejection_run, model, params, t), n)
    pops = [pop for pop, _ in spine]
    top = 120
    reports.append(
        two_sample_chi_square(bin_counts(pops, top), bin_counts(rejected, top), name="spine.matches_rejection")
    )

    grid = _grid(model, t + 1.0)
    survive = params.eta / model.birth_rate

    def conditioned_pmf(k: int) -> float:
        return x_t_pmf(grid, params, t, k) * (1.0 - params.p_ext**k) / survive

    reports.append(
        chi_square_pmf_test(bin_counts(pops, top), _binned_pmf(conditioned_pmf, top), name="spine.exact_exponential")
    )

    counts = np.array([k for _, k in spine], dtype=float)
    yule_mean = math.exp(params.eta * t)
    yule_second = yule_second_moment(params.eta, t)
    reports.append(
        moment_z(counts, yule_mean, target_sd=math.sqrt(yule_second - yule_mean**2), name="spine.yule_mean")
    )
    reports.append(moment_z(counts**2, yule_second, name="spine.yule_second_moment"))
    below = sum(1 for pop, k in spine if pop < k)
    reports.append(tolerance_check("spine.dominates_yule", float(below), 0.0, 0.0, n=len(spine)))

    tilted = model_core.tilt(model, params)
    progeny = ctx.draw("spine.progeny", partial(_progeny, tilted), ctx.n(10_000))
    reports.append(moment_z(progeny, 1.0 / params.c, name="spine.tilted_progeny"))
    offspring = sample_offspring_counts(tilted, ctx.rng("spine.offspring"), ctx.n(10_000))
    reports.append(moment_z(offspring, 1.0 - params.c, name="spine.tilted_offspring"))

    for name, scenario in TILT_SCENARIOS.items():
        p = model_core.malthusian(scenario)
        cfg = spine_config(scenario, p)
        reports.append(tolerance_check(f"spine.tilted_mass.{name}", cfg.conditioned_mass, cfg.graft_right_rate, 1e-10))
    return reports


def lemmas_suite(ctx: SuiteContext) -> list[TestReport]:
    reports = []

    for rho, a in ((1.0, 2.0), (2.0, 1.0)):
        tag = f"rho{rho:g}_a{a:g}"
        sups = ctx.draw(f"lemmas.sup.{tag}", partial(sample_sup_poisson, rho, 1000.0 / rho), ctx.n(10_000))
        freq = float(np.mean(np.asarray(sups) > a))
        reports.append(tolerance_check(f"lemmas.sup_poisson.{tag}", freq, sup_poisson_tail(rho, a), 0.02, n=len(sups)))

    # atoms e^{-ηT_i} ζ_i of the surviving families at rate θη/b, marks Exp(c)
    model = EXPONENTIAL
    params = model_core.malthusian(model)
    theta = 2.0
    rho, r, c, u = theta * params.eta / model.birth_rate, params.eta, params.c, 0.5
    counts = ctx.draw("lemmas.image_counts", partial(_image_count, rho, r, c, 40.0 / r, u), ctx.n(10_000))
    expected = expected_image_count(rho, r, c, u)
    reports.append(poisson_dispersion(counts, name="lemmas.image_dispersion"))
    reports.append(moment_z(counts, expected, math.sqrt(expected), name="lemmas.image_mean"))

    # thinning: families alive at t form a Poisson count with mean (θ/b) log W(t)
    config, t = ImmigrationConfig(theta=theta), 3.0
    grid = _grid(model, t + 1.0)
    surviving = ctx.draw("lemmas.thinning", partial(_surviving_families, model, config, t), ctx.n(10_000))
    mean = theta / model.birth_rate * math.log(w_at(grid, t)[0])
    reports.append(poisson_dispersion(surviving, mean=mean, name="lemmas.thinning_dispersion"))
    reports.append(moment_z(surviving, mean, math.sqrt(mean), name="lemmas.thinning_mean"))
    return reports


SUITES: dict[str, Callable[[SuiteContext], list[TestReport]]] = {
    "scale": scale_suite,
    "transient": transient_suite,
    "limits": limits_suite,
    "gem": gem_suite,
    "model2": model2_suite,
    "model3": model3_suite,
    "spine": spine_suite,
    "lemmas": lemmas_suite,
}
SUITE_NAMES = (*SUITES, "all")


def run_suite(name: str, config: RunConfig, seed: int, workers: int = 1, scale: float = 1.0) -> list[TestReport]:
    if name not in SUITE_NAMES:
        raise ConfigError([f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}"])
    ctx = SuiteContext(config=config, seed=seed, workers=workers, scale=scale)
    names = list(SUITES) if name == "all" else [name]

    reports: list[TestReport] = []
    for suite in names:
        logger.info("suite %s: start (seed=%d, workers=%d)", suite, seed, workers)
        found = SUITES[suite](ctx)
        failed = [r.name for r in found if not r.passed]
        logger.info("suite %s: %d/%d passed", suite, len(found) - len(failed), len(found))
        for fail in failed:
            logger.warning("suite %s: %s failed", suite, fail)
        reports.extend(found)
    return reports


def suite_summary(reports: list[TestReport]) -> dict:
    return {
        "passed": all(r.passed for r in reports),
        "tests": [r.to_json() for r in reports],
    }
