"""
Splitting trees with Poissonian immigration.

Model I: every immigrant founds a new type. Model II: immigrants carry a
type drawn from a fixed probability vector. Model III: mainland species
arrive at rate θ with size-biased abundance Δ and then feed the island
with their own rate-Δ immigration; all of a species' families are merged
into one record.
"""

import logging
from collections import defaultdict
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import stats

from app.errors import EmptyPopulationError, SplittingTreeError
from app.schemas import (
    DerivedParams,
    FamilyRecord,
    FisherLogSeries,
    GenericAbundance,
    ImmigrationConfig,
    LifespanModel,
    ModelII,
    ModelIII,
    PopulationSnapshot,
    ScaleGrid,
)
from app.services.cmj_sim import simulate_forest
from app.services.numerics import InverseCdfTable
from app.services.scale_function import w_at

logger = logging.getLogger(__name__)

TAIL_LABEL = "tail"


def _arrival_times(rate: float, t: float, rng: np.random.Generator) -> np.ndarray:
    return np.sort(rng.uniform(0.0, t, rng.poisson(rate * t)))


def _model2_types(scheme: ModelII, rng: np.random.Generator, size: int) -> np.ndarray:
    """1-based type of each immigrant; tail types are len(p) + Geometric(1 - tail_ratio)."""
    head = np.asarray(scheme.p)
    probs = np.append(head, scheme.tail_mass)
    types = rng.choice(probs.size, size=size, p=probs / probs.sum()) + 1
    tail = types > head.size
    if tail.any():
        types[tail] = head.size + rng.geometric(1.0 - scheme.tail_ratio, int(tail.sum()))
    return types


def model2_type_probability(scheme: ModelII, i: int) -> float:
    """Probability that a Model II immigrant has type i (1-based)."""
    if i < 1:
        return 0.0
    if i <= len(scheme.p):
        return scheme.p[i - 1]
    if scheme.tail_ratio is None:
        return 0.0
    r = scheme.tail_ratio
    return scheme.tail_mass * (1.0 - r) * r ** (i - len(scheme.p) - 1)


@lru_cache(maxsize=16)
def _delta_table(abundance: GenericAbundance) -> InverseCdfTable:
    return InverseCdfTable(lambda x: x * abundance.density(x), 0.0, abundance.upper)


def sample_delta(scheme: ModelIII, rng: np.random.Generator, size: int) -> np.ndarray:
    """Size-biased abundances, density x f(x)/θ."""
    abundance = scheme.abundance
    if isinstance(abundance, FisherLogSeries):
        return rng.exponential(1.0 / abundance.a, size)
    return _delta_table(abundance).sample(rng, size)


def simulate_immigration(
    model: LifespanModel,
    config: ImmigrationConfig,
    t: float,
    rng: np.random.Generator,
    cap: Optional[int] = None,
) -> PopulationSnapshot:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    scheme = config.model

    if isinstance(scheme, ModelIII):
        return _simulate_model3(model, config, scheme, t, rng, cap)

    arrivals = _arrival_times(config.theta, t, rng)
    types = None
    if isinstance(scheme, ModelII):
        types = _model2_types(scheme, rng, arrivals.size)
        labels = [TAIL_LABEL if k > len(scheme.p) else str(k) for k in types]
    else:
        labels = [str(i + 1) for i in range(arrivals.size)]
    alive = simulate_forest(model, arrivals, t, rng, cap=cap).alive[:, 0] if arrivals.size else np.zeros(0, int)

    families = [
        FamilyRecord(
            immigration_time=float(time),
            type_label=label,
            abundance=int(count),
            type_index=None if types is None else int(types[i]),
        )
        for i, (time, label, count) in enumerate(zip(arrivals, labels, alive))
    ]
    return PopulationSnapshot(t=t, model=scheme.kind, families=families, total=int(alive.sum()))


def _simulate_model3(
    model: LifespanModel,
    config: ImmigrationConfig,
    scheme: ModelIII,
    t: float,
    rng: np.random.Generator,
    cap: Optional[int],
) -> PopulationSnapshot:
    species_times = _arrival_times(config.theta, t, rng)
    deltas = sample_delta(scheme, rng, species_times.size)

    # the species' own immigration starts strictly after its arrival
    counts = rng.poisson(deltas * (t - species_times))
    owner = np.repeat(np.arange(species_times.size), counts)
    starts = species_times[owner]
    roots = starts + rng.random(owner.size) * (t - starts)

    per_species = np.zeros(species_times.size, dtype=np.int64)
    if roots.size:
        alive = simulate_forest(model, roots, t, rng, cap=cap).alive[:, 0]
        per_species = np.bincount(owner, weights=alive, minlength=species_times.size).astype(np.int64)

    families = [
        FamilyRecord(immigration_time=float(time), type_label=f"species-{i + 1}", abundance=int(count), delta=float(d))
        for i, (time, count, d) in enumerate(zip(species_times, per_species, deltas))
    ]
    return PopulationSnapshot(t=t, model="III", families=families, total=int(per_species.sum()))


# --- exact transient law -----------------------------------------------------


def _check_total_law(config: ImmigrationConfig) -> None:
    if isinstance(config.model, ModelIII):
        raise SplittingTreeError("the exact law of I(t) is only available for Models I and II")


def i_t_pmf(grid: ScaleGrid, config: ImmigrationConfig, t: float, n: int) -> float:
    """P(I(t) = n): negative binomial with k = θ/b and success probability 1/W(t)."""
    _check_total_law(config)
    W = w_at(grid, t)[0]
    return float(stats.nbinom.pmf(n, config.theta / grid.birth_rate, 1.0 / W))


def i_t_pgf(grid: ScaleGrid, config: ImmigrationConfig, t: float, s: float) -> float:
    _check_total_law(config)
    W = w_at(grid, t)[0]
    return (W + s * (1.0 - W)) ** (-config.theta / grid.birth_rate)


def i_t_mean(grid: ScaleGrid, config: ImmigrationConfig, t: float) -> float:
    return config.theta / grid.birth_rate * (w_at(grid, t)[0] - 1.0)


# --- views on a snapshot -----------------------------------------------------


def ranked_surviving_fractions(snapshot: PopulationSnapshot) -> np.ndarray:
    """Fractions of the surviving families, oldest first."""
    if snapshot.total == 0:
        raise EmptyPopulationError()
    sizes = np.array([f.abundance for f in snapshot.families if f.abundance > 0], dtype=float)
    return sizes / snapshot.total


def type_aggregated_fractions(snapshot: PopulationSnapshot) -> dict[str, float]:
    """Model II: fraction of the population carrying each type label present."""
    if snapshot.model != "II":
        raise SplittingTreeError(f"type fractions need a Model II snapshot, got Model {snapshot.model}")
    if snapshot.total == 0:
        raise EmptyPopulationError()
    by_type: dict[str, int] = defaultdict(int)
    for family in snapshot.families:
        by_type[family.type_label] += family.abundance
    return {label: count / snapshot.total for label, count in by_type.items()}


def model2_type_limits(config: ImmigrationConfig, params: DerivedParams) -> list[tuple[float, float]]:
    """(shape, rate) of the Gamma limit of e^{-ηt} I_i(t) for each head type."""
    if not isinstance(config.model, ModelII):
        raise SplittingTreeError("per-type limits are defined for Model II only")
    return [(config.theta * p / params.birth_rate, params.c) for p in config.model.p]


def surviving_arrival_times(snapshot: PopulationSnapshot) -> np.ndarray:
    return np.array([f.immigration_time for f in snapshot.families if f.abundance > 0])
