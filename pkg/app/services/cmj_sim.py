"""
Forward simulation of splitting trees.

Every simulator here goes through `simulate_forest`, which grows any number
of independent trees generation by generation: an individual born at α with
lifespan ζ has Poisson(b·min(ζ, T - α)) children at i.i.d. uniform times in
its reproduction window. No time discretisation is involved.
"""

import logging
import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from app.errors import NotSubcriticalError, PopulationCapError, SplittingTreeError
from app.schemas import DerivedParams, DiracInfinite, LifespanModel, SpineConfig, TreeRunResult
from app.services import model_core

logger = logging.getLogger(__name__)

DEFAULT_POPULATION_CAP = 100_000_000
# Survival to t + SURVIVAL_PROXY/η stands in for survival forever. For the
# exponential model the accepted trees that die out later are a share
# p_ext e^{-η(t + SURVIVAL_PROXY/η)} of the sample, about 5e-4 at the spine
# suite's t=3. A 15/η horizon would grow each survivor to about e^{ηt+15}
# individuals, beyond POPULATION_CAP.
SURVIVAL_PROXY = 4.0


def population_cap() -> int:
    return int(float(os.environ.get("POPULATION_CAP", DEFAULT_POPULATION_CAP)))


@dataclass(frozen=True)
class ForestRun:
    alive: np.ndarray  # (roots, observation times)
    births: np.ndarray  # births per root tree, roots excluded
    born: Optional[np.ndarray] = None  # every birth time, roots included (record=True)
    died: Optional[np.ndarray] = None

    @property
    def total_births(self) -> int:
        return int(self.births.sum())


def simulate_forest(
    model: LifespanModel,
    root_times,
    horizon: float,
    rng: np.random.Generator,
    observe=None,
    root_lifespans=None,
    cap: Optional[int] = None,
    record: bool = False,
) -> ForestRun:
    """
    Grow one tree per root born at `root_times`, with births up to `horizon`
    (math.inf runs subcritical trees to extinction). Alive counts are taken
    at each time in `observe`, which defaults to the horizon.
    """
    born = np.asarray(root_times, dtype=float).reshape(-1)
    n_roots = born.size
    observe = np.atleast_1d(np.asarray(horizon if observe is None else observe, dtype=float))
    cap = population_cap() if cap is None else cap
    b = model.birth_rate

    alive = np.zeros((n_roots, observe.size), dtype=np.int64)
    births = np.zeros(n_roots, dtype=np.int64)
    life = model_core.sample_lifespans(model, rng, n_roots) if root_lifespans is None else np.asarray(root_lifespans, dtype=float)
    root = np.arange(n_roots)
    total = n_roots
    born_log: list[np.ndarray] = []
    died_log: list[np.ndarray] = []

    while born.size:
        for j, s in enumerate(observe):
            living = (born <= s) & (s < born + life)
            alive[:, j] += np.bincount(root[living], minlength=n_roots)
        if record:
            born_log.append(born)
            died_log.append(born + life)

        window = np.clip(np.minimum(life, horizon - born), 0.0, None)
        if np.isinf(window).any():
            raise SplittingTreeError("immortal individuals need a finite horizon")
        kids = rng.poisson(b * window)
        k = int(kids.sum())
        if k == 0:
            break
        total += k
        if total > cap:
            raise PopulationCapError(cap, total)

        parent = np.repeat(np.arange(born.size), kids)
        born = born[parent] + rng.random(k) * window[parent]
        root = root[parent]
        births += np.bincount(root, minlength=n_roots)
        life = model_core.sample_lifespans(model, rng, k)

    if not record:
        return ForestRun(alive=alive, births=births)
    return ForestRun(alive=alive, births=births, born=np.concatenate(born_log), died=np.concatenate(died_log))


def _sup_scaled(born: np.ndarray, died: np.ndarray, eta: float, t: float) -> float:
    """max over birth times s <= t of e^{-ηs} X(s); X only jumps up at births."""
    died = died[died <= t]
    times = np.concatenate([born, died])
    steps = np.concatenate([np.ones(born.size, dtype=np.int64), -np.ones(died.size, dtype=np.int64)])
    # deaths before births at equal times
    order = np.lexsort((steps, times))
    level = np.cumsum(steps[order])
    at_birth = steps[order] > 0
    return float(np.max(np.exp(-eta * times[order][at_birth]) * level[at_birth]))


def simulate_tree(
    model: LifespanModel,
    t: float,
    rng: np.random.Generator,
    params: Optional[DerivedParams] = None,
    cap: Optional[int] = None,
) -> TreeRunResult:
    """One tree from a newborn ancestor at time 0, observed at t. sup_scaled needs params."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    run = simulate_forest(model, [0.0], t, rng, cap=cap, record=params is not None)
    population = int(run.alive[0, 0])
    sup = _sup_scaled(run.born, run.died, params.eta, t) if params is not None else None
    return TreeRunResult(
        population_at_t=population,
        extinct_by_t=population == 0,
        total_births=run.total_births,
        sup_scaled=sup,
        outcome_horizon=t,
    )


def total_progeny_subcritical(model: LifespanModel, rng: np.random.Generator, cap: Optional[int] = None) -> int:
    """Individuals ever born in a subcritical tree, the ancestor included."""
    m = model_core.mean_offspring(model)
    if not m < 1:
        raise NotSubcriticalError(m)
    run = simulate_forest(model, [0.0], math.inf, rng, observe=[0.0], cap=cap)
    return run.total_births + 1


def sample_offspring_counts(model: LifespanModel, rng: np.random.Generator, size: int) -> np.ndarray:
    """Lifetime offspring numbers, Poisson(bζ) mixed over ζ."""
    return rng.poisson(model.birth_rate * model_core.sample_lifespans(model, rng, size))


def scaled_limit_sample(
    model: LifespanModel, params: DerivedParams, t: float, rng: np.random.Generator, cap: Optional[int] = None
) -> Optional[float]:
    """e^{-ηt}X(t) if the tree is alive at t, else None."""
    result = simulate_tree(model, t, rng, cap=cap)
    if result.extinct_by_t:
        return None
    return math.exp(-params.eta * t) * result.population_at_t


# --- spine decomposition -----------------------------------------------------


def spine_config(model: LifespanModel, params: DerivedParams) -> SpineConfig:
    conditioned = None if isinstance(model.lifespan, DiracInfinite) else model_core.tilt(model, params)
    return SpineConfig(
        eta=params.eta,
        graft_right_rate=model.birth_rate - params.eta,
        conditioned=conditioned,
        conditioned_mass=model.birth_rate * model_core.lifespan_laplace(model, params.eta),
    )


def sample_AR(
    model: LifespanModel, params: DerivedParams, rng: np.random.Generator, size: int = 1
) -> tuple[np.ndarray, np.ndarray]:
    """
    (A, R) with P(A+R ∈ dz, R ∈ dr) = e^{-ηr} dr Λ(dz). Z = A+R is drawn by
    rejection from Λ/b with acceptance 1 - e^{-ηz}; then R | Z=z is an
    exponential(η) truncated to (0, z).
    """
    eta = params.eta
    z = np.empty(size)
    filled = 0
    while filled < size:
        batch = max(2 * (size - filled), 16)
        cand = model_core.sample_lifespans(model, rng, batch)
        keep = cand[rng.random(batch) < -np.expm1(-eta * cand)]
        take = min(keep.size, size - filled)
        z[filled : filled + take] = keep[:take]
        filled += take
    r = -np.log1p(rng.random(size) * np.expm1(-eta * z)) / eta
    return z - r, r


def simulate_conditioned_spine(
    model: LifespanModel,
    params: DerivedParams,
    t: float,
    rng: np.random.Generator,
    cap: Optional[int] = None,
) -> TreeRunResult:
    """
    X(t) on survival, built as a rate-η Yule spine plus subcritical trees
    grafted on its right (rate b-η per spine lineage) and on its left (one
    tree with ancestor lifespan R at every A-renewal of each lineage).
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    eta = params.eta
    yule = LifespanModel(birth_rate=eta, lifespan=DiracInfinite())
    spine = simulate_forest(yule, [0.0], t, rng, cap=cap, record=True)
    branch_starts = spine.born
    n_spine = branch_starts.size

    right_rate = model.birth_rate - eta
    if right_rate > 0:
        per_branch = rng.poisson(right_rate * (t - branch_starts))
        starts = np.repeat(branch_starts, per_branch)
        right_times = starts + rng.random(starts.size) * (t - starts)
    else:
        right_times = np.empty(0)

    left_times: list[np.ndarray] = []
    left_lives: list[np.ndarray] = []
    current = branch_starts.copy()
    while current.size:
        a, r = sample_AR(model, params, rng, current.size)
        current = current + a
        inside = current <= t
        left_times.append(current[inside])
        left_lives.append(r[inside])
        current = current[inside]
    left_times_all = np.concatenate(left_times)
    left_lives_all = np.concatenate(left_lives)

    n_right, n_left = right_times.size, left_times_all.size
    grafted_alive = 0
    grafted_births = 0
    if n_right + n_left:
        tilted = model_core.tilt(model, params)
        roots = np.concatenate([right_times, left_times_all])
        lives = np.concatenate([model_core.sample_lifespans(tilted, rng, n_right), left_lives_all])
        forest = simulate_forest(tilted, roots, t, rng, root_lifespans=lives, cap=cap)
        grafted_alive = int(forest.alive[:, 0].sum())
        grafted_births = forest.total_births

    population = n_spine + grafted_alive
    return TreeRunResult(
        population_at_t=population,
        extinct_by_t=False,
        # each renewal is the birth of the next spine individual
        total_births=(n_spine - 1) + n_right + n_left + grafted_births,
        outcome_horizon=t,
        spine_count=n_spine,
    )


def simulate_surviving_tree(
    model: LifespanModel,
    params: DerivedParams,
    t: float,
    rng: np.random.Generator,
    proxy: float = SURVIVAL_PROXY,
    cap: Optional[int] = None,
) -> int:
    """
    X(t) for a tree conditioned on survival by rejection: a tree counts as
    surviving when it is still alive at t + proxy/η.
    """
    late = t + proxy / params.eta
    while True:
        run = simulate_forest(model, [0.0], late, rng, observe=[t, late], cap=cap)
        if run.alive[0, 1] > 0:
            return int(run.alive[0, 0])


def yule_second_moment(eta: float, t: float) -> float:
    """E[Y(t)^2] for a rate-η Yule process from one individual."""
    return 2.0 * math.exp(2 * eta * t) - math.exp(eta * t)
