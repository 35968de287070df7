"""
Limiting objects of the immigration models: Gamma limits of the scaled
population, GEM and Beta stick-breaking for the family fractions, and the
Poisson point processes whose atoms are the scaled family sizes.

Point processes with a non-integrable intensity at 0 are sampled top-down:
atoms above a threshold eps come out in decreasing order by inverting the
tail measure at the epochs of a unit-rate Poisson process, and the mass of
the infinitely many atoms below eps is added to the total through its mean.
"""

import logging
import math
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize, special, stats

from app.schemas import DerivedParams, FisherLogSeries, ImmigrationConfig, LimitSample, ModelIII
from app.services.numerics import quad_checked

logger = logging.getLogger(__name__)


# --- Gamma, Beta, Dirichlet, GEM ---------------------------------------------


def gamma_limit_cdf(alpha: float, c: float, x):
    return stats.gamma.cdf(x, alpha, scale=1.0 / c)


def sample_gamma_limit(alpha: float, c: float, n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.gamma(alpha, 1.0 / c, n)


def dirichlet_sample(weights, rng: np.random.Generator) -> np.ndarray:
    return rng.dirichlet(np.asarray(weights, dtype=float))


def _break_sticks(b: np.ndarray) -> np.ndarray:
    left = np.concatenate([[1.0], np.cumprod(1.0 - b)[:-1]])
    return b * left


def gem_sample(alpha: float, k: int, rng: np.random.Generator) -> LimitSample:
    """First k sticks of GEM(alpha), in age order."""
    if not alpha > 0 or k < 1:
        raise ValueError(f"gem_sample needs alpha > 0 and k >= 1, got alpha={alpha}, k={k}")
    sticks = _break_sticks(rng.beta(1.0, alpha, k))
    return LimitSample(sigma_points=sticks.tolist(), sigma_total=1.0, ordering="age")


def model2_limit_sample(theta_over_b: float, p, k: int, rng: np.random.Generator) -> np.ndarray:
    """
    Limiting type fractions (P'_1..P'_k) of Model II, built from independent
    B'_i ~ Beta(θ_i, (θ/b) Σ_{j>i} p_j) with θ_i = (θ/b) p_i.
    """
    p = np.asarray(p, dtype=float)
    if k > p.size:
        raise ValueError(f"k={k} exceeds the number of types {p.size}")
    weights = theta_over_b * p
    rest = theta_over_b * (p.sum() - np.cumsum(p))
    b = np.empty(k)
    for i in range(k):
        # nothing left after the last type: the stick takes the remainder
        b[i] = 1.0 if rest[i] <= 1e-15 else rng.beta(weights[i], rest[i])
    return _break_sticks(b)


# --- Poisson point process intensities ---------------------------------------


def ppp_scaled_intensity(rho: float, r: float, tail: Callable[[float], float]) -> Callable[[float], float]:
    """v -> (rho/r) F(v)/v: intensity of the points e^{-rT_i} ζ_i, T a rate-rho PPP, P(ζ >= v) = F(v)."""
    scale = rho / r
    return lambda v: scale * tail(v) / v


def ppp_expected_count(rho: float, r: float, tail: Callable[[float], float], u: float) -> float:
    """Expected number of atoms in [u, inf)."""
    intensity = ppp_scaled_intensity(rho, r, tail)
    return quad_checked(intensity, u, math.inf, "ppp count")


def expected_image_count(rho: float, r: float, c: float, u: float) -> float:
    """Closed form of ppp_expected_count for an exponential(c) mark."""
    return rho / r * float(special.exp1(c * u))


def image_atoms(rho: float, r: float, c: float, horizon: float, rng: np.random.Generator) -> np.ndarray:
    """Atoms e^{-rT_i} ζ_i for T_i a rate-rho PPP on [0, horizon] and ζ_i ~ Exp(c)."""
    times = rng.uniform(0.0, horizon, rng.poisson(rho * horizon))
    return np.exp(-r * times) * rng.exponential(1.0 / c, times.size)


def sample_sup_poisson(rho: float, horizon: float, rng: np.random.Generator) -> float:
    """sup_{0<t<=T} A_t/t for a rate-rho Poisson process; attained at a jump time."""
    jumps = np.sort(rng.uniform(0.0, horizon, rng.poisson(rho * horizon)))
    if jumps.size == 0:
        return 0.0
    return float(np.max(np.arange(1, jumps.size + 1) / jumps))


def sup_poisson_tail(rho: float, a: float) -> float:
    """P(sup A_t/t > a) = min(rho/a, 1)."""
    return min(rho / a, 1.0)


# --- Model I point process ---------------------------------------------------


def _epochs(total: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-rate Poisson epochs up to `total`."""
    epochs = np.cumsum(rng.exponential(1.0, max(int(total * 2) + 16, 16)))
    while epochs[-1] <= total:
        epochs = np.concatenate([epochs, epochs[-1] + np.cumsum(rng.exponential(1.0, epochs.size))])
    return epochs[epochs <= total]


def model1_ppp_sample(alpha: float, c: float, rng: np.random.Generator, eps: Optional[float] = None) -> LimitSample:
    """
    Size-ranked atoms of the PPP with intensity alpha e^{-cy}/y. The atoms
    normalised by their sum are a size-ranked GEM(alpha) sample.
    """
    eps = 1e-6 * alpha / c if eps is None else eps

    def tail(y: float) -> float:
        return alpha * float(special.exp1(c * y))

    top = tail(eps)
    atoms = []
    hi = max(1.0 / c, eps)
    for g in _epochs(top, rng):
        while tail(hi) > g:
            hi *= 2.0
        atoms.append(optimize.brentq(lambda y: tail(y) - g, eps, hi, xtol=1e-14 * hi, rtol=1e-12))
    atoms.sort(reverse=True)
    below = alpha * -math.expm1(-c * eps) / c
    return LimitSample(sigma_points=atoms, sigma_total=math.fsum(atoms) + below, ordering="size")


# --- Model III ---------------------------------------------------------------


@lru_cache(maxsize=16)
def _size_biased_density(scheme: ModelIII) -> tuple[Callable[[float], float], float]:
    """Density x f(x)/θ of Δ and its upper support bound."""
    abundance = scheme.abundance
    if isinstance(abundance, FisherLogSeries):
        a = abundance.a
        return (lambda x: a * math.exp(-a * x)), math.inf
    mass = quad_checked(lambda x: x * abundance.density(x), 0.0, abundance.upper, "size-biased mass")
    return (lambda x: x * abundance.density(x) / mass), abundance.upper


def model3_tail_F(config: ImmigrationConfig, params: DerivedParams, v: float) -> float:
    """F(v) = P(G >= v) where G | Δ ~ Gamma(Δ/b, c) and Δ is size-biased."""
    if v <= 0:
        return 1.0
    density, upper = _size_biased_density(config.model)
    b, c = params.birth_rate, params.c
    return quad_checked(
        lambda x: density(x) * float(special.gammaincc(x / b, c * v)) if x > 0 else 0.0,
        0.0,
        upper,
        "model III tail",
        epsabs=1e-11,
        limit=400,
    )


def _sigma_exponent(config: ImmigrationConfig, params: DerivedParams, s: float) -> float:
    def integrand(v: float) -> float:
        return model3_tail_F(config, params, v) * -math.expm1(-s * v) / v

    body = quad_checked(integrand, 0.0, 1.0, "sigma laplace [0,1]", epsabs=1e-10)
    tail = quad_checked(integrand, 1.0, math.inf, "sigma laplace [1,inf)", epsabs=1e-10)
    return config.theta / params.eta * (body + tail)


def sigma_laplace(config: ImmigrationConfig, params: DerivedParams, s: float) -> float:
    """E[exp(-sσ)] for the Model III limit σ of e^{-ηt} I(t)."""
    if s < 0:
        raise ValueError(f"s must be >= 0, got {s}")
    if s == 0:
        return 1.0
    return math.exp(-_sigma_exponent(config, params, s))


def sigma_mean(config: ImmigrationConfig, params: DerivedParams) -> float:
    """E[σ] = (1/(ηbc)) ∫ x² f(x) dx."""
    abundance = config.model.abundance
    if isinstance(abundance, FisherLogSeries):
        second = 1.0 / abundance.a**2
    else:
        second = quad_checked(lambda x: x * x * abundance.density(x), 0.0, abundance.upper, "abundance second moment")
    return second / (params.eta * params.birth_rate * params.c)


@lru_cache(maxsize=8)
def _model3_tail_table(config: ImmigrationConfig, params: DerivedParams, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """log-grid of v and the tail measure (θ/η)∫_v^∞ F(u)/u du, decreasing in v."""
    hi = max(1.0, 1.0 / params.c)
    while model3_tail_F(config, params, hi) > 1e-13:
        hi *= 2.0
    logs = np.linspace(math.log(eps), math.log(hi), 600)
    F = np.array([model3_tail_F(config, params, math.exp(s)) for s in logs])
    # ∫ F(v)/v dv = ∫ F(e^s) ds
    upward = integrate.cumulative_trapezoid(F, logs, initial=0.0)
    tail = config.theta / params.eta * (upward[-1] - upward)
    logger.debug("model III tail table: eps=%.3g hi=%.3g total=%.6g", eps, hi, tail[0])
    return logs, tail


def model3_ppp_sample(
    config: ImmigrationConfig, params: DerivedParams, rng: np.random.Generator, eps: Optional[float] = None
) -> LimitSample:
    """Size-ranked atoms of the PPP with intensity (θ/η) F(y)/y."""
    eps = 1e-6 * sigma_mean(config, params) if eps is None else eps
    logs, tail = _model3_tail_table(config, params, eps)
    epochs = _epochs(tail[0], rng)
    # tail is decreasing in v; interpolate on the reversed (increasing) arrays
    atoms = np.exp(np.interp(epochs, tail[::-1], logs[::-1]))
    below = config.theta / params.eta * eps * (1.0 + model3_tail_F(config, params, eps)) / 2
    return LimitSample(sigma_points=atoms.tolist(), sigma_total=float(atoms.sum()) + below, ordering="size")
