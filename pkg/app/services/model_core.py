"""
Lifespan measure Λ = b × (lifespan law) and everything derived from it:
the Laplace exponent ψ, the Malthusian parameter η, c = ψ'(η), the mean
offspring m, the extinction probability and the offspring pgf of the
embedded Galton-Watson process.

Built-in families use closed forms. GenericDensity goes through checked
adaptive quadrature on its (finite) support.
"""

import logging
import math
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from app.errors import SplittingTreeError, SubcriticalModelError
from app.schemas import (
    DerivedParams,
    DiracFinite,
    DiracInfinite,
    Exponential,
    GammaDist,
    GenericDensity,
    LifespanModel,
    Uniform,
)
from app.services.numerics import InverseCdfTable, quad_checked

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-12


# --- generic density plumbing ------------------------------------------------


@lru_cache(maxsize=64)
def generic_mass(lifespan: GenericDensity) -> float:
    mass = quad_checked(lifespan.density, lifespan.lower, lifespan.upper, "generic lifespan mass")
    if not mass > 0:
        raise SplittingTreeError("generic lifespan density integrates to zero")
    return mass


def _generic_expect(lifespan: GenericDensity, fn, what: str) -> float:
    mass = generic_mass(lifespan)
    return quad_checked(lambda r: fn(r) * lifespan.density(r), lifespan.lower, lifespan.upper, what) / mass


@lru_cache(maxsize=64)
def _generic_table(lifespan: GenericDensity) -> InverseCdfTable:
    return InverseCdfTable(lifespan.density, lifespan.lower, lifespan.upper)


def support_upper(model: LifespanModel) -> float:
    """Right end of the lifespan support (inf for unbounded families)."""
    ls = model.lifespan
    if isinstance(ls, DiracFinite):
        return ls.a
    if isinstance(ls, Uniform):
        return ls.hi
    if isinstance(ls, GenericDensity):
        return ls.upper
    return math.inf


# --- Laplace transform and ψ -------------------------------------------------


def _one_minus_laplace(model: LifespanModel, lam: float) -> float:
    """1 - E[exp(-λζ)], computed without cancellation where a closed form allows."""
    ls = model.lifespan
    if lam == 0:
        return 0.0
    if isinstance(ls, Exponential):
        return lam / (ls.rate + lam)
    if isinstance(ls, DiracFinite):
        return -math.expm1(-lam * ls.a)
    if isinstance(ls, DiracInfinite):
        return 1.0
    if isinstance(ls, Uniform):
        width = ls.hi - ls.lo
        if lam * width < 1e-8:
            return lam * (ls.lo + ls.hi) / 2
        return 1.0 - math.exp(-lam * ls.lo) * (-math.expm1(-lam * width)) / (lam * width)
    if isinstance(ls, GammaDist):
        return -math.expm1(-ls.shape * math.log1p(lam / ls.rate))
    return _generic_expect(ls, lambda r: -math.expm1(-lam * r), "1 - laplace")


def lifespan_laplace(model: LifespanModel, lam: float) -> float:
    """E[exp(-λζ)] for ζ ~ Λ/b. DiracInfinite gives 0 for every λ > 0."""
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    return 1.0 - _one_minus_laplace(model, lam)


def psi(model: LifespanModel, lam: float) -> float:
    """ψ(λ) = λ - ∫(1 - e^{-λr}) Λ(dr)."""
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    return lam - model.birth_rate * _one_minus_laplace(model, lam)


def _weighted_mean(model: LifespanModel, lam: float) -> float:
    """E[ζ exp(-λζ)]."""
    ls = model.lifespan
    if isinstance(ls, Exponential):
        return ls.rate / (ls.rate + lam) ** 2
    if isinstance(ls, DiracFinite):
        return ls.a * math.exp(-lam * ls.a)
    if isinstance(ls, DiracInfinite):
        return 0.0 if lam > 0 else math.inf
    if isinstance(ls, Uniform):
        if lam == 0:
            return (ls.lo + ls.hi) / 2

        def antiderivative(r: float) -> float:
            return -math.exp(-lam * r) * (lam * r + 1) / lam**2

        return (antiderivative(ls.hi) - antiderivative(ls.lo)) / (ls.hi - ls.lo)
    if isinstance(ls, GammaDist):
        return ls.shape / (ls.rate + lam) * (ls.rate / (ls.rate + lam)) ** ls.shape
    return _generic_expect(ls, lambda r: r * math.exp(-lam * r), "weighted mean")


def psi_prime(model: LifespanModel, lam: float) -> float:
    return 1.0 - model.birth_rate * _weighted_mean(model, lam)


def mean_offspring(model: LifespanModel) -> float:
    """m = ∫ r Λ(dr); +inf for immortal individuals."""
    return model.birth_rate * _weighted_mean(model, 0.0)


# --- Malthusian parameter ----------------------------------------------------


def malthusian(model: LifespanModel) -> DerivedParams:
    m = mean_offspring(model)
    if not m > 1:
        raise SubcriticalModelError(m)

    b = model.birth_rate
    if isinstance(model.lifespan, DiracInfinite):
        # ψ(λ) = λ - b
        return DerivedParams(eta=b, c=1.0, m=m, p_ext=0.0, birth_rate=b)

    def fn(lam: float) -> float:
        return psi(model, lam)

    hi = 1.0
    while fn(hi) <= 0:
        hi *= 2.0
    # ψ'(0) = 1 - m < 0, so ψ is negative just right of 0
    lo = hi / 2.0
    while fn(lo) >= 0:
        lo /= 2.0
        if lo < 1e-300:
            raise SubcriticalModelError(m)

    eta = optimize.bisect(fn, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=400)
    residual = abs(fn(eta))
    if residual > ROOT_TOL:
        logger.warning("psi(eta) residual %.3g above %.1g (quadrature noise?)", residual, ROOT_TOL)

    c = psi_prime(model, eta)
    p_ext = min(max(1.0 - eta / b, 0.0), math.nextafter(1.0, 0.0))
    logger.debug("malthusian: eta=%.15g c=%.15g m=%.6g", eta, c, m)
    return DerivedParams(eta=eta, c=c, m=m, p_ext=p_ext, birth_rate=b)


def offspring_pgf(model: LifespanModel, s: float) -> float:
    """f(s) = E[exp(-bζ(1-s))], the pgf of Poisson(bζ) offspring counts."""
    if not 0 <= s <= 1:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    return lifespan_laplace(model, model.birth_rate * (1.0 - s))


def birth_intensity_measure(model: LifespanModel, x: float) -> float:
    """Density Λ([x, ∞)) of the reproduction intensity at age x."""
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    b, ls = model.birth_rate, model.lifespan
    if isinstance(ls, Exponential):
        return b * math.exp(-ls.rate * x)
    if isinstance(ls, DiracFinite):
        return b if x <= ls.a else 0.0
    if isinstance(ls, DiracInfinite):
        return b
    if isinstance(ls, Uniform):
        return b * min(max((ls.hi - x) / (ls.hi - ls.lo), 0.0), 1.0)
    if isinstance(ls, GammaDist):
        return b * float(special.gammaincc(ls.shape, ls.rate * x))
    if x >= ls.upper:
        return 0.0
    lo = max(x, ls.lower)
    return b * quad_checked(ls.density, lo, ls.upper, "lifespan tail") / generic_mass(ls)


def malthusian_identity(model: LifespanModel, params: DerivedParams) -> float:
    """∫ e^{-ηx} Λ([x,∞)) dx, which equals 1 at the Malthusian parameter."""
    upper = support_upper(model)

    def integrand(x: float) -> float:
        return math.exp(-params.eta * x) * birth_intensity_measure(model, x)

    return quad_checked(integrand, 0.0, upper, "malthusian identity")


def r_marginal_density(model: LifespanModel, params: DerivedParams, r: float) -> float:
    """Density e^{-ηr} Λ([r,∞)) of the residual lifetime R on the spine."""
    return math.exp(-params.eta * r) * birth_intensity_measure(model, r)


# --- sampling and tilting ----------------------------------------------------


def sample_lifespans(model: LifespanModel, rng: np.random.Generator, size: int) -> np.ndarray:
    ls = model.lifespan
    if isinstance(ls, Exponential):
        return rng.exponential(1.0 / ls.rate, size)
    if isinstance(ls, DiracFinite):
        return np.full(size, ls.a)
    if isinstance(ls, DiracInfinite):
        return np.full(size, np.inf)
    if isinstance(ls, Uniform):
        return rng.uniform(ls.lo, ls.hi, size)
    if isinstance(ls, GammaDist):
        return rng.gamma(ls.shape, 1.0 / ls.rate, size)
    return _generic_table(ls).sample(rng, size)


@lru_cache(maxsize=64)
def tilt(model: LifespanModel, params: DerivedParams) -> LifespanModel:
    """
    Subcritical model with lifespan measure e^{-ηr} Λ(dr), whose mass is
    b - η. Trees grafted on the spine of a surviving tree follow this law.
    """
    eta, b, ls = params.eta, model.birth_rate, model.lifespan
    rate = b - eta
    if isinstance(ls, DiracInfinite) or not rate > 0:
        raise SplittingTreeError("immortal lifespans leave no mass for a conditioned subcritical tree")
    if isinstance(ls, Exponential):
        tilted = Exponential(rate=ls.rate + eta)
    elif isinstance(ls, DiracFinite):
        tilted = DiracFinite(a=ls.a)
    elif isinstance(ls, GammaDist):
        tilted = GammaDist(shape=ls.shape, rate=ls.rate + eta)
    elif isinstance(ls, Uniform):
        tilted = GenericDensity(density=lambda r: math.exp(-eta * r), lower=ls.lo, upper=ls.hi)
    else:
        base = ls.density
        tilted = GenericDensity(density=lambda r: base(r) * math.exp(-eta * r), lower=ls.lower, upper=ls.upper)
    return LifespanModel(birth_rate=rate, lifespan=tilted)
