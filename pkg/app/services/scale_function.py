"""
Scale function W of the splitting tree.

W solves the renewal identity W' = bW - W⋆Λ with W(0) = 1 and W = 0 on the
negative half-line. The convolution is done by product integration against
the piecewise-linear interpolant of W (exact cell moments of the lifespan
law), a Dirac atom is handled as an exact delay, and time stepping is Heun.
"""

import logging
import math
from typing import Callable

import numpy as np
from scipy import integrate, special, stats

from app.errors import ConfigError, GridRangeError, SolverInstabilityError
from app.schemas import (
    DerivedParams,
    DiracFinite,
    DiracInfinite,
    Exponential,
    GammaDist,
    GenericDensity,
    LifespanModel,
    ScaleGrid,
    Uniform,
)
from app.services import model_core

logger = logging.getLogger(__name__)

Convolution = Callable[[np.ndarray, int, bool], float]


def default_step(params: DerivedParams) -> float:
    return 1e-3 * min(1.0, 1.0 / params.eta)


def default_horizon(params: DerivedParams, t: float = 0.0) -> float:
    """Long enough for e^{-ηt}W(t) to settle near 1/c."""
    return max(t, 12.0 / params.eta)


# --- convolution -------------------------------------------------------------


def _cell_moments(lifespan, h: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Mass and first moment of the lifespan law on each cell [jh, (j+1)h).
    """
    edges = h * np.arange(n + 1)
    if isinstance(lifespan, Exponential):
        y = lifespan.rate * edges
        cdf = -np.expm1(-y)
        partial = (cdf - y * np.exp(-y)) / lifespan.rate
    elif isinstance(lifespan, GammaDist):
        x = lifespan.rate * edges
        cdf = special.gammainc(lifespan.shape, x)
        partial = lifespan.shape / lifespan.rate * special.gammainc(lifespan.shape + 1, x)
    elif isinstance(lifespan, Uniform):
        width = lifespan.hi - lifespan.lo
        clipped = np.clip(edges, lifespan.lo, lifespan.hi)
        cdf = (clipped - lifespan.lo) / width
        partial = (clipped**2 - lifespan.lo**2) / (2 * width)
    elif isinstance(lifespan, GenericDensity):
        sub = 8
        xs = np.linspace(0.0, edges[-1], n * sub + 1)
        inside = (xs >= lifespan.lower) & (xs <= lifespan.upper)
        gx = np.array([lifespan.density(x) if ok else 0.0 for x, ok in zip(xs, inside)])
        mass = model_core.generic_mass(lifespan)
        cdf = integrate.cumulative_trapezoid(gx, xs, initial=0.0)[::sub] / mass
        partial = integrate.cumulative_trapezoid(xs * gx, xs, initial=0.0)[::sub] / mass
    else:
        raise TypeError(f"no cell moments for {type(lifespan).__name__}")
    return np.diff(cdf), np.diff(partial)


def _convolution(model: LifespanModel, h: float, n: int) -> Convolution:
    """
    Returns conv(W, k, left) ≈ (W⋆Λ)(kh) using W[0..k]. `left` asks for the
    left limit at kh, which only matters for a Dirac atom landing on the grid.
    """
    b, ls = model.birth_rate, model.lifespan

    if isinstance(ls, DiracInfinite):
        return lambda W, k, left: 0.0

    if isinstance(ls, DiracFinite):
        a, slack = ls.a, 1e-9 * h

        def delay(W: np.ndarray, k: int, left: bool) -> float:
            s = k * h - a
            if s < -slack or (left and s <= slack):
                return 0.0
            p = max(s, 0.0) / h
            j = min(int(p), k - 1) if k > 0 else 0
            frac = p - j
            upper = W[j + 1] if j + 1 <= k else W[k]
            return b * (W[j] + (upper - W[j]) * frac)

        return delay

    mass, first = _cell_moments(ls, h, n)
    left_edges = h * np.arange(n)
    # hat-function weights: cell j pairs W(kh - jh) with coef_b and W(kh - jh - h) with coef_a
    coef_a = b * (first - left_edges * mass) / h
    coef_b = b * ((left_edges + h) * mass - first) / h

    def product(W: np.ndarray, k: int, left: bool) -> float:
        if k == 0:
            return 0.0
        return float(np.dot(coef_b[:k], W[k:0:-1]) + np.dot(coef_a[:k], W[k - 1 :: -1]))

    return product


# --- solver ------------------------------------------------------------------


def solve_scale(model: LifespanModel, params: DerivedParams, horizon: float, h: float | None = None) -> ScaleGrid:
    if h is None:
        h = default_step(params)
    errors = []
    if not h > 0:
        errors.append(f"step h must be positive, got {h}")
    elif not horizon >= h:
        errors.append(f"horizon must be at least one step (h={h}), got {horizon}")
    if errors:
        raise ConfigError(errors, "scale solver")

    n = int(math.ceil(horizon / h - 1e-9))
    b = model.birth_rate
    conv = _convolution(model, h, n)

    W = np.empty(n + 1)
    D = np.empty(n + 1)
    W[0] = 1.0
    D[0] = b - conv(W, 0, False)
    for k in range(n):
        W[k + 1] = W[k] + h * D[k]
        slope = b * W[k + 1] - conv(W, k + 1, True)
        W[k + 1] = W[k] + 0.5 * h * (D[k] + slope)
        if not W[k + 1] > W[k]:
            raise SolverInstabilityError((k + 1) * h, h)
        D[k + 1] = b * W[k + 1] - conv(W, k + 1, False)

    logger.info("scale function solved: %d steps, h=%.3g, horizon=%.6g", n, h, n * h)
    return ScaleGrid(step=h, values=W, derivs=D, horizon=n * h, birth_rate=b)


def w_at(grid: ScaleGrid, t: float) -> tuple[float, float]:
    """(W(t), W'(t)) by linear interpolation on the grid."""
    if t < 0 or t > grid.horizon * (1 + 1e-12):
        raise GridRangeError(t, grid.horizon)
    times = grid.times
    return float(np.interp(t, times, grid.values)), float(np.interp(t, times, grid.derivs))


def _w_or_zero(grid: ScaleGrid, u: float) -> float:
    return 0.0 if u < 0 else w_at(grid, u)[0]


# --- laws of X(t) ------------------------------------------------------------


def x_t_pmf(grid: ScaleGrid, params: DerivedParams, t: float, n: int) -> float:
    """P(X(t) = n) for a tree started from one newborn ancestor."""
    W, Wp = w_at(grid, t)
    b = params.birth_rate
    if n == 0:
        return 1.0 - Wp / (b * W)
    return (1.0 - 1.0 / W) ** (n - 1) * Wp / (b * W * W)


def x_t_pmf_given_ancestor(grid: ScaleGrid, x: float, t: float, n: int) -> float:
    """P(X(t) = n) when the ancestor lives exactly x (x >= t allowed)."""
    W = w_at(grid, t)[0]
    extinct = _w_or_zero(grid, t - x) / W
    if n == 0:
        return extinct
    return (1.0 - extinct) * (1.0 - 1.0 / W) ** (n - 1) / W


def ancestor_mixture_pmf(grid: ScaleGrid, model: LifespanModel, t: float, n: int, points: int = 40001) -> float:
    """x_t_pmf_given_ancestor averaged over the lifespan law."""
    ls = model.lifespan
    if isinstance(ls, DiracFinite):
        return x_t_pmf_given_ancestor(grid, ls.a, t, n)
    if isinstance(ls, DiracInfinite):
        return x_t_pmf_given_ancestor(grid, math.inf, t, n)

    W = w_at(grid, t)[0]
    upper = min(t, model_core.support_upper(model))
    xs = np.linspace(0.0, upper, points)
    extinct = np.interp(t - xs, grid.times, grid.values) / W
    given = extinct if n == 0 else (1.0 - extinct) * (1.0 - 1.0 / W) ** (n - 1) / W
    head = integrate.trapezoid(given * _lifespan_density(model, xs), xs)
    # lifespans longer than t leave the ancestor alive
    alive = model_core.birth_intensity_measure(model, t) / model.birth_rate
    return float(head) + alive * x_t_pmf_given_ancestor(grid, math.inf, t, n)


def _lifespan_density(model: LifespanModel, xs: np.ndarray) -> np.ndarray:
    ls = model.lifespan
    if isinstance(ls, Exponential):
        return stats.expon.pdf(xs, scale=1.0 / ls.rate)
    if isinstance(ls, GammaDist):
        return stats.gamma.pdf(xs, ls.shape, scale=1.0 / ls.rate)
    if isinstance(ls, Uniform):
        return stats.uniform.pdf(xs, loc=ls.lo, scale=ls.hi - ls.lo)
    if isinstance(ls, GenericDensity):
        mass = model_core.generic_mass(ls)
        return np.array([ls.density(x) / mass if ls.lower <= x <= ls.upper else 0.0 for x in xs])
    raise TypeError(f"{type(ls).__name__} has no density")


def x_u_pmf(grid: ScaleGrid, params: DerivedParams, t: float, n: int) -> float:
    """Law of X(U), U uniform on [0, t]: the size of one immigrant family at t."""
    W = w_at(grid, t)[0]
    bt = params.birth_rate * t
    if n == 0:
        return 1.0 - math.log(W) / bt
    return (1.0 - 1.0 / W) ** n / (bt * n)


# --- closed forms and checks -------------------------------------------------


def scale_closed_form(model: LifespanModel, params: DerivedParams, t: float) -> float:
    """Exact W(t) for exponential, immortal and fixed lifespans."""
    b, ls = model.birth_rate, model.lifespan
    if isinstance(ls, Exponential):
        return (b * math.exp(params.eta * t) - ls.rate) / (b - ls.rate)
    if isinstance(ls, DiracInfinite):
        return math.exp(b * t)
    if isinstance(ls, DiracFinite):
        # delay-exponential series, one term per completed lag
        terms = []
        k = 0
        while t - k * ls.a >= 0:
            u = t - k * ls.a
            terms.append((-b * u) ** k / math.factorial(k) * math.exp(b * u))
            k += 1
        return math.fsum(terms)
    raise TypeError(f"no closed form scale function for {type(ls).__name__}")


def laplace_check(grid: ScaleGrid, params: DerivedParams, model: LifespanModel, lam: float) -> tuple[float, float]:
    """
    (numerical ∫ e^{-λt}W(t)dt, 1/ψ(λ)) for λ > η. The integral over the
    grid is completed with the e^{ηt}/c tail beyond the horizon.
    """
    if not lam > params.eta:
        raise ValueError(f"laplace check needs lambda > eta={params.eta}, got {lam}")
    times = grid.times
    body = integrate.trapezoid(np.exp(-lam * times) * grid.values, times)
    tail = math.exp((params.eta - lam) * grid.horizon) / (params.c * (lam - params.eta))
    return float(body + tail), 1.0 / model_core.psi(model, lam)


def limit_gap(grid: ScaleGrid, params: DerivedParams, t: float | None = None) -> float:
    """|c e^{-ηt} W(t) - 1|, at the horizon by default."""
    t = grid.horizon if t is None else t
    return abs(params.c * math.exp(-params.eta * t) * w_at(grid, t)[0] - 1.0)
