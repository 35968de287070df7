"""
Shared numerical helpers: checked adaptive quadrature and tabulated
inverse-CDF sampling for densities without a closed-form quantile.
"""

import logging
from typing import Callable

import numpy as np
from scipy import integrate

from app.errors import QuadratureError

logger = logging.getLogger(__name__)

QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-10
QUAD_LIMIT = 200


def quad_checked(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    what: str,
    epsabs: float = QUAD_EPSABS,
    epsrel: float = QUAD_EPSREL,
    limit: int = QUAD_LIMIT,
) -> float:
    """
    scipy.integrate.quad that refuses to return a value QUADPACK flagged.
    A fourth element in the full_output tuple means a warning was raised.
    """
    if hi <= lo:
        return 0.0
    out = integrate.quad(fn, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
    if len(out) > 3:
        value, abserr = out[0], out[1]
        # roundoff warnings with a tiny error estimate are still usable
        if abserr > max(epsabs, epsrel * abs(value)) * 1e3:
            raise QuadratureError(what, abserr, str(out[3]).splitlines()[0])
        logger.debug("quad(%s) warned but abserr=%.3g is acceptable", what, abserr)
    return float(out[0])


class InverseCdfTable:
    """Quantile lookup built from a density tabulated on [lo, hi]."""

    def __init__(self, density: Callable[[float], float], lo: float, hi: float, points: int = 1 << 14) -> None:
        xs = np.linspace(lo, hi, points)
        fx = np.array([max(float(density(x)), 0.0) for x in xs])
        cdf = integrate.cumulative_trapezoid(fx, xs, initial=0.0)
        if not cdf[-1] > 0:
            raise QuadratureError("inverse cdf table", 0.0, "density has no mass on its support")
        self._xs = xs
        self._cdf = cdf / cdf[-1]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.interp(rng.random(size), self._cdf, self._xs)
