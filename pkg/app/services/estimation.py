"""
θ/b from age-ranked family fractions.

Sticks B_i = P_i / (1 - P_1 - ... - P_{i-1}) are i.i.d. Beta(1, α) under
the GEM limit, so the MLE is α̂ = -K / Σ log(1 - B_i) with observed Fisher
information K/α̂².
"""

import logging
import math

import numpy as np

from app.errors import MalformedInputError
from app.schemas import AlphaEstimate

logger = logging.getLogger(__name__)

Z_95 = 1.959963984540054


def sticks_from_fractions(fractions) -> np.ndarray:
    p = np.asarray(fractions, dtype=float)
    if p.size == 0:
        raise MalformedInputError("no fractions given")
    if np.any(p <= 0):
        raise MalformedInputError("fractions must be positive")
    rest = math.fsum([1.0, *(-p)])
    if rest < -1e-12:
        raise MalformedInputError(f"fractions sum to {1.0 - rest!r}, above 1")
    rest = max(rest, 0.0)
    # remaining mass before stick i, from suffix sums so late sticks keep their precision
    remaining = rest + np.cumsum(p[::-1])[::-1]
    sticks = p / remaining
    if rest <= 1e-12:
        # the last family takes whatever is left
        sticks = sticks[:-1]
    return sticks


def estimate_alpha_from_sticks(sticks) -> AlphaEstimate:
    b = np.asarray(sticks, dtype=float)
    if b.size == 0:
        raise MalformedInputError("a single family holding everything carries no information on alpha")
    if np.any((b <= 0) | (b >= 1)):
        raise MalformedInputError("fractions do not form a valid stick-breaking sequence")
    k = b.size
    alpha = -k / float(np.sum(np.log1p(-b)))
    half = Z_95 * alpha / math.sqrt(k)
    logger.info("alpha estimate %.6g from %d sticks", alpha, k)
    return AlphaEstimate(alpha_hat=alpha, ci_low=alpha - half, ci_high=alpha + half, sticks=k)


def estimate_alpha(fractions) -> AlphaEstimate:
    return estimate_alpha_from_sticks(sticks_from_fractions(fractions))


def abundances_to_fractions(rows: list[tuple[float, int]]) -> np.ndarray:
    """Surviving families ordered by immigration time, as fractions of the total."""
    alive = sorted((time, count) for time, count in rows if count > 0)
    if not alive:
        raise MalformedInputError("no surviving family in the abundance data")
    counts = np.array([count for _, count in alive], dtype=float)
    return counts / counts.sum()
