"""
Domain errors. Every failure the library raises on purpose derives from
SplittingTreeError so the CLI and the HTTP layer can map them in one place.
"""

from typing import Optional


class SplittingTreeError(ValueError):
    """Base class for all domain errors."""


class SubcriticalModelError(SplittingTreeError):
    def __init__(self, m: float) -> None:
        super().__init__(f"subcritical model: mean offspring m={m:.6g} <= 1, no Malthusian parameter")
        self.m = m


class NotSubcriticalError(SplittingTreeError):
    def __init__(self, m: float) -> None:
        super().__init__(f"model is not subcritical: mean offspring m={m:.6g} >= 1")
        self.m = m


class QuadratureError(SplittingTreeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, what: str, abserr: float, message: str) -> None:
        super().__init__(f"quadrature failed for {what}: abserr={abserr:.3g} ({message})")
        self.what = what
        self.abserr = abserr
        self.message = message


class SolverInstabilityError(SplittingTreeError):
    def __init__(self, t: float, h: float) -> None:
        super().__init__(
            f"scale function stopped increasing at t={t:.6g} with step h={h:.3g}; retry with a smaller h"
        )
        self.t = t
        self.h = h


class GridRangeError(SplittingTreeError):
    def __init__(self, t: float, horizon: float) -> None:
        super().__init__(f"t={t:.6g} outside the solved range [0, {horizon:.6g}]")


class PopulationCapError(SplittingTreeError):
    def __init__(self, cap: int, reached: int) -> None:
        super().__init__(f"population cap {cap} exceeded ({reached} individuals)")
        self.cap = cap
        self.reached = reached


class EmptyPopulationError(SplittingTreeError):
    def __init__(self) -> None:
        super().__init__("population is empty at the observation time")


class DegenerateTestError(SplittingTreeError):
    pass


class MalformedInputError(SplittingTreeError):
    pass


class ConfigError(SplittingTreeError):
    """Carries every validation error found in a run configuration."""

    def __init__(self, errors: list[str], context: Optional[str] = None) -> None:
        head = f"invalid configuration ({context})" if context else "invalid configuration"
        super().__init__(head + ": " + "; ".join(errors))
        self.errors = errors
