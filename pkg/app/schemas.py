"""
Pydantic models for the lifespan model, immigration schemes, simulation
results and test reports.
This is the source of truth for the JSON shapes the CLI and the API emit.
"""

import math
from typing import Annotated, Any, Callable, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True)


# --- lifespan families -------------------------------------------------------


class Exponential(_Frozen):
    family: Literal["exponential"] = "exponential"
    rate: float = Field(gt=0)


class DiracFinite(_Frozen):
    family: Literal["dirac"] = "dirac"
    a: float = Field(gt=0)


class DiracInfinite(_Frozen):
    """Immortal individuals: Λ = b·δ_∞, lifetimes equal to +inf."""
    family: Literal["dirac_infinite"] = "dirac_infinite"


class Uniform(_Frozen):
    family: Literal["uniform"] = "uniform"
    lo: float = Field(ge=0)
    hi: float

    @model_validator(mode="after")
    def _ordered(self) -> "Uniform":
        if not (math.isfinite(self.hi) and self.hi > self.lo):
            raise ValueError(f"uniform lifespan needs 0 <= lo < hi < inf, got lo={self.lo}, hi={self.hi}")
        return self


class GammaDist(_Frozen):
    family: Literal["gamma"] = "gamma"
    shape: float = Field(gt=0)
    rate: float = Field(gt=0)


class GenericDensity(_Frozen):
    """
    Lifespan density supported on [lower, upper]. Need not be normalised.
    Only constructible from Python: a callable has no JSON form.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    family: Literal["generic"] = "generic"
    density: Callable[[float], float]
    lower: float = Field(default=0.0, ge=0)
    upper: float

    @model_validator(mode="after")
    def _bounded(self) -> "GenericDensity":
        if not (math.isfinite(self.upper) and self.upper > self.lower):
            raise ValueError("generic lifespan density needs a finite upper bound above lower")
        return self


Lifespan = Annotated[
    Union[Exponential, DiracFinite, DiracInfinite, Uniform, GammaDist, GenericDensity],
    Field(discriminator="family"),
]


class LifespanModel(_Frozen):
    """Birth rate b and lifespan law Λ(·)/b; Λ has total mass b."""
    birth_rate: float = Field(gt=0)
    lifespan: Lifespan


class DerivedParams(_Frozen):
    eta: float = Field(gt=0)
    c: float = Field(gt=0)
    m: float = Field(gt=1)
    p_ext: float = Field(ge=0, lt=1)
    birth_rate: float = Field(gt=0)

    def as_public_dict(self) -> dict[str, float]:
        out = {"eta": self.eta, "c": self.c, "m": self.m, "p_ext": self.p_ext}
        if not math.isfinite(self.m):
            del out["m"]
        return out


# --- scale function ----------------------------------------------------------


class ScaleGrid(_Frozen):
    """W(kh) and W'(kh) for k = 0..n."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    step: float = Field(gt=0)
    values: np.ndarray
    derivs: np.ndarray
    horizon: float
    birth_rate: float = Field(gt=0)

    @model_validator(mode="after")
    def _consistent(self) -> "ScaleGrid":
        if self.values.shape != self.derivs.shape or self.values.ndim != 1:
            raise ValueError("values and derivs must be 1-d arrays of the same length")
        if abs(self.values[0] - 1.0) > 1e-12:
            raise ValueError(f"W(0) must be 1, got {self.values[0]}")
        return self

    @property
    def times(self) -> np.ndarray:
        return self.step * np.arange(self.values.size)


# --- simulation --------------------------------------------------------------


class TreeRunResult(_Frozen):
    population_at_t: int = Field(ge=0)
    extinct_by_t: bool
    total_births: int = Field(ge=0)
    sup_scaled: Optional[float] = None
    outcome_horizon: float = Field(ge=0)
    spine_count: Optional[int] = None

    @model_validator(mode="after")
    def _counts(self) -> "TreeRunResult":
        if self.extinct_by_t and self.population_at_t != 0:
            raise ValueError("an extinct tree cannot have living individuals")
        if self.population_at_t > self.total_births + 1:
            raise ValueError("more individuals alive than ever born")
        return self


class SpineConfig(_Frozen):
    eta: float = Field(gt=0)
    graft_right_rate: float = Field(ge=0)
    conditioned: Optional[LifespanModel] = None
    conditioned_mass: float = Field(ge=0)

    @model_validator(mode="after")
    def _mass(self) -> "SpineConfig":
        if abs(self.conditioned_mass - self.graft_right_rate) > 1e-10 * max(1.0, self.graft_right_rate + self.eta):
            raise ValueError(
                f"conditioned lifespan measure has mass {self.conditioned_mass}, expected b - eta = {self.graft_right_rate}"
            )
        return self


# --- immigration -------------------------------------------------------------


class ModelI(_Frozen):
    """Every immigrant founds a new type."""
    kind: Literal["I"] = "I"


class ModelII(_Frozen):
    """
    Types drawn with probabilities p. `p` is the explicit head; when
    `tail_ratio` is set the remaining mass 1 - sum(p) is spread geometrically
    over further types (type len(p)+j with probability tail_mass (1-r) r^(j-1)).
    Tail types all carry the label "tail"; FamilyRecord.type_index keeps them
    apart.
    """
    kind: Literal["II"] = "II"
    p: list[float] = Field(min_length=1)
    tail_ratio: Optional[float] = Field(default=None, gt=0, lt=1)

    @model_validator(mode="after")
    def _probabilities(self) -> "ModelII":
        if any(not (pi > 0) for pi in self.p):
            raise ValueError("type probabilities must be positive")
        total = sum(self.p)
        if self.tail_ratio is None:
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"type probabilities must sum to 1, got {total!r}")
        elif not total < 1.0:
            raise ValueError("a geometric tail needs the head probabilities to sum below 1")
        return self

    @property
    def tail_mass(self) -> float:
        return 0.0 if self.tail_ratio is None else 1.0 - sum(self.p)


class FisherLogSeries(_Frozen):
    """Abundance density f(x) = exp(-a x)/x, so θ = 1/a and Δ ~ Exp(a)."""
    family: Literal["fisher_log_series"] = "fisher_log_series"
    a: float = Field(gt=0)


class GenericAbundance(_Frozen):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    family: Literal["generic"] = "generic"
    density: Callable[[float], float]
    upper: float

    @model_validator(mode="after")
    def _bounded(self) -> "GenericAbundance":
        if not (math.isfinite(self.upper) and self.upper > 0):
            raise ValueError("generic abundance density needs a finite positive upper bound")
        return self


class ModelIII(_Frozen):
    """Species picked by size-biased abundance; each runs its own immigration at rate Δ."""
    kind: Literal["III"] = "III"
    abundance: Annotated[Union[FisherLogSeries, GenericAbundance], Field(discriminator="family")]


class ImmigrationConfig(_Frozen):
    theta: float = Field(gt=0)
    model: Annotated[Union[ModelI, ModelII, ModelIII], Field(discriminator="kind")] = ModelI()

    @model_validator(mode="after")
    def _theta_matches_abundance(self) -> "ImmigrationConfig":
        if isinstance(self.model, ModelIII) and isinstance(self.model.abundance, FisherLogSeries):
            expected = 1.0 / self.model.abundance.a
            if abs(self.theta - expected) > 1e-9 * expected:
                raise ValueError(f"Fisher log-series with a={self.model.abundance.a} forces theta=1/a={expected}")
        return self


class FamilyRecord(_Frozen):
    immigration_time: float = Field(ge=0)
    type_label: str
    abundance: int = Field(ge=0)
    delta: Optional[float] = None
    type_index: Optional[int] = Field(default=None, ge=1, description="Model II type, tail types included")


class PopulationSnapshot(_Frozen):
    t: float = Field(ge=0)
    model: Literal["I", "II", "III"]
    families: list[FamilyRecord]
    total: int = Field(ge=0)

    @model_validator(mode="after")
    def _consistent(self) -> "PopulationSnapshot":
        if self.total != sum(f.abundance for f in self.families):
            raise ValueError("total must equal the sum of family abundances")
        times = [f.immigration_time for f in self.families]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("immigration times must be strictly increasing")
        return self


# --- limit laws --------------------------------------------------------------


class LimitSample(_Frozen):
    sigma_points: list[float]
    sigma_total: float = Field(gt=0)
    ordering: Literal["size", "age"] = "size"

    @model_validator(mode="after")
    def _sums(self) -> "LimitSample":
        if sum(self.sigma_points) > self.sigma_total + 1e-9:
            raise ValueError("atoms exceed the recorded total")
        if self.ordering == "size" and any(b > a for a, b in zip(self.sigma_points, self.sigma_points[1:])):
            raise ValueError("size-ordered atoms must be non-increasing")
        return self


# --- statistics --------------------------------------------------------------


class TestReport(_Frozen):
    __test__ = False  # not a pytest class

    name: str
    kind: Literal["ks", "ks2", "chi2", "z", "dispersion", "tolerance"]
    statistic: float
    p_value: Optional[float] = Field(default=None, ge=0, le=1)
    n: int = Field(ge=0)
    passed: bool
    level: float
    metadata: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _verdict(self) -> "TestReport":
        if self.kind == "tolerance":
            expected = self.statistic <= self.level
        else:
            expected = self.p_value is not None and self.p_value >= self.level
        if expected != self.passed:
            raise ValueError(f"report {self.name!r}: passed flag disagrees with statistic and level")
        return self

    def to_json(self) -> dict[str, Any]:
        statistic = self.statistic if math.isfinite(self.statistic) else None
        return {
            "name": self.name,
            "statistic": statistic,
            "p_value": self.p_value,
            "n": self.n,
            "passed": self.passed,
            "level": self.level,
        }


class AlphaEstimate(_Frozen):
    alpha_hat: float = Field(gt=0)
    ci_low: float
    ci_high: float
    sticks: int = Field(ge=1)
    confidence: float = 0.95


# --- run configuration -------------------------------------------------------


class RunSettings(_Frozen):
    t: float = Field(default=1.0, ge=0)
    replicates: int = Field(default=1, ge=1)
    seed: int = Field(default=42, ge=0, lt=2**64)
    h: Optional[float] = Field(default=None, gt=0)
    horizon: Optional[float] = Field(default=None, gt=0)
    out: Optional[str] = None
    suite: Optional[str] = None
    workers: int = Field(default=1, ge=1)
    reseed: bool = False


class RunConfig(_Frozen):
    model: LifespanModel
    immigration: Optional[ImmigrationConfig] = None
    run: RunSettings = RunSettings()
