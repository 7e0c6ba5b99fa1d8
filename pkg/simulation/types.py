import math
from dataclasses import dataclass
from enum import Enum
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from config.settings import get_config
from models.distributions import NicheDistributionSpec
from policies.registry import PolicySpec
from utils.constants import CI95_Z, SLOT_COUNT

_simulation = get_config("simulation")


class SimulationMode(str, Enum):
    """
    How per-period payoffs are booked.

    PATHWISE books the sampled choice; CONDITIONAL books its expectation given
    the recommendation and the user, while sampled choices still drive the policy.
    """

    PATHWISE = "pathwise"
    CONDITIONAL = "conditional"


class ModelParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    v_pop: float
    delta: float = Field(ge=0.0, lt=1.0)
    niche: NicheDistributionSpec
    slots: Literal[2] = SLOT_COUNT

    @field_validator("v_pop")
    @classmethod
    def _finite_v_pop(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("v_pop must be finite")
        return value


class SimConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    episodes: int = Field(default=_simulation["episodes"], ge=1)
    master_seed: int = Field(default=_simulation["master_seed"], ge=0, lt=2**64)
    mode: SimulationMode = SimulationMode(_simulation["mode"])
    truncation_epsilon: float = Field(default=_simulation["truncation_epsilon"], gt=0.0)
    policy: PolicySpec
    horizon_cap: int = Field(default=_simulation["horizon_cap"], ge=1)
    n_jobs: int = Field(default=_simulation["n_jobs"], ge=1)
    chunk_size: int = Field(default=_simulation["chunk_size"], ge=1)


@dataclass(frozen=True)
class DiscountedMetrics:
    """Discounted totals of one episode; horizon is the period where simulation stopped."""

    engagement: float
    utility: float
    horizon: int = 0
    absorbed: bool = True
    flagged: bool = False


@dataclass(frozen=True)
class EstimateWithCI:
    mean: float
    std_error: float
    n: int
    ci95_low: float
    ci95_high: float

    @classmethod
    def from_samples(cls, values: np.ndarray) -> "EstimateWithCI":
        """
        Sample mean with a normal 95% interval.

        Sums are exact-rounded (math.fsum) so the estimate does not depend on
        how the samples were produced in parallel.
        """
        n = len(values)
        if n == 0:
            raise ValueError("Cannot estimate from an empty sample")
        mean = math.fsum(values) / n
        if n > 1:
            variance = math.fsum((values - mean) ** 2) / (n - 1)
            std_error = math.sqrt(variance / n)
        else:
            std_error = 0.0
        half_width = CI95_Z * std_error
        return cls(mean=mean, std_error=std_error, n=n, ci95_low=mean - half_width, ci95_high=mean + half_width)

    def scaled(self, factor: float) -> "EstimateWithCI":
        return EstimateWithCI(
            mean=self.mean * factor,
            std_error=self.std_error * abs(factor),
            n=self.n,
            ci95_low=min(self.ci95_low * factor, self.ci95_high * factor),
            ci95_high=max(self.ci95_low * factor, self.ci95_high * factor),
        )

    @property
    def half_width(self) -> float:
        return (self.ci95_high - self.ci95_low) / 2.0

    def overlaps(self, other: "EstimateWithCI", sigmas: float = 3.0) -> bool:
        return (
            abs(self.mean - other.mean)
            <= sigmas * self.std_error + sigmas * other.std_error
        )


@dataclass(frozen=True)
class MonteCarloResult:
    engagement: EstimateWithCI
    utility: EstimateWithCI
    flagged_episodes: int

    def per_period(self, delta: float) -> "MonteCarloResult":
        factor = 1.0 - delta
        return MonteCarloResult(
            engagement=self.engagement.scaled(factor),
            utility=self.utility.scaled(factor),
            flagged_episodes=self.flagged_episodes,
        )
