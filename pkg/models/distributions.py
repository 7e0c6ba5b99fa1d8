"""
Base-utility distributions of the niche type and the idiosyncratic noise.

Two niche families are supported, both with mean zero:

- two-point: V_N = (1 - p)/p with probability p, else -1
- GPD: generalized Pareto with location -1, scale 1 - xi and shape xi in [0, 1)

The noise is a Gumbel variable shifted to mean zero (location -gamma, scale 1),
which makes the logit expectations exact.
"""

import math
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import stats

from utils.constants import EULER_GAMMA
from utils.errors import DomainError, InvalidParameterError


def _check_prior(p: float) -> None:
    if not (0.0 < p < 1.0) or math.isnan(p):
        raise InvalidParameterError(f"p must lie in (0, 1), got {p}")


def _check_shape(xi: float) -> None:
    if not (0.0 <= xi < 1.0) or math.isnan(xi):
        raise InvalidParameterError(f"xi must lie in [0, 1), got {xi}")


def sample_gumbel_zero_mean(rng: np.random.Generator, size=None):
    """
    Draw zero-mean Gumbel noise, -ln(-ln U) - gamma.

    Args:
        rng: Random generator owned by the caller
        size: Output shape; a float is returned when None

    Returns:
        Noise draw(s) with mean 0 and variance pi^2/6
    """
    return rng.gumbel(loc=-EULER_GAMMA, scale=1.0, size=size)


def two_point_sample(p: float, rng: np.random.Generator, size=None):
    """
    Draw niche base utilities from the two-point prior.

    Args:
        p: Probability of the high value (1 - p)/p
        rng: Random generator owned by the caller
        size: Output shape; a float is returned when None

    Returns:
        (1 - p)/p with probability p, else -1
    """
    _check_prior(p)
    high = (1.0 - p) / p
    if size is None:
        return high if rng.random() < p else -1.0
    return np.where(rng.random(size) < p, high, -1.0)


def gpd_cdf(xi: float, x):
    """
    CDF of the zero-mean generalized Pareto family F_N^xi.

    Args:
        xi: Shape in [0, 1)
        x: Point(s) at or above the lower support endpoint -1

    Returns:
        1 - (1 + xi/(1 - xi) * (x + 1))^(-1/xi), or 1 - exp(-(x + 1)) at xi = 0
    """
    _check_shape(xi)
    values = np.asarray(x, dtype=float)
    if np.any(values < -1.0):
        raise DomainError(f"GPD support starts at -1, got {x}")
    result = stats.genpareto.cdf(values, c=xi, loc=-1.0, scale=1.0 - xi)
    return float(result) if result.ndim == 0 else result


def gpd_sample(xi: float, rng: np.random.Generator, size=None):
    """
    Draw niche base utilities from F_N^xi by inverse transform.

    Uses 1 - U so the U = 0 draw of the generator stays finite.

    Args:
        xi: Shape in [0, 1)
        rng: Random generator owned by the caller
        size: Output shape; a float is returned when None

    Returns:
        Sample(s) on [-1, inf)
    """
    _check_shape(xi)
    log_survival = np.log1p(-rng.random(size))
    if xi == 0.0:
        draws = -1.0 - log_survival
    else:
        draws = -1.0 + (1.0 - xi) / xi * np.expm1(-xi * log_survival)
    return float(draws) if size is None else draws


class TwoPointSpec(BaseModel):
    """Two-point niche prior of the analytic section."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["two_point"] = "two_point"
    p: float = Field(gt=0.0, lt=1.0)

    @property
    def high_value(self) -> float:
        return (1.0 - self.p) / self.p

    def sample(self, rng: np.random.Generator, size=None):
        return two_point_sample(self.p, rng, size)

    def cdf(self, x: float) -> float:
        if x < -1.0:
            return 0.0
        return 1.0 - self.p if x < self.high_value else 1.0

    def mean(self) -> float:
        return 0.0

    def label(self) -> str:
        return f"two-point:{self.p!r}"


class GpdSpec(BaseModel):
    """Generalized Pareto niche prior with location -1 and scale 1 - xi."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["gpd"] = "gpd"
    xi: float = Field(ge=0.0, lt=1.0)

    def sample(self, rng: np.random.Generator, size=None):
        return gpd_sample(self.xi, rng, size)

    def cdf(self, x):
        return gpd_cdf(self.xi, x)

    def mean(self) -> float:
        # mu + sigma / (1 - xi)
        return -1.0 + (1.0 - self.xi) / (1.0 - self.xi)

    def label(self) -> str:
        return f"gpd:{self.xi!r}"


NicheDistributionSpec = Annotated[Union[TwoPointSpec, GpdSpec], Field(discriminator="kind")]


def parse_niche_spec(text: str, default_kind: Optional[str] = None) -> Union[TwoPointSpec, GpdSpec]:
    """
    Parse a niche distribution from its command-line form.

    Args:
        text: "two-point:<p>" or "gpd:<xi>"; a bare number uses default_kind
        default_kind: Family used when text carries no prefix

    Returns:
        Validated niche distribution spec
    """
    kind, sep, value = text.strip().partition(":")
    if not sep:
        if default_kind is None:
            raise InvalidParameterError(f"Niche spec needs a family prefix: {text!r}")
        kind, value = default_kind, text
    kind = kind.lower().replace("_", "-")
    try:
        number = float(value)
    except ValueError as e:
        raise InvalidParameterError(f"Invalid niche parameter in {text!r}") from e
    if kind == "two-point":
        _check_prior(number)
        return TwoPointSpec(p=number)
    if kind == "gpd":
        _check_shape(number)
        return GpdSpec(xi=number)
    raise InvalidParameterError(f"Unknown niche family: {kind!r}")
