"""
Likelihood constants of the posterior test and the random walk they induce.

rho1 is the probability that a high-type user (V_N = (1 - p)/p) picks the niche
slot of a diverse recommendation, rho2 the same for a low-type user (V_N = -1).
For small p, rho1 sits within e^{-(1-p)/p} of one, so it is carried alongside
its logarithms and every derived quantity comes from the logs.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from utils.errors import InvalidParameterError


@dataclass(frozen=True)
class WalkBoundary:
    """
    Sign test of the walk position S*up - F*down without accumulating floats.

    The walk is below zero iff F*down > S*up.
    """

    up: float
    down: float

    def __post_init__(self):
        if not (self.up > 0.0 and self.down > 0.0):
            raise InvalidParameterError(f"Walk steps must be positive, got up={self.up}, down={self.down}")

    @classmethod
    def from_step(cls, x: float) -> "WalkBoundary":
        """Steps +(1 - x) on success and -x on failure."""
        if not 0.0 < x < 1.0:
            raise InvalidParameterError(f"Step parameter must lie in (0, 1), got {x}")
        return cls(up=1.0 - x, down=x)

    def is_negative(self, successes: int, failures: int) -> bool:
        return failures * self.down > successes * self.up

    def negative_mask(self, successes: np.ndarray, failures: np.ndarray) -> np.ndarray:
        return failures * self.down > successes * self.up


@dataclass(frozen=True)
class Constants:
    p: float
    v_pop: float
    rho1: float
    rho2: float
    log_rho1: float
    log1m_rho1: float
    log_rho2: float
    log1m_rho2: float

    @property
    def log_likelihood_success(self) -> float:
        """ln(rho1/rho2): log-odds drop per niche choice."""
        return self.log_rho1 - self.log_rho2

    @property
    def log_likelihood_failure(self) -> float:
        """ln((1 - rho2)/(1 - rho1)): log-odds rise per non-niche choice."""
        return self.log1m_rho2 - self.log1m_rho1

    @property
    def c(self) -> float:
        a, b = self.log_likelihood_success, self.log_likelihood_failure
        return b / (a + b)

    @property
    def m0(self) -> float:
        return self.log_likelihood_failure / self.log_likelihood_success

    @property
    def one_minus_rho1(self) -> float:
        return math.exp(self.log1m_rho1)

    @property
    def one_minus_rho2(self) -> float:
        return math.exp(self.log1m_rho2)

    @property
    def boundary(self) -> WalkBoundary:
        return WalkBoundary(up=self.log_likelihood_success, down=self.log_likelihood_failure)

    def matches(self, p: float, v_pop: Optional[float] = None) -> bool:
        return self.p == p and (v_pop is None or self.v_pop == v_pop)


def build_constants(p: float, v_pop: float) -> Constants:
    """
    Compute rho1, rho2 and their logs for prior p and popular utility v_pop.

    Args:
        p: Prior probability of the high niche type, in (0, 1)
        v_pop: Popular base utility

    Returns:
        Constants with c and M0 available as properties
    """
    if not (0.0 < p < 1.0) or math.isnan(p):
        raise InvalidParameterError(f"p must lie in (0, 1), got {p}")
    if not math.isfinite(v_pop):
        raise InvalidParameterError(f"v_pop must be finite, got {v_pop}")

    high = (1.0 - p) / p
    # rho1 = 1 / (1 + (1 + e^VP) e^{-high})
    log_ratio = float(np.logaddexp(0.0, v_pop)) - high
    log_norm = float(np.logaddexp(0.0, log_ratio))
    log_rho1 = -log_norm
    log1m_rho1 = log_ratio - log_norm

    # rho2 = e^-1 / (1 + e^VP + e^-1)
    log_total = float(logsumexp([0.0, v_pop, -1.0]))
    log_rho2 = -1.0 - log_total
    log1m_rho2 = float(np.logaddexp(0.0, v_pop)) - log_total

    return Constants(
        p=p,
        v_pop=v_pop,
        rho1=math.exp(log_rho1),
        rho2=math.exp(log_rho2),
        log_rho1=log_rho1,
        log1m_rho1=log1m_rho1,
        log_rho2=log_rho2,
        log1m_rho2=log1m_rho2,
    )
