"""
Posterior-driven exploration: show one popular and one niche item while the
posterior probability of a high niche valuation is at least the prior, then two
popular items forever.

The posterior is held as log-odds ln((1 - p_t)/p_t). Niche choices are
successes; popular and outside choices are failures. The switch test is the
walk boundary of the constants, so the switch time is exactly the first-passage
time of the walk S*ln(rho1/rho2) - F*ln((1 - rho2)/(1 - rho1)).
"""

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

from scipy.special import expit

from analytics.pear_constants import Constants
from models.choice import ALL_POPULAR, DIVERSE, ChoiceOutcome, ItemType, RecommendationSet
from utils.errors import InvalidParameterError, InvalidStateError


@dataclass(frozen=True)
class PearState:
    successes: int
    failures: int
    switched: bool
    log_posterior_odds: float
    constants: Constants

    @classmethod
    def initial(cls, constants: Constants) -> "PearState":
        return cls(
            successes=0,
            failures=0,
            switched=False,
            log_posterior_odds=_prior_log_odds(constants.p),
            constants=constants,
        )

    @property
    def posterior(self) -> float:
        return float(expit(-self.log_posterior_odds))


def _prior_log_odds(p: float) -> float:
    return math.log1p(-p) - math.log(p)


def pear_log_odds(successes: int, failures: int, p: float, constants: Constants) -> float:
    """ln((1 - p)/p) - S*ln(rho1/rho2) + F*ln((1 - rho2)/(1 - rho1))."""
    if not 0.0 < p < 1.0 or math.isnan(p):
        raise InvalidParameterError(f"p must lie in (0, 1), got {p}")
    if successes < 0 or failures < 0:
        raise InvalidParameterError(f"Counts must be non-negative, got S={successes}, F={failures}")
    return (
        _prior_log_odds(p)
        - successes * constants.log_likelihood_success
        + failures * constants.log_likelihood_failure
    )


def pear_posterior(successes: int, failures: int, p: float, constants: Constants) -> float:
    """
    Posterior probability of the high niche type after S niche and F other choices.

    Args:
        successes: Niche choices S
        failures: Popular or outside choices F
        p: Prior probability of the high type
        constants: Likelihood constants built for p

    Returns:
        1 / (1 + e^L) for the posterior log-odds L
    """
    return float(expit(-pear_log_odds(successes, failures, p, constants)))


def pear_step(
    state: PearState,
    last_outcome: Optional[ChoiceOutcome],
    p: float
) -> Tuple[PearState, RecommendationSet]:
    """
    Advance PEAR by one period.

    Args:
        state: Current state
        last_outcome: Choice made on the previous recommendation, None at t = 0
        p: Prior the policy was configured with

    Returns:
        New state and the recommendation for this period
    """
    if not state.constants.matches(p):
        raise InvalidStateError(f"PEAR constants were built for p={state.constants.p}, used with p={p}")
    if state.switched:
        return state, ALL_POPULAR

    if last_outcome is not None:
        if last_outcome.chosen_type == ItemType.NICHE:
            successes, failures = state.successes + 1, state.failures
        else:
            successes, failures = state.successes, state.failures + 1
        state = replace(
            state,
            successes=successes,
            failures=failures,
            log_posterior_odds=pear_log_odds(successes, failures, p, state.constants),
        )

    if state.constants.boundary.is_negative(state.successes, state.failures):
        return replace(state, switched=True), ALL_POPULAR
    return state, DIVERSE
