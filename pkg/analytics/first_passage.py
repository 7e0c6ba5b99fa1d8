"""
Exact first-passage law of the exploration walk and the discount weight g.

The walk moves +up with probability rho and -down otherwise and stops the first
time it goes below zero. Positions are tracked by the integer failure count F
after n steps (S = n - F), so the stopping rule is the exact comparison of
WalkBoundary. For fixed n the surviving failure counts form a prefix 0..f, so
the dynamic program keeps one vector and trims the absorbed suffix each step.
"""

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Tuple

import numpy as np

from analytics.pear_constants import Constants, WalkBoundary
from config.settings import get_config
from utils.constants import PMF_CAPTURE_MASS
from utils.errors import InvalidParameterError, TruncationError
from utils.logging_utils import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class FirstPassagePmf:
    """P(N = k) for k = 1..k_max, plus the mass of N > k_max."""

    probabilities: np.ndarray
    tail_mass: float
    rho: float
    boundary: WalkBoundary
    truncated: bool

    @property
    def k_max(self) -> int:
        return len(self.probabilities)

    def probability(self, k: int) -> float:
        if k < 1 or k > self.k_max:
            return 0.0
        return float(self.probabilities[k - 1])

    def total_mass(self) -> float:
        return float(np.sum(self.probabilities)) + self.tail_mass


@dataclass(frozen=True)
class GValue:
    """E[1 - delta^N] with a certified absolute error."""

    value: float
    error: float
    steps: int


def _resolve_boundary(x: Optional[float], boundary: Optional[WalkBoundary]) -> WalkBoundary:
    if boundary is not None:
        return boundary
    if x is None:
        raise InvalidParameterError("Either a step parameter x or a walk boundary is required")
    return WalkBoundary.from_step(x)


def _check_rho(rho: float) -> None:
    if not 0.0 <= rho <= 1.0:
        raise InvalidParameterError(f"rho must lie in [0, 1], got {rho}")


def _complement(rho: float, one_minus_rho: Optional[float]) -> float:
    if one_minus_rho is None:
        return 1.0 - rho
    if not 0.0 <= one_minus_rho <= 1.0:
        raise InvalidParameterError(f"one_minus_rho must lie in [0, 1], got {one_minus_rho}")
    return one_minus_rho


def _first_passage_steps(
    rho: float,
    one_minus_rho: float,
    boundary: WalkBoundary
) -> Iterator[Tuple[int, float, float]]:
    """
    Run the walk distribution forward one step at a time.

    one_minus_rho is the down-step probability; it stays nonzero when rho
    rounds to one.

    Yields:
        (n, P(N = n), P(N > n))
    """
    surviving = np.array([1.0])  # index = failures so far
    n = 0
    while True:
        n += 1
        stepped = np.zeros(len(surviving) + 1)
        stepped[:-1] += surviving * rho
        stepped[1:] += surviving * one_minus_rho

        failures = np.arange(len(stepped))
        negative = boundary.negative_mask(n - failures, failures)
        absorbed = float(np.sum(stepped[negative]))
        surviving = np.trim_zeros(stepped[~negative], "b")
        yield n, absorbed, float(np.sum(surviving))


def walk_first_passage(
    steps_up: Iterable[bool],
    x: Optional[float] = None,
    boundary: Optional[WalkBoundary] = None
) -> Optional[int]:
    """
    First-passage time of one realized walk.

    Args:
        steps_up: Step directions, True for an up step
        x: Step parameter in (0, 1)
        boundary: Explicit stopping rule, overrides x

    Returns:
        First n with the walk below zero, or None if it never goes below
    """
    walk = _resolve_boundary(x, boundary)
    successes = failures = 0
    for n, up in enumerate(steps_up, start=1):
        if up:
            successes += 1
        else:
            failures += 1
        if walk.is_negative(successes, failures):
            return n
    return None


def first_passage_pmf(
    rho: float,
    x: Optional[float] = None,
    *,
    k_max: int,
    boundary: Optional[WalkBoundary] = None,
    one_minus_rho: Optional[float] = None
) -> FirstPassagePmf:
    """
    Exact distribution of the first time the walk goes below zero.

    Args:
        rho: Probability of an up step
        x: Step parameter in (0, 1); steps are +(1 - x) and -x
        k_max: Number of leading probabilities to compute
        boundary: Explicit stopping rule, overrides x
        one_minus_rho: Down-step probability when known more precisely than 1 - rho

    Returns:
        FirstPassagePmf whose probabilities and tail sum to one
    """
    _check_rho(rho)
    if k_max < 1:
        raise InvalidParameterError(f"k_max must be at least 1, got {k_max}")
    walk = _resolve_boundary(x, boundary)
    down = _complement(rho, one_minus_rho)

    probabilities = np.zeros(k_max)
    tail = 1.0
    for n, absorbed, tail in _first_passage_steps(rho, down, walk):
        probabilities[n - 1] = absorbed
        if n == k_max:
            break

    truncated = tail > PMF_CAPTURE_MASS
    if truncated:
        logger.warning(f"First-passage law truncated at k_max={k_max} with tail mass {tail:.3e}")
    return FirstPassagePmf(probabilities=probabilities, tail_mass=tail, rho=rho, boundary=walk, truncated=truncated)


def g_value(
    delta: float,
    rho: float,
    x: Optional[float] = None,
    tol: float = 1e-10,
    boundary: Optional[WalkBoundary] = None,
    one_minus_rho: Optional[float] = None
) -> GValue:
    """
    Evaluate g(delta, rho, x) = E[1 - delta^N] from the exact first-passage law.

    The series stops once delta^(K+1) times the surviving mass is below tol;
    the unknown remainder lies in [0, delta^(K+1) * tail] and is split evenly.

    Args:
        delta: Discount factor in [0, 1)
        rho: Probability of an up step
        x: Step parameter in (0, 1)
        tol: Target absolute error
        boundary: Explicit stopping rule, overrides x
        one_minus_rho: Down-step probability when known more precisely than 1 - rho

    Returns:
        GValue with value and certified error
    """
    if not 0.0 <= delta < 1.0:
        raise InvalidParameterError(f"delta must lie in [0, 1), got {delta}")
    if tol <= 0.0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    _check_rho(rho)
    walk = _resolve_boundary(x, boundary)
    down = _complement(rho, one_minus_rho)
    step_cap = get_config("analytics")["first_passage_step_cap"]

    # N >= 1, so delta^N vanishes
    if delta == 0.0:
        return GValue(value=1.0, error=0.0, steps=0)

    discounted = 0.0
    discount = 1.0
    for n, absorbed, tail in _first_passage_steps(rho, down, walk):
        discount *= delta
        discounted += discount * absorbed
        remainder_bound = discount * delta * tail
        if remainder_bound < tol:
            logger.debug(f"g_value converged after {n} steps (rho={rho:.6g}, delta={delta})")
            return GValue(value=1.0 - discounted - remainder_bound / 2.0, error=remainder_bound / 2.0, steps=n)
        if n >= step_cap:
            raise TruncationError(
                f"g_value did not reach tol={tol} within {step_cap} steps "
                f"(remainder bound {remainder_bound:.3e})"
            )


def g_sandwich(delta: float, constants: Constants) -> Tuple[float, float]:
    """
    Two-sided bound on g(delta, rho2, c) from the first-failure law up to M0.

    Returns:
        (lower, upper)
    """
    if not 0.0 <= delta < 1.0:
        raise InvalidParameterError(f"delta must lie in [0, 1), got {delta}")
    rho2 = constants.rho2
    odds = (1.0 - rho2) / rho2  # e(1 + e^VP)
    exponent = constants.m0 + 1.0
    upper = ((1.0 - delta) + odds * (delta * rho2) ** exponent) / (1.0 - delta * rho2)
    return upper - delta ** exponent, upper


def g_rho1_lower_bound(delta: float, constants: Constants) -> float:
    """Lower bound on g(delta, rho1, c): 1 - delta(1-rho1)(1-(delta rho1)^M0)/(1-delta rho1) - delta^(M0+1)."""
    if not 0.0 <= delta < 1.0:
        raise InvalidParameterError(f"delta must lie in [0, 1), got {delta}")
    rho1 = constants.rho1
    m0 = constants.m0
    early = delta * constants.one_minus_rho1 * (1.0 - (delta * rho1) ** m0) / (1.0 - delta * rho1)
    return 1.0 - early - delta ** (m0 + 1.0)
