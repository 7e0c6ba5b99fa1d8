"""
Closed-form engagement and utility of APP, PEAR and the oracle.

Per-period quantities (engagement probability and expected maximum utility of
a recommendation for a given user class) come straight from the logit model;
discounted totals are per-period values divided by (1 - delta). Limits and
ratios are formed from per-period values so delta near one loses no precision.
"""

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

import numpy as np
from scipy.special import expit, logsumexp

from analytics.first_passage import g_value
from analytics.pear_constants import build_constants
from utils.errors import InvalidParameterError


@dataclass(frozen=True)
class ClosedFormMetrics:
    eng: float
    util: float
    per_period_eng: float
    per_period_util: float

    @classmethod
    def from_per_period(cls, per_period_eng: float, per_period_util: float, delta: float) -> "ClosedFormMetrics":
        scale = 1.0 / (1.0 - delta)
        return cls(
            eng=per_period_eng * scale,
            util=per_period_util * scale,
            per_period_eng=per_period_eng,
            per_period_util=per_period_util,
        )


@dataclass(frozen=True)
class MisalignmentRow:
    delta: float
    d_eng_pct: float
    d_util_pct: float
    eng_ratio: float
    util_ratio: float


@dataclass(frozen=True)
class MisalignmentReport:
    """PEAR-limit against APP per discount factor, plus the delta -> 1 limits."""

    v_pop: float
    rows: List[MisalignmentRow] = field(default_factory=list)
    limit_eng_ratio: float = 1.0
    limit_util_ratio: float = 1.0
    # Lower bound on the limiting relative utility gain, valid for v_pop >= 1/3
    gain_lower_bound: float = 0.0
    gain_lower_bound_applies: bool = False


def _check_delta(delta: float) -> None:
    if not 0.0 <= delta < 1.0 or math.isnan(delta):
        raise InvalidParameterError(f"delta must lie in [0, 1), got {delta}")


def _check_prior(p: float) -> None:
    if not 0.0 < p < 1.0 or math.isnan(p):
        raise InvalidParameterError(f"p must lie in (0, 1), got {p}")


def _diverse_engagement(v_pop: float, v_niche: float) -> float:
    # (e^VP + e^VN) / (1 + e^VP + e^VN) = expit(lse(VP, VN))
    return float(expit(np.logaddexp(v_pop, v_niche)))


def _diverse_utility(v_pop: float, v_niche: float) -> float:
    return float(logsumexp([0.0, v_pop, v_niche]))


def _homogeneous_engagement(v: float) -> float:
    return float(expit(math.log(2.0) + v))


def _homogeneous_utility(v: float) -> float:
    return float(np.logaddexp(0.0, math.log(2.0) + v))


def closed_forms_app(v_pop: float, delta: float) -> ClosedFormMetrics:
    """
    Engagement and utility of always recommending two popular items.

    Args:
        v_pop: Popular base utility
        delta: Discount factor in [0, 1)

    Returns:
        Discounted and per-period metrics
    """
    _check_delta(delta)
    return ClosedFormMetrics.from_per_period(_homogeneous_engagement(v_pop), _homogeneous_utility(v_pop), delta)


def closed_forms_pear_limit(v_pop: float, delta: float) -> ClosedFormMetrics:
    """
    PEAR metrics in the p -> 0 limit.

    Low-type users explore until the first non-niche choice, so the exploration
    weight is (1 - delta)/(1 - delta*rho); high-type users explore forever and
    contribute exactly one extra unit of per-period utility.

    Args:
        v_pop: Popular base utility
        delta: Discount factor in [0, 1)

    Returns:
        Discounted and per-period metrics
    """
    _check_delta(delta)
    rho = 1.0 / (1.0 + math.e + math.exp(v_pop + 1.0))
    denominator = 1.0 - delta * rho
    explore_weight = (1.0 - delta) / denominator
    popular_weight = delta * (1.0 - rho) / denominator

    per_period_eng = (
        explore_weight * _diverse_engagement(v_pop, -1.0)
        + popular_weight * _homogeneous_engagement(v_pop)
    )
    per_period_util = 1.0 + (
        explore_weight * _diverse_utility(v_pop, -1.0)
        + popular_weight * _homogeneous_utility(v_pop)
    )
    return ClosedFormMetrics.from_per_period(per_period_eng, per_period_util, delta)


def closed_forms_pear(p: float, v_pop: float, delta: float, tol: float = 1e-12) -> ClosedFormMetrics:
    """
    PEAR metrics at a finite prior from the exact first-passage law.

    Each user class explores with weight g(delta, rho_i, c) and sits on two
    popular items for the remaining 1 - g.

    Args:
        p: Prior probability of the high niche type
        v_pop: Popular base utility
        delta: Discount factor in [0, 1)
        tol: Absolute tolerance of each g evaluation

    Returns:
        Discounted and per-period metrics
    """
    _check_prior(p)
    _check_delta(delta)
    constants = build_constants(p, v_pop)
    boundary = constants.boundary
    high = (1.0 - p) / p

    g_high = g_value(delta, constants.rho1, tol=tol, boundary=boundary, one_minus_rho=constants.one_minus_rho1).value
    g_low = g_value(delta, constants.rho2, tol=tol, boundary=boundary, one_minus_rho=constants.one_minus_rho2).value

    popular_eng = _homogeneous_engagement(v_pop)
    popular_util = _homogeneous_utility(v_pop)
    per_period_eng = (
        p * (_diverse_engagement(v_pop, high) * g_high + popular_eng * (1.0 - g_high))
        + (1.0 - p) * (_diverse_engagement(v_pop, -1.0) * g_low + popular_eng * (1.0 - g_low))
    )
    per_period_util = (
        p * (_diverse_utility(v_pop, high) * g_high + popular_util * (1.0 - g_high))
        + (1.0 - p) * (_diverse_utility(v_pop, -1.0) * g_low + popular_util * (1.0 - g_low))
    )
    return ClosedFormMetrics.from_per_period(per_period_eng, per_period_util, delta)


def closed_forms_oracle(p: Optional[float], v_pop: float, delta: float) -> ClosedFormMetrics:
    """
    Metrics of the clairvoyant policy under the two-point niche prior.

    Each user class gets two items of its preferred type (popular on ties).

    Args:
        p: Prior probability of the high niche type; None for the p -> 0 limit
        v_pop: Popular base utility
        delta: Discount factor in [0, 1)

    Returns:
        Discounted and per-period metrics
    """
    _check_delta(delta)
    low_best = max(-1.0, v_pop)
    if p is None:
        # p * ln(1 + 2e^{(1-p)/p}) -> 1 while the high class's engagement weight vanishes
        return ClosedFormMetrics.from_per_period(
            _homogeneous_engagement(low_best), 1.0 + _homogeneous_utility(low_best), delta
        )

    _check_prior(p)
    high_best = max((1.0 - p) / p, v_pop)
    per_period_eng = p * _homogeneous_engagement(high_best) + (1.0 - p) * _homogeneous_engagement(low_best)
    per_period_util = p * _homogeneous_utility(high_best) + (1.0 - p) * _homogeneous_utility(low_best)
    return ClosedFormMetrics.from_per_period(per_period_eng, per_period_util, delta)


def util_oracle(p: Optional[float], v_pop: float, delta: float) -> float:
    """Discounted oracle utility; p=None gives the p -> 0 limit (1 + ln(1 + 2e^VP))/(1 - delta)."""
    return closed_forms_oracle(p, v_pop, delta).util


def misalignment_report(v_pop: float, deltas: Iterable[float]) -> MisalignmentReport:
    """
    Relative engagement loss and utility gain of PEAR (p -> 0) over APP.

    Args:
        v_pop: Popular base utility
        deltas: Discount factors in [0, 1)

    Returns:
        One row per delta and the delta -> 1 limits
    """
    rows = []
    for delta in deltas:
        app = closed_forms_app(v_pop, delta)
        pear = closed_forms_pear_limit(v_pop, delta)
        eng_ratio = pear.per_period_eng / app.per_period_eng
        util_ratio = pear.per_period_util / app.per_period_util
        rows.append(MisalignmentRow(
            delta=delta,
            d_eng_pct=100.0 * (eng_ratio - 1.0),
            d_util_pct=100.0 * (util_ratio - 1.0),
            eng_ratio=eng_ratio,
            util_ratio=util_ratio,
        ))

    popular_util = _homogeneous_utility(v_pop)
    return MisalignmentReport(
        v_pop=v_pop,
        rows=rows,
        limit_eng_ratio=1.0,
        limit_util_ratio=1.0 + 1.0 / popular_util,
        gain_lower_bound=1.0 / (v_pop + 1.0) if v_pop > -1.0 else 0.0,
        gain_lower_bound_applies=v_pop >= 1.0 / 3.0,
    )


def eng_do_upper_bound(p: float, v_pop: float, delta: float) -> float:
    """
    Upper bound on the engagement of diverse-then-optimal (DO).

    DO shows one popular and one niche item in the first period and is
    engagement-optimal afterwards; the optimum is relaxed to the oracle that
    recommends two items of the preferred type.

    Args:
        p: Prior probability of the high niche type
        v_pop: Popular base utility
        delta: Discount factor in [0, 1)

    Returns:
        Discounted engagement bound
    """
    _check_prior(p)
    _check_delta(delta)
    high = (1.0 - p) / p
    first_period = (1.0 - p) * _diverse_engagement(v_pop, -1.0) + p * _diverse_engagement(v_pop, high)
    relaxed = p * _homogeneous_engagement(high) + (1.0 - p) * _homogeneous_engagement(v_pop)
    return first_period + delta / (1.0 - delta) * relaxed
