"""
Discounted Monte Carlo over users.

An episode draws the user's niche utility once, then runs the policy period by
period with fresh Gumbel noise for both slots and the outside option. Once the
policy is absorbed into a stationary recommendation the rest of the infinite
sum is added in closed form; otherwise the episode stops at the horizon where
the remaining discounted mass drops below the truncation epsilon.
"""

import math
from typing import Dict, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from models.choice import (
    ALL_NICHE,
    ALL_POPULAR,
    RecommendationSet,
    UserProfile,
    engagement_probability,
    expected_max_utility,
    sample_choice,
)
from models.distributions import sample_gumbel_zero_mean
from policies.registry import Policy, build_policy
from simulation.types import (
    DiscountedMetrics,
    EstimateWithCI,
    ModelParams,
    MonteCarloResult,
    SimConfig,
    SimulationMode,
)
from utils.errors import InvalidParameterError
from utils.logging_utils import get_logger, log_execution_time
from utils.rng import episode_rng

logger = get_logger(__name__)

NOISE_BLOCK = 64


def truncation_horizon(delta: float, epsilon: float, bound_per_period: float) -> int:
    """
    Smallest T >= 1 with delta^T * bound_per_period / (1 - delta) < epsilon.

    Args:
        delta: Discount factor in [0, 1)
        epsilon: Allowed truncation error
        bound_per_period: Upper bound on any single-period payoff

    Returns:
        Number of periods to simulate
    """
    if not 0.0 <= delta < 1.0:
        raise InvalidParameterError(f"delta must lie in [0, 1), got {delta}")
    if epsilon <= 0.0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    if delta == 0.0 or bound_per_period <= 0.0:
        return 1
    ratio = epsilon * (1.0 - delta) / bound_per_period
    if ratio >= 1.0:
        return 1
    return max(1, math.floor(math.log(ratio) / math.log(delta)) + 1)


def tail_completion(
    stationary_rec: RecommendationSet,
    profile: UserProfile,
    delta: float,
    from_t: int
) -> DiscountedMetrics:
    """
    Value of repeating one recommendation from period from_t onwards.

    Returns:
        delta^from_t / (1 - delta) times the per-period engagement and utility
    """
    if not 0.0 <= delta < 1.0:
        raise InvalidParameterError(f"delta must lie in [0, 1), got {delta}")
    weight = delta ** from_t / (1.0 - delta)
    return DiscountedMetrics(
        engagement=weight * engagement_probability(stationary_rec, profile),
        utility=weight * expected_max_utility(stationary_rec, profile),
        horizon=from_t,
    )


def _per_period_bound(profile: UserProfile) -> float:
    # Expected utility is largest on a homogeneous set of the better type; engagement is at most 1
    return max(1.0, expected_max_utility(ALL_NICHE, profile), expected_max_utility(ALL_POPULAR, profile))


def simulate_episode(
    params: ModelParams,
    policy: Policy,
    rng: np.random.Generator,
    mode: SimulationMode = SimulationMode.CONDITIONAL,
    truncation_epsilon: float = 1e-8,
    horizon_cap: int = 1_000_000
) -> DiscountedMetrics:
    """
    Simulate one user under one policy.

    Args:
        params: Model parameters
        policy: Policy built for params
        rng: Generator owned by this episode
        mode: Payoff booking mode
        truncation_epsilon: Allowed truncation error per episode
        horizon_cap: Hard limit on simulated periods

    Returns:
        Discounted engagement and utility; flagged if the cap cut the episode short
    """
    delta = params.delta
    profile = UserProfile(v_pop=params.v_pop, v_niche=float(params.niche.sample(rng)))

    horizon = truncation_horizon(delta, truncation_epsilon, _per_period_bound(profile))
    capped = horizon > horizon_cap
    horizon = min(horizon, horizon_cap)

    payoffs: Dict[RecommendationSet, Tuple[float, float]] = {}
    engagement = utility = 0.0
    discount = 1.0
    noise = None
    state = policy.initial_state(profile)
    last_outcome = None

    for t in range(horizon):
        state, rec = policy.step(state, last_outcome)
        if policy.is_absorbed(state):
            tail = tail_completion(rec, profile, delta, t)
            return DiscountedMetrics(
                engagement=engagement + tail.engagement,
                utility=utility + tail.utility,
                horizon=t,
                absorbed=True,
            )

        if t % NOISE_BLOCK == 0:
            noise = sample_gumbel_zero_mean(rng, size=(NOISE_BLOCK, 3))
        outcome = sample_choice(rec, profile, noise=noise[t % NOISE_BLOCK])

        if mode == SimulationMode.CONDITIONAL:
            if rec not in payoffs:
                payoffs[rec] = (engagement_probability(rec, profile), expected_max_utility(rec, profile))
            period_engagement, period_utility = payoffs[rec]
        else:
            period_engagement = 1.0 if outcome.engaged else 0.0
            period_utility = outcome.realized_max_utility

        engagement += discount * period_engagement
        utility += discount * period_utility
        discount *= delta
        last_outcome = outcome

    return DiscountedMetrics(engagement=engagement, utility=utility, horizon=horizon, absorbed=False, flagged=capped)


def _simulate_chunk(
    params: ModelParams,
    policy: Policy,
    config: SimConfig,
    start: int,
    stop: int
) -> Tuple[np.ndarray, np.ndarray, int]:
    engagement = np.empty(stop - start)
    utility = np.empty(stop - start)
    flagged = 0
    for offset, index in enumerate(range(start, stop)):
        metrics = simulate_episode(
            params,
            policy,
            episode_rng(config.master_seed, index),
            mode=config.mode,
            truncation_epsilon=config.truncation_epsilon,
            horizon_cap=config.horizon_cap,
        )
        engagement[offset] = metrics.engagement
        utility[offset] = metrics.utility
        flagged += metrics.flagged
    return engagement, utility, flagged


@log_execution_time()
def run_monte_carlo(params: ModelParams, config: SimConfig, policy: Optional[Policy] = None) -> MonteCarloResult:
    """
    Estimate discounted engagement and utility of a policy.

    Episodes are cut into fixed chunks that do not depend on the worker count,
    and every episode draws from its own (master_seed, index) stream, so the
    result is bit-identical for any n_jobs.

    Args:
        params: Model parameters
        config: Simulation settings, policy included
        policy: Prebuilt policy; built from config.policy when None

    Returns:
        Estimates with 95% intervals and the number of flagged episodes
    """
    if policy is None:
        policy = build_policy(config.policy, params.v_pop, params.niche)

    bounds = [
        (start, min(start + config.chunk_size, config.episodes))
        for start in range(0, config.episodes, config.chunk_size)
    ]
    logger.debug(
        f"Running {config.episodes} episodes of {policy.name} in {len(bounds)} chunks "
        f"(mode={config.mode.value}, n_jobs={config.n_jobs})"
    )

    chunks = Parallel(n_jobs=config.n_jobs)(
        delayed(_simulate_chunk)(params, policy, config, start, stop) for start, stop in bounds
    )

    engagement = np.concatenate([chunk[0] for chunk in chunks])
    utility = np.concatenate([chunk[1] for chunk in chunks])
    flagged = sum(chunk[2] for chunk in chunks)
    if flagged:
        logger.warning(f"{flagged} of {config.episodes} episodes hit the horizon cap of {config.horizon_cap} periods")

    return MonteCarloResult(
        engagement=EstimateWithCI.from_samples(engagement),
        utility=EstimateWithCI.from_samples(utility),
        flagged_episodes=flagged,
    )
