"""
Experiment commands: the misalignment table, the engagement/utility frontier
points, the DICE-vs-APP ratios under the GPD niche family, and single-policy
simulations. Every runner returns an ExperimentResult whose table is written
as-is by tools.output_tools.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd
from tqdm import tqdm

from analytics.closed_forms import (
    closed_forms_app,
    closed_forms_oracle,
    closed_forms_pear,
    closed_forms_pear_limit,
    misalignment_report,
)
from models.distributions import GpdSpec, TwoPointSpec
from policies.registry import (
    AppPolicySpec,
    DicePolicySpec,
    OraclePolicySpec,
    PearPolicySpec,
    build_policy,
)
from simulation.engine import run_monte_carlo
from simulation.types import EstimateWithCI, ModelParams, MonteCarloResult, SimConfig, SimulationMode
from utils.logging_utils import get_logger, log_execution_time

logger = get_logger(__name__)

TABLE1_COLUMNS = ["delta", "d_eng_pct", "d_util_pct"]
FIGURE1_COLUMNS = ["policy", "eng", "util"]
FIGURE34_COLUMNS = ["delta", "xi", "explore_len", "eng_ratio", "util_ratio", "eng_ci", "util_ci", "warning"]
SIMULATE_COLUMNS = [
    "policy", "niche", "delta", "metric", "mean", "std_error", "ci95_low", "ci95_high",
    "per_period_mean", "closed_form_per_period", "episodes", "flagged_episodes",
]

DEFAULT_ENG_FLOOR = 0.985


@dataclass
class ExperimentResult:
    """Rows of one command plus the derived values its chart and logs need."""

    command: str
    table: pd.DataFrame
    notes: Dict[str, Any] = field(default_factory=dict)
    warnings: int = 0


@log_execution_time()
def run_table1(v_pop: float, deltas: Sequence[float]) -> ExperimentResult:
    """
    Engagement loss and utility gain of PEAR (p -> 0) relative to APP.

    Args:
        v_pop: Popular base utility
        deltas: Discount factors

    Returns:
        Rows (delta, d_eng_pct, d_util_pct) and the delta -> 1 limits in notes
    """
    report = misalignment_report(v_pop, deltas)
    table = pd.DataFrame(
        [[row.delta, row.d_eng_pct, row.d_util_pct] for row in report.rows],
        columns=TABLE1_COLUMNS,
    )
    notes = {
        "limit_eng_ratio": report.limit_eng_ratio,
        "limit_util_ratio": report.limit_util_ratio,
        "limit_d_util_pct": 100.0 * (report.limit_util_ratio - 1.0),
    }
    if report.gain_lower_bound_applies:
        notes["limit_gain_lower_bound"] = report.gain_lower_bound
    for row in report.rows:
        logger.info(f"delta={row.delta}: engagement {row.d_eng_pct:+.4f}%, utility {row.d_util_pct:+.4f}%")
    return ExperimentResult(command="table1", table=table, notes=notes)


def _frontier_annotations(app_util: float, pear_util: float, app_eng: float, pear_eng: float) -> Dict[str, str]:
    gain = 100.0 * (pear_util / app_util - 1.0)
    loss = 100.0 * (1.0 - pear_eng / app_eng)
    return {
        "util_annotation": f"{gain:.2f}% gain in utility",
        "eng_annotation": f"{loss:.2f}% loss in engagement",
    }


@log_execution_time()
def run_figure1(v_pop: float, delta: float) -> ExperimentResult:
    """
    Per-period (engagement, utility) of the engagement-optimal policy and PEAR.

    Args:
        v_pop: Popular base utility
        delta: Discount factor

    Returns:
        One row per policy, with the percent-gap labels in notes
    """
    app = closed_forms_app(v_pop, delta)
    pear = closed_forms_pear_limit(v_pop, delta)
    table = pd.DataFrame(
        [
            ["app", app.per_period_eng, app.per_period_util],
            ["pear", pear.per_period_eng, pear.per_period_util],
        ],
        columns=FIGURE1_COLUMNS,
    )
    notes = _frontier_annotations(app.per_period_util, pear.per_period_util, app.per_period_eng, pear.per_period_eng)
    logger.info(f"delta={delta}: {notes['util_annotation']}, {notes['eng_annotation']}")
    return ExperimentResult(command="figure1", table=table, notes=notes)


def _ratio_half_width(numerator: EstimateWithCI, denominator: EstimateWithCI) -> float:
    """95% half-width of numerator/denominator by the delta method, covariance ignored."""
    scale = abs(denominator.mean)
    return math.hypot(
        numerator.half_width / scale,
        abs(numerator.mean) * denominator.half_width / scale ** 2,
    )


def _sim_config(policy, episodes: int, master_seed: int, mode: SimulationMode, n_jobs: int) -> SimConfig:
    return SimConfig(episodes=episodes, master_seed=master_seed, mode=mode, policy=policy, n_jobs=n_jobs)


@log_execution_time()
def run_figure34(
    v_pop: float,
    delta: float,
    xis: Sequence[float],
    explore_len: int,
    episodes: int,
    master_seed: int,
    mode: SimulationMode = SimulationMode.CONDITIONAL,
    n_jobs: int = 1,
    ci_threshold: float = 0.02,
    app_result: Optional[MonteCarloResult] = None,
    quiet: bool = True
) -> ExperimentResult:
    """
    DICE-to-APP engagement and utility ratios under the GPD niche family.

    APP never shows a niche item, so its estimate does not depend on xi and
    is simulated once per call (or passed in by the caller).

    Args:
        v_pop: Popular base utility
        delta: Discount factor
        xis: GPD shape parameters
        explore_len: DICE exploration length
        episodes: Episodes per cell
        master_seed: Master seed of every cell
        mode: Payoff booking mode
        n_jobs: Worker processes for the Monte Carlo
        ci_threshold: Ratio half-width above which a row is marked
        app_result: Precomputed APP estimate for this delta
        quiet: Disable the progress bar

    Returns:
        One row per xi
    """
    if app_result is None:
        params = ModelParams(v_pop=v_pop, delta=delta, niche=GpdSpec(xi=xis[0]))
        app_result = run_monte_carlo(params, _sim_config(AppPolicySpec(), episodes, master_seed, mode, n_jobs))

    rows = []
    warnings = 0
    for xi in tqdm(xis, desc=f"DICE delta={delta} T={explore_len}", disable=quiet):
        params = ModelParams(v_pop=v_pop, delta=delta, niche=GpdSpec(xi=xi))
        config = _sim_config(DicePolicySpec(explore_len=explore_len), episodes, master_seed, mode, n_jobs)
        dice = run_monte_carlo(params, config)

        eng_ratio = dice.engagement.mean / app_result.engagement.mean
        util_ratio = dice.utility.mean / app_result.utility.mean
        eng_ci = _ratio_half_width(dice.engagement, app_result.engagement)
        util_ci = _ratio_half_width(dice.utility, app_result.utility)

        marks = []
        if max(eng_ci, util_ci) > ci_threshold:
            marks.append("ci_wide")
        if dice.flagged_episodes or app_result.flagged_episodes:
            marks.append("horizon_cap")
        if marks:
            warnings += 1
            logger.warning(f"delta={delta}, xi={xi}, T={explore_len}: {', '.join(marks)}")
        rows.append([delta, xi, explore_len, eng_ratio, util_ratio, eng_ci, util_ci, ";".join(marks)])

    table = pd.DataFrame(rows, columns=FIGURE34_COLUMNS)
    return ExperimentResult(command="figure34", table=table, warnings=warnings)


def best_explore_lens(table: pd.DataFrame, eng_floor: float = DEFAULT_ENG_FLOOR) -> Dict[float, Optional[int]]:
    """
    Exploration length with the largest utility ratio per delta, among rows
    whose engagement ratio is at least eng_floor.
    """
    best = {}
    for delta, group in table.groupby("delta", sort=True):
        eligible = group[group["eng_ratio"] >= eng_floor]
        if eligible.empty:
            best[float(delta)] = None
            continue
        best[float(delta)] = int(eligible.loc[eligible["util_ratio"].idxmax(), "explore_len"])
    return best


@log_execution_time()
def sweep_explore_lens(
    v_pop: float,
    deltas: Sequence[float],
    xis: Sequence[float],
    explore_lens: Sequence[int],
    episodes: int,
    master_seed: int,
    mode: SimulationMode = SimulationMode.CONDITIONAL,
    n_jobs: int = 1,
    ci_threshold: float = 0.02,
    eng_floor: float = DEFAULT_ENG_FLOOR,
    quiet: bool = True
) -> ExperimentResult:
    """
    Run the DICE-vs-APP grid for every exploration length and discount factor.

    Args:
        v_pop: Popular base utility
        deltas: Discount factors
        xis: GPD shape parameters
        explore_lens: DICE exploration lengths to sweep
        episodes: Episodes per cell
        master_seed: Master seed of every cell
        mode: Payoff booking mode
        n_jobs: Worker processes for the Monte Carlo
        ci_threshold: Ratio half-width above which a row is marked
        eng_floor: Minimum engagement ratio for the best-length pick
        quiet: Disable progress bars

    Returns:
        Concatenated rows and the best exploration length per delta in notes
    """
    tables = []
    warnings = 0
    for delta in deltas:
        params = ModelParams(v_pop=v_pop, delta=delta, niche=GpdSpec(xi=xis[0]))
        app_result = run_monte_carlo(params, _sim_config(AppPolicySpec(), episodes, master_seed, mode, n_jobs))
        for explore_len in tqdm(explore_lens, desc=f"Sweep delta={delta}", disable=quiet or len(explore_lens) == 1):
            result = run_figure34(
                v_pop, delta, xis, explore_len, episodes, master_seed,
                mode=mode, n_jobs=n_jobs, ci_threshold=ci_threshold, app_result=app_result, quiet=quiet,
            )
            tables.append(result.table)
            warnings += result.warnings

    table = pd.concat(tables, ignore_index=True)
    best = best_explore_lens(table, eng_floor)
    for delta, explore_len in best.items():
        logger.info(f"delta={delta}: best exploration length {explore_len} (engagement floor {eng_floor})")
    notes = {"best_explore_len": {str(delta): explore_len for delta, explore_len in best.items()}, "eng_floor": eng_floor}
    return ExperimentResult(command="figure34", table=table, notes=notes, warnings=warnings)


def closed_form_reference(
    policy: Union[AppPolicySpec, PearPolicySpec, DicePolicySpec, OraclePolicySpec],
    v_pop: float,
    delta: float,
    niche: Union[TwoPointSpec, GpdSpec]
) -> Optional[Dict[str, float]]:
    """Per-period closed-form engagement and utility when one exists for the cell."""
    if isinstance(policy, AppPolicySpec):
        metrics = closed_forms_app(v_pop, delta)
    elif isinstance(policy, OraclePolicySpec) and isinstance(niche, TwoPointSpec):
        metrics = closed_forms_oracle(niche.p, v_pop, delta)
    elif isinstance(policy, PearPolicySpec) and isinstance(niche, TwoPointSpec) and policy.p in (None, niche.p):
        metrics = closed_forms_pear(niche.p, v_pop, delta)
    else:
        return None
    return {"engagement": metrics.per_period_eng, "utility": metrics.per_period_util}


@log_execution_time()
def run_simulate(
    v_pop: float,
    delta: float,
    niche: Union[TwoPointSpec, GpdSpec],
    policy: Union[AppPolicySpec, PearPolicySpec, DicePolicySpec, OraclePolicySpec],
    episodes: int,
    master_seed: int,
    mode: SimulationMode = SimulationMode.CONDITIONAL,
    n_jobs: int = 1,
    ci_threshold: float = 0.02
) -> ExperimentResult:
    """
    Monte Carlo estimate of one policy under one niche model.

    Args:
        v_pop: Popular base utility
        delta: Discount factor
        niche: Niche distribution
        policy: Policy spec
        episodes: Number of simulated users
        master_seed: Master seed
        mode: Payoff booking mode
        n_jobs: Worker processes
        ci_threshold: Per-period half-width above which the run is marked

    Returns:
        One row per metric, with the closed-form per-period value where available
    """
    params = ModelParams(v_pop=v_pop, delta=delta, niche=niche)
    built = build_policy(policy, v_pop, niche)
    config = _sim_config(policy, episodes, master_seed, mode, n_jobs)
    result = run_monte_carlo(params, config, policy=built)
    per_period = result.per_period(delta)
    reference = closed_form_reference(policy, v_pop, delta, niche)

    rows: List[List[Any]] = []
    for metric, estimate, scaled in (
        ("engagement", result.engagement, per_period.engagement),
        ("utility", result.utility, per_period.utility),
    ):
        rows.append([
            policy.label(), niche.label(), delta, metric,
            estimate.mean, estimate.std_error, estimate.ci95_low, estimate.ci95_high,
            scaled.mean, reference[metric] if reference else float("nan"),
            episodes, result.flagged_episodes,
        ])

    warnings = 0
    widest = max(per_period.engagement.half_width, per_period.utility.half_width)
    if widest > ci_threshold:
        warnings += 1
        logger.warning(f"Per-period 95% half-width {widest:.4g} exceeds {ci_threshold}")
    if result.flagged_episodes:
        warnings += 1

    table = pd.DataFrame(rows, columns=SIMULATE_COLUMNS)
    return ExperimentResult(command="simulate", table=table, warnings=warnings)
