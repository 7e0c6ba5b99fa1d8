import itertools
import math

import pytest

from analytics.pear_constants import WalkBoundary, build_constants
from models.choice import (
    ALL_NICHE,
    ALL_POPULAR,
    DIVERSE,
    ChoiceOutcome,
    ItemType,
    Slot,
    UserProfile,
)
from models.distributions import GpdSpec, TwoPointSpec
from policies.app import app_recommend
from policies.dice import DiceState, dice_step
from policies.oracle import OracleState, oracle_recommend
from policies.pear import PearState, pear_posterior, pear_step
from policies.registry import (
    AppPolicy,
    AppPolicySpec,
    DicePolicy,
    DicePolicySpec,
    OraclePolicy,
    OraclePolicySpec,
    PearPolicy,
    PearPolicySpec,
    build_policy,
    parse_policy_spec,
)
from utils.errors import InvalidParameterError, InvalidStateError
from utils.logging_utils import LogCapture

NICHE_PICK = ChoiceOutcome(chosen=Slot.SLOT2, realized_max_utility=1.0, chosen_type=ItemType.NICHE)
POPULAR_PICK = ChoiceOutcome(chosen=Slot.SLOT1, realized_max_utility=1.0, chosen_type=ItemType.POPULAR)
OUTSIDE_PICK = ChoiceOutcome(chosen=Slot.OUTSIDE, realized_max_utility=0.0, chosen_type=ItemType.OUTSIDE)


def run_dice(explore_len, outcomes):
    """Feed DICE one outcome per explored period and return the state and recommendations."""
    state = DiceState.initial(explore_len)
    state, rec = dice_step(state, None)
    recs = [rec]
    for outcome in outcomes:
        state, rec = dice_step(state, outcome)
        recs.append(rec)
    return state, recs


def test_app_always_popular():
    assert app_recommend() == ALL_POPULAR
    policy = AppPolicy()
    state = policy.initial_state(UserProfile(1.0, 9.0))
    for outcome in (None, NICHE_PICK, OUTSIDE_PICK):
        state, rec = policy.step(state, outcome)
        assert rec == ALL_POPULAR
    assert policy.is_absorbed(state)


def test_constants_at_p_01(constants_p01):
    assert constants_p01.rho1 == pytest.approx(0.9995413, abs=1e-7)
    assert constants_p01.rho2 == pytest.approx(0.0900306, abs=1e-6)
    assert constants_p01.log_likelihood_success == pytest.approx(2.40715, abs=1e-4)
    assert constants_p01.log_likelihood_failure == pytest.approx(7.59284, abs=1e-4)
    assert constants_p01.c == pytest.approx(0.75928, abs=1e-5)
    assert constants_p01.m0 == pytest.approx(3.154, abs=1e-3)
    assert constants_p01.boundary == WalkBoundary(
        up=constants_p01.log_likelihood_success, down=constants_p01.log_likelihood_failure
    )


@pytest.mark.parametrize("v_pop", [0.0, 1.0, 2.5, 10.0])
def test_rho2_identity(v_pop):
    constants = build_constants(0.05, v_pop)

    assert constants.rho2 == pytest.approx(1.0 / (1.0 + math.e + math.exp(v_pop + 1.0)), rel=1e-14)


def test_log_one_minus_rho1_small_prior():
    constants = build_constants(1e-4, 1.0)

    assert constants.rho1 == 1.0
    assert constants.log1m_rho1 == pytest.approx(-(1.0 - 1e-4) / 1e-4 + math.log1p(math.e), rel=1e-12)
    assert math.isfinite(constants.log_likelihood_failure)


@pytest.mark.parametrize("p, v_pop", [(0.0, 1.0), (1.0, 1.0), (0.1, math.inf)])
def test_constants_reject_invalid(p, v_pop):
    with pytest.raises(InvalidParameterError):
        build_constants(p, v_pop)


def test_posterior_examples(constants_p01):
    assert pear_posterior(0, 0, 0.1, constants_p01) == pytest.approx(0.1, rel=1e-14)
    assert pear_posterior(1, 0, 0.1, constants_p01) == pytest.approx(0.5523, abs=1e-4)
    assert pear_posterior(0, 1, 0.1, constants_p01) == pytest.approx(5.600e-5, rel=1e-3)
    assert pear_posterior(3, 1, 0.1, constants_p01) == pytest.approx(0.0712, abs=1e-3)
    assert pear_posterior(3, 1, 0.1, constants_p01) < 0.1


@pytest.mark.parametrize("p", [0.05, 0.1, 0.3])
def test_posterior_matches_bayes_rule(p):
    constants = build_constants(p, 1.0)
    rho1, rho2, one_minus_rho1 = constants.rho1, constants.rho2, constants.one_minus_rho1
    for successes, failures in itertools.product(range(6), repeat=2):
        ratio = (rho2 ** successes * (1.0 - rho2) ** failures) / (rho1 ** successes * one_minus_rho1 ** failures)
        expected = 1.0 / (1.0 + (1.0 - p) / p * ratio)

        assert pear_posterior(successes, failures, p, constants) == pytest.approx(expected, rel=1e-10)


def test_pear_starts_diverse(constants_p01):
    state = PearState.initial(constants_p01)
    state, rec = pear_step(state, None, 0.1)

    assert rec == DIVERSE
    assert not state.switched
    assert state.posterior == pytest.approx(0.1)


def test_pear_stays_diverse_after_niche_choice(constants_p01):
    state, _ = pear_step(PearState.initial(constants_p01), None, 0.1)
    state, rec = pear_step(state, NICHE_PICK, 0.1)

    assert rec == DIVERSE
    assert (state.successes, state.failures) == (1, 0)


@pytest.mark.parametrize("outcome", [POPULAR_PICK, OUTSIDE_PICK])
def test_pear_switches_after_first_failure(constants_p01, outcome):
    state, _ = pear_step(PearState.initial(constants_p01), None, 0.1)
    state, rec = pear_step(state, outcome, 0.1)

    assert rec == ALL_POPULAR
    assert state.switched
    assert state.failures == 1


def test_pear_switch_is_absorbing(constants_p01):
    state, _ = pear_step(PearState.initial(constants_p01), None, 0.1)
    state, _ = pear_step(state, POPULAR_PICK, 0.1)
    frozen = (state.successes, state.failures)
    for outcome in (NICHE_PICK, NICHE_PICK, POPULAR_PICK, OUTSIDE_PICK):
        state, rec = pear_step(state, outcome, 0.1)
        assert rec == ALL_POPULAR
        assert (state.successes, state.failures) == frozen


def test_pear_three_niche_then_failure_switches(constants_p01):
    state, _ = pear_step(PearState.initial(constants_p01), None, 0.1)
    for _ in range(3):
        state, rec = pear_step(state, NICHE_PICK, 0.1)
        assert rec == DIVERSE
    state, rec = pear_step(state, POPULAR_PICK, 0.1)

    # Posterior 0.0712 is below the prior
    assert rec == ALL_POPULAR
    assert state.posterior == pytest.approx(0.0712, abs=1e-3)


def test_pear_rejects_mismatched_constants(constants_p01):
    with pytest.raises(InvalidStateError):
        pear_step(PearState.initial(constants_p01), None, 0.2)


def test_dice_commits_to_niche():
    state, recs = run_dice(3, [NICHE_PICK, NICHE_PICK, NICHE_PICK])

    assert recs == [DIVERSE, DIVERSE, DIVERSE, ALL_NICHE]
    assert state.committed == ItemType.NICHE


def test_dice_ties_commit_to_popular():
    state, recs = run_dice(4, [POPULAR_PICK, POPULAR_PICK, NICHE_PICK, NICHE_PICK])

    assert recs[-1] == ALL_POPULAR
    assert (state.count_pop, state.count_niche) == (2, 2)


def test_dice_ignores_outside_choices():
    state, recs = run_dice(3, [OUTSIDE_PICK, OUTSIDE_PICK, NICHE_PICK])

    assert (state.count_pop, state.count_niche) == (0, 1)
    assert recs[-1] == ALL_NICHE


def test_dice_commitment_is_absorbing():
    state, _ = run_dice(2, [NICHE_PICK, NICHE_PICK])
    for outcome in (POPULAR_PICK, POPULAR_PICK, POPULAR_PICK):
        state, rec = dice_step(state, outcome)
        assert rec == ALL_NICHE
    assert (state.count_pop, state.count_niche) == (0, 2)


def test_dice_zero_exploration_commits_to_popular():
    state, rec = dice_step(DiceState.initial(0), None)

    assert rec == ALL_POPULAR
    assert state.committed == ItemType.POPULAR


def test_dice_rejects_negative_length():
    with pytest.raises(InvalidParameterError):
        DiceState.initial(-1)


def test_oracle_follows_preferred_type():
    assert oracle_recommend(OracleState.from_profile(UserProfile(1.0, 9.0))) == ALL_NICHE
    assert oracle_recommend(OracleState.from_profile(UserProfile(1.0, -1.0))) == ALL_POPULAR
    assert oracle_recommend(OracleState.from_profile(UserProfile(1.0, 1.0))) == ALL_POPULAR


@pytest.mark.parametrize("text, expected", [
    ("app", AppPolicySpec()),
    ("oracle", OraclePolicySpec()),
    ("pear", PearPolicySpec()),
    ("pear:0.1", PearPolicySpec(p=0.1)),
    ("dice:20", DicePolicySpec(explore_len=20)),
    (" DICE:5 ", DicePolicySpec(explore_len=5)),
])
def test_parse_policy_spec(text, expected):
    assert parse_policy_spec(text) == expected


@pytest.mark.parametrize("text", ["dice", "dice:-1", "dice:x", "pear:2", "pear:abc", "greedy"])
def test_parse_policy_spec_rejects(text):
    with pytest.raises(InvalidParameterError):
        parse_policy_spec(text)


def test_policy_labels():
    assert PearPolicySpec(p=0.1).label() == "pear:0.1"
    assert DicePolicySpec(explore_len=20).label() == "dice:20"


def test_build_policy_kinds():
    niche = TwoPointSpec(p=0.1)

    assert isinstance(build_policy(AppPolicySpec(), 1.0, niche), AppPolicy)
    assert isinstance(build_policy(OraclePolicySpec(), 1.0, niche), OraclePolicy)
    assert build_policy(DicePolicySpec(explore_len=7), 1.0, GpdSpec(xi=0.5)).explore_len == 7
    pear = build_policy(PearPolicySpec(), 1.0, niche)
    assert isinstance(pear, PearPolicy)
    assert pear.p == 0.1


def test_build_pear_needs_two_point_model():
    with pytest.raises(InvalidParameterError):
        build_policy(PearPolicySpec(), 1.0, GpdSpec(xi=0.5))


def test_build_pear_warns_on_prior_mismatch():
    with LogCapture("policies.registry") as capture:
        policy = build_policy(PearPolicySpec(p=0.2), 1.0, TwoPointSpec(p=0.1))

    assert policy.p == 0.2
    assert any("differs" in message for message in capture.get_messages())


def test_policy_absorption_flags():
    pear = PearPolicy(0.1, 1.0)
    state = pear.initial_state(UserProfile(1.0, 9.0))
    state, _ = pear.step(state, None)
    assert not pear.is_absorbed(state)
    state, _ = pear.step(state, POPULAR_PICK)
    assert pear.is_absorbed(state)

    dice = DicePolicy(1)
    state = dice.initial_state(UserProfile(1.0, 9.0))
    state, _ = dice.step(state, None)
    assert not dice.is_absorbed(state)
    state, _ = dice.step(state, NICHE_PICK)
    assert dice.is_absorbed(state)
