import itertools

import numpy as np
import pytest

from analytics.first_passage import (
    first_passage_pmf,
    g_rho1_lower_bound,
    g_sandwich,
    g_value,
    walk_first_passage,
)
from analytics.pear_constants import WalkBoundary, build_constants
from config.settings import get_config
from utils.errors import InvalidParameterError, TruncationError
from utils.logging_utils import LogCapture


def enumerate_first_passage(rho, boundary, k):
    """P(N = n) for n <= k and P(N > k) by summing over all 2^k step paths."""
    paths = np.array(list(itertools.product([1, 0], repeat=k)), dtype=np.int64)
    successes = np.cumsum(paths, axis=1)
    failures = np.cumsum(1 - paths, axis=1)
    negative = boundary.negative_mask(successes, failures)

    hit = negative.any(axis=1)
    first = np.where(hit, negative.argmax(axis=1) + 1, 0)
    weights = rho ** successes[:, -1] * (1.0 - rho) ** failures[:, -1]

    probabilities = np.array([weights[first == n].sum() for n in range(1, k + 1)])
    return probabilities, weights[~hit].sum()


def test_half_step_walk():
    pmf = first_passage_pmf(0.5, x=0.759, k_max=3)

    np.testing.assert_allclose(pmf.probabilities, [0.5, 0.25, 0.125], rtol=1e-15)
    assert pmf.probability(0) == 0.0
    assert pmf.probability(4) == 0.0


@pytest.mark.parametrize("rho", [0.0, 0.1, 0.5, 0.9, 1.0])
def test_first_step_probability(rho):
    assert first_passage_pmf(rho, x=0.4, k_max=1).probability(1) == pytest.approx(1.0 - rho, abs=1e-15)


def test_high_type_early_switch(constants_p01):
    rho1 = constants_p01.rho1
    pmf = first_passage_pmf(rho1, x=constants_p01.c, k_max=3)

    assert pmf.probabilities.sum() == pytest.approx((1.0 - rho1) * (1.0 + rho1 + rho1 ** 2), rel=1e-9)
    assert pmf.probabilities.sum() == pytest.approx(0.001376, abs=1e-6)


@pytest.mark.parametrize("rho, x", [(0.3, 0.4), (0.2, 0.759285), (0.6, 0.5), (0.9, 0.3)])
def test_pmf_sums_to_one(rho, x):
    pmf = first_passage_pmf(rho, x=x, k_max=400)

    assert pmf.total_mass() == pytest.approx(1.0, abs=1e-12)
    assert np.all(pmf.probabilities >= 0.0)


@pytest.mark.parametrize("rho, x, k", [
    (0.3, 0.4, 16),
    (0.7, 0.759285, 18),
    (0.5, 0.2, 16),
    (0.55, 0.5, 17),
])
def test_pmf_matches_path_enumeration(rho, x, k):
    boundary = WalkBoundary.from_step(x)
    expected, expected_tail = enumerate_first_passage(rho, boundary, k)
    pmf = first_passage_pmf(rho, boundary=boundary, k_max=k)

    np.testing.assert_allclose(pmf.probabilities, expected, atol=1e-12)
    assert pmf.tail_mass == pytest.approx(expected_tail, abs=1e-12)


def test_pmf_matches_enumeration_on_likelihood_walk(constants_p01):
    boundary = constants_p01.boundary
    expected, _ = enumerate_first_passage(0.4, boundary, 16)

    np.testing.assert_allclose(first_passage_pmf(0.4, boundary=boundary, k_max=16).probabilities, expected, atol=1e-12)


def test_truncated_pmf_warns():
    with LogCapture("analytics.first_passage") as capture:
        pmf = first_passage_pmf(0.99, x=0.5, k_max=5)

    assert pmf.truncated
    assert pmf.tail_mass > 0.9
    assert any("truncated" in message for message in capture.get_messages())


def test_pmf_rejects_bad_arguments():
    with pytest.raises(InvalidParameterError):
        first_passage_pmf(1.5, x=0.5, k_max=5)
    with pytest.raises(InvalidParameterError):
        first_passage_pmf(0.5, x=1.0, k_max=5)
    with pytest.raises(InvalidParameterError):
        first_passage_pmf(0.5, x=0.5, k_max=0)
    with pytest.raises(InvalidParameterError):
        first_passage_pmf(0.5, k_max=5)
    with pytest.raises(InvalidParameterError):
        first_passage_pmf(0.5, x=0.5, k_max=5, one_minus_rho=1.5)
    with pytest.raises(TypeError):
        first_passage_pmf(0.5, x=0.5)


def test_walk_first_passage_single_path():
    assert walk_first_passage([True, True, False], x=0.759) == 3
    assert walk_first_passage([False], x=0.1) == 1
    assert walk_first_passage([True] * 10, x=0.5) is None


def test_g_at_zero_discount():
    result = g_value(0.0, 0.5, x=0.5)

    assert result.value == 1.0
    assert result.error == 0.0


@pytest.mark.parametrize("delta, rho, x", [(0.9, 0.6, 0.4), (0.5, 0.3, 0.7), (0.99, 0.2, 0.5)])
def test_g_matches_discounted_pmf(delta, rho, x):
    pmf = first_passage_pmf(rho, x=x, k_max=3000)
    direct = 1.0 - np.sum(delta ** np.arange(1, pmf.k_max + 1) * pmf.probabilities)
    result = g_value(delta, rho, x=x, tol=1e-12)

    assert result.value == pytest.approx(direct, abs=1e-10)
    assert result.error <= 1e-12


def test_g_rejects_bad_arguments():
    with pytest.raises(InvalidParameterError):
        g_value(1.0, 0.5, x=0.5)
    with pytest.raises(InvalidParameterError):
        g_value(0.5, 0.5, x=0.5, tol=0.0)


@pytest.mark.parametrize("p", [0.1, 0.01, 0.001])
def test_low_type_weight_inside_sandwich(p):
    constants = build_constants(p, 1.0)
    g_low = g_value(0.99, constants.rho2, boundary=constants.boundary, tol=1e-13).value
    lower, upper = g_sandwich(0.99, constants)

    assert lower - 1e-12 <= g_low <= upper + 1e-12


@pytest.mark.parametrize("p", [0.1, 0.01, 0.001])
def test_high_type_weight_above_bound(p):
    constants = build_constants(p, 1.0)
    g_high = g_value(0.99, constants.rho1, boundary=constants.boundary, tol=1e-13).value

    assert g_high >= g_rho1_lower_bound(0.99, constants) - 1e-12


def test_weights_approach_their_limits():
    delta = 0.99
    gaps = []
    for p in (0.1, 0.01, 0.001):
        constants = build_constants(p, 1.0)
        g_low = g_value(delta, constants.rho2, boundary=constants.boundary, tol=1e-13).value
        gaps.append(abs(g_low - (1.0 - delta) / (1.0 - delta * constants.rho2)))

    assert gaps[0] > gaps[1]
    assert gaps[2] <= gaps[1] + 1e-14
    assert gaps[2] < 1e-6

    constants = build_constants(0.001, 1.0)
    assert g_value(delta, constants.rho1, boundary=constants.boundary, tol=1e-13).value > 1.0 - 1e-6


def test_down_step_probability_is_taken_as_given():
    pmf = first_passage_pmf(1.0 - 1e-12, x=0.4, k_max=1, one_minus_rho=1e-12)

    assert pmf.probability(1) == 1e-12


def test_high_type_down_step_survives_rounding():
    constants = build_constants(0.01, 1.0)
    assert 1.0 - constants.rho1 == 0.0

    pmf = first_passage_pmf(
        constants.rho1, boundary=constants.boundary, k_max=1, one_minus_rho=constants.one_minus_rho1
    )

    assert pmf.probability(1) == constants.one_minus_rho1
    assert pmf.probability(1) > 0.0


def test_g_step_cap_comes_from_settings(monkeypatch):
    monkeypatch.setitem(get_config("analytics"), "first_passage_step_cap", 5)

    with pytest.raises(TruncationError):
        g_value(0.999, 0.9, x=0.5, tol=1e-12)
