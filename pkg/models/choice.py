"""
Multinomial-logit user facing a two-slot recommendation.

Each alternative's realized utility is its base utility plus independent
zero-mean Gumbel noise; the outside option has base utility 0. All closed
forms are evaluated in the log domain because niche base utilities reach
hundreds of nats.
"""

import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from models.distributions import sample_gumbel_zero_mean
from utils.errors import InvalidParameterError


class ItemType(str, Enum):
    POPULAR = "P"
    NICHE = "N"
    OUTSIDE = "O"


class Slot(IntEnum):
    """Alternatives in argmax order; ties go to the lowest value."""

    SLOT1 = 0
    SLOT2 = 1
    OUTSIDE = 2


@dataclass(frozen=True)
class RecommendationSet:
    """Item types shown in one period. Slots may repeat a type."""

    slot1: ItemType
    slot2: ItemType

    def __post_init__(self):
        for item_type in (self.slot1, self.slot2):
            if item_type not in (ItemType.POPULAR, ItemType.NICHE):
                raise InvalidParameterError(f"Recommendation slots hold popular or niche items, got {item_type}")

    @property
    def is_homogeneous(self) -> bool:
        return self.slot1 == self.slot2

    def type_of(self, slot: Slot) -> ItemType:
        if slot == Slot.SLOT1:
            return self.slot1
        if slot == Slot.SLOT2:
            return self.slot2
        return ItemType.OUTSIDE

    def __str__(self) -> str:
        return f"{{{self.slot1.value},{self.slot2.value}}}"


DIVERSE = RecommendationSet(ItemType.POPULAR, ItemType.NICHE)
ALL_POPULAR = RecommendationSet(ItemType.POPULAR, ItemType.POPULAR)
ALL_NICHE = RecommendationSet(ItemType.NICHE, ItemType.NICHE)


def homogeneous(item_type: ItemType) -> RecommendationSet:
    """Two items of one type."""
    return ALL_NICHE if item_type == ItemType.NICHE else ALL_POPULAR


@dataclass(frozen=True)
class UserProfile:
    """A user's realized base utilities in nats."""

    v_pop: float
    v_niche: float

    def __post_init__(self):
        if not (math.isfinite(self.v_pop) and math.isfinite(self.v_niche)):
            raise InvalidParameterError(f"Base utilities must be finite, got ({self.v_pop}, {self.v_niche})")

    def base_utility(self, item_type: ItemType) -> float:
        if item_type == ItemType.POPULAR:
            return self.v_pop
        if item_type == ItemType.NICHE:
            return self.v_niche
        return 0.0

    @property
    def preferred_type(self) -> ItemType:
        # Ties go to popular
        return ItemType.NICHE if self.v_niche > self.v_pop else ItemType.POPULAR


@dataclass(frozen=True)
class ChoiceDistribution:
    p_slot1: float
    p_slot2: float
    p_outside: float


@dataclass(frozen=True)
class ChoiceOutcome:
    """One sampled choice; chosen_type resolves the slot against its recommendation."""

    chosen: Slot
    realized_max_utility: float
    chosen_type: ItemType

    @property
    def engaged(self) -> bool:
        return self.chosen != Slot.OUTSIDE


def _base_utilities(rec: RecommendationSet, profile: UserProfile) -> np.ndarray:
    return np.array([0.0, profile.base_utility(rec.slot1), profile.base_utility(rec.slot2)])


def mnl_choice_probabilities(rec: RecommendationSet, profile: UserProfile) -> ChoiceDistribution:
    """
    Logit choice probabilities with outside weight 1.

    Args:
        rec: Recommended item types
        profile: User base utilities

    Returns:
        Probabilities of slot 1, slot 2 and the outside option
    """
    utilities = _base_utilities(rec, profile)
    log_total = logsumexp(utilities)
    p_outside = math.exp(-log_total)
    return ChoiceDistribution(
        p_slot1=math.exp(utilities[1] - log_total),
        p_slot2=math.exp(utilities[2] - log_total),
        p_outside=p_outside,
    )


def engagement_probability(rec: RecommendationSet, profile: UserProfile) -> float:
    """Probability the user picks a recommended item: 1 - p_outside."""
    return 1.0 - mnl_choice_probabilities(rec, profile).p_outside


def expected_max_utility(rec: RecommendationSet, profile: UserProfile) -> float:
    """Expected realized maximum, ln(1 + e^V1 + e^V2)."""
    return float(logsumexp(_base_utilities(rec, profile)))


def sample_choice(
    rec: RecommendationSet,
    profile: UserProfile,
    rng: Optional[np.random.Generator] = None,
    noise: Optional[Tuple[float, float, float]] = None
) -> ChoiceOutcome:
    """
    Sample the user's choice by direct argmax of base utility plus noise.

    Args:
        rec: Recommended item types
        profile: User base utilities
        rng: Generator used when no pre-drawn noise is given
        noise: Zero-mean Gumbel noise for (slot1, slot2, outside)

    Returns:
        Chosen alternative and realized maximum utility
    """
    if noise is None:
        if rng is None:
            raise InvalidParameterError("sample_choice needs either rng or noise")
        noise = sample_gumbel_zero_mean(rng, size=3)
    u1 = profile.base_utility(rec.slot1) + noise[0]
    u2 = profile.base_utility(rec.slot2) + noise[1]
    u0 = noise[2]

    # Strict comparisons keep the lowest index on ties
    chosen, best = Slot.SLOT1, u1
    if u2 > best:
        chosen, best = Slot.SLOT2, u2
    if u0 > best:
        chosen, best = Slot.OUTSIDE, u0
    return ChoiceOutcome(chosen=chosen, realized_max_utility=float(best), chosen_type=rec.type_of(chosen))


def sample_choice_batch(
    rec: RecommendationSet,
    profile: UserProfile,
    rng: np.random.Generator,
    size: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorised sample_choice for statistical checks.

    Returns:
        Chosen slot indices (Slot values) and realized maxima
    """
    noise = sample_gumbel_zero_mean(rng, size=(size, 3))
    utilities = np.column_stack([
        profile.base_utility(rec.slot1) + noise[:, 0],
        profile.base_utility(rec.slot2) + noise[:, 1],
        noise[:, 2],
    ])
    chosen = np.argmax(utilities, axis=1)
    return chosen, utilities[np.arange(size), chosen]
