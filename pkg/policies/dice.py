"""
Explore-then-commit: one popular and one niche item for the first explore_len
periods, then two items of whichever type the user picked more often.
"""

from dataclasses import dataclass, replace
from typing import Optional, Tuple

from models.choice import DIVERSE, ChoiceOutcome, ItemType, RecommendationSet, homogeneous
from utils.errors import InvalidParameterError


@dataclass(frozen=True)
class DiceState:
    count_pop: int
    count_niche: int
    t: int
    explore_len: int
    committed: Optional[ItemType] = None

    @classmethod
    def initial(cls, explore_len: int) -> "DiceState":
        if explore_len < 0:
            raise InvalidParameterError(f"explore_len must be non-negative, got {explore_len}")
        return cls(count_pop=0, count_niche=0, t=0, explore_len=explore_len)


def dice_step(state: DiceState, last_outcome: Optional[ChoiceOutcome]) -> Tuple[DiceState, RecommendationSet]:
    """
    Advance DICE by one period.

    state.t is the period being decided; last_outcome is the choice made in
    period t - 1. Exploration covers periods 0..explore_len - 1 and the
    commitment is taken when period explore_len is decided.

    Args:
        state: Current state
        last_outcome: Choice made on the previous recommendation, None at t = 0

    Returns:
        New state and the recommendation for period state.t
    """
    if state.committed is not None:
        return replace(state, t=state.t + 1), homogeneous(state.committed)

    count_pop, count_niche = state.count_pop, state.count_niche
    if last_outcome is not None:
        # Outside choices leave both counters alone
        if last_outcome.chosen_type == ItemType.POPULAR:
            count_pop += 1
        elif last_outcome.chosen_type == ItemType.NICHE:
            count_niche += 1

    if state.t < state.explore_len:
        return replace(state, count_pop=count_pop, count_niche=count_niche, t=state.t + 1), DIVERSE

    preferred = ItemType.POPULAR if count_pop >= count_niche else ItemType.NICHE
    new_state = replace(state, count_pop=count_pop, count_niche=count_niche, t=state.t + 1, committed=preferred)
    return new_state, homogeneous(preferred)
