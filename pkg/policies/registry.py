"""
Policy specs as they appear in configs and on the command line, and the
engine-facing policy objects built from them.
"""

from typing import Annotated, Any, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from analytics.pear_constants import build_constants
from models.choice import ChoiceOutcome, RecommendationSet, UserProfile
from models.distributions import GpdSpec, TwoPointSpec
from policies.app import app_recommend
from policies.dice import DiceState, dice_step
from policies.oracle import OracleState, oracle_recommend
from policies.pear import PearState, pear_step
from utils.errors import InvalidParameterError
from utils.logging_utils import get_logger

logger = get_logger(__name__)


class AppPolicySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["app"] = "app"

    def label(self) -> str:
        return "app"


class PearPolicySpec(BaseModel):
    """PEAR with prior p; None takes p from the two-point niche model."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["pear"] = "pear"
    p: Optional[float] = Field(default=None, gt=0.0, lt=1.0)

    def label(self) -> str:
        return "pear" if self.p is None else f"pear:{self.p!r}"


class DicePolicySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["dice"] = "dice"
    explore_len: int = Field(ge=0)

    def label(self) -> str:
        return f"dice:{self.explore_len}"


class OraclePolicySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["oracle"] = "oracle"

    def label(self) -> str:
        return "oracle"


PolicySpec = Annotated[
    Union[AppPolicySpec, PearPolicySpec, DicePolicySpec, OraclePolicySpec],
    Field(discriminator="kind"),
]


def parse_policy_spec(text: str) -> Union[AppPolicySpec, PearPolicySpec, DicePolicySpec, OraclePolicySpec]:
    """
    Parse "app", "oracle", "pear[:p]" or "dice:<explore_len>".

    Args:
        text: Policy in command-line form

    Returns:
        Validated policy spec
    """
    kind, sep, value = text.strip().lower().partition(":")
    try:
        if kind == "app":
            return AppPolicySpec()
        if kind == "oracle":
            return OraclePolicySpec()
        if kind == "pear":
            return PearPolicySpec(p=float(value)) if sep else PearPolicySpec()
        if kind == "dice":
            if not sep:
                raise InvalidParameterError("DICE needs an exploration length, e.g. dice:20")
            return DicePolicySpec(explore_len=int(value))
    except (ValueError, ValidationError) as e:
        if isinstance(e, InvalidParameterError):
            raise
        raise InvalidParameterError(f"Invalid policy spec {text!r}: {e}") from e
    raise InvalidParameterError(f"Unknown policy: {kind!r}")


class Policy:
    """
    Base class for recommendation policies driven by the simulation engine.

    A policy is absorbed once its current recommendation will be repeated in
    every later period regardless of the user's choices.
    """

    name = "policy"

    def initial_state(self, profile: UserProfile) -> Any:
        """
        Build the state at t = 0 for a user.

        Args:
            profile: Realized base utilities of the user

        Returns:
            Policy-specific state
        """
        raise NotImplementedError("Subclasses must implement initial_state method")

    def step(self, state: Any, last_outcome: Optional[ChoiceOutcome]) -> Tuple[Any, RecommendationSet]:
        """
        Recommend for the current period.

        Args:
            state: Current state
            last_outcome: Choice made in the previous period, None at t = 0

        Returns:
            New state and recommendation
        """
        raise NotImplementedError("Subclasses must implement step method")

    def is_absorbed(self, state: Any) -> bool:
        raise NotImplementedError("Subclasses must implement is_absorbed method")


class AppPolicy(Policy):
    name = "app"

    def initial_state(self, profile: UserProfile) -> None:
        return None

    def step(self, state: None, last_outcome: Optional[ChoiceOutcome]) -> Tuple[None, RecommendationSet]:
        return None, app_recommend()

    def is_absorbed(self, state: None) -> bool:
        return True


class PearPolicy(Policy):
    name = "pear"

    def __init__(self, p: float, v_pop: float):
        self.p = p
        self.constants = build_constants(p, v_pop)

    def initial_state(self, profile: UserProfile) -> PearState:
        return PearState.initial(self.constants)

    def step(self, state: PearState, last_outcome: Optional[ChoiceOutcome]) -> Tuple[PearState, RecommendationSet]:
        return pear_step(state, last_outcome, self.p)

    def is_absorbed(self, state: PearState) -> bool:
        return state.switched


class DicePolicy(Policy):
    name = "dice"

    def __init__(self, explore_len: int):
        self.explore_len = explore_len

    def initial_state(self, profile: UserProfile) -> DiceState:
        return DiceState.initial(self.explore_len)

    def step(self, state: DiceState, last_outcome: Optional[ChoiceOutcome]) -> Tuple[DiceState, RecommendationSet]:
        return dice_step(state, last_outcome)

    def is_absorbed(self, state: DiceState) -> bool:
        return state.committed is not None


class OraclePolicy(Policy):
    name = "oracle"

    def initial_state(self, profile: UserProfile) -> OracleState:
        return OracleState.from_profile(profile)

    def step(self, state: OracleState, last_outcome: Optional[ChoiceOutcome]) -> Tuple[OracleState, RecommendationSet]:
        return state, oracle_recommend(state)

    def is_absorbed(self, state: OracleState) -> bool:
        return True


def build_policy(
    spec: Union[AppPolicySpec, PearPolicySpec, DicePolicySpec, OraclePolicySpec],
    v_pop: float,
    niche: Union[TwoPointSpec, GpdSpec]
) -> Policy:
    """
    Instantiate the policy a spec describes for one model.

    Args:
        spec: Policy spec
        v_pop: Popular base utility
        niche: Niche distribution of the model

    Returns:
        Policy object for the simulation engine
    """
    if isinstance(spec, AppPolicySpec):
        return AppPolicy()
    if isinstance(spec, OraclePolicySpec):
        return OraclePolicy()
    if isinstance(spec, DicePolicySpec):
        return DicePolicy(spec.explore_len)
    if isinstance(spec, PearPolicySpec):
        if not isinstance(niche, TwoPointSpec):
            raise InvalidParameterError(f"PEAR needs the two-point niche model, got {niche.label()}")
        p = niche.p if spec.p is None else spec.p
        if p != niche.p:
            logger.warning(f"PEAR prior p={p} differs from the niche model's p={niche.p}")
        return PearPolicy(p, v_pop)
    raise ValueError(f"Unknown policy spec: {spec!r}")
