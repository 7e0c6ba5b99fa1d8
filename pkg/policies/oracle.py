from dataclasses import dataclass

from models.choice import ItemType, RecommendationSet, UserProfile, homogeneous


@dataclass(frozen=True)
class OracleState:
    """Type the clairvoyant policy serves; fixed when the user arrives."""

    preferred: ItemType

    @classmethod
    def from_profile(cls, profile: UserProfile) -> "OracleState":
        return cls(preferred=profile.preferred_type)


def oracle_recommend(state: OracleState) -> RecommendationSet:
    return homogeneous(state.preferred)
