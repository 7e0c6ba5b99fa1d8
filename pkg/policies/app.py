from models.choice import ALL_POPULAR, RecommendationSet


def app_recommend() -> RecommendationSet:
    """Always two popular items, whatever the history."""
    return ALL_POPULAR
