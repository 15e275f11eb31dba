"""Community-preference-driven conference sessionization and scheduling."""

from .affinity import (
    AffinityComparison,
    AffinityMatrix,
    AffinityThresholds,
    BlendWeights,
    ParticipationStats,
    PreferenceSets,
    blend_affinity,
    build_affinity,
    compare_sources,
    extract_preferences,
    participation_stats,
    popularity,
    relevance_affinity,
)
from .corpus import (
    Dataset,
    DatasetError,
    DuplicateIdError,
    ParseError,
    UnknownIdError,
    ValidationReport,
    load_dataset,
    save_dataset,
    validate_dataset,
)
from .gateway import DraftConfig, DraftState, Mutation
from .recommend import RatingsMatrix, Recommendation, build_ratings, item_similarity
from .recommend import recommend as recommend_papers
from .scheduler import (
    MoveDelta,
    Schedule,
    ScheduleConfig,
    SchedulingError,
    assign_rooms,
    author_clashes,
    conflict_count,
    conflict_count_from_affinity,
    evaluate_move,
    optimize_schedule,
    schedule_exact,
)
from .sessionizer import (
    Session,
    SessionConfig,
    Sessionization,
    coherence,
    sessionize,
    sessionize_exact,
)
from .textsim import TfIdfModel, build_tfidf, candidate_list, cosine

# keep the submodule reachable as an attribute despite the function re-exports
from . import recommend  # noqa: E402  (must follow the from-imports above)

__version__ = "0.1.0"
