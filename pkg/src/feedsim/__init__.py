"""feedsim: deterministic agent-based simulation of content recommendation
feedback loops on fixed directed follow graphs."""

__version__ = "0.1.0"

from .population import (  # noqa: F401
    CLAMP_EPS,
    Group,
    GroupPreferencePrior,
    Population,
    PopulationConfig,
    Topic,
    normalized_preferences,
    sample_population,
)
from .netgen import (  # noqa: F401
    DirectedGraph,
    RandomGraphParams,
    SbmParams,
    complete_graph,
    edge_histogram,
    follower_composition,
    random_graph,
    sbm_graph,
)
from .policy import (  # noqa: F401
    EdgeFeatureTable,
    EmaParams,
    ScoringContext,
    StandardizationStats,
    TieStrengthModel,
    TieStrengthParams,
    compute_static_features,
    score_candidates,
    standardize,
    tie_strength,
)
from .engine import (  # noqa: F401
    ContentItem,
    EngineConfig,
    EventLog,
    RecommendationEvent,
    RngStreams,
    Simulation,
    sample_categorical,
)
from .metrics import (  # noqa: F401
    CorrelationResult,
    MetricsConfig,
    TimeSeries,
    interaction_gap,
    minority_share_by_topic,
    moving_average,
    pearson,
    per_user_cross_group_visibility,
    professional_rec_ratio,
    recs_vs_incoming_edges,
    time_averaged_professional_ratio,
)
from .config import (  # noqa: F401
    ExperimentConfig,
    GraphConfig,
    PolicyConfig,
    SweepSpec,
    config_from_dict,
    config_hash,
    config_to_dict,
    load_config,
)
from .experiment import (  # noqa: F401
    RunResult,
    run_experiment,
    run_simulation,
    run_sweep,
)
