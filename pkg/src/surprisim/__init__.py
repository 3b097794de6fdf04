"""Ensemble-normalized surprise similarity over precomputed embeddings.

The surprise score of a key for a query is the probability that a random
member of a reference ensemble is less similar to the query than the key
is. Ranking by surprise divides out per-query similarity baselines, which
plain cosine ranking cannot do. The package also ships the rescaled/mixed
score with its ensemble-size crossover, zero-shot and few-shot
classification, spherical k-means with surprise assignment, and seeded
comparison studies, all behind a JSONL file interface and a CLI.
"""

from .classify import (
    DEFAULT_TEMPLATE,
    EvalResult,
    LabelSet,
    Prediction,
    build_queries,
    classify,
    evaluate,
)
from .cluster import (
    ClusterResult,
    KMeansRun,
    adjusted_rand,
    cluster_with_surprise,
    kmeans,
    surprise_assign,
    v_measure,
)
from .errors import DataError, NumericError, SurprisimError, UsageError
from .experiments import (
    RunRecord,
    StudyResult,
    StudySpec,
    SummaryRow,
    crossover_study,
    derived_seed,
    emit_report,
    fewshot_study,
    summarize,
)
from .io import (
    RunConfig,
    check_labels_resolvable,
    load_embeddings,
    load_labels,
    save_embeddings,
    save_labels,
)
from .mixed import MixConfig, RescaleMap, crossover_weight, fit_rescale, mixed_surprise
from .stats import (
    QueryStats,
    StatsEstimator,
    estimate_stats,
    stats_from_similarities,
    surprise,
    surprise_matrix,
    surprise_matrix_with_stats,
)
from .train import (
    AdapterModel,
    EpochStats,
    TrainConfig,
    TrainResult,
    TrainingPair,
    build_pairs,
    loss,
    objective_and_gradient,
    probability,
    train,
)
from .vectors import (
    EmbeddingRecord,
    EmbeddingSet,
    ScoreMatrix,
    SimilarityKind,
    pairwise_matrix,
    similarity,
)

__version__ = "0.1.0"

__all__ = [
    "AdapterModel",
    "ClusterResult",
    "DataError",
    "DEFAULT_TEMPLATE",
    "EmbeddingRecord",
    "EmbeddingSet",
    "EpochStats",
    "EvalResult",
    "KMeansRun",
    "LabelSet",
    "MixConfig",
    "NumericError",
    "Prediction",
    "QueryStats",
    "RescaleMap",
    "RunConfig",
    "RunRecord",
    "ScoreMatrix",
    "SimilarityKind",
    "StatsEstimator",
    "StudyResult",
    "StudySpec",
    "SummaryRow",
    "SurprisimError",
    "TrainConfig",
    "TrainResult",
    "TrainingPair",
    "UsageError",
    "adjusted_rand",
    "build_pairs",
    "build_queries",
    "check_labels_resolvable",
    "classify",
    "cluster_with_surprise",
    "crossover_study",
    "crossover_weight",
    "derived_seed",
    "emit_report",
    "estimate_stats",
    "evaluate",
    "fewshot_study",
    "fit_rescale",
    "kmeans",
    "load_embeddings",
    "load_labels",
    "loss",
    "mixed_surprise",
    "objective_and_gradient",
    "pairwise_matrix",
    "probability",
    "save_embeddings",
    "save_labels",
    "similarity",
    "stats_from_similarities",
    "summarize",
    "surprise",
    "surprise_assign",
    "surprise_matrix",
    "surprise_matrix_with_stats",
    "train",
    "v_measure",
]
