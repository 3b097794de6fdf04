"""Ensemble statistics and the surprise score.

The surprise of a key for a query is the probability that a random ensemble
member is less similar to the query than the key is, under a Gaussian fit of
the ensemble's similarity distribution:

    surprise = 0.5 * (1 + erf((psi - mu) / (sqrt(2) * sigma)))

Two estimators produce (mu, sigma): plain sample moments, and a robust
variant that reads the 50th and 84.14th percentiles (the one-sigma point of
a normal distribution) so that heavy tails cannot distort the fit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import DataError, UsageError
from .vectors import (
    EmbeddingRecord,
    EmbeddingSet,
    ScoreMatrix,
    SimilarityKind,
    _as_vector,
    _pairwise_values,
)

# percentile holding the +1 sigma point of a normal distribution
UPPER_PERCENTILE = 84.14

_SQRT2 = np.sqrt(2.0)


class StatsEstimator(enum.Enum):
    GAUSSIAN = "gaussian-moments"
    PERCENTILE = "robust-percentile"

    @classmethod
    def parse(cls, name: str) -> "StatsEstimator":
        aliases = {
            "gaussian": cls.GAUSSIAN,
            "gaussian-moments": cls.GAUSSIAN,
            "moments": cls.GAUSSIAN,
            "percentile": cls.PERCENTILE,
            "robust-percentile": cls.PERCENTILE,
            "robust": cls.PERCENTILE,
        }
        try:
            return aliases[str(name).strip().lower()]
        except KeyError:
            raise UsageError(f"unknown stats estimator: {name!r}") from None


@dataclass(frozen=True)
class QueryStats:
    """Location/scale of one query's similarity distribution over an ensemble."""

    query_id: str
    mu: float
    sigma: float
    ensemble_size: int
    estimator: StatsEstimator = StatsEstimator.GAUSSIAN
    kind: SimilarityKind = SimilarityKind.COSINE

    def __post_init__(self):
        if self.ensemble_size < 1:
            raise DataError("ensemble must contain at least one element")
        if not np.isfinite(self.mu) or not np.isfinite(self.sigma):
            raise DataError("query stats must be finite")
        if self.sigma < 0.0:
            raise DataError("sigma must be non-negative")


def stats_from_similarities(
    sims,
    query_id: str = "",
    estimator: StatsEstimator = StatsEstimator.GAUSSIAN,
    kind: SimilarityKind = SimilarityKind.COSINE,
) -> QueryStats:
    """Fit (mu, sigma) to a 1-D array of ensemble similarities."""
    sims = np.asarray(sims, dtype=np.float64).ravel()
    if sims.size == 0:
        raise DataError("cannot estimate stats from an empty ensemble")
    if estimator is StatsEstimator.GAUSSIAN:
        mu = float(np.mean(sims))
        sigma = float(np.std(sims, ddof=1)) if sims.size > 1 else 0.0
    else:
        p50, p_up = np.percentile(sims, [50.0, UPPER_PERCENTILE])
        mu = float(p50)
        sigma = float(p_up - p50)
    return QueryStats(query_id, mu, sigma, int(sims.size), estimator, kind)


def estimate_stats(
    ensemble: EmbeddingSet,
    query: EmbeddingRecord,
    kind: SimilarityKind = SimilarityKind.COSINE,
    estimator: StatsEstimator = StatsEstimator.GAUSSIAN,
) -> QueryStats:
    """Ensemble similarity stats for one query."""
    qvec = query.vector if isinstance(query, EmbeddingRecord) else _as_vector(query)
    if qvec.shape[0] != ensemble.dimension:
        raise DataError(
            f"dimension mismatch: ensemble d={ensemble.dimension}, query d={qvec.shape[0]}"
        )
    sims = _pairwise_values(ensemble.matrix, qvec[None, :], kind)[:, 0]
    query_id = query.id if isinstance(query, EmbeddingRecord) else ""
    return stats_from_similarities(sims, query_id, estimator, kind)


def _surprise_values(psi, mu: float, sigma: float) -> np.ndarray:
    """Vectorized surprise. sigma == 0 degenerates to a step at mu."""
    psi = np.asarray(psi, dtype=np.float64)
    if sigma == 0.0:
        return np.where(psi > mu, 1.0, np.where(psi == mu, 0.5, 0.0))
    return 0.5 * (1.0 + erf((psi - mu) / (_SQRT2 * sigma)))


def surprise(psi: float, stats: QueryStats) -> float:
    """Probability that a random ensemble member scores below psi."""
    if not np.isfinite(psi):
        raise DataError("psi must be finite")
    return float(_surprise_values(np.asarray([psi]), stats.mu, stats.sigma)[0])


def surprise_matrix_with_stats(
    keys: EmbeddingSet,
    queries: EmbeddingSet,
    ensemble: EmbeddingSet,
    kind: SimilarityKind = SimilarityKind.COSINE,
    estimator: StatsEstimator = StatsEstimator.GAUSSIAN,
) -> tuple[ScoreMatrix, list[QueryStats]]:
    """Surprise scores for every key/query pair plus the per-query stats.

    Stats are fit once per query over the ensemble, then applied to the
    whole key column.
    """
    for name, other in (("queries", queries), ("ensemble", ensemble)):
        if keys.dimension != other.dimension:
            raise DataError(
                f"dimension mismatch: keys d={keys.dimension}, {name} d={other.dimension}"
            )
    psi = _pairwise_values(keys.matrix, queries.matrix, kind)
    ens = _pairwise_values(ensemble.matrix, queries.matrix, kind)
    out = np.empty_like(psi)
    stats_list: list[QueryStats] = []
    for j, query_id in enumerate(queries.ids):
        st = stats_from_similarities(ens[:, j], query_id, estimator, kind)
        out[:, j] = _surprise_values(psi[:, j], st.mu, st.sigma)
        stats_list.append(st)
    matrix = ScoreMatrix(out, keys.ids, queries.ids, score="surprise")
    return matrix, stats_list


def surprise_matrix(
    keys: EmbeddingSet,
    queries: EmbeddingSet,
    ensemble: EmbeddingSet,
    kind: SimilarityKind = SimilarityKind.COSINE,
    estimator: StatsEstimator = StatsEstimator.GAUSSIAN,
) -> ScoreMatrix:
    matrix, _ = surprise_matrix_with_stats(keys, queries, ensemble, kind, estimator)
    return matrix
