"""Zero-shot classification with the mixed surprise score.

Documents are the keys, templated label strings are the queries, and the
ensemble defaults to the document set itself. One rescale map is fit on the
pooled ensemble/query similarities so that a single monotone transform is
shared by all labels; per-label maps would re-center every label at 0.5 and
change the w=0 ranking, which must stay the plain-similarity ranking. For
the same reason the score vector at exactly w=0 is the raw similarity row:
clamping negatives into [0,1] before rescaling would otherwise tie them all
at zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError, UsageError
from .mixed import MixConfig, fit_rescale
from .stats import StatsEstimator, _surprise_values, stats_from_similarities
from .vectors import EmbeddingRecord, EmbeddingSet, SimilarityKind, _pairwise_values

logger = logging.getLogger(__name__)

DEFAULT_TEMPLATE = "this matter is {label}"


@dataclass(frozen=True)
class LabelSet:
    """Ordered label names plus the template used to phrase them as queries."""

    labels: tuple[str, ...]
    template: str = DEFAULT_TEMPLATE

    def __post_init__(self):
        labels = tuple(str(v) for v in self.labels)
        if not labels:
            raise DataError("label set must contain at least one label")
        if len(set(labels)) != len(labels):
            raise DataError("label names must be unique")
        if self.template.count("{label}") != 1:
            raise UsageError(
                "template must contain the placeholder '{label}' exactly once"
            )
        object.__setattr__(self, "labels", labels)

    def query_text(self, label: str) -> str:
        return self.template.replace("{label}", label)


@dataclass(frozen=True)
class Prediction:
    key_id: str
    label: str
    score: float
    scores_all: tuple[float, ...]


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    macro_f1: float
    per_label_f1: dict[str, float]


def build_queries(labels: LabelSet, embedder_output: EmbeddingSet) -> EmbeddingSet:
    """Pick one embedded query per label out of an export file.

    A record matches a label when its id is the raw label, or failing that
    when its text or id equals the templated label string. The result keeps
    the label order and re-ids records to the raw labels.
    """
    by_id = {rec.id: rec for rec in embedder_output}
    by_text: dict[str, list[EmbeddingRecord]] = {}
    for rec in embedder_output:
        if rec.text is not None:
            by_text.setdefault(rec.text, []).append(rec)
    chosen: list[EmbeddingRecord] = []
    for label in labels.labels:
        templated = labels.query_text(label)
        rec = by_id.get(label)
        if rec is None:
            candidates = by_text.get(templated, [])
            if len(candidates) > 1:
                raise DataError(f"multiple embedded queries match label {label!r}")
            rec = candidates[0] if candidates else by_id.get(templated)
        if rec is None:
            raise DataError(f"no embedded query found for label {label!r}")
        chosen.append(EmbeddingRecord(label, rec.vector, templated))
    return EmbeddingSet(chosen)


def classify(
    keys: EmbeddingSet,
    queries: EmbeddingSet,
    ensemble: EmbeddingSet | None = None,
    mix: MixConfig | None = None,
    kind: SimilarityKind = SimilarityKind.COSINE,
    estimator: StatsEstimator = StatsEstimator.GAUSSIAN,
) -> list[Prediction]:
    """Label every key with the argmax query under the mixed score.

    Ties break toward the lowest label index and are logged at debug level.
    """
    if ensemble is None:
        ensemble = keys
    if mix is None:
        mix = MixConfig.crossover()
    if keys.dimension != queries.dimension or keys.dimension != ensemble.dimension:
        raise DataError("keys, queries, and ensemble must share one dimension")
    w = mix.effective_weight(len(ensemble))
    psi = _pairwise_values(keys.matrix, queries.matrix, kind)
    if w == 0.0:
        scores = psi
    else:
        ens = _pairwise_values(ensemble.matrix, queries.matrix, kind)
        surp = np.empty_like(psi)
        for j, query_id in enumerate(queries.ids):
            st = stats_from_similarities(ens[:, j], query_id, estimator, kind)
            surp[:, j] = _surprise_values(psi[:, j], st.mu, st.sigma)
        if w == 1.0:
            scores = surp
        else:
            rescale = fit_rescale(ens.ravel())
            scores = (1.0 - w) * rescale.apply(psi) + w * surp
    predictions: list[Prediction] = []
    for i, key_id in enumerate(keys.ids):
        row = scores[i]
        best = int(np.argmax(row))
        if np.count_nonzero(row == row[best]) > 1:
            logger.debug("tie for key %r broken toward label %r", key_id, queries.ids[best])
        predictions.append(
            Prediction(key_id, queries.ids[best], float(row[best]), tuple(float(v) for v in row))
        )
    return predictions


def evaluate(predictions: Sequence[Prediction], gold: Mapping[str, str]) -> EvalResult:
    """Accuracy and macro F1 over the predicted ids.

    The macro average runs over labels present in the gold or predicted
    sets; labels that occur in neither are left out. A label with no
    predicted and no gold positives among those would be 0/0, so exclusion
    keeps the average meaningful.
    """
    if not predictions:
        raise DataError("cannot evaluate an empty prediction list")
    missing = [p.key_id for p in predictions if p.key_id not in gold]
    if missing:
        raise DataError(f"no gold label for ids: {missing[:5]}")
    gold_here = {p.key_id: gold[p.key_id] for p in predictions}
    labels = sorted(set(gold_here.values()) | {p.label for p in predictions})
    correct = sum(1 for p in predictions if p.label == gold_here[p.key_id])
    per_label: dict[str, float] = {}
    for label in labels:
        tp = sum(1 for p in predictions if p.label == label and gold_here[p.key_id] == label)
        fp = sum(1 for p in predictions if p.label == label and gold_here[p.key_id] != label)
        fn = sum(1 for p in predictions if p.label != label and gold_here[p.key_id] == label)
        denom = 2 * tp + fp + fn
        per_label[label] = (2.0 * tp / denom) if denom else 0.0
    return EvalResult(
        accuracy=correct / len(predictions),
        macro_f1=float(np.mean(list(per_label.values()))),
        per_label_f1=per_label,
    )
