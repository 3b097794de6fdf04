"""Synthetic embedding generators for demos and self-contained experiments.

Everything here builds unit vectors whose cosines against designated query
directions are controlled exactly, which makes the generators useful both
as test fixtures and as inputs for the bundled studies when no real
embedding export is at hand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import LabelSet
from .errors import UsageError
from .vectors import EmbeddingRecord, EmbeddingSet


@dataclass(frozen=True)
class SyntheticDataset:
    keys: EmbeddingSet
    gold: dict[str, str]
    queries: EmbeddingSet
    labels: LabelSet


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.sqrt(np.sum(v * v))


def embeddings_with_similarities(
    targets,
    query_angle: float,
    prefix: str = "e",
) -> tuple[EmbeddingSet, EmbeddingSet]:
    """Realize exact cosine targets against two planted queries in R^3.

    targets is a sequence of (sim_to_q0, sim_to_q1) pairs; query_angle is
    the angle between the two query directions in radians. Raises when a
    pair is geometrically unreachable.
    """
    q0 = np.array([1.0, 0.0, 0.0])
    q1 = np.array([np.cos(query_angle), np.sin(query_angle), 0.0])
    records = []
    for i, (s0, s1) in enumerate(targets):
        x = float(s0)
        y = (float(s1) - x * np.cos(query_angle)) / np.sin(query_angle)
        rest = 1.0 - x * x - y * y
        if rest < 0.0:
            raise UsageError(
                f"similarity pair ({s0}, {s1}) is unreachable at angle {query_angle}"
            )
        records.append(EmbeddingRecord(f"{prefix}{i}", np.array([x, y, np.sqrt(rest)])))
    elements = EmbeddingSet(records)
    queries = EmbeddingSet(
        [EmbeddingRecord("q0", q0), EmbeddingRecord("q1", q1)]
    )
    return elements, queries


def two_blobs(
    dim: int = 16,
    per_class: int = 20,
    angle_sigma: float = 0.5,
    seed: int = 0,
    labels: tuple[str, str] = ("alpha", "beta"),
    id_prefix: str = "doc",
) -> SyntheticDataset:
    """Two angular blobs whose centers sit 2*angle_sigma apart.

    Members are the centers rotated by |N(0, angle_sigma)| radians in a
    random orthogonal direction; label queries sit exactly on the centers.
    """
    if dim < 3:
        raise UsageError("two_blobs needs dim >= 3")
    rng = np.random.default_rng(seed)
    c0 = np.zeros(dim)
    c0[0] = 1.0
    separation = 2.0 * angle_sigma
    c1 = np.zeros(dim)
    c1[0] = np.cos(separation)
    c1[1] = np.sin(separation)
    centers = [c0, c1]
    records = []
    gold: dict[str, str] = {}
    for cls, (center, label) in enumerate(zip(centers, labels)):
        for i in range(per_class):
            theta = abs(rng.normal(0.0, angle_sigma))
            direction = rng.standard_normal(dim)
            direction -= center * np.dot(direction, center)
            direction = _unit(direction)
            vec = np.cos(theta) * center + np.sin(theta) * direction
            rec_id = f"{id_prefix}-{cls}-{i:03d}"
            records.append(EmbeddingRecord(rec_id, vec))
            gold[rec_id] = label
    label_set = LabelSet(labels)
    queries = EmbeddingSet(
        [EmbeddingRecord(lbl, ctr, label_set.query_text(lbl)) for lbl, ctr in zip(labels, centers)]
    )
    return SyntheticDataset(EmbeddingSet(records), gold, queries, label_set)


def contrast_dataset(
    n_docs: int = 2500,
    dim: int = 16,
    seed: int = 0,
    labels: tuple[str, str] = ("common", "specific"),
) -> SyntheticDataset:
    """A planted contrast-effect instance where plain cosine fails.

    The first label query is generically close to every document while the
    second is informative; the raw argmax therefore collapses onto the first
    label, but the per-query baselines are different enough that the
    surprise score recovers the classes.
    """
    if dim < 3:
        raise UsageError("contrast_dataset needs dim >= 3")
    rng = np.random.default_rng(seed)
    u0 = np.zeros(dim)
    u0[0] = 1.0
    u1 = np.zeros(dim)
    u1[1] = 1.0
    # (cos to q0, cos to q1) means per class; q0 stays ahead for both
    class_means = [(0.80, 0.45), (0.60, 0.55)]
    records = []
    gold: dict[str, str] = {}
    for i in range(n_docs):
        cls = int(rng.integers(2))
        a_mean, b_mean = class_means[cls]
        a = rng.normal(a_mean, 0.03)
        b = rng.normal(b_mean, 0.03)
        norm2 = a * a + b * b
        if norm2 > 0.98:
            scale = np.sqrt(0.98 / norm2)
            a *= scale
            b *= scale
        rest = rng.standard_normal(dim)
        rest[0] = 0.0
        rest[1] = 0.0
        rest = _unit(rest) * np.sqrt(1.0 - a * a - b * b)
        vec = a * u0 + b * u1 + rest
        rec_id = f"doc-{i:05d}"
        records.append(EmbeddingRecord(rec_id, vec))
        gold[rec_id] = labels[cls]
    label_set = LabelSet(labels)
    queries = EmbeddingSet(
        [
            EmbeddingRecord(labels[0], u0, label_set.query_text(labels[0])),
            EmbeddingRecord(labels[1], u1, label_set.query_text(labels[1])),
        ]
    )
    return SyntheticDataset(EmbeddingSet(records), gold, queries, label_set)


def many_blobs(
    n_labels: int,
    dim: int = 16,
    per_class: int = 40,
    spread: float = 0.45,
    seed: int = 0,
    common: float = 0.0,
    nuisance_dims: int = 0,
    nuisance_weight: float = 0.7,
    id_prefix: str = "doc",
) -> SyntheticDataset:
    """n_labels angular blobs around random near-orthogonal centers.

    common is the pairwise cosine between any two blob centers: centers
    share a sqrt(common)-weighted global direction, the way real text
    embeddings crowd into a cone. common=0 keeps centers orthogonal.

    nuisance_dims > 0 routes that fraction (nuisance_weight) of every
    member's angular deviation into one shared low-dimensional subspace
    orthogonal to all centers: a systematic corruption that a linear
    adapter can learn to suppress, unlike the isotropic remainder.
    """
    if dim < n_labels + 1 + nuisance_dims:
        raise UsageError("many_blobs needs dim >= n_labels + 1 + nuisance_dims")
    if not (0.0 <= common < 1.0):
        raise UsageError("common must lie in [0, 1)")
    if nuisance_dims < 0 or not (0.0 <= nuisance_weight <= 1.0):
        raise UsageError("nuisance_dims must be >= 0 and nuisance_weight in [0, 1]")
    rng = np.random.default_rng(seed)
    basis = np.linalg.qr(rng.standard_normal((dim, dim)))[0].T
    shared = basis[n_labels]
    centers = np.sqrt(common) * shared + np.sqrt(1.0 - common) * basis[:n_labels]
    nuisance = basis[n_labels + 1 : n_labels + 1 + nuisance_dims]
    labels = tuple(f"label-{j:02d}" for j in range(n_labels))
    records = []
    gold: dict[str, str] = {}
    for cls in range(n_labels):
        center = centers[cls]
        for i in range(per_class):
            theta = abs(rng.normal(0.0, spread))
            direction = rng.standard_normal(dim)
            direction -= center * np.dot(direction, center)
            direction = _unit(direction)
            if nuisance_dims:
                noise_dir = _unit(nuisance.T @ rng.standard_normal(nuisance_dims))
                direction = _unit(
                    nuisance_weight * noise_dir + (1.0 - nuisance_weight) * direction
                )
            vec = np.cos(theta) * center + np.sin(theta) * direction
            rec_id = f"{id_prefix}-{cls:02d}-{i:03d}"
            records.append(EmbeddingRecord(rec_id, vec))
            gold[rec_id] = labels[cls]
    label_set = LabelSet(labels)
    queries = EmbeddingSet(
        [
            EmbeddingRecord(lbl, centers[j], label_set.query_text(lbl))
            for j, lbl in enumerate(labels)
        ]
    )
    return SyntheticDataset(EmbeddingSet(records), gold, queries, label_set)
