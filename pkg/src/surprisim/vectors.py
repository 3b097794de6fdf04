"""Embedding containers and the base pairwise similarity kernels.

The scalar kernel and the matrix kernel are written so that every matrix
entry is bit-identical to the scalar call on the same pair: both reduce the
same elementwise products with numpy's pairwise summation and apply the
normalization in the same order. Tests rely on exact equality.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DataError, UsageError


class SimilarityKind(enum.Enum):
    """Base similarity. Distance-backed kinds go through 1/(1+D) so that
    larger always means more similar and the range stays in (0, 1]."""

    COSINE = "cosine"
    EUCLIDEAN = "euclidean-similarity"
    MANHATTAN = "manhattan-similarity"

    @classmethod
    def parse(cls, name: str) -> "SimilarityKind":
        aliases = {
            "cosine": cls.COSINE,
            "euclidean": cls.EUCLIDEAN,
            "euclidean-similarity": cls.EUCLIDEAN,
            "manhattan": cls.MANHATTAN,
            "manhattan-similarity": cls.MANHATTAN,
        }
        try:
            return aliases[str(name).strip().lower()]
        except KeyError:
            raise UsageError(f"unknown similarity kind: {name!r}") from None


def _as_vector(value) -> np.ndarray:
    vec = np.asarray(value, dtype=np.float64)
    if vec.ndim != 1 or vec.size < 1:
        raise DataError("embedding vector must be one-dimensional and non-empty")
    if not np.all(np.isfinite(vec)):
        raise DataError("embedding vector contains non-finite values")
    return vec


@dataclass(frozen=True)
class EmbeddingRecord:
    """One embedded item: a stable id, its vector, and optional source text."""

    id: str
    vector: np.ndarray
    text: str | None = None

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise DataError("record id must be a non-empty string")
        vec = _as_vector(self.vector)
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    @property
    def dimension(self) -> int:
        return int(self.vector.shape[0])


class EmbeddingSet:
    """Ordered, immutable collection of records sharing one dimension."""

    __slots__ = ("_records", "_index", "_matrix", "dimension")

    def __init__(self, records: Iterable[EmbeddingRecord]):
        records = tuple(records)
        if not records:
            raise DataError("embedding set must contain at least one record")
        dimension = records[0].dimension
        index: dict[str, int] = {}
        for pos, rec in enumerate(records):
            if rec.dimension != dimension:
                raise DataError(
                    f"dimension mismatch: record {rec.id!r} has d={rec.dimension}, expected d={dimension}"
                )
            if rec.id in index:
                raise DataError(f"duplicate record id {rec.id!r}")
            index[rec.id] = pos
        matrix = np.vstack([rec.vector for rec in records])
        matrix.setflags(write=False)
        self._records = records
        self._index = index
        self._matrix = matrix
        self.dimension = dimension

    @classmethod
    def from_arrays(
        cls,
        ids: Sequence[str],
        matrix,
        texts: Sequence[str | None] | None = None,
    ) -> "EmbeddingSet":
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2 or len(ids) != matrix.shape[0]:
            raise DataError("ids and matrix rows must line up")
        if texts is None:
            texts = [None] * len(ids)
        return cls(
            EmbeddingRecord(str(i), row, text)
            for i, row, text in zip(ids, matrix, texts)
        )

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(rec.id for rec in self._records)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def get(self, record_id: str) -> EmbeddingRecord:
        try:
            return self._records[self._index[record_id]]
        except KeyError:
            raise DataError(f"unknown record id {record_id!r}") from None

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._index

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[EmbeddingRecord]:
        return iter(self._records)

    def __getitem__(self, position: int) -> EmbeddingRecord:
        return self._records[position]

    def subset(self, positions: Sequence[int]) -> "EmbeddingSet":
        return EmbeddingSet(self._records[int(p)] for p in positions)


@dataclass(frozen=True)
class ScoreMatrix:
    """keys x queries score table with the row/column ids it was built from."""

    values: np.ndarray
    key_ids: tuple[str, ...]
    query_ids: tuple[str, ...]
    score: str = "plain"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.key_ids), len(self.query_ids)):
            raise DataError("score matrix shape does not match its id lists")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def similarity(a, b, kind: SimilarityKind = SimilarityKind.COSINE) -> float:
    """Base similarity between two vectors."""
    va = _as_vector(a)
    vb = _as_vector(b)
    if va.shape != vb.shape:
        raise DataError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    if kind is SimilarityKind.COSINE:
        na = np.sqrt(np.sum(va * va))
        nb = np.sqrt(np.sum(vb * vb))
        if na == 0.0 or nb == 0.0:
            raise DataError("cosine similarity is undefined for a zero vector")
        return float(np.sum(va * vb) / (na * nb))
    if kind is SimilarityKind.EUCLIDEAN:
        dist = np.sqrt(np.sum((va - vb) ** 2))
        return float(1.0 / (1.0 + dist))
    dist = np.sum(np.abs(va - vb))
    return float(1.0 / (1.0 + dist))


def _pairwise_values(K: np.ndarray, Q: np.ndarray, kind: SimilarityKind) -> np.ndarray:
    """(n,d) x (m,d) -> (n,m). One column per query; see module docstring."""
    n, m = K.shape[0], Q.shape[0]
    out = np.empty((n, m), dtype=np.float64)
    if kind is SimilarityKind.COSINE:
        kn = np.sqrt(np.sum(K * K, axis=1))
        if np.any(kn == 0.0):
            raise DataError(
                f"cosine similarity is undefined for a zero vector (key row {int(np.argmin(kn))})"
            )
        for j in range(m):
            q = Q[j]
            qn = np.sqrt(np.sum(q * q))
            if qn == 0.0:
                raise DataError(
                    f"cosine similarity is undefined for a zero vector (query row {j})"
                )
            out[:, j] = np.sum(K * q, axis=1) / (kn * qn)
    elif kind is SimilarityKind.EUCLIDEAN:
        for j in range(m):
            dist = np.sqrt(np.sum((K - Q[j]) ** 2, axis=1))
            out[:, j] = 1.0 / (1.0 + dist)
    else:
        for j in range(m):
            dist = np.sum(np.abs(K - Q[j]), axis=1)
            out[:, j] = 1.0 / (1.0 + dist)
    return out


def pairwise_matrix(
    keys: EmbeddingSet,
    queries: EmbeddingSet,
    kind: SimilarityKind = SimilarityKind.COSINE,
) -> ScoreMatrix:
    """All key/query base similarities as a ScoreMatrix."""
    if keys.dimension != queries.dimension:
        raise DataError(
            f"dimension mismatch: keys d={keys.dimension}, queries d={queries.dimension}"
        )
    values = _pairwise_values(keys.matrix, queries.matrix, kind)
    return ScoreMatrix(values, keys.ids, queries.ids, score="plain")
