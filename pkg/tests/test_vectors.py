"""Similarity kernels and embedding-set container behavior."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surprisim.errors import DataError, UsageError
from surprisim.vectors import (
    EmbeddingRecord,
    EmbeddingSet,
    SimilarityKind,
    pairwise_matrix,
    similarity,
)

from conftest import naive_cosine, records_from_arrays

# hand-computed: dot = 4 + 10 + 18 = 32, |A|^2 = 14, |B|^2 = 77
A = [1.0, 2.0, 3.0]
B = [4.0, 5.0, 6.0]
FROZEN_COSINE = 32.0 / math.sqrt(14.0 * 77.0)  # = 0.9746318461970762


def test_cosine_frozen_value():
    got = similarity(np.array(A), np.array(B), SimilarityKind.COSINE)
    assert got == pytest.approx(FROZEN_COSINE, abs=1e-12)
    assert got == pytest.approx(0.9746318461970762, abs=1e-12)


def test_cosine_self_similarity_is_one():
    v = np.array([0.3, -1.2, 7.0, 0.01])
    assert similarity(v, v, SimilarityKind.COSINE) == pytest.approx(1.0, abs=1e-12)


def test_cosine_orthogonal_is_zero():
    assert similarity(
        np.array([1.0, 0.0]), np.array([0.0, 5.0]), SimilarityKind.COSINE
    ) == pytest.approx(0.0, abs=1e-12)


def test_cosine_matches_pure_python_loop():
    rng = np.random.default_rng(3)
    for _ in range(50):
        d = rng.integers(1, 12)
        a = rng.standard_normal(d)
        b = rng.standard_normal(d)
        got = similarity(a, b, SimilarityKind.COSINE)
        assert got == pytest.approx(naive_cosine(a.tolist(), b.tolist()), abs=1e-12)


def test_pairwise_matches_scalar_bitwise():
    rng = np.random.default_rng(9)
    keys = records_from_arrays([f"k{i}" for i in range(5)], rng.standard_normal((5, 6)))
    queries = records_from_arrays([f"q{i}" for i in range(4)], rng.standard_normal((4, 6)))
    for kind in (SimilarityKind.COSINE, SimilarityKind.EUCLIDEAN, SimilarityKind.MANHATTAN):
        mat = pairwise_matrix(keys, queries, kind)
        assert mat.shape == (5, 4)
        assert mat.key_ids == keys.ids
        assert mat.query_ids == queries.ids
        for i, k in enumerate(keys):
            for j, q in enumerate(queries):
                # bit-identity: same arithmetic route required for both paths
                assert mat.values[i, j] == similarity(k.vector, q.vector, kind)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-10, 10), min_size=2, max_size=8),
    st.lists(st.floats(-10, 10), min_size=2, max_size=8),
    st.floats(0.1, 50.0),
)
def test_cosine_symmetry_and_scale_invariance(a, b, scale):
    n = min(len(a), len(b))
    a, b = np.array(a[:n]), np.array(b[:n])
    if np.linalg.norm(a) < 1e-6 or np.linalg.norm(b) < 1e-6:
        return
    s_ab = similarity(a, b, SimilarityKind.COSINE)
    s_ba = similarity(b, a, SimilarityKind.COSINE)
    assert s_ab == pytest.approx(s_ba, abs=1e-12)
    assert similarity(scale * a, b, SimilarityKind.COSINE) == pytest.approx(s_ab, abs=1e-9)


def test_euclidean_similarity_frozen():
    # distance 5 -> 1/(1+5) = 1/6
    got = similarity(np.array([0.0, 0.0]), np.array([3.0, 4.0]), SimilarityKind.EUCLIDEAN)
    assert got == pytest.approx(1.0 / 6.0, abs=1e-12)


def test_manhattan_similarity_frozen():
    # distance 7 -> 1/(1+7) = 1/8
    got = similarity(np.array([0.0, 0.0]), np.array([3.0, 4.0]), SimilarityKind.MANHATTAN)
    assert got == pytest.approx(1.0 / 8.0, abs=1e-12)


def test_distance_similarities_bounded_and_identity():
    rng = np.random.default_rng(4)
    for kind in (SimilarityKind.EUCLIDEAN, SimilarityKind.MANHATTAN):
        for _ in range(30):
            a = rng.standard_normal(5)
            b = rng.standard_normal(5)
            s = similarity(a, b, kind)
            assert 0.0 < s <= 1.0
            assert similarity(a, a, kind) == pytest.approx(1.0, abs=1e-12)


def test_zero_vector_cosine_rejected():
    with pytest.raises(DataError):
        similarity(np.zeros(3), np.array([1.0, 0.0, 0.0]), SimilarityKind.COSINE)


def test_dimension_mismatch_rejected():
    with pytest.raises(DataError):
        similarity(np.array([1.0, 2.0]), np.array([1.0, 2.0, 3.0]), SimilarityKind.COSINE)


def test_kind_parse_aliases():
    assert SimilarityKind.parse("cosine") is SimilarityKind.COSINE
    assert SimilarityKind.parse("COSINE") is SimilarityKind.COSINE
    assert SimilarityKind.parse("euclidean") is SimilarityKind.EUCLIDEAN
    assert SimilarityKind.parse("euclidean-similarity") is SimilarityKind.EUCLIDEAN
    assert SimilarityKind.parse("manhattan") is SimilarityKind.MANHATTAN
    assert SimilarityKind.parse("Manhattan-Similarity") is SimilarityKind.MANHATTAN
    with pytest.raises(UsageError):
        SimilarityKind.parse("hamming")


class TestEmbeddingSet:
    def test_preserves_insertion_order_and_lookup(self):
        es = records_from_arrays(["b", "a", "c"], np.eye(3))
        assert [r.id for r in es] == ["b", "a", "c"]
        assert es[1].id == "a"
        assert es.get("c").vector[2] == 1.0
        assert len(es) == 3

    def test_duplicate_ids_rejected(self):
        with pytest.raises(DataError):
            records_from_arrays(["x", "x"], np.eye(2))

    def test_dimension_drift_rejected(self):
        with pytest.raises(DataError):
            EmbeddingSet(
                [
                    EmbeddingRecord("a", np.array([1.0, 0.0])),
                    EmbeddingRecord("b", np.array([1.0, 0.0, 0.0])),
                ]
            )

    def test_empty_set_rejected(self):
        with pytest.raises(DataError):
            EmbeddingSet([])

    def test_zero_vector_stored_but_rejected_by_cosine(self):
        # distance kinds tolerate a zero vector; cosine cannot
        es = records_from_arrays(["a", "b"], [[1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(DataError):
            pairwise_matrix(es, es, SimilarityKind.COSINE)
        out = pairwise_matrix(es, es, SimilarityKind.EUCLIDEAN)
        assert out.values[1, 1] == pytest.approx(1.0)

    def test_non_finite_vector_rejected(self):
        with pytest.raises(DataError):
            records_from_arrays(["a"], [[1.0, math.inf]])

    def test_subset_by_position_keeps_given_order(self):
        es = records_from_arrays(["a", "b", "c", "d"], np.eye(4))
        sub = es.subset([3, 1])
        assert [r.id for r in sub] == ["d", "b"]
        # a repeated position duplicates an id, which the constructor rejects
        with pytest.raises(DataError):
            es.subset([0, 0])

    def test_matrix_is_read_only_view(self):
        es = records_from_arrays(["a", "b"], [[1.0, 2.0], [3.0, 4.0]])
        m = es.matrix
        assert m.shape == (2, 2)
        with pytest.raises(ValueError):
            m[0, 0] = 99.0
