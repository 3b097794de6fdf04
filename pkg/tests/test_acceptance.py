"""End-to-end acceptance checks, one test per guaranteed behavior.

Each test is self-contained and pins its tolerance and runtime budget, so a
single `pytest -v tests/test_acceptance.py` run gives one pass/fail line per
guarantee.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score, v_measure_score

from surprisim.classify import classify, evaluate
from surprisim.cluster import adjusted_rand, surprise_assign, v_measure
from surprisim.experiments import StudySpec, crossover_study
from surprisim.mixed import MixConfig, crossover_weight, fit_rescale
from surprisim.stats import (
    QueryStats,
    StatsEstimator,
    surprise,
    surprise_matrix,
)
from surprisim.synth import contrast_dataset, embeddings_with_similarities, two_blobs
from surprisim.train import objective_and_gradient, train
from surprisim.vectors import SimilarityKind

from conftest import records_from_arrays


def _stats(mu: float, sigma: float) -> QueryStats:
    return QueryStats("", mu, sigma, ensemble_size=10)


# Published score table distilled to (psi, mu, sigma) -> surprise x100 rows.
SCORE_TABLE = [
    (1.000, 0.785, 0.023, 100.0),
    (0.849, 0.770, 0.022, 100.0),
    (0.833, 0.780, 0.021, 99.5),
    (0.830, 0.780, 0.022, 98.8),
    (0.850, 0.805, 0.020, 98.7),
    (0.852, 0.811, 0.020, 98.0),
    (0.850, 0.809, 0.021, 97.4),
]


def test_surprise_reproduces_published_score_table():
    start = time.perf_counter()
    for psi, mu, sigma, expected in SCORE_TABLE:
        got = 100.0 * surprise(psi, _stats(mu, sigma))
        assert got == pytest.approx(expected, abs=0.5), (psi, mu, sigma)
    assert time.perf_counter() - start < 1.0


def test_surprise_matches_monte_carlo_gaussian_cdf():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    for _ in range(50):
        mu = float(rng.uniform(0.0, 1.0))
        sigma = float(rng.uniform(0.005, 0.2))
        psi = mu + float(rng.uniform(-3.0, 3.0)) * sigma
        samples = rng.normal(mu, sigma, size=1_000_000)
        empirical = float(np.mean(samples <= psi))
        assert abs(surprise(psi, _stats(mu, sigma)) - empirical) <= 0.002
    assert time.perf_counter() - start < 30.0


def test_rescale_map_contract_on_random_ensembles():
    rng = np.random.default_rng(7)
    grid = np.linspace(0.0, 1.0, 101)
    for _ in range(100):
        values = rng.uniform(0.0, 1.0, size=int(rng.integers(3, 60)))
        m = fit_rescale(values)
        assert not m.identity_fallback
        assert m.apply(np.array([0.0]))[0] == pytest.approx(0.0, abs=1e-12)
        assert m.apply(np.array([1.0]))[0] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(m.apply(grid)) >= -1e-12)
        assert float(np.mean(m.apply(values))) == pytest.approx(0.5, abs=1e-9)
    worked = fit_rescale(np.array([0.2, 0.4, 0.6]))
    assert worked.breakpoint_out == pytest.approx(7.0 / 13.0, abs=1e-9)


def test_crossover_weight_curve_endpoints():
    assert crossover_weight(0, 1000.0) == pytest.approx(0.0, abs=1e-6)
    assert crossover_weight(1000, 1000.0) == pytest.approx(0.761594, abs=1e-6)
    assert crossover_weight(7600, 1000.0) > 0.999


def test_classifier_endpoints_agree_with_raw_argmax_and_surprise_argmax():
    rng = np.random.default_rng(99)
    for _ in range(1000):
        n_k = int(rng.integers(2, 9))
        n_q = int(rng.integers(2, 6))
        d = int(rng.integers(3, 8))
        keys = records_from_arrays([f"k{i}" for i in range(n_k)], rng.standard_normal((n_k, d)))
        queries = records_from_arrays([f"q{j}" for j in range(n_q)], rng.standard_normal((n_q, d)))

        plain = classify(keys, queries, mix=MixConfig.fixed(0.0))
        unit_k = keys.matrix / np.linalg.norm(keys.matrix, axis=1)[:, None]
        unit_q = queries.matrix / np.linalg.norm(queries.matrix, axis=1)[:, None]
        raw_argmax = np.argmax(unit_k @ unit_q.T, axis=1)
        assert [p.label for p in plain] == [f"q{j}" for j in raw_argmax]

        surfd = classify(keys, queries, mix=MixConfig.fixed(1.0))
        surp = surprise_matrix(keys, queries, keys, SimilarityKind.COSINE, StatsEstimator.GAUSSIAN)
        surp_argmax = np.argmax(surp.values, axis=1)
        assert [p.label for p in surfd] == [f"q{j}" for j in surp_argmax]


def test_adapter_gradient_matches_finite_differences():
    rng = np.random.default_rng(512)
    h = 1e-5
    for _ in range(20):
        d = int(rng.integers(2, 9))
        n = int(rng.integers(2, 10))
        K = rng.uniform(0.1, 1.0, size=(n, d))
        Q = rng.uniform(0.1, 1.0, size=(n, d))
        t = rng.uniform(0.0, 1.0, size=n)
        gamma = float(rng.choice([0.0, 1.0, 2.0]))
        W = np.eye(d) + 0.05 * rng.standard_normal((d, d))
        _, grad, _ = objective_and_gradient(W, K, Q, t, gamma)
        numeric = np.zeros_like(W)
        for i in range(d):
            for j in range(d):
                Wp, Wm = W.copy(), W.copy()
                Wp[i, j] += h
                Wm[i, j] -= h
                fp, _, _ = objective_and_gradient(Wp, K, Q, t, gamma)
                fm, _, _ = objective_and_gradient(Wm, K, Q, t, gamma)
                numeric[i, j] = (fp - fm) / (2.0 * h)
        denom = max(np.linalg.norm(grad), np.linalg.norm(numeric), 1e-12)
        assert np.linalg.norm(grad - numeric) / denom <= 1e-4


def test_trainer_converges_and_transfers_deterministically():
    start = time.perf_counter()
    data = two_blobs(dim=16, per_class=20, angle_sigma=0.5, seed=11)
    holdout = two_blobs(dim=16, per_class=20, angle_sigma=0.5, seed=99)
    first = train(data.keys, data.gold, data.queries)
    assert first.converged, "batch cross entropy never dropped below 0.3"
    assert first.epochs_run <= 200
    assert first.history[-1].mean_ce < 0.3
    adapted_keys = first.adapter.transform_set(holdout.keys)
    adapted_queries = first.adapter.transform_set(holdout.queries)
    preds = classify(adapted_keys, adapted_queries, mix=MixConfig.fixed(1.0))
    assert evaluate(preds, holdout.gold).accuracy >= 0.95
    second = train(data.keys, data.gold, data.queries)
    assert np.array_equal(first.adapter.weight, second.adapter.weight)
    assert first.history == second.history
    assert time.perf_counter() - start < 60.0


def test_cluster_metrics_match_oracles_and_fixture_flips_once():
    rng = np.random.default_rng(314)
    for _ in range(100):
        n = int(rng.integers(4, 40))
        gold = rng.integers(0, int(rng.integers(2, 6)), size=n)
        pred = rng.integers(0, int(rng.integers(2, 6)), size=n)
        assert v_measure(gold, pred) == pytest.approx(v_measure_score(gold, pred), abs=1e-9)
        assert adjusted_rand(gold, pred) == pytest.approx(
            adjusted_rand_score(gold, pred), abs=1e-9
        )
        relabel = rng.permutation(pred.max() + 1)
        assert v_measure(gold, relabel[pred]) == pytest.approx(v_measure(gold, pred), abs=1e-12)
        assert adjusted_rand(gold, relabel[pred]) == pytest.approx(
            adjusted_rand(gold, pred), abs=1e-12
        )
    elements, queries = embeddings_with_similarities(
        [(0.92, 0.30), (0.90, 0.25), (0.88, 0.20), (0.80, 0.85), (0.86, 0.84)],
        math.pi / 3,
    )
    cosine = np.argmax(elements.matrix @ queries.matrix.T, axis=1)
    surp = surprise_assign(elements, queries.matrix)
    assert int(np.sum(cosine != surp)) == 1


def test_crossover_study_ratio_falls_below_one_at_large_sizes():
    data = contrast_dataset(n_docs=2500, dim=16, seed=5)
    result = crossover_study(data.keys, data.queries, data.gold, StudySpec())
    ratios = dict(result.f1_ratio)
    for size in (243, 729, 2187):
        assert size in ratios, f"study produced no ratio for size {size}"
        assert ratios[size] < 1.0, f"cosine/surprise F1 ratio {ratios[size]} at size {size}"
