"""Seeded comparison studies and their report files.

Two protocols are provided. The crossover study subsamples ensembles of
growing size out of the test set and scores the whole test set once with
the plain similarity (w=0) and once with the surprise score (w=1), ten
seeded repeats per size. The few-shot study samples small training sets,
fits the linear adapter, and evaluates the adapted embeddings with the
plain and the mixed score.

Subsample seeds are a pure function of (master_seed, size, repeat) via
numpy's SeedSequence, so any single cell can be reproduced in isolation.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .classify import classify, evaluate
from .errors import DataError, UsageError
from .mixed import MixConfig
from .stats import StatsEstimator
from .train import TrainConfig, train
from .vectors import EmbeddingSet, SimilarityKind

DEFAULT_ENSEMBLE_SIZES = (3, 9, 27, 81, 243, 729, 2187)
DEFAULT_SHOT_COUNTS = (3, 6, 9, 12, 15, 18, 21)

CSV_HEADER = "variant,seed,size,accuracy,macro_f1,wall_time_s"


@dataclass(frozen=True)
class StudySpec:
    variants: tuple[str, ...] = ("cosine", "surprise")
    repeats: int = 10
    ensemble_sizes: tuple[int, ...] = DEFAULT_ENSEMBLE_SIZES
    shot_counts: tuple[int, ...] = DEFAULT_SHOT_COUNTS
    balanced: bool = True
    master_seed: int = 0
    n_cross: float = 1000.0
    kind: SimilarityKind = SimilarityKind.COSINE
    estimator: StatsEstimator = StatsEstimator.GAUSSIAN

    def __post_init__(self):
        if self.repeats < 1:
            raise UsageError("repeats must be at least 1")
        if self.master_seed < 0:
            raise UsageError("master seed must be non-negative")
        if any(s < 1 for s in self.ensemble_sizes) or any(
            k < 1 for k in self.shot_counts
        ):
            raise UsageError("ensemble sizes and shot counts must be positive")


@dataclass(frozen=True)
class RunRecord:
    variant: str
    seed: int
    size: int
    accuracy: float
    macro_f1: float
    wall_time_s: float


@dataclass(frozen=True)
class SummaryRow:
    variant: str
    size: int
    runs: int
    mean_accuracy: float
    std_accuracy: float
    mean_macro_f1: float
    std_macro_f1: float


@dataclass(frozen=True)
class StudyResult:
    records: tuple[RunRecord, ...]
    summary: tuple[SummaryRow, ...]
    # size -> mean F1 cosine / mean F1 surprise, when both variants ran
    f1_ratio: tuple[tuple[int, float], ...] = ()


def derived_seed(master_seed: int, size: int, repeat: int) -> int:
    """Deterministic per-cell seed; reproducible without running other cells."""
    seq = np.random.SeedSequence([int(master_seed), int(size), int(repeat)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    mean = float(np.mean(arr))
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return mean, std


def summarize(records: Sequence[RunRecord]) -> tuple[SummaryRow, ...]:
    if not records:
        raise DataError("cannot summarize an empty record list")
    cells: dict[tuple[str, int], list[RunRecord]] = {}
    for rec in records:
        cells.setdefault((rec.variant, rec.size), []).append(rec)
    rows = []
    for (variant, size), cell in sorted(cells.items()):
        mean_acc, std_acc = _mean_std([r.accuracy for r in cell])
        mean_f1, std_f1 = _mean_std([r.macro_f1 for r in cell])
        rows.append(
            SummaryRow(variant, size, len(cell), mean_acc, std_acc, mean_f1, std_f1)
        )
    return tuple(rows)


def _f1_ratio(summary: Sequence[SummaryRow]) -> tuple[tuple[int, float], ...]:
    by_cell = {(row.variant, row.size): row for row in summary}
    sizes = sorted({row.size for row in summary})
    out = []
    for size in sizes:
        cos = by_cell.get(("cosine", size))
        sur = by_cell.get(("surprise", size))
        if cos is None or sur is None or sur.mean_macro_f1 == 0.0:
            continue
        out.append((size, cos.mean_macro_f1 / sur.mean_macro_f1))
    return tuple(out)


def crossover_study(
    keys: EmbeddingSet,
    queries: EmbeddingSet,
    gold: Mapping[str, str],
    spec: StudySpec | None = None,
) -> StudyResult:
    """Plain vs surprise F1 as a function of the subsampled ensemble size."""
    spec = spec or StudySpec()
    too_big = [s for s in spec.ensemble_sizes if s > len(keys)]
    if too_big:
        raise UsageError(
            f"ensemble sizes {too_big} exceed the test set size {len(keys)}"
        )
    mixes = {
        "cosine": MixConfig.fixed(0.0),
        "surprise": MixConfig.fixed(1.0),
        "mixed": MixConfig.crossover(spec.n_cross),
    }
    unknown = [v for v in spec.variants if v not in mixes]
    if unknown:
        raise UsageError(f"unknown study variants: {unknown}")
    records: list[RunRecord] = []
    for size in spec.ensemble_sizes:
        for repeat in range(spec.repeats):
            seed = derived_seed(spec.master_seed, size, repeat)
            rng = np.random.default_rng(seed)
            ensemble = keys.subset(rng.choice(len(keys), size=size, replace=False))
            for variant in spec.variants:
                start = time.perf_counter()
                preds = classify(
                    keys,
                    queries,
                    ensemble=ensemble,
                    mix=mixes[variant],
                    kind=spec.kind,
                    estimator=spec.estimator,
                )
                result = evaluate(preds, gold)
                wall = time.perf_counter() - start
                records.append(
                    RunRecord(variant, seed, size, result.accuracy, result.macro_f1, wall)
                )
    summary = summarize(records)
    return StudyResult(tuple(records), summary, _f1_ratio(summary))


def _sample_balanced(
    ids_by_label: Mapping[str, list[str]], k: int, rng: np.random.Generator
) -> list[str]:
    sample: list[str] = []
    for label in sorted(ids_by_label):
        ids = ids_by_label[label]
        if len(ids) < k:
            raise UsageError(
                f"label {label!r} has only {len(ids)} training examples, need {k}"
            )
        picked = rng.choice(len(ids), size=k, replace=False)
        sample.extend(ids[i] for i in picked)
    return sample


def _sample_total(all_ids: list[str], total: int, rng: np.random.Generator) -> list[str]:
    if len(all_ids) < total:
        raise UsageError(
            f"training set has only {len(all_ids)} labeled examples, need {total}"
        )
    picked = rng.choice(len(all_ids), size=total, replace=False)
    return [all_ids[i] for i in picked]


def fewshot_study(
    train_keys: EmbeddingSet,
    train_gold: Mapping[str, str],
    test_keys: EmbeddingSet,
    test_gold: Mapping[str, str],
    queries: EmbeddingSet,
    spec: StudySpec | None = None,
    train_config: TrainConfig | None = None,
) -> StudyResult:
    """Adapter training curves over the shot counts.

    Balanced sampling draws k examples per label; unbalanced draws
    k * n_labels examples uniformly out of the labeled pool. Both variants
    share the adapter of a run: training is score-agnostic, the variants
    differ only in how the adapted embeddings are scored.
    """
    spec = spec or StudySpec()
    base_config = train_config or TrainConfig()
    labeled_ids = [i for i in train_keys.ids if i in train_gold]
    if not labeled_ids:
        raise DataError("no training key has a gold label")
    ids_by_label: dict[str, list[str]] = {}
    for i in labeled_ids:
        ids_by_label.setdefault(train_gold[i], []).append(i)
    n_labels = len(queries)
    pos_of = {rec_id: pos for pos, rec_id in enumerate(train_keys.ids)}
    records: list[RunRecord] = []
    for k in spec.shot_counts:
        for repeat in range(spec.repeats):
            seed = derived_seed(spec.master_seed, k, repeat)
            rng = np.random.default_rng(seed)
            if spec.balanced:
                sample_ids = _sample_balanced(ids_by_label, k, rng)
            else:
                sample_ids = _sample_total(labeled_ids, k * n_labels, rng)
            subset = train_keys.subset([pos_of[i] for i in sample_ids])
            start = time.perf_counter()
            result = train(
                subset, train_gold, queries, replace(base_config, seed=seed)
            )
            train_wall = time.perf_counter() - start
            adapted_keys = result.adapter.transform_set(test_keys)
            adapted_queries = result.adapter.transform_set(queries)
            for variant in spec.variants:
                mix = (
                    MixConfig.fixed(0.0)
                    if variant == "cosine"
                    else MixConfig.crossover(spec.n_cross)
                )
                start = time.perf_counter()
                preds = classify(
                    adapted_keys,
                    adapted_queries,
                    mix=mix,
                    kind=spec.kind,
                    estimator=spec.estimator,
                )
                metrics = evaluate(preds, test_gold)
                wall = train_wall + (time.perf_counter() - start)
                records.append(
                    RunRecord(variant, seed, k, metrics.accuracy, metrics.macro_f1, wall)
                )
    summary = summarize(records)
    return StudyResult(tuple(records), summary, _f1_ratio(summary))


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def emit_report(
    records: Sequence[RunRecord],
    fmt: str = "csv",
    path: str | Path = "records.csv",
) -> tuple[Path, Path]:
    """Write the run records plus a companion plot-data file.

    The plot data holds one block per variant with (size, mean F1, std F1)
    triples. Output is deterministic: records are sorted, floats print with
    six decimals, files use UTF-8 with LF endings.
    """
    if not records:
        raise DataError("cannot emit a report for an empty record list")
    if fmt not in ("csv", "text"):
        raise UsageError(f"unknown report format: {fmt!r}")
    path = Path(path)
    rows = sorted(records, key=lambda r: (r.variant, r.size, r.seed))
    if fmt == "csv":
        lines = [CSV_HEADER]
        for r in rows:
            lines.append(
                f"{r.variant},{r.seed},{r.size},{_fmt(r.accuracy)},{_fmt(r.macro_f1)},{_fmt(r.wall_time_s)}"
            )
    else:
        header = ("variant", "seed", "size", "accuracy", "macro_f1", "wall_time_s")
        table = [
            (
                r.variant,
                str(r.seed),
                str(r.size),
                _fmt(r.accuracy),
                _fmt(r.macro_f1),
                _fmt(r.wall_time_s),
            )
            for r in rows
        ]
        widths = [
            max(len(header[c]), max(len(row[c]) for row in table))
            for c in range(len(header))
        ]
        lines = [
            "  ".join(h.ljust(widths[c]) for c, h in enumerate(header)).rstrip()
        ]
        for row in table:
            lines.append(
                "  ".join(v.ljust(widths[c]) for c, v in enumerate(row)).rstrip()
            )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")

    plot_path = path.with_name(path.stem + "_plot.dat")
    blocks = []
    for row in summarize(records):
        blocks.append((row.variant, row.size, row.mean_macro_f1, row.std_macro_f1))
    plot_lines = []
    current = None
    for variant, size, mean, std in blocks:
        if variant != current:
            if current is not None:
                plot_lines.append("")
            plot_lines.append(f"# series: {variant}")
            current = variant
        plot_lines.append(f"{size} {_fmt(mean)} {_fmt(std)}")
    plot_path.write_text("\n".join(plot_lines) + "\n", encoding="utf-8", newline="\n")
    return path, plot_path
