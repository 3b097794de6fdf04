"""Shared fixtures and independent-oracle helpers for the test suite."""

from __future__ import annotations

import contextlib
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from surprisim.vectors import EmbeddingRecord, EmbeddingSet


def naive_cosine(a, b) -> float:
    """Pure-Python cosine, independent of the library's numpy kernels."""
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    return dot / (na * nb)


def normal_cdf(z: float) -> float:
    # reference CDF route through math.erf, not scipy
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


def two_pass_mean_std(values):
    """Textbook two-pass sample mean/std, used to check aggregation."""
    n = len(values)
    mean = sum(values) / n
    if n < 2:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def bisect_rescale_height(values, b, lo=0.0, hi=1.0, iters=200):
    """Solve for the breakpoint height by bisection on the mapped mean.

    Independent of the closed-form solution in the library: evaluates the
    piecewise map directly and halves the bracket on mean(f(x)) - 0.5.
    """

    def mapped_mean(c):
        total = 0.0
        for x in values:
            x = min(max(x, 0.0), 1.0)
            if x >= 1.0:
                total += 1.0
            elif x <= b:
                total += c * (x / b)
            else:
                total += c + (1.0 - c) * ((x - b) / (1.0 - b))
        return total / len(values)

    f_lo = mapped_mean(lo) - 0.5
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        f_mid = mapped_mean(mid) - 0.5
        if (f_lo <= 0) == (f_mid <= 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def records_from_arrays(ids, matrix, texts=None) -> EmbeddingSet:
    texts = texts or [None] * len(ids)
    return EmbeddingSet(
        [EmbeddingRecord(i, np.asarray(v, dtype=float), t) for i, v, t in zip(ids, matrix, texts)]
    )


def write_jsonl(path: Path, rows) -> Path:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    return path


def write_embeddings_file(path: Path, embeddings: EmbeddingSet) -> Path:
    rows = []
    for rec in embeddings:
        row = {"id": rec.id, "vector": [float(x) for x in rec.vector]}
        if rec.text is not None:
            row["text"] = rec.text
        rows.append(row)
    return write_jsonl(path, rows)


def write_labels_file(path: Path, gold: dict) -> Path:
    return write_jsonl(path, [{"id": k, "label": v} for k, v in gold.items()])


def run_cli(argv):
    """Run the CLI in-process; returns (exit_code, stdout, stderr)."""
    from surprisim import cli

    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli.main(list(argv))
    return code, out.getvalue(), err.getvalue()


@pytest.fixture()
def blob_data():
    from surprisim.synth import two_blobs

    return two_blobs(dim=16, per_class=20, angle_sigma=0.5, seed=11)


@pytest.fixture()
def blob_holdout():
    from surprisim.synth import two_blobs

    return two_blobs(dim=16, per_class=20, angle_sigma=0.5, seed=99)


@pytest.fixture()
def tight_blob_data():
    # narrow enough that every method should separate the classes exactly
    from surprisim.synth import two_blobs

    return two_blobs(dim=16, per_class=20, angle_sigma=0.2, seed=11)
