"""JSONL embedding and label files plus the resolved run configuration.

Embedding files hold one JSON object per line with an "id", an optional
"text", and a "vector" array. Parsing is strict: any malformed line aborts
with its line number, vector dimensions may not drift, ids may not repeat,
and non-finite tokens are rejected. Floats are written with Python's
shortest round-trip repr, so save followed by load reproduces every vector
bit for bit.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .classify import DEFAULT_TEMPLATE
from .errors import DataError, UsageError
from .experiments import DEFAULT_ENSEMBLE_SIZES, DEFAULT_SHOT_COUNTS
from .stats import StatsEstimator
from .vectors import EmbeddingRecord, EmbeddingSet, SimilarityKind


def _reject_constant(token: str):
    raise ValueError(f"non-finite token {token!r} is not allowed")


def _parse_line(path, lineno: int, line: str) -> dict:
    stripped = line.strip()
    if not stripped:
        raise DataError(f"{path}:{lineno}: blank line")
    try:
        obj = json.loads(stripped, parse_constant=_reject_constant)
    except ValueError as exc:
        raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise DataError(f"{path}:{lineno}: expected a JSON object")
    return obj


def _open_for_read(path: Path):
    try:
        return open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _open_for_write(path: Path):
    try:
        return open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror or exc}") from exc


def load_embeddings(path) -> EmbeddingSet:
    path = Path(path)
    records: list[EmbeddingRecord] = []
    seen: dict[str, int] = {}
    dim: int | None = None
    with _open_for_read(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            obj = _parse_line(path, lineno, line)
            unknown = set(obj) - {"id", "text", "vector"}
            if unknown:
                raise DataError(f"{path}:{lineno}: unknown keys {sorted(unknown)}")
            rec_id = obj.get("id")
            if not isinstance(rec_id, str) or not rec_id:
                raise DataError(f"{path}:{lineno}: 'id' must be a non-empty string")
            if rec_id in seen:
                raise DataError(
                    f"{path}:{lineno}: duplicate id {rec_id!r} (first seen on line {seen[rec_id]})"
                )
            seen[rec_id] = lineno
            text = obj.get("text")
            if text is not None and not isinstance(text, str):
                raise DataError(f"{path}:{lineno}: 'text' must be a string")
            raw = obj.get("vector")
            if not isinstance(raw, list) or not raw:
                raise DataError(f"{path}:{lineno}: 'vector' must be a non-empty array")
            if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in raw):
                raise DataError(f"{path}:{lineno}: 'vector' must contain only numbers")
            vec = np.asarray(raw, dtype=np.float64)
            if not np.all(np.isfinite(vec)):
                raise DataError(f"{path}:{lineno}: vector contains non-finite values")
            if dim is None:
                dim = vec.size
            elif vec.size != dim:
                raise DataError(
                    f"{path}:{lineno}: vector dimension {vec.size} differs from {dim}"
                )
            records.append(EmbeddingRecord(rec_id, vec, text))
    if not records:
        raise DataError(f"{path}: empty embedding file")
    return EmbeddingSet(records)


def save_embeddings(embeddings: EmbeddingSet, path) -> None:
    path = Path(path)
    with _open_for_write(path) as fh:
        for rec in embeddings:
            obj: dict[str, Any] = {"id": rec.id}
            if rec.text is not None:
                obj["text"] = rec.text
            obj["vector"] = [float(v) for v in rec.vector]
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def load_labels(path) -> dict[str, str]:
    path = Path(path)
    labels: dict[str, str] = {}
    seen: dict[str, int] = {}
    with _open_for_read(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            obj = _parse_line(path, lineno, line)
            unknown = set(obj) - {"id", "label"}
            if unknown:
                raise DataError(f"{path}:{lineno}: unknown keys {sorted(unknown)}")
            rec_id = obj.get("id")
            label = obj.get("label")
            if not isinstance(rec_id, str) or not rec_id:
                raise DataError(f"{path}:{lineno}: 'id' must be a non-empty string")
            if not isinstance(label, str) or not label:
                raise DataError(f"{path}:{lineno}: 'label' must be a non-empty string")
            if rec_id in seen:
                raise DataError(
                    f"{path}:{lineno}: duplicate id {rec_id!r} (first seen on line {seen[rec_id]})"
                )
            seen[rec_id] = lineno
            labels[rec_id] = label
    if not labels:
        raise DataError(f"{path}: empty label file")
    return labels


def save_labels(labels: Mapping[str, str], path) -> None:
    path = Path(path)
    with _open_for_write(path) as fh:
        for rec_id, label in labels.items():
            fh.write(json.dumps({"id": rec_id, "label": label}, ensure_ascii=False) + "\n")


def check_labels_resolvable(labels: Mapping[str, str], embeddings: EmbeddingSet) -> None:
    """Every labeled id must exist in the paired embedding file."""
    unresolved = [i for i in labels if i not in embeddings]
    if unresolved:
        raise DataError(
            f"label ids not present in the embedding file: {unresolved[:5]}"
        )


@dataclass
class RunConfig:
    """Every knob of a run; flags override a config file, which overrides these defaults."""

    kind: str = "cosine"
    estimator: str = "gaussian-moments"
    template: str = DEFAULT_TEMPLATE
    w: float | None = None
    n_cross: float = 1000.0
    epsilon: float = 0.05
    gamma: float = 1.0
    delta: float = 1e-10
    learning_rate: float = 1e-4
    weight_decay: float = 0.01
    ce_threshold: float = 0.3
    batch_size: int = 16
    max_epochs: int = 200
    seed: int = 0
    repeats: int = 10
    master_seed: int = 0
    k: int = 2
    max_iter: int = 300
    tol: float = 1e-6
    balanced: bool = True
    ensemble_sizes: tuple[int, ...] = DEFAULT_ENSEMBLE_SIZES
    shot_counts: tuple[int, ...] = DEFAULT_SHOT_COUNTS

    @classmethod
    def resolve(cls, config_path=None, overrides: Mapping[str, Any] | None = None) -> "RunConfig":
        values: dict[str, Any] = {}
        fields = {f.name: f for f in dataclasses.fields(cls)}
        if config_path is not None:
            try:
                with open(config_path, "r", encoding="utf-8") as fh:
                    loaded = json.load(fh)
            except OSError as exc:
                raise UsageError(f"cannot read config file: {exc}") from None
            except ValueError as exc:
                raise DataError(f"{config_path}: invalid JSON: {exc}") from None
            if not isinstance(loaded, dict):
                raise DataError(f"{config_path}: config must be a JSON object")
            unknown = set(loaded) - set(fields)
            if unknown:
                raise UsageError(f"unknown config keys: {sorted(unknown)}")
            values.update(loaded)
        for key, value in (overrides or {}).items():
            if key not in fields:
                raise UsageError(f"unknown config key: {key!r}")
            if value is not None:
                values[key] = value
        for name in ("ensemble_sizes", "shot_counts"):
            if name in values:
                values[name] = tuple(int(v) for v in values[name])
        config = cls(**values)
        config.similarity_kind()
        config.stats_estimator()
        if config.w is not None and not (0.0 <= config.w <= 1.0):
            raise UsageError("w must lie in [0, 1]")
        return config

    def similarity_kind(self) -> SimilarityKind:
        return SimilarityKind.parse(self.kind)

    def stats_estimator(self) -> StatsEstimator:
        return StatsEstimator.parse(self.estimator)

    def mix(self):
        from .mixed import MixConfig

        if self.w is not None:
            return MixConfig.fixed(self.w)
        return MixConfig.crossover(self.n_cross)

    def to_json(self) -> str:
        payload = dataclasses.asdict(self)
        payload["ensemble_sizes"] = list(self.ensemble_sizes)
        payload["shot_counts"] = list(self.shot_counts)
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8", newline="\n")
