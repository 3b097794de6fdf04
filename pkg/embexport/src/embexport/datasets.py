"""Corpus access: benchmark datasets by name, or local .txt/.jsonl files.

A local .jsonl corpus holds one object per line with a "text" field and an
optional "label"; a .txt corpus holds one document per line with no labels.
Benchmark corpora are fetched through the `datasets` package and normalized
to the same shape. Every loader reports a version string (dataset version or
content digest) so the manifest can pin what was embedded.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import DataError, UnavailableError, UsageError

_CAMEL = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")
_SET_SPLIT = re.compile(r"^(\w+)\[(\d+)\]$")

_STARS = {"1": "one star", "2": "two stars", "3": "three stars", "4": "four stars", "5": "five stars"}


@dataclass(frozen=True)
class LoadedCorpus:
    name: str
    version: str
    split: str
    texts: tuple[str, ...]
    labels: tuple[str, ...] | None
    label_names: tuple[str, ...]
    expansion: dict[str, str]
    text_field: str


def _expand_camel(name: str) -> str:
    return _CAMEL.sub(" ", name).replace("_", " ").lower()


def _join_fields(*parts: str) -> str:
    return " ".join(p.strip() for p in parts if p and p.strip())


# name -> hub path, config, text extraction, label field, label expansion rule
_BENCHMARKS = {
    "ag_news": {
        "path": "ag_news",
        "config": None,
        "text": lambda ex: ex["text"],
        "text_field": "text",
        "label_field": "label",
        "expand": lambda n: {"Sci/Tech": "science and technology"}.get(n, n.lower()),
    },
    "yahoo_answers": {
        "path": "yahoo_answers_topics",
        "config": None,
        "text": lambda ex: _join_fields(
            ex["question_title"], ex["question_content"], ex["best_answer"]
        ),
        "text_field": "question_title+question_content+best_answer",
        "label_field": "topic",
        "expand": lambda n: n.replace(" & ", " and ").lower(),
    },
    "dbpedia": {
        "path": "dbpedia_14",
        "config": None,
        "text": lambda ex: ex["content"].strip(),
        "text_field": "content",
        "label_field": "label",
        "expand": _expand_camel,
    },
    "amazon_reviews_multi": {
        "path": "amazon_reviews_multi",
        "config": "en",
        "text": lambda ex: ex["review_body"],
        "text_field": "review_body",
        "label_field": "stars",
        "expand": lambda n: _STARS.get(n, n),
    },
    "imdb": {
        "path": "imdb",
        "config": None,
        "text": lambda ex: ex["text"],
        "text_field": "text",
        "label_field": "label",
        "expand": lambda n: {"neg": "negative", "pos": "positive"}.get(n, n.lower()),
    },
    "reddit_clustering": {
        "path": "mteb/reddit-clustering",
        "config": None,
        # rows are whole clustering sets; handled specially in _load_benchmark
        "text": None,
        "text_field": "sentences",
        "label_field": "labels",
        "expand": lambda n: n.lower(),
    },
}

BENCHMARK_NAMES = tuple(sorted(_BENCHMARKS))


def load_corpus(dataset: str, split: str, limit: int | None = None) -> LoadedCorpus:
    """Load a corpus by benchmark name or local file path."""
    path = Path(dataset)
    if path.suffix in {".txt", ".jsonl"}:
        if not path.is_file():
            raise UsageError(f"corpus file not found: {dataset}")
        return _load_local(path, split, limit)
    if dataset in _BENCHMARKS:
        return _load_benchmark(dataset, split, limit)
    raise UsageError(
        f"unknown dataset {dataset!r}; pick one of {list(BENCHMARK_NAMES)} "
        "or pass a local .txt/.jsonl path"
    )


def dataset_available(dataset: str, split: str) -> bool:
    """True when the corpus can be loaded right now. Used for test skips."""
    try:
        load_corpus(dataset, split, limit=8)
    except (UnavailableError, UsageError, DataError):
        return False
    return True


def _digest(raw: bytes) -> str:
    return "sha256:" + hashlib.sha256(raw).hexdigest()[:12]


def _load_local(path: Path, split: str, limit: int | None) -> LoadedCorpus:
    raw = path.read_bytes()
    version = _digest(raw)
    if path.suffix == ".txt":
        texts = raw.decode("utf-8").splitlines()
        labels = None
    else:
        texts, labels = [], []
        for lineno, line in enumerate(raw.decode("utf-8").splitlines(), start=1):
            if not line.strip():
                raise DataError(f"{path}:{lineno}: blank line in corpus")
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise DataError(f"{path}:{lineno}: each line must be a JSON object")
            text = obj.get("text")
            if not isinstance(text, str):
                raise DataError(f"{path}:{lineno}: 'text' must be a string")
            texts.append(text)
            labels.append(obj.get("label"))
        have = [lab is not None for lab in labels]
        if any(have) and not all(have):
            raise DataError(f"{path}: 'label' must be present on every line or on none")
        if not any(have):
            labels = None
        else:
            bad = next((i for i, lab in enumerate(labels) if not isinstance(lab, str) or not lab), None)
            if bad is not None:
                raise DataError(f"{path}:{bad + 1}: 'label' must be a non-empty string")
    if not texts:
        raise DataError(f"{path}: empty corpus")
    if limit is not None:
        texts = texts[:limit]
        labels = labels[:limit] if labels is not None else None
    label_names = _first_seen(labels) if labels is not None else ()
    return LoadedCorpus(
        name=path.stem,
        version=version,
        split=split,
        texts=tuple(texts),
        labels=tuple(labels) if labels is not None else None,
        label_names=label_names,
        expansion={n: n for n in label_names},
        text_field="text",
    )


def _first_seen(labels) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for lab in labels:
        seen.setdefault(lab, None)
    return tuple(seen)


def _load_benchmark(name: str, split: str, limit: int | None) -> LoadedCorpus:
    spec = _BENCHMARKS[name]
    try:
        import datasets as hf_datasets
    except ImportError as exc:
        raise UnavailableError(
            "the 'datasets' package is not installed; pip install 'embexport[data]'"
        ) from exc

    set_index = None
    hub_split = split
    if name == "reddit_clustering":
        match = _SET_SPLIT.match(split)
        if not match:
            raise UsageError(
                "reddit_clustering splits are whole clustering sets; "
                "use the form 'test[<index>]'"
            )
        hub_split, set_index = match.group(1), int(match.group(2))

    try:
        ds = hf_datasets.load_dataset(spec["path"], spec["config"], split=hub_split)
    except Exception as exc:
        raise UnavailableError(
            f"could not load dataset {name!r} split {split!r}: {exc}"
        ) from exc

    version = str(getattr(ds.info, "version", None) or "unknown")
    fingerprint = getattr(ds, "_fingerprint", None)
    if fingerprint:
        version = f"{version}+{fingerprint}"

    if set_index is not None:
        if set_index >= len(ds):
            raise UsageError(f"split {split!r} is out of range; {len(ds)} sets exist")
        row = ds[set_index]
        texts = [str(t) for t in row["sentences"]]
        raw_labels = [str(lab) for lab in row["labels"]]
    else:
        label_field = spec["label_field"]
        feature = ds.features.get(label_field)
        names = getattr(feature, "names", None)
        texts, raw_labels = [], []
        for ex in ds:
            texts.append(str(spec["text"](ex)))
            value = ex[label_field]
            raw_labels.append(names[value] if names is not None else str(value))
            if limit is not None and len(texts) >= limit:
                break

    if limit is not None:
        texts, raw_labels = texts[:limit], raw_labels[:limit]
    if not texts:
        raise DataError(f"dataset {name!r} split {split!r} is empty")

    label_names = _first_seen(raw_labels)
    expand = spec["expand"]
    return LoadedCorpus(
        name=name,
        version=version,
        split=split,
        texts=tuple(texts),
        labels=tuple(raw_labels),
        label_names=label_names,
        expansion={n: expand(n) for n in label_names},
        text_field=spec["text_field"],
    )
