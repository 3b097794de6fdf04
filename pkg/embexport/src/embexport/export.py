"""Turn a corpus into embedding files the surprisim loaders accept.

An export writes up to four artifacts into the output directory:

* ``docs.jsonl``           one embedding record per document
* ``gold.jsonl``           document id -> label (only for labeled corpora)
* ``label_queries.jsonl``  one embedding record per label, encoded from a
                           templated phrase such as "this matter is sports"
* ``manifest.json``        model revision, dataset version, template,
                           expansion map, and a checksum per written file

Documents get stable ids ``{corpus}-{split}-{index:06d}``; label query ids
are the raw label names. Outputs are round-tripped through the surprisim
loaders before the manifest is written, so a finished export is known to be
readable downstream.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from surprisim import EmbeddingSet, load_embeddings, load_labels, save_embeddings, save_labels

from . import __version__
from .backends import resolve_backend
from .datasets import LoadedCorpus, load_corpus
from .errors import UsageError

DEFAULT_TEMPLATE = "this matter is {label}"

_DOCS_FILE = "docs.jsonl"
_GOLD_FILE = "gold.jsonl"
_QUERIES_FILE = "label_queries.jsonl"
_MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class ExportJob:
    """One export request: which model, which corpus, where to write."""

    model: str
    dataset: str
    split: str
    out_dir: str
    template: str = DEFAULT_TEMPLATE
    batch_size: int = 64
    limit: int | None = None

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise UsageError(f"batch size must be at least 1, got {self.batch_size}")
        if self.limit is not None and self.limit < 1:
            raise UsageError(f"limit must be at least 1, got {self.limit}")
        if self.template.count("{label}") != 1:
            raise UsageError(
                "template must contain the placeholder '{label}' exactly once, "
                f"got {self.template!r}"
            )


def _file_entry(path: Path) -> dict:
    raw = path.read_bytes()
    return {
        "path": path.name,
        "sha256": hashlib.sha256(raw).hexdigest(),
        "bytes": len(raw),
    }


def _write_docs(corpus: LoadedCorpus, vectors, out: Path) -> list[str]:
    ids = [f"{corpus.name}-{corpus.split}-{i:06d}" for i in range(len(corpus.texts))]
    docs = EmbeddingSet.from_arrays(ids, vectors, texts=list(corpus.texts))
    save_embeddings(docs, out)
    load_embeddings(out)
    return ids


def run_export(job: ExportJob) -> dict:
    """Run one export job and return the manifest that was written."""
    backend = resolve_backend(job.model)
    corpus = load_corpus(job.dataset, job.split, limit=job.limit)

    out_dir = Path(job.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    doc_vectors = backend.encode(list(corpus.texts), batch_size=job.batch_size)
    doc_ids = _write_docs(corpus, doc_vectors, out_dir / _DOCS_FILE)

    files = {"docs": _file_entry(out_dir / _DOCS_FILE)}
    if corpus.labels is not None:
        gold_path = out_dir / _GOLD_FILE
        save_labels(dict(zip(doc_ids, corpus.labels)), gold_path)
        load_labels(gold_path)
        files["gold"] = _file_entry(gold_path)

        phrases = [job.template.format(label=corpus.expansion[n]) for n in corpus.label_names]
        query_vectors = backend.encode(phrases, batch_size=job.batch_size)
        queries = EmbeddingSet.from_arrays(list(corpus.label_names), query_vectors, texts=phrases)
        queries_path = out_dir / _QUERIES_FILE
        save_embeddings(queries, queries_path)
        load_embeddings(queries_path)
        files["label_queries"] = _file_entry(queries_path)

    manifest = {
        "tool": {"name": "embexport", "version": __version__},
        "model": {
            "name": backend.name,
            "resolved": getattr(backend, "resolved", backend.name),
            "revision": backend.revision,
            "dimension": backend.dimension,
        },
        "dataset": {
            "name": corpus.name,
            "version": corpus.version,
            "split": corpus.split,
            "text_field": corpus.text_field,
            "records": len(corpus.texts),
        },
        "template": job.template,
        "label_expansion": dict(corpus.expansion),
        "labels": list(corpus.label_names),
        "batch_size": job.batch_size,
        "limit": job.limit,
        "files": files,
    }
    manifest_path = out_dir / _MANIFEST_FILE
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest
