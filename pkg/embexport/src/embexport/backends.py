"""Embedding backends: a deterministic hash model and sentence-transformers.

The hash backend needs no weights or network, so format and pipeline tests
run anywhere and exports are bit-reproducible. The sentence-transformers
backend accepts a hub id, a shorthand checkpoint name, or a local model
directory.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

from .errors import ExportError, UnavailableError, UsageError

# shorthand names for the published checkpoints
MODEL_ALIASES = {
    "sentence-t5-base": "sentence-transformers/sentence-t5-base",
    "e5-large": "intfloat/e5-large",
    "gtr-t5-large": "sentence-transformers/gtr-t5-large",
}

_HASH_NAME = re.compile(r"^hash-(\d+)$")
_TOKEN = re.compile(r"[a-z0-9]+")


def resolve_model_name(model: str) -> str:
    """Map a shorthand checkpoint name to its hub id; pass others through."""
    return MODEL_ALIASES.get(model, model)


class HashBackend:
    """Bag-of-tokens embeddings derived from sha256 digests.

    Every token maps to a fixed pseudo-random vector computed from its hash,
    a text embeds to the normalized mean of its token vectors, so equal
    inputs give bit-equal outputs on any machine.
    """

    revision = "sha256-bag-v1"

    def __init__(self, dimension: int):
        if dimension < 1:
            raise UsageError(f"hash backend dimension must be >= 1, got {dimension}")
        self.dimension = int(dimension)
        self.name = f"hash-{self.dimension}"
        self._cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        out = np.empty(self.dimension, dtype=np.float64)
        filled, counter = 0, 0
        while filled < self.dimension:
            digest = hashlib.sha256(f"{token}\x00{counter}".encode()).digest()
            words = np.frombuffer(digest, dtype="<u4").astype(np.float64)
            take = min(self.dimension - filled, words.size)
            out[filled : filled + take] = words[:take] / 2.0**31 - 1.0
            filled += take
            counter += 1
        self._cache[token] = out
        return out

    def encode(self, texts, batch_size: int = 64) -> np.ndarray:
        del batch_size  # no batching effects for the hash model
        rows = np.empty((len(texts), self.dimension), dtype=np.float64)
        for i, text in enumerate(texts):
            tokens = _TOKEN.findall(str(text).lower()) or ["<empty>"]
            acc = np.zeros(self.dimension, dtype=np.float64)
            for tok in tokens:
                acc += self._token_vector(tok)
            acc /= len(tokens)
            norm = float(np.linalg.norm(acc))
            if norm == 0.0:
                acc[0], norm = 1.0, 1.0
            rows[i] = acc / norm
        return rows


def _checkpoint_revision(model) -> str:
    """Best-effort commit hash of the underlying transformer checkpoint."""
    for module in model.modules():
        config = getattr(getattr(module, "auto_model", None), "config", None)
        commit = getattr(config, "_commit_hash", None)
        if commit:
            return str(commit)
    return "unknown"


class SentenceTransformerBackend:
    """Wraps a sentence-transformers checkpoint (hub id or local path)."""

    def __init__(self, model: str, device: str = "cpu"):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise UnavailableError(
                "sentence-transformers is not installed; pip install 'embexport[models]'"
            ) from exc
        resolved = resolve_model_name(model)
        try:
            self._model = SentenceTransformer(resolved, device=device)
        except Exception as exc:  # hub miss, offline mode, broken checkpoint
            raise UnavailableError(f"could not load model {resolved!r}: {exc}") from exc
        self._model.eval()
        self.name = model
        self.resolved = resolved
        self.revision = _checkpoint_revision(self._model)
        probe = getattr(self._model, "get_embedding_dimension", None)
        if probe is None:  # renamed in newer sentence-transformers releases
            probe = self._model.get_sentence_embedding_dimension
        dimension = probe()
        if not dimension:
            dimension = self.encode(["probe"]).shape[1]
        self.dimension = int(dimension)

    def encode(self, texts, batch_size: int = 64) -> np.ndarray:
        vectors = self._model.encode(
            [str(t) for t in texts],
            batch_size=int(batch_size),
            convert_to_numpy=True,
            show_progress_bar=False,
        )
        return np.asarray(vectors, dtype=np.float64)


def resolve_backend(model: str, device: str = "cpu"):
    """hash-<dim> names get the hash backend; everything else loads a checkpoint."""
    match = _HASH_NAME.match(model)
    if match:
        return HashBackend(int(match.group(1)))
    return SentenceTransformerBackend(model, device=device)


def model_available(model: str) -> bool:
    """True when the model can be constructed right now. Used for test skips."""
    try:
        resolve_backend(model)
    except ExportError:
        return False
    return True
