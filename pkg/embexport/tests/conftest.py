"""Shared fixtures.

Network access to the model/dataset hub is assumed absent; HF_HUB_OFFLINE is
pinned so nothing tries to download mid-test. The tiny_st_model fixture
builds a real SentenceTransformer from a handwritten word-vector file, which
exercises the checkpoint backend without any download.
"""

import os

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("HF_DATASETS_OFFLINE", "1")

import json
import warnings

import numpy as np
import pytest

# every word used by the corpora below must appear here, or the toy word
# embedding model would map some document to an empty bag
_VOCAB = [
    "sports", "politics", "science", "game", "match", "score", "vote",
    "budget", "law", "atoms", "cells", "energy", "this", "matter", "is",
    "overtime", "went", "the", "to", "and",
]


def pytest_configure(config):
    config.addinivalue_line("markers", "realmodels: needs hub checkpoints and benchmark datasets")


@pytest.fixture()
def labeled_corpus(tmp_path):
    """A small labeled corpus whose documents contain their own label token.

    With the bag-of-words hash backend that guarantees each document sits
    closer to its own label query than to the other one, so a downstream
    cosine classifier must score accuracy 1.0.
    """
    rows = [
        ("sports sports sports game", "sports"),
        ("politics politics politics vote", "politics"),
        ("sports sports match score overtime", "sports"),
        ("politics politics budget law", "politics"),
        ("sports sports game match", "sports"),
        ("politics politics vote law", "politics"),
    ]
    path = tmp_path / "corpus.jsonl"
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for text, label in rows:
            fh.write(json.dumps({"text": text, "label": label}) + "\n")
    return path, rows


@pytest.fixture()
def plain_corpus(tmp_path):
    path = tmp_path / "notes.txt"
    path.write_text("the game went to overtime\nbudget law and vote\natoms and cells\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def tiny_st_model(tmp_path_factory):
    """A genuine SentenceTransformer checkpoint built offline from 8-d word vectors."""
    st = pytest.importorskip("sentence_transformers")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            from sentence_transformers.sentence_transformer.modules import Pooling, WordEmbeddings
        except ImportError:
            from sentence_transformers.models import Pooling, WordEmbeddings

        root = tmp_path_factory.mktemp("tinyst")
        rng = np.random.default_rng(7)
        vec_file = root / "vectors.txt"
        lines = []
        for word in _VOCAB:
            vals = " ".join(f"{x:.6f}" for x in rng.normal(size=8))
            lines.append(f"{word} {vals}")
        vec_file.write_text("\n".join(lines) + "\n", encoding="utf-8")

        emb = WordEmbeddings.from_text_file(str(vec_file))
        get_dim = getattr(emb, "get_embedding_dimension", None) or emb.get_word_embedding_dimension
        pool = Pooling(get_dim(), pooling_mode="mean")
        model = st.SentenceTransformer(modules=[emb, pool])
        model_dir = root / "model"
        model.save(str(model_dir))
    return str(model_dir)
