"""Few-shot linear adapter training on frozen embeddings.

A single d x d matrix W is learned; both sides of every comparison go
through v -> normalize(W v). Each labeled key forms one pair with every
label query: target 1 for its own label and a small epsilon for the rest,
which keeps every batch informative even when most pairs are negatives.
The pair probability is the adapted cosine nudged into (0, 1):

    p = clip(psi + delta, delta, 1 - delta)

and the per-pair loss is the focal form

    loss = -t * (1-p)^gamma * log(p) - (1-t) * p^gamma * log(1-p)

Optimization is full-precision adaptive-moment gradient descent with
decoupled weight decay over seed-shuffled mini-batches. Training stops at
the first epoch whose batch-averaged cross entropy (same epsilon targets)
drops below the threshold, or at max_epochs.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError, NumericError, UsageError
from .vectors import EmbeddingSet, _as_vector

_MAGIC = b"SIMADPT1"
_INIT_NOISE = 0.01

# Adaptive-moment constants; fixed rather than configurable because the
# training contract pins only the learning rate and decay.
_BETA1 = 0.9
_BETA2 = 0.999
_MOMENT_EPS = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    epsilon: float = 0.05
    gamma: float = 1.0
    delta: float = 1e-10
    learning_rate: float = 1e-4
    weight_decay: float = 0.01
    ce_threshold: float = 0.3
    batch_size: int = 16
    max_epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.epsilon < 1.0):
            raise UsageError("epsilon must lie in [0, 1)")
        if self.gamma < 0.0:
            raise UsageError("gamma must be non-negative")
        if not (0.0 < self.delta < 0.5):
            raise UsageError("delta must lie in (0, 0.5)")
        if self.learning_rate <= 0.0:
            raise UsageError("learning rate must be positive")
        if self.weight_decay < 0.0:
            raise UsageError("weight decay must be non-negative")
        if self.ce_threshold <= 0.0:
            raise UsageError("ce threshold must be positive")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise UsageError("batch size and max epochs must be at least 1")

    def digest(self) -> str:
        payload = json.dumps(
            {k: getattr(self, k) for k in sorted(self.__dataclass_fields__)},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class TrainingPair:
    key_vector: np.ndarray
    query_vector: np.ndarray
    target: float

    def __post_init__(self):
        object.__setattr__(self, "key_vector", _as_vector(self.key_vector))
        object.__setattr__(self, "query_vector", _as_vector(self.query_vector))
        if not (0.0 <= self.target <= 1.0):
            raise UsageError("pair target must lie in [0, 1]")


@dataclass
class AdapterModel:
    """The learned linear map; apply with transform()/transform_set()."""

    weight: np.ndarray
    seed: int = 0
    config_digest: str = ""

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DataError("adapter weight must be a square matrix")
        if not np.all(np.isfinite(w)):
            raise NumericError("adapter weight contains non-finite values")
        self.weight = w

    @property
    def dimension(self) -> int:
        return int(self.weight.shape[0])

    @classmethod
    def seeded_identity(cls, dimension: int, seed: int = 0) -> "AdapterModel":
        rng = np.random.default_rng(seed)
        w = np.eye(dimension) + _INIT_NOISE * rng.standard_normal((dimension, dimension))
        return cls(w, seed=seed)

    def transform(self, vectors) -> np.ndarray:
        arr = np.asarray(vectors, dtype=np.float64)
        single = arr.ndim == 1
        if single:
            arr = arr[None, :]
        if arr.shape[1] != self.dimension:
            raise DataError(
                f"dimension mismatch: adapter d={self.dimension}, vectors d={arr.shape[1]}"
            )
        mapped = arr @ self.weight.T
        norms = np.sqrt(np.sum(mapped * mapped, axis=1))
        if np.any(norms == 0.0) or not np.all(np.isfinite(norms)):
            raise NumericError("adapter collapsed a vector to zero norm")
        mapped = mapped / norms[:, None]
        return mapped[0] if single else mapped

    def transform_set(self, embeddings: EmbeddingSet) -> EmbeddingSet:
        mapped = self.transform(embeddings.matrix)
        return EmbeddingSet.from_arrays(
            embeddings.ids, mapped, [rec.text for rec in embeddings]
        )

    def save(self, path) -> None:
        header = json.dumps(
            {
                "dimension": self.dimension,
                "seed": int(self.seed),
                "config_digest": self.config_digest,
            }
        ).encode("utf-8")
        try:
            fh = open(path, "wb")
        except OSError as exc:
            raise DataError(f"cannot write {path}: {exc.strerror or exc}") from exc
        with fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<I", len(header)))
            fh.write(header)
            fh.write(np.ascontiguousarray(self.weight).tobytes())

    @classmethod
    def load(cls, path) -> "AdapterModel":
        try:
            fh = open(path, "rb")
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
        with fh:
            magic = fh.read(len(_MAGIC))
            if magic != _MAGIC:
                raise DataError(f"{path}: not an adapter file (bad magic)")
            try:
                (header_len,) = struct.unpack("<I", fh.read(4))
                header = json.loads(fh.read(header_len).decode("utf-8"))
                dim = int(header["dimension"])
            except (struct.error, ValueError, KeyError, UnicodeDecodeError) as exc:
                raise DataError(f"{path}: corrupt adapter header") from exc
            raw = fh.read(dim * dim * 8)
            if len(raw) != dim * dim * 8:
                raise DataError(f"{path}: truncated adapter matrix")
            weight = np.frombuffer(raw, dtype="<f8").reshape(dim, dim).copy()
        return cls(weight, seed=int(header.get("seed", 0)), config_digest=header.get("config_digest", ""))


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    mean_ce: float
    mean_focal: float


@dataclass(frozen=True)
class TrainResult:
    adapter: AdapterModel
    history: tuple[EpochStats, ...]
    converged: bool
    epochs_run: int


def build_pairs(
    keys: EmbeddingSet,
    gold_labels: Mapping[str, str],
    queries: EmbeddingSet,
    epsilon: float = 0.05,
) -> list[TrainingPair]:
    """One pair per (key, label query), ordered key-major then label-major."""
    if not (0.0 <= epsilon < 1.0):
        raise UsageError("epsilon must lie in [0, 1)")
    label_ids = set(queries.ids)
    pairs: list[TrainingPair] = []
    for rec in keys:
        gold = gold_labels.get(rec.id)
        if gold is None:
            raise DataError(f"no gold label for key {rec.id!r}")
        if gold not in label_ids:
            raise DataError(f"gold label {gold!r} has no embedded query")
        for q in queries:
            target = 1.0 if q.id == gold else epsilon
            pairs.append(TrainingPair(rec.vector, q.vector, target))
    return pairs


def probability(
    key_vector,
    query_vector,
    adapter: AdapterModel | None = None,
    delta: float = 1e-10,
) -> float:
    """Adapted cosine pushed into (0, 1): clip(psi + delta, delta, 1 - delta)."""
    k = _as_vector(key_vector)
    q = _as_vector(query_vector)
    if adapter is not None:
        k = adapter.transform(k)
        q = adapter.transform(q)
    nk = np.sqrt(np.sum(k * k))
    nq = np.sqrt(np.sum(q * q))
    if nk == 0.0 or nq == 0.0:
        raise DataError("probability is undefined for a zero vector")
    psi = float(np.sum(k * q) / (nk * nq))
    return float(min(max(psi + delta, delta), 1.0 - delta))


def loss(p: float, target: float, gamma: float = 1.0) -> float:
    """Focal loss of one pair; gamma=0 reduces to weighted cross entropy."""
    if not (0.0 < p < 1.0):
        raise UsageError("p must lie strictly inside (0, 1)")
    if not (0.0 <= target <= 1.0):
        raise UsageError("target must lie in [0, 1]")
    if gamma < 0.0:
        raise UsageError("gamma must be non-negative")
    return float(
        -target * (1.0 - p) ** gamma * np.log(p)
        - (1.0 - target) * p**gamma * np.log(1.0 - p)
    )


def _pairs_to_arrays(pairs: Sequence[TrainingPair]):
    if not pairs:
        raise DataError("cannot train on an empty pair list")
    K = np.vstack([p.key_vector for p in pairs])
    Q = np.vstack([p.query_vector for p in pairs])
    t = np.asarray([p.target for p in pairs], dtype=np.float64)
    if K.shape[1] != Q.shape[1]:
        raise DataError("key and query vectors must share one dimension")
    return K, Q, t


def _forward(W, K, Q, t, gamma, delta):
    U = K @ W.T
    V = Q @ W.T
    nu = np.sqrt(np.sum(U * U, axis=1))
    nv = np.sqrt(np.sum(V * V, axis=1))
    if np.any(nu == 0.0) or np.any(nv == 0.0):
        raise NumericError("adapter collapsed a training vector to zero norm")
    dot = np.sum(U * V, axis=1)
    psi = dot / (nu * nv)
    p_raw = psi + delta
    p = np.clip(p_raw, delta, 1.0 - delta)
    interior = (p_raw > delta) & (p_raw < 1.0 - delta)
    one_m_p = 1.0 - p
    log_p = np.log(p)
    log_1mp = np.log(one_m_p)
    focal = -t * one_m_p**gamma * log_p - (1.0 - t) * p**gamma * log_1mp
    ce = -t * log_p - (1.0 - t) * log_1mp
    return U, V, nu, nv, psi, p, interior, focal, ce


def objective_and_gradient(W, K, Q, targets, gamma: float = 1.0, delta: float = 1e-10):
    """Mean focal loss over the pairs and its analytic gradient in W."""
    W = np.asarray(W, dtype=np.float64)
    K = np.asarray(K, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    U, V, nu, nv, psi, p, interior, focal, ce = _forward(W, K, Q, t, gamma, delta)
    one_m_p = 1.0 - p
    dldp = t * (
        gamma * one_m_p ** (gamma - 1.0) * np.log(p) - one_m_p**gamma / p
    ) + (1.0 - t) * (
        -gamma * p ** (gamma - 1.0) * np.log(one_m_p) + p**gamma / one_m_p
    )
    dldpsi = np.where(interior, dldp, 0.0)
    inv = dldpsi / (nu * nv)
    A = inv[:, None] * V - (dldpsi * psi / nu**2)[:, None] * U
    B = inv[:, None] * U - (dldpsi * psi / nv**2)[:, None] * V
    grad = (A.T @ K + B.T @ Q) / K.shape[0]
    return float(np.mean(focal)), grad, float(np.mean(ce))


def train(
    keys: EmbeddingSet,
    gold_labels: Mapping[str, str],
    queries: EmbeddingSet,
    config: TrainConfig | None = None,
) -> TrainResult:
    """Fit the adapter. Identical seed, config, and data give an identical result."""
    config = config or TrainConfig()
    pairs = build_pairs(keys, gold_labels, queries, config.epsilon)
    K, Q, t = _pairs_to_arrays(pairs)
    n = K.shape[0]
    rng = np.random.default_rng(config.seed)
    dim = K.shape[1]
    W = np.eye(dim) + _INIT_NOISE * rng.standard_normal((dim, dim))
    lr = config.learning_rate
    decay = config.weight_decay
    m = np.zeros_like(W)
    v = np.zeros_like(W)
    step = 0
    history: list[EpochStats] = []
    converged = False
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        batch_ce: list[float] = []
        batch_fl: list[float] = []
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            fl, grad, ce = objective_and_gradient(
                W, K[idx], Q[idx], t[idx], config.gamma, config.delta
            )
            if not np.isfinite(fl) or not np.all(np.isfinite(grad)):
                raise NumericError(
                    f"non-finite loss at epoch {epoch}, batch starting at {start}"
                )
            step += 1
            m = _BETA1 * m + (1.0 - _BETA1) * grad
            v = _BETA2 * v + (1.0 - _BETA2) * grad * grad
            m_hat = m / (1.0 - _BETA1**step)
            v_hat = v / (1.0 - _BETA2**step)
            W = W - lr * (m_hat / (np.sqrt(v_hat) + _MOMENT_EPS)) - lr * decay * W
            batch_ce.append(ce)
            batch_fl.append(fl)
        epoch_ce = float(np.mean(batch_ce))
        history.append(EpochStats(epoch, epoch_ce, float(np.mean(batch_fl))))
        if epoch_ce < config.ce_threshold:
            converged = True
            break
    adapter = AdapterModel(W, seed=config.seed, config_digest=config.digest())
    return TrainResult(adapter, tuple(history), converged, len(history))
