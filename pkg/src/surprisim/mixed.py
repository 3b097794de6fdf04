"""Rescaled similarity, the mixed score, and the ensemble-size crossover.

The rescale map is the piecewise-linear monotone map through (0,0), (b,c),
(1,1) where b is the ensemble's median similarity (after clamping inputs to
[0,1]) and c is solved in closed form so the mapped ensemble has mean 0.5.
That puts the rescaled similarity on the same footing as the surprise score,
so the two can be mixed as

    mixed = (1 - w) * rescaled + w * surprise

with w = tanh(ensemble_size / n_cross): tiny ensembles trust the raw
similarity, large ones trust the surprise score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, UsageError
from .stats import QueryStats, surprise


@dataclass(frozen=True)
class RescaleMap:
    """Monotone map [0,1] -> [0,1] through (0,0), (b,c), (1,1)."""

    breakpoint_in: float
    breakpoint_out: float
    identity_fallback: bool = False

    def __post_init__(self):
        b, c = self.breakpoint_in, self.breakpoint_out
        if not (0.0 < b < 1.0) or not (0.0 <= c <= 1.0):
            raise DataError(f"invalid rescale breakpoint ({b}, {c})")

    def apply(self, x):
        """Map similarities; inputs are clamped to [0,1] first."""
        arr = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
        b, c = self.breakpoint_in, self.breakpoint_out
        lower = c * (arr / b)
        upper = c + (1.0 - c) * ((arr - b) / (1.0 - b))
        out = np.where(arr >= 1.0, 1.0, np.where(arr <= b, lower, upper))
        if np.isscalar(x) or np.ndim(x) == 0:
            return float(out)
        return out


def fit_rescale(ensemble_similarities) -> RescaleMap:
    """Fit the rescale map to an ensemble's similarity values.

    If no breakpoint height in [0,1] can reach mean 0.5 (for instance when
    every value is 0 or 1), the identity map is returned with
    identity_fallback set.
    """
    values = np.asarray(ensemble_similarities, dtype=np.float64).ravel()
    if values.size == 0:
        raise DataError("cannot fit a rescale map to an empty ensemble")
    if not np.all(np.isfinite(values)):
        raise DataError("ensemble similarities must be finite")
    values = np.clip(values, 0.0, 1.0)
    b = float(np.median(values))
    if 0.0 < b < 1.0:
        lower = values <= b
        # mapped value is c*g + h on both segments; solve mean(c*g + h) = 0.5
        with np.errstate(invalid="ignore"):
            g = np.where(lower, values / b, (1.0 - values) / (1.0 - b))
            h = np.where(lower, 0.0, (values - b) / (1.0 - b))
        mean_g = float(np.mean(g))
        mean_h = float(np.mean(h))
        if mean_g > 1e-12:
            c = (0.5 - mean_h) / mean_g
            if -1e-9 <= c <= 1.0 + 1e-9:
                return RescaleMap(b, float(min(max(c, 0.0), 1.0)))
        elif abs(mean_h - 0.5) <= 1e-9:
            # any height works; keep the symmetric one
            return RescaleMap(b, 0.5)
    return RescaleMap(0.5, 0.5, identity_fallback=True)


def crossover_weight(ensemble_size: int, n_cross: float = 1000.0) -> float:
    """tanh(ensemble_size / n_cross); 0 for an empty ensemble, ~1 when large."""
    size = int(ensemble_size)
    if size < 0:
        raise UsageError("ensemble size must be non-negative")
    if not (n_cross > 0.0) or not math.isfinite(n_cross):
        raise UsageError("n_cross must be a positive finite number")
    return math.tanh(size / float(n_cross))


@dataclass(frozen=True)
class MixConfig:
    """How the mixing weight w is chosen: pinned, or from the ensemble size."""

    mode: str = "crossover"
    w: float = 0.0
    n_cross: float = 1000.0

    def __post_init__(self):
        if self.mode not in ("fixed", "crossover"):
            raise UsageError(f"unknown mix mode: {self.mode!r}")
        if self.mode == "fixed" and not (0.0 <= self.w <= 1.0):
            raise UsageError(f"mixing weight must be inside [0, 1], got {self.w}")
        if self.mode == "crossover" and (
            not math.isfinite(self.n_cross) or self.n_cross <= 0.0
        ):
            raise UsageError("n_cross must be a positive finite number")

    @classmethod
    def fixed(cls, w: float) -> "MixConfig":
        return cls(mode="fixed", w=float(w))

    @classmethod
    def crossover(cls, n_cross: float = 1000.0) -> "MixConfig":
        return cls(mode="crossover", n_cross=float(n_cross))

    def effective_weight(self, ensemble_size: int) -> float:
        if self.mode == "fixed":
            return self.w
        return crossover_weight(ensemble_size, self.n_cross)


def mixed_surprise(psi: float, stats: QueryStats, rescale: RescaleMap, w: float) -> float:
    """Convex mix of the rescaled similarity and the surprise score."""
    if not (0.0 <= w <= 1.0):
        raise UsageError(f"mixing weight must be inside [0, 1], got {w}")
    return float((1.0 - w) * rescale.apply(psi) + w * surprise(psi, stats))
