"""Scoring metrics.

C20 is the working metric throughout: Pearson correlation restricted to the
top-20 readout genes ranked by the magnitude of the ground-truth effect, the
convention of the few-shot perturbation-prediction literature. Profiles
shorter than the cut use every coordinate, making C20 identical to the full
Pearson correlation there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConstantInput, EmptyScores, LengthMismatch


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Sample Pearson correlation; constant input is an error, not a NaN."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"shapes {x.shape} and {y.shape}")
    if x.size < 2:
        raise LengthMismatch("need at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt(np.sum(dx * dx)))
    sy = float(np.sqrt(np.sum(dy * dy)))
    if sx == 0.0 or sy == 0.0:
        raise ConstantInput("correlation of a constant vector is undefined")
    return float(np.dot(dx, dy) / (sx * sy))


def top_effect_indices(
    truth: np.ndarray, top_k: int, labels: Sequence[str] | None = None
) -> np.ndarray:
    """Indices of the top_k coordinates by |truth|, ties by gene symbol.

    Without labels, ties break by coordinate index.
    """
    magnitude = np.abs(np.asarray(truth, dtype=float))
    if labels is not None:
        order = sorted(range(magnitude.size), key=lambda i: (-magnitude[i], labels[i]))
    else:
        order = sorted(range(magnitude.size), key=lambda i: (-magnitude[i], i))
    return np.array(order[:top_k])


def c20(
    pred: np.ndarray,
    truth: np.ndarray,
    top_k: int = 20,
    labels: Sequence[str] | None = None,
) -> float:
    """Pearson correlation over the top_k strongest ground-truth effects."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"shapes {pred.shape} and {truth.shape}")
    if truth.size <= top_k:
        return pearson(pred, truth)
    idx = top_effect_indices(truth, top_k, labels)
    return pearson(pred[idx], truth[idx])


@dataclass(frozen=True)
class MeanSem:
    mean: float
    sem: float
    singleton: bool = False  # sem forced to 0 because n = 1


def mean_sem(scores: Sequence[float]) -> MeanSem:
    """Mean and standard error (Bessel-corrected std / sqrt(n))."""
    if len(scores) == 0:
        raise EmptyScores("mean of zero scores")
    mean = float(np.mean(scores))
    if len(scores) == 1:
        return MeanSem(mean=mean, sem=0.0, singleton=True)
    std = float(np.std(scores, ddof=1))
    return MeanSem(mean=mean, sem=std / math.sqrt(len(scores)))
