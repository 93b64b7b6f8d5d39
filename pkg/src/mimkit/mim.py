"""Monotone influence measures and the cosine objective they maximize."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .core import (
    DEFAULT_KERNEL,
    Dataset,
    DegenerateError,
    InfluenceVector,
    Kernel,
    Mode,
    ModeError,
    as_vector,
    row_distances,
)


def _weighted_offsets(dataset: Dataset, poi: int, kernel: Kernel, metric: str):
    """Offsets ``y - x`` and kernel weights for every point at nonzero distance."""
    X = dataset.matrix()
    diffs = X - X[poi]
    d = row_distances(diffs, metric)
    keep = d > 0
    keep[poi] = False
    idx = np.flatnonzero(keep)
    w = np.asarray(kernel(d[idx]), dtype=np.float64) if idx.size else np.zeros(0)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("kernel produced negative or non-finite weights")
    return idx, diffs[idx], w


def _accumulate(terms: np.ndarray, n: int, deterministic: bool) -> np.ndarray:
    if not deterministic:
        return terms.sum(axis=0) if len(terms) else np.zeros(n)
    # fixed ascending-index reduction order
    total = np.zeros(n)
    for row in terms:
        total = total + row
    return total


def mim_influence(
    dataset: Dataset,
    poi_index: int,
    kernel: Kernel = DEFAULT_KERNEL,
    *,
    metric: str = "euclidean",
    deterministic: bool = False,
) -> InfluenceVector:
    """Sum of ``(y - x) * alpha(|y - x|) * s`` over the other points.

    ``s`` is +1 when ``y`` shares the POI's label and -1 otherwise. Points at
    zero distance from the POI contribute nothing.
    """
    if dataset.mode is not Mode.BINARY:
        raise ModeError("mim_influence needs binary labels; use mim_regression_influence")
    poi = dataset.check_index(poi_index)
    idx, diffs, w = _weighted_offsets(dataset, poi, kernel, metric)
    sign = np.where(dataset.y[idx] == dataset.y[poi], 1.0, -1.0)
    terms = diffs * (w * sign)[:, None]
    return InfluenceVector(_accumulate(terms, dataset.n, deterministic), poi)


def mim_regression_influence(
    dataset: Dataset,
    poi_index: int,
    kernel: Kernel = DEFAULT_KERNEL,
    *,
    metric: str = "euclidean",
    deterministic: bool = False,
) -> InfluenceVector:
    """Regression variant: the match indicator becomes ``c(y) - c(x)``."""
    poi = dataset.check_index(poi_index)
    idx, diffs, w = _weighted_offsets(dataset, poi, kernel, metric)
    delta = dataset.y[idx] - dataset.y[poi]
    terms = diffs * (w * delta)[:, None]
    return InfluenceVector(_accumulate(terms, dataset.n, deterministic), poi)


def objective_value(phi, dataset: Dataset, poi_index: int, alpha0: Kernel) -> float:
    """Weighted total cosine between ``phi`` and the (label-signed) offsets."""
    if dataset.mode is not Mode.BINARY:
        raise ModeError("objective_value needs binary labels")
    phi = as_vector(phi)
    norm = np.linalg.norm(phi)
    if norm == 0:
        raise DegenerateError("objective is undefined for phi = 0")
    poi = dataset.check_index(poi_index)
    idx, diffs, w = _weighted_offsets(dataset, poi, alpha0, "euclidean")
    if idx.size == 0:
        return 0.0
    sign = np.where(dataset.y[idx] == dataset.y[poi], 1.0, -1.0)
    cos = (diffs @ phi) / (np.linalg.norm(diffs, axis=1) * norm)
    return float(np.sum(w * cos * sign))


def cosine_aggregate(vectors: Iterable[tuple[object, float]]) -> tuple[float, np.ndarray]:
    """Norm and unit direction of ``sum(w * v / |v|)``.

    Any weighted sum of cosines against a direction ``u`` equals
    ``norm * cos(u, direction)``, so this pair is the maximizer and its value.
    Zero input vectors are skipped.
    """
    total = None
    for v, w in vectors:
        v = np.asarray(v, dtype=np.float64)
        if total is None:
            total = np.zeros_like(v)
        length = np.linalg.norm(v)
        if length > 0:
            total = total + v * (float(w) / length)
    if total is None:
        raise DegenerateError("no vectors given")
    norm = float(np.linalg.norm(total))
    if norm == 0:
        raise DegenerateError("weighted unit vectors cancel; direction undefined (norm 0)")
    return norm, total / norm


def optimal_direction(dataset: Dataset, poi_index: int, alpha0: Kernel) -> tuple[float, np.ndarray]:
    """Maximum of :func:`objective_value` and the direction attaining it."""
    poi = dataset.check_index(poi_index)
    idx, diffs, w = _weighted_offsets(dataset, poi, alpha0, "euclidean")
    sign = np.where(dataset.y[idx] == dataset.y[poi], 1.0, -1.0)
    return cosine_aggregate(zip(diffs, w * sign))


def alpha_from_alpha0(alpha0: Kernel):
    """The MIM weight ``alpha(d) = alpha0(d) / d`` that maximizes the alpha0 objective."""

    def alpha(d):
        d = np.asarray(d, dtype=np.float64)
        return np.asarray(alpha0(d), dtype=np.float64) / d

    return alpha
