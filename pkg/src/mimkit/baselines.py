"""Competing influence measures: Parzen, data-form LIME, counterfactual, QII."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import (
    CapacityError,
    Dataset,
    DegenerateError,
    InfluenceVector,
    Mode,
    ModeError,
)

QII_EXACT_MAX_FEATURES = 20


def _require_binary(dataset: Dataset, what: str):
    if dataset.mode is not Mode.BINARY:
        raise ModeError(f"{what} needs a binary-mode dataset")


# --- Parzen ---------------------------------------------------------------


def parzen_kernel(z: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian window ``exp(-|z|^2 / 2 sigma^2) / sqrt(pi sigma^2)`` per row of ``z``."""
    z = np.atleast_2d(z)
    return np.exp(-np.einsum("ij,ij->i", z, z) / (2 * sigma * sigma)) / math.sqrt(math.pi * sigma * sigma)


def parzen_potential(dataset: Dataset, at, sigma: float) -> float:
    """Kernel-smoothed share of positive labels at the location ``at``."""
    _require_binary(dataset, "parzen_potential")
    X = dataset.matrix()
    k = parzen_kernel(np.asarray(at, dtype=np.float64) - X, sigma)
    den = k.sum()
    if not den > 1e-300:
        raise DegenerateError(f"all Parzen weights underflow at sigma={sigma}; try a larger sigma")
    return float(k[dataset.y > 0].sum() / den)


def parzen_influence(dataset: Dataset, poi_index: int, sigma: float) -> InfluenceVector:
    """Gradient of the Parzen potential at the POI, signed toward the POI's own label.

    The POI stays in the dataset as one of the kernel centres; only the
    evaluation location moves when differentiating.
    """
    _require_binary(dataset, "parzen_influence")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    poi = dataset.check_index(poi_index)
    X = dataset.matrix()
    x = X[poi]
    k = parzen_kernel(x - X, sigma)
    den = k.sum()
    if not den > 1e-300:
        raise DegenerateError(f"all Parzen weights underflow at sigma={sigma}; try a larger sigma")
    pos = dataset.y > 0
    # d/dx k(x - y) = k(x - y) (y - x) / sigma^2
    grad_k = k[:, None] * (X - x) / (sigma * sigma)
    num = k[pos].sum()
    grad = (grad_k[pos].sum(axis=0) * den - num * grad_k.sum(axis=0)) / (den * den)
    return InfluenceVector(grad * dataset.y[poi], poi, {"sigma": sigma})


# --- LIME (data form) -----------------------------------------------------


def lime_weight(d: np.ndarray, rho: float) -> np.ndarray:
    return np.sqrt(np.exp(-np.square(d) / (rho * rho)))


def lime_influence(dataset: Dataset, poi_index: int, rho: float, weight=None) -> InfluenceVector:
    """Weighted least-squares linear fit of the labels around the POI.

    Minimizes ``sum_y alpha(|y - x|) (c(y) - w.(y - x) - b)^2`` over ``(w, b)``
    and returns ``w``. This is the squared-error relaxation of fitting the
    thresholded linear classifier; rank-deficient systems get the minimum-norm
    solution and are flagged in the metadata.
    """
    _require_binary(dataset, "lime_influence")
    if not rho > 0:
        raise ValueError("rho must be positive")
    poi = dataset.check_index(poi_index)
    X = dataset.matrix()
    diffs = X - X[poi]
    d = np.linalg.norm(diffs, axis=1)
    alpha = lime_weight(d, rho) if weight is None else np.asarray(weight(d), dtype=np.float64)
    design = np.hstack([diffs, np.ones((dataset.m, 1))])
    sw = np.sqrt(alpha)
    sol, _, rank, _ = np.linalg.lstsq(design * sw[:, None], dataset.y * sw, rcond=None)
    meta = {
        "rho": rho,
        "intercept": float(sol[-1]),
        "rank_deficient": bool(rank < design.shape[1]),
        "objective": "weighted least squares (relaxed linear surrogate)",
    }
    return InfluenceVector(sol[:-1], poi, meta)


# --- counterfactual ---------------------------------------------------------


def counterfactual_influence(dataset: Dataset, feature: int, tol: float = 0.0) -> float:
    """Average absolute label change over pairs differing only in ``feature``.

    Two points form a pair when they agree (within ``tol``) on every other
    coordinate and differ (by more than ``tol``) on ``feature``.
    """
    _require_binary(dataset, "counterfactual_influence")
    X = dataset.matrix()
    if not 0 <= feature < dataset.n:
        raise IndexError(f"feature {feature} out of range for n={dataset.n}")
    others = np.delete(X, feature, axis=1)
    if tol == 0:
        return _counterfactual_exact(others, X[:, feature], dataset.y) / dataset.m
    same_rest = np.all(np.abs(others[:, None, :] - others[None, :, :]) <= tol, axis=2)
    differs = np.abs(X[:, None, feature] - X[None, :, feature]) > tol
    label_gap = np.abs(dataset.y[:, None] - dataset.y[None, :])
    return float(np.sum(label_gap * (same_rest & differs)) / dataset.m)


def _counterfactual_exact(others: np.ndarray, col: np.ndarray, y: np.ndarray) -> float:
    # group rows by their other coordinates; within a group an ordered pair
    # counts 2 when labels differ and the feature values differ
    groups: dict[bytes, dict[float, list[int]]] = {}
    others = others + 0.0  # fold -0.0 into 0.0 before hashing bytes
    for row, v, label in zip(others, col, y):
        counts = groups.setdefault(row.tobytes(), {}).setdefault(float(v), [0, 0])
        counts[int(label > 0)] += 1
    total = 0
    for by_value in groups.values():
        if len(by_value) < 2:
            continue
        pos = sum(c[1] for c in by_value.values())
        neg = sum(c[0] for c in by_value.values())
        same_value = sum(c[0] * c[1] for c in by_value.values())
        total += 2 * 2 * (pos * neg - same_value)
    return float(total)


def counterfactual_vector(dataset: Dataset, tol: float = 0.0) -> np.ndarray:
    return np.array([counterfactual_influence(dataset, i, tol) for i in range(dataset.n)])


# --- classifiers and QII ----------------------------------------------------


class Classifier:
    """A deterministic map from feature vectors to labels in {-1, +1}.

    Subclasses implement :meth:`predict` on a batch; any plain callable taking
    one vector can be wrapped with :class:`CallableClassifier`.
    """

    def predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> float:
        return float(self.predict(np.atleast_2d(np.asarray(x, dtype=np.float64)))[0])


class CallableClassifier(Classifier):
    def __init__(self, fn):
        self.fn = fn

    def predict(self, X):
        return np.array([float(self.fn(row)) for row in X])


class ConstantClassifier(Classifier):
    def __init__(self, value: float = 1.0):
        self.value = float(value)

    def predict(self, X):
        return np.full(len(X), self.value)


class LinearThresholdClassifier(Classifier):
    """+1 when ``w.x >= threshold``, else -1."""

    def __init__(self, w, threshold: float = 0.0):
        self.w = np.asarray(w, dtype=np.float64)
        self.threshold = float(threshold)

    def predict(self, X):
        return np.where(np.asarray(X) @ self.w >= self.threshold, 1.0, -1.0)


class KNNClassifier(Classifier):
    """Majority vote of the ``k`` nearest dataset points (ties in distance broken by index)."""

    def __init__(self, dataset: Dataset, k: int = 3):
        if k < 1 or k % 2 == 0:
            raise ValueError("k must be a positive odd integer")
        _require_binary(dataset, "KNNClassifier")
        self.X = dataset.matrix()
        self.y = dataset.y
        self.k = min(k, dataset.m if dataset.m % 2 else dataset.m - 1) or 1

    def predict(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        d2 = ((X[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        votes = self.y[nearest].sum(axis=1)
        return np.where(votes >= 0, 1.0, -1.0)


@dataclass(frozen=True)
class QiiConfig:
    mode: str = "exact"
    sample_count: int = 1000
    rng_seed: int = 0

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValueError("QII mode must be 'exact' or 'sampled'")
        if self.sample_count < 1:
            raise ValueError("sample_count must be positive")


def _mask_of(S: Iterable[int] | int, n: int) -> int:
    if isinstance(S, (int, np.integer)):
        mask = int(S)
    else:
        mask = 0
        for i in S:
            if not 0 <= i < n:
                raise IndexError(f"feature {i} out of range for n={n}")
            mask |= 1 << int(i)
    if mask >> n:
        raise IndexError("feature set mentions features beyond n")
    return mask


def _intervene(x: np.ndarray, rows: np.ndarray, mask: int) -> np.ndarray:
    cols = [j for j in range(len(x)) if mask >> j & 1]
    out = np.repeat(x[None, :], len(rows), axis=0)
    out[:, cols] = rows[:, cols]
    return out


def qii_value(
    dataset: Dataset,
    poi_index: int,
    S,
    classifier: Classifier,
    config: QiiConfig = QiiConfig(),
) -> float:
    """Expected classifier output after replacing the features in ``S`` jointly.

    Replacement values come from one dataset row at a time: every row in exact
    mode, ``sample_count`` seeded draws in sampled mode. ``S`` is an iterable of
    feature indices or a bitmask.
    """
    poi = dataset.check_index(poi_index)
    X = dataset.matrix()
    mask = _mask_of(S, dataset.n)
    if config.mode == "exact":
        rows = X
    else:
        rng = np.random.default_rng(config.rng_seed)
        rows = X[rng.integers(0, dataset.m, size=config.sample_count)]
    if mask == 0:
        return classifier(X[poi])
    return float(np.mean(classifier.predict(_intervene(X[poi], rows, mask))))


def shapley_weights(n: int) -> np.ndarray:
    """``k! (n-k-1)! / n!`` for k = 0..n-1."""
    return np.array([math.factorial(k) * math.factorial(n - k - 1) / math.factorial(n) for k in range(n)])


def qii_influence(
    dataset: Dataset,
    poi_index: int,
    classifier: Classifier,
    config: QiiConfig = QiiConfig(),
) -> InfluenceVector:
    """Shapley value of each feature under ``S -> qii_value(S)``.

    Exact mode evaluates the set function on all ``2^n`` feature subsets.
    Sampled mode averages marginal contributions along ``sample_count`` random
    feature orderings, each paired with one random replacement row.
    """
    poi = dataset.check_index(poi_index)
    n = dataset.n
    X = dataset.matrix()
    if config.mode == "exact":
        if n > QII_EXACT_MAX_FEATURES:
            raise CapacityError(f"exact QII supports n <= {QII_EXACT_MAX_FEATURES}; use sampled mode")
        v = np.array([qii_value(dataset, poi, mask, classifier, config) for mask in range(1 << n)])
        masks = np.arange(1 << n)
        sizes = np.array([bin(s).count("1") for s in range(1 << n)])
        w = shapley_weights(n)
        phi = np.zeros(n)
        for i in range(n):
            without = masks[(masks >> i & 1) == 0]
            phi[i] = np.sum(w[sizes[without]] * (v[without | (1 << i)] - v[without]))
        return InfluenceVector(phi, poi, {"mode": "exact"})

    rng = np.random.default_rng(config.rng_seed)
    x = X[poi]
    phi = np.zeros(n)
    for _ in range(config.sample_count):
        order = rng.permutation(n)
        row = X[rng.integers(0, dataset.m)]
        probes = np.repeat(x[None, :], n + 1, axis=0)
        for step, j in enumerate(order):
            probes[step + 1 :, j] = row[j]
        out = classifier.predict(probes)
        phi[order] += np.diff(out)
    phi /= config.sample_count
    return InfluenceVector(phi, poi, {"mode": "sampled", "samples": config.sample_count, "seed": config.rng_seed})
