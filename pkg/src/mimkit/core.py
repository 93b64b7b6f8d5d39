"""Shared domain types: datasets, influence vectors, weight kernels, distances."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence, Union

import numpy as np


class SchemaError(ValueError):
    """Dimension or feature-kind mismatch."""


class ModeError(ValueError):
    """Operation called on a dataset of the wrong label mode."""


class DomainError(ValueError):
    """Argument outside the domain of a function (e.g. a nonpositive distance)."""


class DegenerateError(ArithmeticError):
    """A direction or ratio is undefined (zero vector, underflowed denominator)."""


class CapacityError(ValueError):
    """Exact enumeration requested beyond the supported size."""


class FeatureKind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class Mode(str, Enum):
    BINARY = "binary"
    REGRESSION = "regression"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LabeledPoint:
    features: np.ndarray
    label: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ordered, immutable list of labeled points.

    ``X`` has shape ``(m, n)``. It is a float array unless some categorical
    column still holds raw (string) values, in which case it has object dtype
    until :func:`encode_categorical` is applied. Labels are stored as floats in
    both modes; binary mode requires every label to be exactly -1 or +1.
    """

    X: np.ndarray
    y: np.ndarray
    schema: tuple[FeatureKind, ...] = ()
    mode: Mode = Mode.BINARY
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.array(self.X, copy=True)
        if X.dtype.kind not in "fiub":
            X = X.astype(object)
        elif X.dtype != np.float64:
            X = X.astype(np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2 or X.shape[0] == 0:
            raise SchemaError("dataset must be a nonempty (m, n) array")
        y = np.asarray(self.y, dtype=np.float64).copy()
        if y.shape != (X.shape[0],):
            raise SchemaError(f"expected {X.shape[0]} labels, got shape {y.shape}")
        mode = Mode(self.mode)
        if mode is Mode.BINARY and not np.all(np.abs(y) == 1.0):
            raise ModeError("binary datasets need every label in {-1, +1}")
        if not np.all(np.isfinite(y)):
            raise SchemaError("labels must be finite")
        schema = tuple(FeatureKind(k) for k in self.schema) or (FeatureKind.NUMERIC,) * X.shape[1]
        if len(schema) != X.shape[1]:
            raise SchemaError(f"schema has {len(schema)} entries for {X.shape[1]} features")
        names = tuple(self.feature_names) or tuple(f"x{i}" for i in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise SchemaError("feature_names length does not match n")
        if X.dtype == object:
            for j, kind in enumerate(schema):
                if kind is FeatureKind.NUMERIC:
                    try:
                        X[:, j] = X[:, j].astype(np.float64)
                    except (TypeError, ValueError) as exc:
                        raise SchemaError(f"numeric feature {j} holds non-numeric values") from exc
            if not any(k is FeatureKind.CATEGORICAL for k in schema):
                X = X.astype(np.float64)
        if X.dtype == np.float64 and not np.all(np.isfinite(X)):
            raise SchemaError("features must be finite")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "feature_names", names)

    @classmethod
    def from_points(cls, points: Iterable[LabeledPoint], **kwargs) -> "Dataset":
        points = list(points)
        if not points:
            raise SchemaError("dataset must be nonempty")
        dims = {len(p.features) for p in points}
        if len(dims) != 1:
            raise SchemaError(f"points have mixed dimensions {sorted(dims)}")
        return cls(np.array([p.features for p in points]), [p.label for p in points], **kwargs)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def points(self) -> list[LabeledPoint]:
        return [LabeledPoint(self.X[j], float(self.y[j])) for j in range(self.m)]

    def matrix(self) -> np.ndarray:
        """Float feature matrix; raises if categorical columns are still unencoded."""
        if self.X.dtype != np.float64:
            raise SchemaError("categorical features must be encoded first (encode_categorical)")
        return self.X

    def check_index(self, poi_index: int) -> int:
        if not isinstance(poi_index, (int, np.integer)) or not 0 <= poi_index < self.m:
            raise IndexError(f"point index {poi_index!r} out of range for m={self.m}")
        return int(poi_index)

    def replace(self, X=None, y=None, **kwargs) -> "Dataset":
        return Dataset(
            self.X if X is None else X,
            self.y if y is None else y,
            schema=kwargs.get("schema", self.schema),
            mode=kwargs.get("mode", self.mode),
            feature_names=kwargs.get("feature_names", self.feature_names),
        )

    def with_point(self, features, label: float) -> "Dataset":
        X = np.vstack([self.matrix(), np.asarray(features, dtype=np.float64).reshape(1, -1)])
        return self.replace(X=X, y=np.append(self.y, float(label)))

    def to_dict(self) -> dict:
        X = self.X.tolist()
        return {
            "X": X,
            "y": self.y.tolist(),
            "schema": [k.value for k in self.schema],
            "mode": self.mode.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Dataset":
        return cls(np.array(d["X"]), d["y"], schema=tuple(d.get("schema", ())), mode=d.get("mode", "binary"))


@dataclass(frozen=True, eq=False)
class InfluenceVector:
    values: np.ndarray
    poi_index: int
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise SchemaError("influence must be a 1-D vector")
        if not np.all(np.isfinite(v)):
            raise DegenerateError("influence vector has non-finite entries")
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


KERNEL_KINDS = ("constant", "inverse", "inverse_square", "table")


@dataclass(frozen=True)
class WeightKernel:
    """Nonnegative weight as a function of a strictly positive distance.

    ``table`` kernels interpolate linearly between ``(distance, weight)`` knots
    and hold the end values outside them; the weights must be nonincreasing.
    """

    kind: str = "inverse_square"
    table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; choose from {KERNEL_KINDS}")
        if self.kind == "table":
            knots = tuple((float(d), float(w)) for d, w in self.table)
            if len(knots) < 1:
                raise ValueError("table kernel needs at least one knot")
            ds = np.array([d for d, _ in knots])
            ws = np.array([w for _, w in knots])
            if np.any(np.diff(ds) <= 0) or ds[0] < 0:
                raise ValueError("table distances must be nonnegative and strictly increasing")
            if np.any(ws < 0) or np.any(np.diff(ws) > 0) or not np.all(np.isfinite(ws)):
                raise ValueError("table weights must be finite, nonnegative and nonincreasing")
            object.__setattr__(self, "table", knots)

    def __call__(self, d):
        d = np.asarray(d, dtype=np.float64)
        if np.any(~(d > 0)):
            raise DomainError("kernel is only defined for strictly positive distances")
        if self.kind == "constant":
            return np.ones_like(d)
        if self.kind == "inverse":
            return 1.0 / d
        if self.kind == "inverse_square":
            return 1.0 / (d * d)
        ds, ws = zip(*self.table)
        return np.interp(d, ds, ws)


Kernel = Union[WeightKernel, Callable[[np.ndarray], np.ndarray]]
DEFAULT_KERNEL = WeightKernel("inverse_square")


def kernel_eval(kernel: Kernel, d: float) -> float:
    if not d > 0:
        raise DomainError(f"distance must be > 0, got {d}")
    w = float(np.asarray(kernel(np.array([d], dtype=np.float64)))[0])
    if not (w >= 0 and math.isfinite(w)):
        raise DomainError(f"kernel returned {w} at d={d}; weights must be nonnegative and finite")
    return w


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise SchemaError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a, b


def euclidean_distance(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.linalg.norm(a - b))


def hamming_distance(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.count_nonzero(a != b))


def row_distances(diffs: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    """Distances of each row of ``diffs`` (already ``y - x``) from the origin."""
    if metric == "euclidean":
        return np.sqrt(np.einsum("ij,ij->i", diffs, diffs))
    if metric == "hamming":
        return np.count_nonzero(diffs, axis=1).astype(np.float64)
    raise ValueError(f"unknown metric {metric!r}")


def encode_categorical(dataset: Dataset, poi_index: int) -> Dataset:
    """Replace each categorical value by 1 if it equals the POI's value, else 0."""
    poi = dataset.check_index(poi_index)
    cat = [j for j, k in enumerate(dataset.schema) if k is FeatureKind.CATEGORICAL]
    if not cat:
        return dataset.replace()
    X = np.array(dataset.X, dtype=object)
    for j in cat:
        col = X[:, j]
        ref = col[poi]
        X[:, j] = np.array([1.0 if v == ref else 0.0 for v in col], dtype=object)
    return dataset.replace(X=X.astype(np.float64))


def as_vector(x: Sequence[float] | np.ndarray | InfluenceVector) -> np.ndarray:
    if isinstance(x, InfluenceVector):
        return x.values
    return np.asarray(x, dtype=np.float64)
