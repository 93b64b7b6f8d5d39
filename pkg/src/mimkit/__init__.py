"""Axiomatic data-driven feature influence: monotone influence measures and baselines."""

from .core import (
    CapacityError,
    Dataset,
    DegenerateError,
    DomainError,
    FeatureKind,
    InfluenceVector,
    LabeledPoint,
    Mode,
    ModeError,
    SchemaError,
    WeightKernel,
    encode_categorical,
    euclidean_distance,
    kernel_eval,
)
from .mim import cosine_aggregate, mim_influence, mim_regression_influence, objective_value

__version__ = "0.1.0"
