"""Input checks for array-like discrete data."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import InputError


def check_discrete(X, cardinalities=None, n_features=None):
    """Validate a 2-d array of non-negative integer category codes.

    Returns the data as ``int64`` and the cardinality of every column,
    inferred as ``max + 1`` (at least 2) unless given.
    """
    try:
        X = check_array(X, dtype=None, ensure_min_samples=1)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if not np.issubdtype(X.dtype, np.integer):
        if not np.issubdtype(X.dtype, np.number) or np.any(X != np.round(X)):
            raise InputError("data must contain integer category codes")
    X = X.astype(np.int64)
    if np.any(X < 0):
        raise InputError("category codes must be non-negative")
    if n_features is not None and X.shape[1] != n_features:
        raise InputError(f"X has {X.shape[1]} features, expected {n_features}")
    if cardinalities is None:
        cardinalities = [max(2, int(c) + 1) for c in X.max(axis=0)]
    else:
        cardinalities = [int(c) for c in cardinalities]
        if len(cardinalities) != X.shape[1]:
            raise InputError("one cardinality per column is required")
        if np.any(X >= np.array(cardinalities)):
            raise InputError("data contain codes outside the declared cardinalities")
    return X, cardinalities


def feature_names(X, n):
    cols = getattr(X, "columns", None)
    if cols is not None:
        return [str(c) for c in cols]
    return [f"X{i}" for i in range(n)]
