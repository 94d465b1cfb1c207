"""Information measures over small discrete tables, all in bits."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InputError

#: Returned by :func:`closeness` when the approximation assigns zero
#: probability to an outcome the reference distribution can produce.
UNREPRESENTABLE = math.inf

_SUM_TOL = 1e-9


def _check_table(probabilities, ndim, kind):
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != ndim:
        raise InputError(f"{kind} must be {ndim}-dimensional, got shape {p.shape}")
    if min(p.shape) < 1:
        raise InputError(f"{kind} has an empty axis: shape {p.shape}")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InputError(f"{kind} entries must be finite and non-negative")
    total = p.sum()
    if abs(total - 1.0) > _SUM_TOL:
        raise InputError(f"{kind} sums to {total!r}, expected 1")
    p = p.copy()
    p.flags.writeable = False
    return p


@dataclass(frozen=True, eq=False)
class PairTable:
    """Joint distribution of two variables, ``probabilities[a, b]``."""

    probabilities: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "probabilities", _check_table(self.probabilities, 2, "PairTable")
        )

    @property
    def cardinalities(self) -> tuple[int, int]:
        return self.probabilities.shape

    def transpose(self) -> PairTable:
        return PairTable(self.probabilities.T)


@dataclass(frozen=True, eq=False)
class TripleTable:
    """Joint distribution of three variables, ``probabilities[a, b, k]``.

    The last axis is the conditioning variable for
    :func:`conditional_mutual_information`.
    """

    probabilities: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "probabilities", _check_table(self.probabilities, 3, "TripleTable")
        )

    @property
    def cardinalities(self) -> tuple[int, int, int]:
        return self.probabilities.shape


def _as_table(t, cls):
    if isinstance(t, cls):
        return t
    return cls(t)


def _plogratio(p, q):
    """Sum of p*log2(p/q) with the 0*log(0/q) = 0 convention."""
    mask = p > 0
    return float(np.sum(p[mask] * (np.log2(p[mask]) - np.log2(q[mask]))))


def mutual_information(t) -> float:
    """Mutual information I(x_i, x_j) of a pair table, in bits.

    Accepts a :class:`PairTable` or anything convertible to one.
    Rounding residues below zero are clamped to 0.
    """
    p = _as_table(t, PairTable).probabilities
    rows = np.broadcast_to(p.sum(axis=1, keepdims=True), p.shape)
    cols = np.broadcast_to(p.sum(axis=0, keepdims=True), p.shape)
    mask = p > 0
    # logs of the marginals taken separately: their product can underflow
    terms = np.log2(p[mask]) - np.log2(rows[mask]) - np.log2(cols[mask])
    return max(float(np.sum(p[mask] * terms)), 0.0)


def conditional_mutual_information(t) -> float:
    """I(x_i, x_j | x_k) in bits, conditioning on the table's last axis.

    Slices of the conditioning variable carrying no mass contribute 0.
    """
    p = _as_table(t, TripleTable).probabilities
    pk = p.sum(axis=(0, 1), keepdims=True)
    pik = p.sum(axis=1, keepdims=True)
    pjk = p.sum(axis=0, keepdims=True)
    # p(i,j,k) p(k) / (p(i,k) p(j,k)) == p(i,j|k) / (p(i|k) p(j|k))
    mask = p > 0
    num = np.log2(p[mask]) + np.log2(np.broadcast_to(pk, p.shape)[mask])
    den = np.log2(np.broadcast_to(pik, p.shape)[mask]) + np.log2(
        np.broadcast_to(pjk, p.shape)[mask]
    )
    return max(float(np.sum(p[mask] * (num - den))), 0.0)


def entropy(p) -> float:
    """Shannon entropy in bits of an arbitrary probability array."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return max(float(-np.sum(p * np.log2(p))), 0.0)


def closeness(p, model) -> float:
    """Closeness sum_X P(X) log2(P(X) / P_a(X)) of a model to a distribution.

    ``p`` is an exact distribution source (factored or explicit) and
    ``model`` the approximating :class:`~polytree.model.Polytree`.  The
    result is :data:`UNREPRESENTABLE` when the model puts zero mass on an
    outcome in the support of ``p``.
    """
    if not getattr(p, "is_exact", False):
        raise InputError("closeness requires an exact distribution source")
    if tuple(p.variables) != tuple(model.variables):
        raise InputError("distribution and model are defined over different variables")
    ptab = p.joint_table()
    qtab = model.joint_table()
    support = ptab > 0
    if np.any(qtab[support] <= 0):
        return UNREPRESENTABLE
    return max(_plogratio(ptab, qtab), 0.0)
