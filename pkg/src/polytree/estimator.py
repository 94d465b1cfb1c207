"""Scikit-learn style front end for poly-tree recovery."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .estimate import OrientationOverride, complete_orientation, fit_parameters
from .exceptions import ConfigurationError
from .model import Dataset, Empirical, Explicit, Factored, Polytree, as_source, sample_array
from .orient import ExactThreshold, FixedThreshold, GTest, recover_directions
from .skeleton import compute_weights, mwst
from .validation import check_discrete, feature_names


def make_oracle(kind, src, epsilon=1e-9, tau=1e-3, alpha=0.01):
    if kind == "auto":
        kind = "exact" if src.is_exact else "gtest"
    if kind == "exact":
        return ExactThreshold(epsilon)
    if kind == "fixed":
        return FixedThreshold(tau)
    if kind == "gtest":
        return GTest(alpha)
    raise ConfigurationError(f"unknown oracle {kind!r}; use auto, exact, fixed or gtest")


class PolytreeLearner(BaseEstimator):
    """Recover a poly-tree's skeleton, causal directions and CPTs.

    ``fit`` accepts a 2-d array of category codes (or a DataFrame), or an
    exact distribution: a :class:`Polytree`, :class:`Factored` or
    :class:`Explicit` source.

    Parameters
    ----------
    oracle : {"auto", "exact", "fixed", "gtest"}
        Independence decision rule; "auto" picks "exact" for exact inputs
        and "gtest" for samples.
    epsilon, tau : float
        Thresholds in bits for the "exact" and "fixed" oracles.
    alpha : float
        Significance level of the G-test.
    tie_tolerance : float or None
        Weight tie tolerance in bits; None means 1e-9 for exact input and
        1e-4 for samples.
    degenerate : bool
        Identify colliders through I(A, C | B) > 0 instead of I(A, C) = 0.
    estimate_parameters : bool
        Complete the orientation and fit CPTs into ``model_``.
    smoothing : float
        Additive pseudo-count for CPT fitting on samples.
    cardinalities : list of int or None
        Category counts per column for array input.
    orientation_override : list of (parent, child) or None
        Directions for undetermined branches, by index or feature name.

    Attributes
    ----------
    weights_ : WeightedEdgeSet
    skeleton_ : Skeleton
    structure_ : RecoveredStructure
    directed_ : DirectedTree or None
    model_ : Polytree or None
    """

    def __init__(
        self,
        oracle="auto",
        epsilon=1e-9,
        tau=1e-3,
        alpha=0.01,
        tie_tolerance=None,
        degenerate=False,
        estimate_parameters=True,
        smoothing=0.0,
        cardinalities=None,
        orientation_override=None,
    ):
        self.oracle = oracle
        self.epsilon = epsilon
        self.tau = tau
        self.alpha = alpha
        self.tie_tolerance = tie_tolerance
        self.degenerate = degenerate
        self.estimate_parameters = estimate_parameters
        self.smoothing = smoothing
        self.cardinalities = cardinalities
        self.orientation_override = orientation_override

    def _source(self, X):
        if isinstance(X, (Polytree, Dataset, Factored, Explicit, Empirical)):
            return as_source(X)
        data, cards = check_discrete(X, self.cardinalities)
        names = feature_names(X, data.shape[1])
        return Empirical(Dataset.from_rows(list(zip(names, cards)), data))

    def _override(self, src):
        if not self.orientation_override:
            return None
        pairs = []
        for u, v in self.orientation_override:
            pairs.append(tuple(src.index(x) if isinstance(x, str) else int(x) for x in (u, v)))
        return OrientationOverride(tuple(pairs))

    def fit(self, X, y=None):
        src = self._source(X)
        oracle = make_oracle(self.oracle, src, self.epsilon, self.tau, self.alpha)
        tol = self.tie_tolerance
        if tol is None:
            tol = 1e-9 if src.is_exact else 1e-4
        self.source_ = src
        self.oracle_ = oracle
        self.n_features_in_ = src.n
        self.feature_names_in_ = np.array(src.names, dtype=object)
        self.weights_ = compute_weights(src)
        self.skeleton_ = mwst(self.weights_, tol)
        self.structure_ = recover_directions(src, self.skeleton_, oracle, self.degenerate)
        self.directed_ = None
        self.model_ = None
        if self.estimate_parameters:
            self.directed_ = complete_orientation(self.structure_, self._override(src), src, oracle)
            self.model_ = fit_parameters(src, self.directed_, self.smoothing)
        return self

    @property
    def warnings_(self):
        check_is_fitted(self, "structure_")
        return list(self.structure_.warnings) + (self.directed_.warnings if self.directed_ else [])

    def score_samples(self, X):
        """Natural-log likelihood of each row under the fitted model."""
        check_is_fitted(self, "model_")
        if self.model_ is None:
            raise ConfigurationError("fit with estimate_parameters=True to score samples")
        data, _ = check_discrete(X, self.model_.cardinalities, self.n_features_in_)
        logp = np.zeros(len(data))
        with np.errstate(divide="ignore"):
            for i, (ps, cpt) in enumerate(zip(self.model_.parents, self.model_.cpts)):
                idx = tuple(data[:, p] for p in ps) + (data[:, i],)
                logp += np.log(cpt[idx])
        return logp

    def score(self, X, y=None):
        return float(np.mean(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=None):
        check_is_fitted(self, "model_")
        if self.model_ is None:
            raise ConfigurationError("fit with estimate_parameters=True to sample")
        return sample_array(self.model_, n_samples, random_state)
