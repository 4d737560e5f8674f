"""scikit-learn front end."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import engine
from .model import DataMatrix, Hyperparameters, InitOptions, _column_variance
from .schedule import TemperatureSchedule


class VBVarSel(SelectorMixin, ClusterMixin, BaseEstimator):
    """Gaussian mixture clustering with simultaneous covariate selection.

    Parameters mirror :class:`~vbvarsel.model.Hyperparameters`,
    :class:`~vbvarsel.schedule.TemperatureSchedule` and
    :class:`~vbvarsel.model.InitOptions`; see those for meanings.

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    c_ : ndarray of shape (n_features,)
        Posterior selection weights.
    selected_ : ndarray of bool, ``c_ >= selection_threshold``
    elbo_trace_ : list of float
    n_iter_ : int
    converged_ : bool
    cluster_sizes_ : ndarray of shape (k_max,)
    effective_k_ : int
    result_ : :class:`~vbvarsel.engine.FitResult`

    Examples
    --------
    >>> import numpy as np
    >>> from vbvarsel import VBVarSel
    >>> rng = np.random.default_rng(0)
    >>> X = rng.standard_normal((60, 8))
    >>> X[:30, :2] += 4.0
    >>> model = VBVarSel(k_max=3, random_state=0).fit(X)
    >>> model.transform(X).shape[1] <= 8
    True
    """

    def __init__(
        self,
        k_max=10,
        alpha0=0.1,
        m0=None,
        beta0=1e-3,
        a0=3.0,
        b0=1.0,
        d0=0.9,
        c_init=1.0,
        max_iterations=200,
        epsilon=1e-5,
        standardize=True,
        schedule="fixed",
        t0=1.0,
        annealed_iterations=10,
        init_concentration=3000.0,
        n_init=5,
        release_certainty=0.6,
        max_hold=20,
        selection_threshold=0.5,
        random_state=0,
    ):
        self.k_max = k_max
        self.alpha0 = alpha0
        self.m0 = m0
        self.beta0 = beta0
        self.a0 = a0
        self.b0 = b0
        self.d0 = d0
        self.c_init = c_init
        self.max_iterations = max_iterations
        self.epsilon = epsilon
        self.standardize = standardize
        self.schedule = schedule
        self.t0 = t0
        self.annealed_iterations = annealed_iterations
        self.init_concentration = init_concentration
        self.n_init = n_init
        self.release_certainty = release_certainty
        self.max_hold = max_hold
        self.selection_threshold = selection_threshold
        self.random_state = random_state

    def _hyperparameters(self):
        return Hyperparameters(
            k_max=self.k_max,
            alpha0=self.alpha0,
            m0=self.m0,
            beta0=self.beta0,
            a0=self.a0,
            b0=self.b0,
            d0=self.d0,
            c_init=self.c_init,
            max_iterations=self.max_iterations,
            epsilon=self.epsilon,
            standardize=self.standardize,
        )

    def _schedule(self):
        return TemperatureSchedule(self.schedule, self.t0, self.annealed_iterations)

    def _init_options(self):
        return InitOptions(
            concentration=self.init_concentration,
            n_init=self.n_init,
            release_certainty=self.release_certainty,
            max_hold=self.max_hold,
        )

    def fit(self, X, y=None):
        names = getattr(X, "columns", None)
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        seed = 0 if self.random_state is None else self.random_state
        if not isinstance(seed, (int, np.integer)):
            raise ValueError("random_state must be an integer")
        data = DataMatrix(X, None if names is None else [str(c) for c in names])
        result = engine.fit(
            data,
            self._hyperparameters(),
            self._schedule(),
            seed=int(seed),
            selection_threshold=self.selection_threshold,
            init=self._init_options(),
        )
        self.n_features_in_ = X.shape[1]
        if names is not None:
            self.feature_names_in_ = np.asarray(data.column_names, dtype=object)
        if self.standardize:
            self.center_, var = _column_variance(X)
            self.scale_ = np.sqrt(var)
        else:
            self.center_ = np.zeros(X.shape[1])
            self.scale_ = np.ones(X.shape[1])
        self.result_ = result
        self.labels_ = result.labels
        self.c_ = result.c
        self.selected_ = result.selected
        self.elbo_trace_ = list(result.elbo_trace)
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.cluster_sizes_ = result.cluster_sizes
        self.effective_k_ = result.effective_k
        return self

    def _scaled(self, X):
        check_is_fitted(self, "result_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return (X - self.center_) / self.scale_

    def predict_proba(self, X):
        """Responsibilities of new rows under the fitted variational posterior."""
        x = self._scaled(X)
        state = self.result_.final_state
        return engine.normalize_log_rows(engine.log_rho(state, x, 1.0))

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def _get_support_mask(self):
        check_is_fitted(self, "result_")
        return self.selected_
