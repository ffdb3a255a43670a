"""Estimator interface: fit on parameter samples and snapshots, predict fields.

The regressors follow the scikit-learn conventions (``get_params``,
``set_params``, ``clone``), with ``X`` of shape ``(m, d)`` holding parameter
samples in ``(-sqrt(3), sqrt(3))^d`` and ``Y`` of shape ``(m, K)`` holding
nodal solutions.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .estimators import btol_rule, gpc_mean, gpc_std_field, mc_estimate
from .multiindex import total_degree_set
from .pcs import pcs_solve
from .polychaos import basis_matrix, check_param_samples, sampling_matrix
from .solver import SolverConfig, bregman_solve, spectral_setup


def check_snapshots(Y, m: int) -> np.ndarray:
    """Validate snapshots against ``m`` samples; a 1-D ``Y`` becomes one column."""
    Y = check_array(Y, ensure_2d=False, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.ndim != 2 or Y.shape[0] != m:
        raise ValueError(f"expected snapshots with {m} rows, got shape {Y.shape}")
    return Y


def check_samples(X) -> np.ndarray:
    X = check_array(X, dtype=float)
    return check_param_samples(X)


class _GPCRegressor(RegressorMixin, BaseEstimator):
    def __init__(self, degree=2, gram=None, b_tol=None, tau=1.0, x_tol=1.0, g_tol=0.1,
                 xi=1e-5, max_inner=10000, max_fpc_stages=60, max_bregman=50):
        self.degree = degree
        self.gram = gram
        self.b_tol = b_tol
        self.tau = tau
        self.x_tol = x_tol
        self.g_tol = g_tol
        self.xi = xi
        self.max_inner = max_inner
        self.max_fpc_stages = max_fpc_stages
        self.max_bregman = max_bregman

    def _solver_config(self) -> SolverConfig:
        return SolverConfig(tau=self.tau, x_tol=self.x_tol, g_tol=self.g_tol, xi=self.xi,
                            max_inner=self.max_inner, max_fpc_stages=self.max_fpc_stages,
                            max_bregman=self.max_bregman)

    def _prepare(self, X, Y, reference_coef):
        X = check_samples(X)
        Y = check_snapshots(Y, X.shape[0])
        self.index_set_ = total_degree_set(X.shape[1], self.degree)
        self.n_features_in_ = X.shape[1]
        A = sampling_matrix(self.index_set_, X)
        self.sampling_matrix_ = A.matrix
        self.spectral_ = spectral_setup(A, Y / np.sqrt(X.shape[0]), self.xi)
        if reference_coef is not None:
            self.b_tol_ = btol_rule(self.spectral_.A, self.spectral_.u, reference_coef, self.gram)
        elif self.b_tol is not None:
            self.b_tol_ = float(self.b_tol)
        else:
            raise ValueError("set b_tol or pass reference_coef to fit")
        return X, Y

    def predict(self, X):
        """Surrogate evaluated at parameter samples, shape ``(n, K)``."""
        check_is_fitted(self, "coef_")
        X = check_samples(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} parameters, got {X.shape[1]}")
        return basis_matrix(self.index_set_, X) @ self.coef_

    def mean_field(self) -> np.ndarray:
        check_is_fitted(self, "coef_")
        return gpc_mean(self.coef_)

    def std_field(self) -> np.ndarray:
        check_is_fitted(self, "coef_")
        return gpc_std_field(self.coef_)


class SCSRegressor(_GPCRegressor):
    """Simultaneous compressed sensing of all GPC coefficient fields.

    Solves the (V, l1) basis pursuit denoising problem with Bregman-FPC
    iterations on the normalized system.

    Parameters
    ----------
    degree : int
        Total degree ``p`` of the index set.
    gram : sparse matrix of shape (K, K), optional
        Gram matrix of V (the stiffness matrix with unit coefficient).
    b_tol : float, optional
        Residual target in the normalized system; superseded by
        ``reference_coef`` in :meth:`fit`.
    tau, x_tol, g_tol, xi, max_inner, max_fpc_stages, max_bregman
        Solver parameters, see :class:`SolverConfig`.

    Attributes
    ----------
    coef_ : ndarray of shape (N, K)
    index_set_ : IndexSet
    state_ : BregmanState
    converged_ : bool
    b_tol_ : float
    """

    def fit(self, X, Y, reference_coef=None):
        X, Y = self._prepare(X, Y, reference_coef)
        cfg = self._solver_config()
        cfg.b_tol = self.b_tol_
        sp = self.spectral_
        self.coef_, self.state_ = bregman_solve(sp.A, sp.u, cfg, gram=self.gram, mu_bar=sp.mu_bar)
        self.state_.lam_max, self.state_.lam_min = sp.lam_max, sp.lam_min
        self.converged_ = self.state_.converged
        return self


class PCSRegressor(_GPCRegressor):
    """Point-wise compressed sensing: one scalar recovery per mesh node.

    Takes the same parameters as :class:`SCSRegressor`. The global ``b_tol``
    is split as ``b_tol / sqrt(K)`` per node.

    Attributes
    ----------
    coef_ : ndarray of shape (N, K)
    states_ : list of BregmanState
    converged_ : bool
        True only if every node converged.
    n_flagged_ : int
        Number of nodes that stopped at an iteration cap.
    """

    def fit(self, X, Y, reference_coef=None):
        X, Y = self._prepare(X, Y, reference_coef)
        self.coef_, self.states_ = pcs_solve(self.spectral_.A, Y, self._solver_config(),
                                             self.b_tol_, spectral=self.spectral_)
        self.n_flagged_ = sum(not s.converged for s in self.states_)
        self.converged_ = self.n_flagged_ == 0
        return self


class MonteCarloMoments(BaseEstimator):
    """Nodewise sample mean and unbiased standard deviation of snapshots."""

    def fit(self, X, Y=None):
        if Y is None:
            Y, X = X, None
        Y = check_array(Y, ensure_2d=False, dtype=float)
        if X is not None:
            check_snapshots(Y, check_samples(X).shape[0])
        self.mean_, self.std_ = mc_estimate(Y)
        return self

    def mean_field(self) -> np.ndarray:
        check_is_fitted(self, "mean_")
        return self.mean_

    def std_field(self) -> np.ndarray:
        check_is_fitted(self, "std_")
        return self.std_
