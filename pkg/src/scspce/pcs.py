"""Point-wise compressed sensing: an independent scalar recovery at every mesh node."""

from __future__ import annotations

import numpy as np

from .solver import SolverConfig, _as_matrix, bregman_solve_many, spectral_setup


def pcs_solve(A, snapshots, config: SolverConfig, b_tol: float, spectral=None):
    """Recover the GPC coefficients of every nodal value separately.

    Parameters
    ----------
    A : MeasurementMatrix or ndarray of shape (m, N)
        Sampling matrix (unnormalized, entries ``Psi_nu(y_i) / sqrt(m)``).
    snapshots : ndarray of shape (m, K)
        Nodal solutions ``u_h(x_k, y_i)``; row ``i`` belongs to sample ``i``.
    config : SolverConfig
        Shared solver parameters (``config.b_tol`` is ignored).
    b_tol : float
        Global residual target in the normalized system. Each node gets
        ``b_tol / sqrt(K)``.
    spectral : SpectralInfo, optional
        Result of :func:`spectral_setup` for ``A`` and ``snapshots / sqrt(m)``,
        to avoid recomputing it.

    Returns
    -------
    coef : ndarray of shape (N, K)
    states : list of BregmanState, one per node
    """
    mat = _as_matrix(A)
    snapshots = np.asarray(snapshots, dtype=float)
    if snapshots.ndim == 1:
        snapshots = snapshots[:, None]
    m, K = snapshots.shape
    if m != mat.shape[0]:
        raise ValueError(f"{m} snapshots for a matrix with {mat.shape[0]} rows")
    if spectral is None:
        spectral = spectral_setup(mat, snapshots / np.sqrt(m), config.xi)
    # node k is problem k with a single scalar coordinate
    U = spectral.u[:, :, None]
    node_tol = b_tol / np.sqrt(K)
    Z, states = bregman_solve_many(spectral.A.matrix, U, config, node_tol, spectral.mu_bar)
    return Z[:, :, 0], states
