"""Moments of surrogates and samples, the least-squares reference, and error metrics."""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from .fem import v_norm
from .hilbert import HilbertVec, coordinate_norms
from .multiindex import IndexSet
from .polychaos import basis_matrix, sample_parameters, trial_rng
from .sampling import SnapshotSolver


class IllConditionedError(ValueError):
    pass


def _coords(c) -> np.ndarray:
    if isinstance(c, HilbertVec):
        return c.coords
    c = np.asarray(c, dtype=float)
    return c[:, None] if c.ndim == 1 else c


def gpc_mean(c) -> np.ndarray:
    """Mean field of a GPC expansion: the coefficient of the zero index (position 0)."""
    return _coords(c)[0].copy()


def gpc_std_field(c) -> np.ndarray:
    """Nodal standard deviation ``sqrt(sum_{nu != 0} c_nu(x)^2)``."""
    return np.sqrt(np.sum(_coords(c)[1:] ** 2, axis=0))


def mc_estimate(snapshots):
    """Nodewise sample mean and unbiased sample standard deviation."""
    u = np.asarray(snapshots, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[0] < 2:
        raise ValueError("need at least two snapshots for a standard deviation")
    # shift by the first sample so identical snapshots give exactly zero spread
    dev = u - u[0]
    return u[0] + dev.mean(axis=0), dev.std(axis=0, ddof=1)


def least_squares_coefficients(index_set: IndexSet, samples, snapshots, max_cond: float = 1e8):
    """Fit GPC coefficients to snapshots by QR least squares, one column per node.

    Raises :class:`IllConditionedError` when the design matrix has condition
    number above ``max_cond``.
    """
    psi = basis_matrix(index_set, samples)
    Q, R = np.linalg.qr(psi, mode="reduced")
    sv = np.linalg.svd(R, compute_uv=False)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if cond > max_cond:
        raise IllConditionedError(
            f"least-squares design has condition number {cond:.3g}; use more reference samples"
        )
    return sla.solve_triangular(R, Q.T @ np.asarray(snapshots, dtype=float))


def reference_oracle(index_set: IndexSet, mesh, coefficient, m_ref: int, seed: int,
                     stream: int = 1) -> np.ndarray:
    """Least-squares GPC coefficients from ``m_ref`` fresh FEM snapshots.

    Samples are drawn from the ``(seed, stream)`` generator, distinct from the
    per-trial streams.
    """
    N = len(index_set)
    if m_ref < 3 * N:
        raise ValueError(f"m_ref={m_ref} is below 3N={3 * N}")
    y = sample_parameters(trial_rng(seed, stream), m_ref, index_set.d)
    snaps = SnapshotSolver(coefficient, mesh).solve(y)
    return least_squares_coefficients(index_set, y, snaps)


def btol_rule(A, u, c_ref, gram=None) -> float:
    """``1.2 ||A c_ref - u||_{V,2}``, floored at ``1e-12 ||u||_{V,2}``."""
    A = A.matrix if hasattr(A, "matrix") else np.asarray(A, dtype=float)
    u = _coords(u)
    r = A @ _coords(c_ref) - u
    res = np.sqrt(np.sum(coordinate_norms(r, gram) ** 2))
    unorm = np.sqrt(np.sum(coordinate_norms(u, gram) ** 2))
    return float(max(1.2 * res, 1e-12 * unorm))


def error_report(approx_mean, approx_std, ref_mean, ref_std, gram) -> tuple[float, float]:
    """Relative H^1_0 errors of the mean and standard deviation fields."""
    ref_e = v_norm(ref_mean, gram)
    ref_s = v_norm(ref_std, gram)
    if ref_e == 0.0 or ref_s == 0.0:
        raise ZeroDivisionError("reference field has zero norm")
    err_e = v_norm(np.asarray(ref_mean) - approx_mean, gram) / ref_e
    err_s = v_norm(np.asarray(ref_std) - approx_std, gram) / ref_s
    return float(err_e), float(err_s)
