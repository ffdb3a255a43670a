"""Orthonormal tensor Legendre basis on (-sqrt(3), sqrt(3))^d and sampling matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .multiindex import IndexSet

SQRT3 = float(np.sqrt(3.0))


def legendre_table(t, kmax: int) -> np.ndarray:
    """Orthonormal Legendre values for degrees ``0..kmax``.

    Returns an array of shape ``t.shape + (kmax + 1,)`` whose last axis holds
    ``sqrt(2k+1) P_k(t)``, orthonormal for the measure ``dt/2`` on [-1, 1].
    """
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0):
        raise ValueError("Legendre argument outside [-1, 1]")
    out = np.empty(t.shape + (kmax + 1,))
    out[..., 0] = 1.0
    if kmax >= 1:
        out[..., 1] = t
    for n in range(1, kmax):
        out[..., n + 1] = ((2 * n + 1) * t * out[..., n] - n * out[..., n - 1]) / (n + 1)
    out *= np.sqrt(2.0 * np.arange(kmax + 1) + 1.0)
    return out


def legendre_1d(k: int, t) -> np.ndarray | float:
    """Orthonormal Legendre polynomial of degree ``k`` evaluated at ``t``."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    vals = legendre_table(t, k)[..., k]
    return float(vals) if np.ndim(vals) == 0 else vals


def check_param_samples(y, d: Optional[int] = None) -> np.ndarray:
    """Validate parameter samples, returning a float array of shape ``(m, d)``.

    Every entry must lie in the open interval (-sqrt(3), sqrt(3)).
    """
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[None, :]
    if y.ndim != 2:
        raise ValueError(f"parameter samples must be 2-D, got shape {y.shape}")
    if d is not None and y.shape[1] != d:
        raise ValueError(f"parameter samples have dimension {y.shape[1]}, expected {d}")
    if not np.all(np.isfinite(y)):
        raise ValueError("parameter samples contain non-finite values")
    if np.any(np.abs(y) >= SQRT3):
        raise ValueError("parameter samples must lie in the open interval (-sqrt(3), sqrt(3))")
    return y


def tensor_basis_eval(nu: Sequence[int], y) -> float:
    """Evaluate ``Psi_nu(y) = prod_j Pbar_{nu_j}(y_j / sqrt(3))`` at one sample."""
    nu = np.asarray(nu, dtype=int)
    y = check_param_samples(y, d=len(nu))[0]
    val = 1.0
    for k, yj in zip(nu, y):
        if k:
            val *= legendre_1d(int(k), yj / SQRT3)
    return float(val)


def basis_matrix(index_set: IndexSet, samples) -> np.ndarray:
    """Unnormalized design matrix ``Psi[i, j] = Psi_{nu_j}(y_i)``."""
    y = check_param_samples(samples, d=index_set.d)
    nus = index_set.as_array()
    table = legendre_table(y / SQRT3, max(index_set.p, 0) if len(index_set) else 0)
    # only the non-zero components of each index contribute a factor
    nnz = int(np.count_nonzero(nus, axis=1).max()) if nus.size else 0
    out = np.ones((y.shape[0], len(index_set)))
    if nnz == 0:
        return out
    var_idx = np.zeros((len(index_set), nnz), dtype=np.int64)
    deg_idx = np.zeros((len(index_set), nnz), dtype=np.int64)
    for row, nu in enumerate(nus):
        (nz,) = np.nonzero(nu)
        var_idx[row, : nz.size] = nz
        deg_idx[row, : nz.size] = nu[nz]
    for r in range(nnz):
        out *= table[:, var_idx[:, r], deg_idx[:, r]]
    return out


@dataclass
class MeasurementMatrix:
    """Sampling matrix ``A[i, j] = Psi_{nu_j}(y_i) / sqrt(m)`` with spectral metadata."""

    matrix: np.ndarray
    lam_max: Optional[float] = None
    lam_min: Optional[float] = None
    normalized: bool = False

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def N(self) -> int:
        return self.matrix.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def sampling_matrix(index_set: IndexSet, samples) -> MeasurementMatrix:
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("sampling matrix needs at least one sample")
    psi = basis_matrix(index_set, samples)
    return MeasurementMatrix(psi / np.sqrt(psi.shape[0]))


def sup_bound(index_set: IndexSet) -> float:
    """``max_nu ||Psi_nu||_inf``; each factor peaks at the interval endpoint."""
    nus = index_set.as_array()
    return float(np.sqrt(2.0 * nus + 1.0).prod(axis=1).max())


def trial_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream)``."""
    return np.random.Generator(np.random.Philox(key=[int(seed), int(stream)]))


def sample_parameters(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    """``m`` i.i.d. uniform samples on the open cube (-sqrt(3), sqrt(3))^d."""
    # cell midpoints of a 2**52 grid: exact in binary and strictly inside (0, 1)
    k = rng.integers(0, 2**52, size=(m, d), dtype=np.int64)
    u = (k + 0.5) / 2.0**52
    return SQRT3 * (2.0 * u - 1.0)
