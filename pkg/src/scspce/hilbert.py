"""Hilbert-valued coefficient vectors and the mixed (V, p) norms.

A Hilbert-valued vector is stored as an ``(N, K)`` array whose rows are the
nodal coefficients of its ``N`` coordinates in a finite element space, along
with the Gram matrix ``K_V`` that defines the V inner product of two rows.
``gram=None`` stands for the identity (Euclidean rows).
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp


def apply_gram(coords: np.ndarray, gram) -> np.ndarray:
    """Right-multiply the coordinate rows by the (symmetric) Gram matrix."""
    if gram is None:
        return coords
    if sp.issparse(gram):
        flat = coords.reshape(-1, coords.shape[-1])
        return np.asarray(gram @ flat.T).T.reshape(coords.shape)
    return coords @ np.asarray(gram)


def coordinate_norms(coords: np.ndarray, gram=None) -> np.ndarray:
    """V-norm of every coordinate: ``sqrt(z_nu^T K_V z_nu)`` along the last axis."""
    sq = np.einsum("...k,...k->...", apply_gram(coords, gram), coords)
    return np.sqrt(np.maximum(sq, 0.0))


class HilbertVec:
    """``N`` coordinates in a finite element space V, stored densely.

    Parameters
    ----------
    coords : array-like of shape (N, K)
    gram : sparse or dense (K, K) matrix, optional
        Gram matrix of the V inner product; identity when omitted.
    """

    __array_priority__ = 20

    def __init__(self, coords, gram=None):
        coords = np.asarray(coords, dtype=float)
        if coords.ndim == 1:
            coords = coords[:, None]
        if coords.ndim != 2:
            raise ValueError(f"coordinates must be a 2-D array, got shape {coords.shape}")
        if gram is not None and gram.shape != (coords.shape[1], coords.shape[1]):
            raise ValueError(f"gram of shape {gram.shape} does not match K={coords.shape[1]}")
        self.coords = coords
        self.gram = gram

    @classmethod
    def zeros(cls, N: int, K: int, gram=None) -> "HilbertVec":
        return cls(np.zeros((N, K)), gram)

    @property
    def N(self) -> int:
        return self.coords.shape[0]

    @property
    def K(self) -> int:
        return self.coords.shape[1]

    def norms(self) -> np.ndarray:
        return coordinate_norms(self.coords, self.gram)

    def mixed_norm(self, p=2) -> float:
        return mixed_norm(self, p)

    def copy(self) -> "HilbertVec":
        return HilbertVec(self.coords.copy(), self.gram)

    def _check(self, other: "HilbertVec"):
        if not isinstance(other, HilbertVec):
            return NotImplemented
        if other.coords.shape != self.coords.shape:
            raise ValueError(f"shape mismatch {self.coords.shape} vs {other.coords.shape}")
        return other

    def __add__(self, other):
        other = self._check(other)
        return HilbertVec(self.coords + other.coords, self.gram)

    def __sub__(self, other):
        other = self._check(other)
        return HilbertVec(self.coords - other.coords, self.gram)

    def __mul__(self, scalar):
        return HilbertVec(self.coords * float(scalar), self.gram)

    __rmul__ = __mul__

    def __neg__(self):
        return HilbertVec(-self.coords, self.gram)

    def __repr__(self) -> str:
        return f"HilbertVec(N={self.N}, K={self.K})"


def _coords_and_gram(z, gram=None):
    if isinstance(z, HilbertVec):
        return z.coords, z.gram if gram is None else gram
    z = np.asarray(z, dtype=float)
    return (z[:, None] if z.ndim == 1 else z), gram


def mixed_norm(z, p=2, gram=None) -> float:
    """``(sum_nu ||z_nu||_V^p)^(1/p)``, or the largest coordinate norm for ``p=inf``."""
    coords, gram = _coords_and_gram(z, gram)
    norms = coordinate_norms(coords, gram)
    if norms.size == 0:
        return 0.0
    if p == np.inf or p == "inf":
        return float(norms.max())
    p = float(p)
    if p <= 0:
        raise ValueError("p must be positive")
    return float((norms**p).sum() ** (1.0 / p))


def inner_product_V2(z, w, gram=None) -> float:
    """``sum_nu <z_nu, w_nu>_V``."""
    zc, gram = _coords_and_gram(z, gram)
    wc, _ = _coords_and_gram(w)
    if zc.shape != wc.shape:
        raise ValueError(f"shape mismatch {zc.shape} vs {wc.shape}")
    return float(np.sum(apply_gram(zc, gram) * wc))


def support(z, threshold: float = 0.0, gram=None) -> np.ndarray:
    """Indices of coordinates whose V-norm exceeds ``threshold``."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    coords, gram = _coords_and_gram(z, gram)
    return np.flatnonzero(coordinate_norms(coords, gram) > threshold)


def best_s_term(z, s: int, p=2, gram=None):
    """Keep the ``s`` coordinates of largest V-norm and return ``(truncated, sigma_s)``.

    Ties are broken in favour of the lower position in the index order.
    ``sigma_s`` is the mixed ``(V, p)`` norm of the discarded part.
    """
    coords, gram = _coords_and_gram(z, gram)
    N = coords.shape[0]
    if not 0 <= s <= N:
        raise ValueError(f"s must lie in [0, {N}]")
    norms = coordinate_norms(coords, gram)
    # stable sort on -norm keeps lower positions first among equal norms
    order = np.argsort(-norms, kind="stable")
    keep = np.zeros(N, dtype=bool)
    keep[order[:s]] = True
    kept = np.where(keep[:, None], coords, 0.0)
    rest = coords - kept
    return HilbertVec(kept, gram), mixed_norm(rest, p, gram)


def apply_measurement(A, z):
    """``(A z)_i = sum_nu A[i, nu] z_nu``, applied to the coefficient array."""
    A = np.asarray(A, dtype=float)
    coords, gram = _coords_and_gram(z)
    if A.shape[1] != coords.shape[0]:
        raise ValueError(f"matrix has {A.shape[1]} columns but vector has {coords.shape[0]} coordinates")
    out = A @ coords
    return HilbertVec(out, gram) if isinstance(z, HilbertVec) else out


def adjoint_apply(A, r):
    """``(A^T r)_nu = sum_i A[i, nu] r_i``."""
    A = np.asarray(A, dtype=float)
    coords, gram = _coords_and_gram(r)
    if A.shape[0] != coords.shape[0]:
        raise ValueError(f"matrix has {A.shape[0]} rows but vector has {coords.shape[0]} coordinates")
    out = A.T @ coords
    return HilbertVec(out, gram) if isinstance(r, HilbertVec) else out


def rip_constant(A, s: int) -> float:
    """Restricted isometry constant of order ``s`` by enumerating all supports."""
    A = np.asarray(A, dtype=float)
    delta = 0.0
    for S in itertools.combinations(range(A.shape[1]), s):
        cols = A[:, S]
        ev = np.linalg.eigvalsh(cols.T @ cols)
        delta = max(delta, ev[-1] - 1.0, 1.0 - ev[0])
    return float(delta)


def v_rip_constant(A, s: int, gram) -> float:
    """Restricted isometry constant of ``A`` acting on ``s``-sparse vectors in V^N.

    For every support ``S`` the extreme ratios ``||A z||_{V,2}^2 / ||z||_{V,2}^2``
    over ``z`` supported on ``S`` are the generalized eigenvalues of the pair
    ``(A_S^T A_S (x) K_V, I (x) K_V)`` on the stacked coordinates.
    """
    A = np.asarray(A, dtype=float)
    G = gram.toarray() if sp.issparse(gram) else np.asarray(gram, dtype=float)
    delta = 0.0
    for S in itertools.combinations(range(A.shape[1]), s):
        cols = A[:, S]
        lhs = np.kron(cols.T @ cols, G)
        rhs = np.kron(np.eye(len(S)), G)
        ev = sla.eigh(lhs, rhs, eigvals_only=True)
        delta = max(delta, ev[-1] - 1.0, 1.0 - ev[0])
    return float(delta)
