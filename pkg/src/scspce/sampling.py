"""Finite element snapshots ``u_h(., y_i)`` of the parameterized diffusion problem."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coefficient import (
    LOG_ADMISSIBLE_MIN,
    AffineCoefficient,
    LogCoefficient,
    affine_split,
    positivity_scan,
)
from .fem import CoefficientPositivityError, Mesh, assemble, solve_dirichlet


class SnapshotSolver:
    """Solve the Dirichlet problem for a batch of parameter samples.

    For the affine field the stiffness data is formed as ``S_0 + sum_i y_i S_i``
    from precomputed pieces sharing one sparsity pattern; the log-transformed
    field is assembled directly per sample.
    """

    def __init__(self, coef, mesh: Mesh):
        self.coef = coef
        self.mesh = mesh
        if isinstance(coef, AffineCoefficient):
            pieces = affine_split(coef, mesh)
            self._indices = pieces[0].indices
            self._indptr = pieces[0].indptr
            self._data0 = pieces[0].data
            self._data_y = np.column_stack([p.data for p in pieces[1:]])
        elif not isinstance(coef, LogCoefficient):
            raise TypeError(f"unsupported coefficient model {type(coef).__name__}")

    def check(self, samples) -> None:
        """Abort with the offending sample if the coefficient is not admissible."""
        samples = np.atleast_2d(samples)
        threshold = LOG_ADMISSIBLE_MIN if isinstance(self.coef, LogCoefficient) else 0.0
        if positivity_scan(self.coef, self.mesh, samples) > threshold:
            return
        for i, y in enumerate(samples):
            low = positivity_scan(self.coef, self.mesh, y)
            if low <= threshold:
                raise CoefficientPositivityError(
                    f"sample {i} (y={np.array2string(y, precision=4)}) gives coefficient value "
                    f"{low:.6g} <= {threshold}"
                )

    def stiffness(self, y) -> sp.csr_matrix:
        if isinstance(self.coef, AffineCoefficient):
            data = self._data0 + self._data_y @ np.asarray(y, dtype=float)
            K = self.mesh.K
            return sp.csr_matrix((data, self._indices, self._indptr), shape=(K, K))
        return assemble(self.mesh, lambda x: self.coef(x, y)).stiffness

    def solve(self, samples) -> np.ndarray:
        """Nodal solutions, shape ``(m, K)``."""
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        self.check(samples)
        load = self.mesh.load
        out = np.empty((samples.shape[0], self.mesh.K))
        for i, y in enumerate(samples):
            out[i] = spla.splu(self.stiffness(y).tocsc()).solve(load)
        return out


def generate_snapshots(coef, mesh: Mesh, samples) -> np.ndarray:
    return SnapshotSolver(coef, mesh).solve(samples)


def solve_sample(coef, mesh: Mesh, y) -> np.ndarray:
    """Single snapshot by direct assembly (no affine shortcut)."""
    return solve_dirichlet(assemble(mesh, lambda x: coef(x, y)))
