"""Piecewise-linear finite elements for -div(a grad u) = 1 with u = 0 on the boundary.

Structured meshes of (0, 1) or (0, 1)^2 are supported. The coefficient is
sampled once per element at the centroid, so the stiffness matrix depends
linearly on the vector of element coefficient values; this is exploited by
caching a sparse map from element values to the CSR data array.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class CoefficientPositivityError(ValueError):
    """The diffusion coefficient is not positive at some quadrature point."""


@dataclass(eq=False)
class Mesh:
    """Uniform simplicial mesh with homogeneous Dirichlet boundary.

    Attributes
    ----------
    dim : int
        Spatial dimension, 1 or 2.
    subdivisions : int
        Number of cells per side.
    nodes : ndarray of shape (P, dim)
    elements : ndarray of shape (E, dim + 1)
        Vertex indices of each segment or triangle.
    dof : ndarray of shape (P,)
        Interior unknown number of each node, -1 on the boundary.
    interior : ndarray of shape (K,)
        Node index of each unknown.
    """

    dim: int
    subdivisions: int
    nodes: np.ndarray
    elements: np.ndarray
    dof: np.ndarray
    interior: np.ndarray

    @property
    def K(self) -> int:
        return int(self.interior.size)

    @property
    def h(self) -> float:
        return 1.0 / self.subdivisions

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.nodes[self.elements].mean(axis=1)

    @cached_property
    def element_measures(self) -> np.ndarray:
        return _element_geometry(self)[0]

    @cached_property
    def _pattern(self):
        return _stiffness_pattern(self)

    @cached_property
    def gram(self) -> sp.csr_matrix:
        """Dirichlet Laplacian ``K_V``: the stiffness matrix for ``a == 1``."""
        return self.stiffness_from_element_values(np.ones(len(self.elements)))

    @cached_property
    def load(self) -> np.ndarray:
        """Load vector for ``f == 1``: ``b_k = integral of phi_k`` (exact for P1)."""
        share = self.element_measures / (self.dim + 1)
        full = np.zeros(len(self.nodes))
        np.add.at(full, self.elements, share[:, None])
        return full[self.interior]

    def stiffness_from_element_values(self, a_elem) -> sp.csr_matrix:
        a_elem = np.asarray(a_elem, dtype=float)
        value_map, indices, indptr = self._pattern
        data = value_map @ a_elem
        return sp.csr_matrix((data, indices, indptr), shape=(self.K, self.K))

    def node_coordinates(self) -> np.ndarray:
        """Coordinates of the K interior unknowns."""
        return self.nodes[self.interior]


def build_mesh(n: int, subdivisions: int) -> Mesh:
    """Uniform mesh of (0,1)^n; squares are split along the (i,j)-(i+1,j+1) diagonal."""
    if n not in (1, 2):
        raise ValueError(f"spatial dimension must be 1 or 2, got {n}")
    if subdivisions < 2:
        raise ValueError("need at least 2 subdivisions to have an interior node")
    s = subdivisions
    grid = np.linspace(0.0, 1.0, s + 1)
    if n == 1:
        nodes = grid[:, None]
        elements = np.column_stack([np.arange(s), np.arange(1, s + 1)])
        boundary = np.zeros(s + 1, dtype=bool)
        boundary[[0, s]] = True
    else:
        xx, yy = np.meshgrid(grid, grid, indexing="xy")
        nodes = np.column_stack([xx.ravel(), yy.ravel()])
        idx = np.arange((s + 1) ** 2).reshape(s + 1, s + 1)  # idx[j, i] -> (x_i, y_j)
        n0 = idx[:-1, :-1].ravel()
        n1 = idx[:-1, 1:].ravel()
        n2 = idx[1:, 1:].ravel()
        n3 = idx[1:, :-1].ravel()
        elements = np.concatenate([np.column_stack([n0, n1, n2]), np.column_stack([n0, n2, n3])])
        ii, jj = np.meshgrid(np.arange(s + 1), np.arange(s + 1), indexing="xy")
        boundary = ((ii == 0) | (ii == s) | (jj == 0) | (jj == s)).ravel()
    interior = np.flatnonzero(~boundary)
    dof = -np.ones(len(nodes), dtype=np.int64)
    dof[interior] = np.arange(interior.size)
    return Mesh(n, s, nodes, elements, dof, interior)


def _element_geometry(mesh: Mesh):
    """Element measures and P1 basis gradients, shape (E,) and (E, dim+1, dim)."""
    verts = mesh.nodes[mesh.elements]
    if mesh.dim == 1:
        length = verts[:, 1, 0] - verts[:, 0, 0]
        grads = np.stack([-1.0 / length, 1.0 / length], axis=1)[:, :, None]
        return length, grads
    e1 = verts[:, 1] - verts[:, 0]
    e2 = verts[:, 2] - verts[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    area = 0.5 * np.abs(det)
    # gradients of barycentric coordinates
    g1 = np.column_stack([e2[:, 1], -e2[:, 0]]) / det[:, None]
    g2 = np.column_stack([-e1[:, 1], e1[:, 0]]) / det[:, None]
    g0 = -(g1 + g2)
    return area, np.stack([g0, g1, g2], axis=1)


def _stiffness_pattern(mesh: Mesh):
    measures, grads = _element_geometry(mesh)
    local = np.einsum("e,eik,ejk->eij", measures, grads, grads)
    nloc = mesh.dim + 1
    E = len(mesh.elements)
    rows = mesh.dof[np.repeat(mesh.elements, nloc, axis=1)].ravel()
    cols = mesh.dof[np.tile(mesh.elements, (1, nloc))].ravel()
    elem = np.repeat(np.arange(E), nloc * nloc)
    vals = local.reshape(-1)
    keep = (rows >= 0) & (cols >= 0)
    rows, cols, elem, vals = rows[keep], cols[keep], elem[keep], vals[keep]
    key = rows * mesh.K + cols
    uniq, slot = np.unique(key, return_inverse=True)
    urows = uniq // mesh.K
    indices = (uniq % mesh.K).astype(np.int64)
    indptr = np.zeros(mesh.K + 1, dtype=np.int64)
    np.add.at(indptr, urows + 1, 1)
    indptr = np.cumsum(indptr)
    value_map = sp.csr_matrix((vals, (slot, elem)), shape=(uniq.size, E))
    return value_map, indices, indptr


@dataclass
class FemSystem:
    """Assembled Dirichlet problem ``S u = b`` on a mesh."""

    mesh: Mesh
    stiffness: sp.csr_matrix
    load: np.ndarray

    @property
    def gram(self) -> sp.csr_matrix:
        return self.mesh.gram


def assemble(
    mesh: Mesh,
    a_field: Callable[[np.ndarray], np.ndarray] | np.ndarray | float,
    label: Optional[str] = None,
) -> FemSystem:
    """Assemble stiffness and load with one-point centroid quadrature.

    ``a_field`` is either a callable mapping an ``(E, dim)`` array of element
    centroids to coefficient values, an array of per-element values, or a
    scalar constant.
    """
    if callable(a_field):
        a_elem = np.asarray(a_field(mesh.centroids), dtype=float)
    else:
        a_elem = np.broadcast_to(np.asarray(a_field, dtype=float), (len(mesh.elements),))
    if a_elem.shape != (len(mesh.elements),):
        raise ValueError("coefficient must give one value per element")
    if not np.all(a_elem > 0):
        where = f" for {label}" if label else ""
        raise CoefficientPositivityError(
            f"diffusion coefficient not positive{where}: min value {a_elem.min():.6g}"
        )
    return FemSystem(mesh, mesh.stiffness_from_element_values(a_elem), mesh.load)


def solve_dirichlet(system: FemSystem, rhs: Optional[np.ndarray] = None) -> np.ndarray:
    """Interior nodal values of the P1 solution (boundary values are zero)."""
    b = system.load if rhs is None else np.asarray(rhs, dtype=float)
    if not np.any(b):
        return np.zeros(system.mesh.K)
    return spla.splu(system.stiffness.tocsc()).solve(b)


def v_norm(field, mesh_or_gram) -> float:
    """Discrete H^1_0 seminorm ``sqrt(u^T K_V u)`` of the P1 interpolant."""
    gram = mesh_or_gram.gram if isinstance(mesh_or_gram, Mesh) else mesh_or_gram
    u = np.asarray(field, dtype=float)
    return float(np.sqrt(max(u @ (gram @ u), 0.0)))


def full_field(mesh: Mesh, field) -> np.ndarray:
    """Extend interior values by zero to all mesh nodes."""
    out = np.zeros(len(mesh.nodes))
    out[mesh.interior] = field
    return out
