"""Parameterized diffusion coefficients: an affine random field and its log transform."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .fem import CoefficientPositivityError, Mesh

OFFSET = 10.0
LOG_SHIFT = 0.5
# the shifted field must exceed 1 so that log(a - 0.5) stays positive
LOG_ADMISSIBLE_MIN = 1.5


class UnsupportedModelError(TypeError):
    pass


@dataclass(frozen=True)
class AffineCoefficient:
    """``a(x, y) = 10 + y_1 (sqrt(pi) L / 2)^(1/2) + sum_{n>=2} zeta_n phi_n(x) y_n``.

    The modes depend on ``x_1`` only: ``phi_n`` is a sine for even ``n`` and a
    cosine for odd ``n``, with frequency ``floor(n/2) pi / L_p``.

    Parameters
    ----------
    d : int
        Number of random variables.
    corr_length : float
        Physical correlation length ``L_c``.
    extent : float
        Length ``b`` of the domain in ``x_1``.
    """

    d: int
    corr_length: float
    extent: float = 1.0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be positive")
        if self.corr_length <= 0:
            raise ValueError("correlation length must be positive")

    @property
    def L_p(self) -> float:
        return max(self.extent, 2.0 * self.corr_length)

    @property
    def L(self) -> float:
        return self.corr_length / self.L_p

    @cached_property
    def amplitudes(self) -> np.ndarray:
        """Scale of each random variable: entry 0 for ``y_1``, entry n-1 is ``zeta_n``."""
        L = self.L
        amp = np.empty(self.d)
        amp[0] = np.sqrt(np.sqrt(np.pi) * L / 2.0)
        n = np.arange(2, self.d + 1)
        amp[1:] = np.sqrt(np.sqrt(np.pi) * L) * np.exp(-((n // 2) * np.pi * L) ** 2 / 8.0)
        return amp

    def modes(self, x) -> np.ndarray:
        """Spatial factors, shape ``(P, d)``; column 0 is the constant mode of ``y_1``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        x1 = x[:, 0]
        out = np.ones((x1.size, self.d))
        n = np.arange(2, self.d + 1)
        arg = np.outer(x1, (n // 2) * np.pi / self.L_p)
        out[:, 1:] = np.where(n % 2 == 0, np.sin(arg), np.cos(arg))
        return out

    def __call__(self, x, y) -> np.ndarray:
        return eval_affine(self, x, y)


@dataclass(frozen=True)
class LogCoefficient:
    """``log(a(x, y) - 0.5)`` for an affine field ``a``."""

    base: AffineCoefficient

    @property
    def d(self) -> int:
        return self.base.d

    def __call__(self, x, y) -> np.ndarray:
        return eval_log(self.base, x, y)


def eval_affine(coef: AffineCoefficient, x, y) -> np.ndarray:
    """Affine coefficient at points ``x`` (shape ``(P, n)``) for one parameter ``y``."""
    y = np.asarray(y, dtype=float)
    return OFFSET + coef.modes(x) @ (coef.amplitudes * y)


def eval_log(coef: AffineCoefficient, x, y) -> np.ndarray:
    a = eval_affine(coef, x, y)
    if np.any(a <= LOG_ADMISSIBLE_MIN):
        raise CoefficientPositivityError(
            f"affine field {a.min():.6g} <= {LOG_ADMISSIBLE_MIN}: log(a - {LOG_SHIFT}) would not be positive"
        )
    return np.log(a - LOG_SHIFT)


def affine_split(coef, mesh: Mesh) -> list[sp.csr_matrix]:
    """Stiffness pieces ``[S_0, S_1, ..., S_d]`` with ``S(y) = S_0 + sum_i y_i S_i``."""
    if not isinstance(coef, AffineCoefficient):
        raise UnsupportedModelError(f"affine split needs an affine coefficient, got {type(coef).__name__}")
    modes = coef.modes(mesh.centroids) * coef.amplitudes
    pieces = [mesh.stiffness_from_element_values(np.full(len(mesh.elements), OFFSET))]
    pieces += [mesh.stiffness_from_element_values(modes[:, i]) for i in range(coef.d)]
    return pieces


def element_coefficients(coef, mesh: Mesh, y) -> np.ndarray:
    """Coefficient value at every element centroid for one parameter sample."""
    return coef(mesh.centroids, y)


def positivity_scan(coef, mesh: Mesh, samples) -> float:
    """Smallest affine coefficient value over all element centroids and samples.

    For a :class:`LogCoefficient` the underlying affine field is scanned, so
    the result is to be compared with the 1.5 admissibility threshold.
    """
    base = coef.base if isinstance(coef, LogCoefficient) else coef
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    modes = base.modes(mesh.centroids) * base.amplitudes
    values = OFFSET + samples @ modes.T
    return float(values.min())
