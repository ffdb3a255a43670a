"""Bregman iterations with fixed-point continuation for (V, l1) basis pursuit denoising.

The problem solved is

    minimize ||z||_{V,1}  subject to  ||A z - u||_{V,2} < b_tol

over Hilbert-valued vectors ``z`` (``N`` coordinates, each a length-``K``
nodal array). Each Bregman step solves the penalized problem

    minimize ||z||_{V,1} + mu_bar/2 ||A z - u^k||_{V,2}^2

by forward-backward iterations ``x <- J_{tau/mu}(x - tau A^T(A x - u^k))``
under an increasing continuation schedule of ``mu``.

Internally several independent problems sharing ``A`` are advanced together:
iterates are stored as ``(N, L, K)`` arrays, with ``L`` problems of
coordinate length ``K``. The simultaneous solve uses ``L = 1``; the
point-wise baseline uses one scalar problem per mesh node (``K = 1``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .hilbert import HilbertVec, coordinate_norms
from .polychaos import MeasurementMatrix

logger = logging.getLogger(__name__)


class RankDeficiencyError(ValueError):
    """``A A^T`` is numerically singular, e.g. because samples repeat."""


@dataclass
class SolverConfig:
    """Parameters of the Bregman-FPC solver.

    ``b_tol`` is the residual target for ``||A z - u||_{V,2}`` in the
    normalized system (``A`` and ``u`` divided by ``sqrt(lam_max)``).
    """

    tau: float = 1.0
    x_tol: float = 1.0
    g_tol: float = 0.1
    xi: float = 1e-5
    b_tol: Optional[float] = None
    max_inner: int = 10000
    max_fpc_stages: int = 60
    max_bregman: int = 50

    def __post_init__(self):
        if not 1.0 <= self.tau < 2.0:
            raise ValueError(f"step size tau must lie in [1, 2), got {self.tau}")
        for name in ("x_tol", "g_tol", "xi"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.b_tol is not None and self.b_tol < 0:
            raise ValueError("b_tol must be non-negative")
        for name in ("max_inner", "max_fpc_stages", "max_bregman"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")


@dataclass
class SpectralInfo:
    """Normalized system and the quantities derived from its spectrum.

    Attributes
    ----------
    A : MeasurementMatrix
        ``A / sqrt(scale)``, flagged as normalized.
    u : ndarray of shape (m, K)
        Data divided by the same factor.
    scale : float
        Largest eigenvalue of ``A^T A`` before normalization.
    lam_max, lam_min : float
        Largest eigenvalue of ``A^T A`` and smallest eigenvalue of ``A A^T``
        after normalization.
    mu_bar : float
        Final penalty weight ``sqrt(N / xi) * sqrt(lam_max / lam_min)``.
    """

    A: MeasurementMatrix
    u: np.ndarray
    scale: float
    lam_max: float
    lam_min: float
    mu_bar: float


@dataclass
class FPCResult:
    z: np.ndarray
    converged: bool
    stages: int
    inner_iters: int
    mu_final: float
    mu0: float


@dataclass
class BregmanState:
    """Outcome and per-iteration history of one Bregman-FPC solve."""

    z: np.ndarray
    u_aug: np.ndarray
    b_tol: float
    mu_bar: float
    lam_max: float = 1.0
    lam_min: float = float("nan")
    mu0: float = float("nan")
    residuals: list = field(default_factory=list)
    stages: list = field(default_factory=list)
    inner_iters: list = field(default_factory=list)
    support_sizes: list = field(default_factory=list)
    converged: bool = False
    fpc_flags: int = 0
    residual_increases: int = 0

    @property
    def total_inner(self) -> int:
        return int(sum(self.inner_iters))

    @property
    def final_residual(self) -> float:
        return self.residuals[-1]

    def rows(self) -> list[dict]:
        """Diagnostics rows, one per Bregman iteration (iteration 0 is ``z = 0``)."""
        return [
            {
                "bregman_iter": k,
                "fpc_stage": self.stages[k],
                "inner_iters": self.inner_iters[k],
                "residual_V2": self.residuals[k],
                "support_size": self.support_sizes[k],
            }
            for k in range(len(self.residuals))
        ]


def _as_coords(u) -> np.ndarray:
    if isinstance(u, HilbertVec):
        return u.coords
    u = np.asarray(u, dtype=float)
    return u[:, None] if u.ndim == 1 else u


def _as_matrix(A) -> np.ndarray:
    return A.matrix if isinstance(A, MeasurementMatrix) else np.asarray(A, dtype=float)


def power_iteration(A, tol: float = 1e-10, max_iter: int = 5000) -> float:
    """Largest eigenvalue of ``A^T A`` by power iteration with Rayleigh quotients."""
    A = _as_matrix(A)
    v = np.random.Generator(np.random.Philox(key=[0, 0])).standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for it in range(max_iter):
        w = A.T @ (A @ v)
        lam_new = float(v @ w)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        if abs(lam_new - lam) <= tol * abs(lam_new):
            return lam_new
        lam = lam_new
    logger.warning("power iteration hit %d iterations without reaching tol %g", max_iter, tol)
    return lam


def spectral_setup(A, u, xi: float = 1e-5) -> SpectralInfo:
    """Rescale ``A`` and ``u`` so the largest eigenvalue of ``A^T A`` is 1."""
    mat = _as_matrix(A)
    coords = _as_coords(u)
    if coords.shape[0] != mat.shape[0]:
        raise ValueError(f"data has {coords.shape[0]} rows, matrix has {mat.shape[0]}")
    scale = power_iteration(mat)
    if scale <= 0.0:
        raise RankDeficiencyError("sampling matrix is zero")
    An = mat / np.sqrt(scale)
    un = coords / np.sqrt(scale)
    lam_max = power_iteration(An)
    lam_min = float(np.linalg.eigvalsh(An @ An.T)[0])
    if lam_min <= 1e-14 * lam_max:
        raise RankDeficiencyError(
            f"smallest eigenvalue of A A^T is {lam_min:.3g}; the samples do not give independent rows"
        )
    N = mat.shape[1]
    mu_bar = np.sqrt(N / xi) * np.sqrt(lam_max / lam_min)
    An_mm = MeasurementMatrix(An, lam_max=lam_max, lam_min=lam_min, normalized=True)
    return SpectralInfo(An_mm, un, scale, lam_max, lam_min, float(mu_bar))


def forward_step(z, A, u, tau: float = 1.0) -> np.ndarray:
    """Gradient step ``z - tau A^T (A z - u)``."""
    A = _as_matrix(A)
    zc, uc = _as_coords(z), _as_coords(u)
    return zc - tau * (A.T @ (A @ zc - uc))


def shrink(z, upsilon: float, gram=None) -> np.ndarray:
    """Coordinatewise V-norm soft threshold ``z_nu / ||z_nu||_V * max(||z_nu||_V - upsilon, 0)``."""
    if upsilon < 0:
        raise ValueError("threshold must be non-negative")
    if isinstance(z, HilbertVec):
        gram = z.gram if gram is None else gram
    zc = _as_coords(z)
    norms = coordinate_norms(zc, gram)
    return zc * _shrink_factor(norms, upsilon)[..., None]


def _shrink_factor(norms: np.ndarray, upsilon) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(norms > upsilon, (norms - upsilon) / norms, 0.0)


# --- batched engine: arrays of shape (N, L, K) -------------------------------


def _mul(A, Z):
    N, L, K = Z.shape
    return (A @ Z.reshape(N, L * K)).reshape(A.shape[0], L, K)


def _rmul(A, R):
    m, L, K = R.shape
    return (A.T @ R.reshape(m, L * K)).reshape(A.shape[1], L, K)


def _norm2(Z, gram):
    return np.sqrt((coordinate_norms(Z, gram) ** 2).sum(axis=0))


def _norminf(Z, gram):
    return coordinate_norms(Z, gram).max(axis=0)


def _fpc_batch(A, F, mu_bar, cfg: SolverConfig, gram, warm=None, mu_floor=None):
    """Continuation solve of ``L`` penalized problems at once.

    Returns the iterates and per-problem arrays ``converged``, ``stages``,
    ``inner``, ``mu`` (final stage weight) and ``mu0``.
    """
    tau = cfg.tau
    L = F.shape[1]
    done = np.zeros(L, dtype=bool)
    if warm is None:
        X = tau * _rmul(A, F)
        x0 = _norminf(X, gram)
        done = x0 == 0.0
        with np.errstate(divide="ignore"):
            mu0 = np.where(done, mu_bar, tau / (0.99 * np.where(done, 1.0, x0)))
    else:
        X = warm.copy()
        Gx = X - tau * _rmul(A, _mul(A, X) - F)
        g0 = _norminf(Gx, gram)
        with np.errstate(divide="ignore"):
            mu0 = np.where(g0 > 0, tau / (0.99 * np.where(g0 > 0, g0, 1.0)), mu_bar)
        if mu_floor is not None:
            mu0 = np.maximum(mu0, mu_floor)
    X[:, done] = 0.0
    mu = np.minimum(mu0, mu_bar)
    stage = np.zeros(L, dtype=np.int64)
    inner = np.zeros(L, dtype=np.int64)
    converged = done.copy()
    G = _rmul(A, _mul(A, X) - F)
    xnorm = _norm2(X, gram)
    while not done.all():
        act = ~done
        ups = tau / mu
        W = X - tau * G
        wn = coordinate_norms(W, gram)
        fac = _shrink_factor(wn, ups)
        Xn = W * fac[..., None]
        Gn = _rmul(A, _mul(A, Xn) - F)
        inner[act] += 1
        dx = _norm2(Xn - X, gram)
        rel_ok = dx / np.maximum(xnorm, 1.0) < np.sqrt(mu_bar / mu) * cfg.x_tol
        grad_ok = mu * _norminf(Gn, gram) - 1.0 < cfg.g_tol
        X[:, act] = Xn[:, act]
        G[:, act] = Gn[:, act]
        xnorm = np.where(act, np.sqrt((np.maximum(wn - ups, 0.0) ** 2).sum(axis=0)), xnorm)
        fire = act & rel_ok & grad_ok
        final = fire & (mu >= mu_bar)
        done |= final
        converged |= final
        adv = fire & ~final
        if adv.any():
            stage[adv] += 1
            mu[adv] = np.minimum(4.0 ** stage[adv] * mu0[adv], mu_bar)
        capped = ~done & ((inner >= cfg.max_inner) | (stage >= cfg.max_fpc_stages))
        done |= capped
    return X, converged, stage + 1, inner, mu, mu0


def _bregman_batch(A, U, mu_bar, cfg: SolverConfig, gram, b_tol):
    """Bregman outer loop for ``L`` problems; returns iterates, augmented data, histories."""
    N = A.shape[1]
    m, L, K = U.shape
    b_tol = np.broadcast_to(np.asarray(b_tol, dtype=float), (L,))
    Z = np.zeros((N, L, K))
    Faug = np.zeros_like(U)
    res = _norm2(U, gram)
    hist = {
        "residuals": [[r] for r in res],
        "stages": [[0] for _ in range(L)],
        "inner": [[0] for _ in range(L)],
        "support": [[0] for _ in range(L)],
    }
    mu0_first = np.full(L, np.nan)
    fpc_flags = np.zeros(L, dtype=np.int64)
    active = ~(res < b_tol)
    mu_last = np.full(L, np.nan)
    increases = np.zeros(L, dtype=np.int64)
    for k in range(1, cfg.max_bregman + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Zs = Z[:, idx]
        R = _mul(A, Zs) - U[:, idx]
        Faug[:, idx] = Faug[:, idx] - R
        if k == 1:
            Zs, conv, stages, inner, mu_fin, mu0 = _fpc_batch(A, Faug[:, idx], mu_bar, cfg, gram)
            mu0_first[idx] = mu0
        else:
            Zs, conv, stages, inner, mu_fin, _ = _fpc_batch(
                A, Faug[:, idx], mu_bar, cfg, gram, warm=Zs, mu_floor=mu_last[idx]
            )
        Z[:, idx] = Zs
        mu_last[idx] = mu_fin
        fpc_flags[idx] += ~conv
        res_new = _norm2(_mul(A, Zs) - U[:, idx], gram)
        supp = (coordinate_norms(Zs, gram) > 0).sum(axis=0)
        for j, l in enumerate(idx):
            if res_new[j] > hist["residuals"][l][-1] * (1.0 + 1e-9):
                increases[l] += 1
            hist["residuals"][l].append(float(res_new[j]))
            hist["stages"][l].append(int(stages[j]))
            hist["inner"][l].append(int(inner[j]))
            hist["support"][l].append(int(supp[j]))
        active[idx[res_new < b_tol[idx]]] = False
    converged = np.array([hist["residuals"][l][-1] < b_tol[l] for l in range(L)])
    if increases.any():
        logger.warning(
            "Bregman residual increased in %d iterations across %d of %d problems",
            int(increases.sum()), int(np.count_nonzero(increases)), L,
        )
    hist["increases"] = increases
    return Z, Faug, hist, converged, mu0_first, fpc_flags


def _single(arr):
    return arr[:, None, :]


def fpc_solve(A, u, mu_bar: float, config: Optional[SolverConfig] = None, warm_start=None,
              gram=None, mu_floor: Optional[float] = None) -> FPCResult:
    """Solve ``min ||z||_{V,1} + mu_bar/2 ||A z - u||^2`` by continuation.

    ``A`` and ``u`` are expected to be normalized (see :func:`spectral_setup`).
    Without a warm start the iteration begins at ``tau A^T u`` with
    ``mu0 = tau / (0.99 ||tau A^T u||_{V,inf})``; stage ``l`` uses
    ``min(4^l mu0, mu_bar)``.
    """
    cfg = config or SolverConfig()
    if isinstance(u, HilbertVec) and gram is None:
        gram = u.gram
    mat = _as_matrix(A)
    F = _single(_as_coords(u))
    warm = None if warm_start is None else _single(_as_coords(warm_start)).copy()
    floor = None if mu_floor is None else np.array([mu_floor])
    X, conv, stages, inner, mu, mu0 = _fpc_batch(mat, F, mu_bar, cfg, gram, warm, floor)
    if not conv[0]:
        logger.warning("FPC stopped at iteration cap (%d inner iterations)", inner[0])
    return FPCResult(X[:, 0, :], bool(conv[0]), int(stages[0]), int(inner[0]), float(mu[0]), float(mu0[0]))


def bregman_solve(A, u, config: SolverConfig, gram=None, mu_bar: Optional[float] = None):
    """Bregman-FPC solve of the constrained (V, l1) problem.

    Parameters
    ----------
    A : MeasurementMatrix or ndarray of shape (m, N)
        Normalized sampling matrix.
    u : ndarray of shape (m, K) or HilbertVec
        Normalized data.
    config : SolverConfig
        ``config.b_tol`` must be set.
    gram : sparse matrix, optional
        Gram matrix of V; taken from ``u`` when it is a HilbertVec.
    mu_bar : float, optional
        Penalty weight; computed from the spectrum of ``A`` when omitted.

    Returns
    -------
    z : ndarray of shape (N, K)
    state : BregmanState
    """
    if config.b_tol is None:
        raise ValueError("config.b_tol must be set before calling bregman_solve")
    if isinstance(u, HilbertVec) and gram is None:
        gram = u.gram
    mat = _as_matrix(A)
    lam_max, lam_min = 1.0, float("nan")
    if mu_bar is None:
        info = spectral_setup(mat, u, config.xi)
        if not (isinstance(A, MeasurementMatrix) and A.normalized):
            logger.debug("bregman_solve received an unnormalized matrix; scale %.3e", info.scale)
        lam_max, lam_min, mu_bar = info.lam_max, info.lam_min, info.mu_bar
    U = _single(_as_coords(u))
    Z, Faug, hist, conv, mu0, flags = _bregman_batch(mat, U, mu_bar, config, gram, config.b_tol)
    state = BregmanState(
        z=Z[:, 0, :], u_aug=Faug[:, 0, :], b_tol=float(config.b_tol), mu_bar=float(mu_bar),
        lam_max=lam_max, lam_min=lam_min, mu0=float(mu0[0]),
        residuals=hist["residuals"][0], stages=hist["stages"][0],
        inner_iters=hist["inner"][0], support_sizes=hist["support"][0],
        converged=bool(conv[0]), fpc_flags=int(flags[0]),
        residual_increases=int(hist["increases"][0]),
    )
    if not state.converged:
        logger.warning("Bregman iterations stopped at cap %d; residual %.3e >= b_tol %.3e",
                       config.max_bregman, state.final_residual, config.b_tol)
    return state.z, state


def bregman_solve_many(A, U, config: SolverConfig, b_tol, mu_bar: float, gram=None):
    """Independent Bregman-FPC solves for the columns-of-problems array ``U`` (m, L, K).

    Returns ``Z`` of shape ``(N, L, K)`` and one :class:`BregmanState` per problem.
    """
    mat = _as_matrix(A)
    U = np.asarray(U, dtype=float)
    Z, Faug, hist, conv, mu0, flags = _bregman_batch(mat, U, mu_bar, config, gram, b_tol)
    b_tol = np.broadcast_to(np.asarray(b_tol, dtype=float), (U.shape[1],))
    states = [
        BregmanState(
            z=Z[:, l, :], u_aug=Faug[:, l, :], b_tol=float(b_tol[l]), mu_bar=float(mu_bar),
            mu0=float(mu0[l]), residuals=hist["residuals"][l], stages=hist["stages"][l],
            inner_iters=hist["inner"][l], support_sizes=hist["support"][l],
            converged=bool(conv[l]), fpc_flags=int(flags[l]),
            residual_increases=int(hist["increases"][l]),
        )
        for l in range(U.shape[1])
    ]
    return Z, states
