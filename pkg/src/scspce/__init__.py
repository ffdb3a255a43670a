"""Sparse polynomial chaos surrogates of parameterized elliptic problems.

Simultaneous compressed sensing (a Hilbert-valued l1 recovery of all
coefficient fields at once), a point-wise baseline and Monte Carlo, on top of
a P1 finite element solver and an orthonormal Legendre basis.
"""

from .coefficient import AffineCoefficient, LogCoefficient, affine_split, positivity_scan
from .config import ExperimentConfig, load_config, m_schedule, parse_config
from .estimators import (
    btol_rule,
    error_report,
    gpc_mean,
    gpc_std_field,
    least_squares_coefficients,
    mc_estimate,
    reference_oracle,
)
from .fem import CoefficientPositivityError, Mesh, assemble, build_mesh, solve_dirichlet, v_norm
from .hilbert import HilbertVec, best_s_term, mixed_norm, rip_constant, v_rip_constant
from .models import MonteCarloMoments, PCSRegressor, SCSRegressor
from .multiindex import IndexSet, cardinality, total_degree_set
from .pcs import pcs_solve
from .polychaos import basis_matrix, sample_parameters, sampling_matrix, trial_rng
from .sampling import SnapshotSolver
from .solver import (
    RankDeficiencyError,
    SolverConfig,
    bregman_solve,
    fpc_solve,
    shrink,
    spectral_setup,
)

__version__ = "0.1.0"

__all__ = [
    "AffineCoefficient", "LogCoefficient", "affine_split", "positivity_scan",
    "ExperimentConfig", "load_config", "m_schedule", "parse_config",
    "btol_rule", "error_report", "gpc_mean", "gpc_std_field", "least_squares_coefficients",
    "mc_estimate", "reference_oracle",
    "CoefficientPositivityError", "Mesh", "assemble", "build_mesh", "solve_dirichlet", "v_norm",
    "HilbertVec", "best_s_term", "mixed_norm", "rip_constant", "v_rip_constant",
    "MonteCarloMoments", "PCSRegressor", "SCSRegressor",
    "IndexSet", "cardinality", "total_degree_set",
    "pcs_solve",
    "basis_matrix", "sample_parameters", "sampling_matrix", "trial_rng",
    "SnapshotSolver",
    "RankDeficiencyError", "SolverConfig", "bregman_solve", "fpc_solve", "shrink",
    "spectral_setup",
]
