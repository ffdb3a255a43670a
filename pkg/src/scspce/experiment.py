"""Experiment pipeline: snapshot generation, per-method solves and trial-averaged reports.

Every step reads and writes files in one working directory:

``config.txt``
    Canonical copy of the configuration used by ``generate``.
``snapshots_tNNN.scsd``
    Largest-m sample set and snapshots of trial ``NNN``; smaller ``m`` use prefixes.
``reference.scsd``
    Reference coefficients (least squares, or the planted ones in synthetic mode).
``coef_<method>_tNNN_mMMMMM.scsd``
    Recovered coefficients (scs, pcs) or mean/std rows (mc).
``results_<method>.csv`` / ``.json``, ``diagnostics_<method>.csv``
    Per (trial, m) errors and flags, the config fingerprint, and solver histories.
``report.csv``, ``report_rel_err_mean.dat``, ``report_rel_err_std.dat``
    Trial-averaged errors.
"""

from __future__ import annotations

import json
import logging
import time
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .coefficient import AffineCoefficient, LogCoefficient
from .config import ExperimentConfig, m_schedule
from .estimators import error_report, gpc_mean, gpc_std_field, reference_oracle
from .fem import Mesh, build_mesh
from .models import MonteCarloMoments, PCSRegressor, SCSRegressor
from .multiindex import IndexSet, total_degree_set
from .polychaos import basis_matrix, sample_parameters, trial_rng
from .sampling import SnapshotSolver

logger = logging.getLogger(__name__)

METHODS = ("scs", "pcs", "mc")
REFERENCE_STREAM = 1
PLANTED_STREAM = 2
NOISE_STREAM = 3


@dataclass
class Problem:
    config: ExperimentConfig
    index_set: IndexSet
    mesh: Mesh
    coefficient: object  # None in synthetic mode

    @property
    def N(self) -> int:
        return len(self.index_set)

    @property
    def schedule(self) -> list[int]:
        return m_schedule(self.N, self.config.schedule_k_max)


def build_problem(cfg: ExperimentConfig) -> Problem:
    J = total_degree_set(cfg.d, cfg.p)
    mesh = build_mesh(cfg.mesh_n, cfg.subdivisions)
    coef = None
    if cfg.mode != "synthetic":
        coef = AffineCoefficient(cfg.d, cfg.Lc)
        if cfg.mode == "log":
            coef = LogCoefficient(coef)
    return Problem(cfg, J, mesh, coef)


def planted_coefficients(problem: Problem) -> np.ndarray:
    """Sparse synthetic coefficients: the zero index plus ``sparsity - 1`` random others."""
    cfg = problem.config
    N, K = problem.N, problem.mesh.K
    s = min(cfg.sparsity, N)
    rng = trial_rng(cfg.seed0, PLANTED_STREAM)
    support = np.concatenate([[0], 1 + rng.choice(N - 1, size=s - 1, replace=False)])
    coef = np.zeros((N, K))
    coef[support] = rng.standard_normal((s, K))
    return coef


def trial_seed(cfg: ExperimentConfig, t: int) -> int:
    return cfg.seed0 + t


def _snapshot_path(out: Path, t: int) -> Path:
    return out / f"snapshots_t{t:03d}.scsd"


def _coef_path(out: Path, method: str, t: int, m: int) -> Path:
    return out / f"coef_{method}_t{t:03d}_m{m:05d}.scsd"


def generate(cfg: ExperimentConfig, out) -> None:
    """Draw samples, solve snapshots, and write them with the reference coefficients."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    problem = build_problem(cfg)
    mesh, m_max = problem.mesh, problem.schedule[-1]
    if cfg.mode == "synthetic":
        ref = planted_coefficients(problem)
    else:
        solver = SnapshotSolver(problem.coefficient, mesh)
        ref = reference_oracle(problem.index_set, mesh, problem.coefficient,
                               cfg.reference_size(problem.N), cfg.seed0, REFERENCE_STREAM)
    for t in range(cfg.trials):
        y = sample_parameters(trial_rng(trial_seed(cfg, t), 0), m_max, cfg.d)
        if cfg.mode == "synthetic":
            snaps = basis_matrix(problem.index_set, y) @ ref
            if cfg.noise > 0:
                rng = trial_rng(trial_seed(cfg, t), NOISE_STREAM)
                scale = np.sqrt(np.mean(snaps**2))
                snaps = snaps + cfg.noise * scale * rng.standard_normal(snaps.shape)
        else:
            snaps = solver.solve(y)
        io.write_snapshots(_snapshot_path(out, t), y, snaps, cfg.mesh_n, cfg.subdivisions)
        logger.info("trial %d: %d snapshots written", t, m_max)
    io.write_coefficients(out / "reference.scsd", ref, cfg.mesh_n, cfg.subdivisions, cfg.d)
    (out / "config.txt").write_text(cfg.canonical_text())


def _check_generated(cfg: ExperimentConfig, out: Path) -> None:
    stored = out / "config.txt"
    if not stored.exists():
        raise FileNotFoundError(f"{stored} not found; run generate first")
    if stored.read_text() != cfg.canonical_text():
        raise ValueError(f"snapshots in {out} were generated with a different configuration")


def solve(cfg: ExperimentConfig, method: str, out) -> int:
    """Run ``method`` on every trial and schedule entry; return the number of flagged solves."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    out = Path(out)
    _check_generated(cfg, out)
    problem = build_problem(cfg)
    mesh = problem.mesh
    gram = mesh.gram
    _, ref = io.read_coefficients(out / "reference.scsd")
    ref_mean, ref_std = gpc_mean(ref), gpc_std_field(ref)
    solver_kw = dict(tau=cfg.tau, x_tol=cfg.x_tol, g_tol=cfg.g_tol, xi=cfg.xi,
                     max_inner=cfg.max_inner, max_fpc_stages=cfg.max_fpc_stages,
                     max_bregman=cfg.max_bregman)

    results, diagnostics, checksums = [], [], {}
    n_flagged = 0
    for t in range(cfg.trials):
        path = _snapshot_path(out, t)
        if not path.exists():
            raise FileNotFoundError(f"missing snapshot file {path}")
        _, y_all, u_all = io.read_snapshots(path)
        for m in problem.schedule:
            if m > y_all.shape[0]:
                raise ValueError(f"{path} holds {y_all.shape[0]} samples, schedule needs {m}")
            y, u = y_all[:m], u_all[:m]
            start = time.perf_counter()
            if method == "mc":
                est = MonteCarloMoments().fit(y, u)
                flag = 0
                stored = np.vstack([est.mean_, est.std_])
            else:
                cls = SCSRegressor if method == "scs" else PCSRegressor
                est = cls(degree=cfg.p, gram=gram, **solver_kw).fit(y, u, reference_coef=ref)
                checksums[f"{t}:{m}"] = io.array_checksum(est.sampling_matrix_)
                stored = est.coef_
                if method == "scs":
                    flag = int(not est.converged_)
                    for row in est.state_.rows():
                        diagnostics.append({"method": method, "trial": t, "m": m, **row,
                                            "b_tol": est.b_tol_})
                else:
                    flag = est.n_flagged_
                    for node, st in enumerate(est.states_):
                        for row in st.rows():
                            diagnostics.append({"method": method, "trial": t, "m": m,
                                                "node_id": node, **row, "b_tol": st.b_tol})
            wall = time.perf_counter() - start
            err_e, err_s = error_report(est.mean_field(), est.std_field(), ref_mean, ref_std, gram)
            n_flagged += flag > 0
            io.write_coefficients(_coef_path(out, method, t, m), stored,
                                  cfg.mesh_n, cfg.subdivisions, cfg.d)
            results.append({"method": method, "trial": t, "m": m, "rel_err_mean": err_e,
                            "rel_err_std": err_s, "solver_flag": flag, "wall_seconds": wall})
            logger.info("%s trial %d m %d: eps_E %.3e eps_sigma %.3e flag %d",
                        method, t, m, err_e, err_s, flag)

    io.write_csv(out / f"results_{method}.csv", io.RESULT_FIELDS, results)
    if method != "mc":
        fields = ["method", "trial", "m"] + (["node_id"] if method == "pcs" else [])
        io.write_csv(out / f"diagnostics_{method}.csv",
                     fields + io.DIAGNOSTIC_FIELDS + ["b_tol"], diagnostics)
    meta = {"method": method, "fingerprint": cfg.fingerprint(), "a_checksums": checksums}
    (out / f"results_{method}.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    return n_flagged


REPORT_FIELDS = ["method", "m", "trials", "rel_err_mean", "rel_err_std", "flagged"]


def report(result_files, out) -> list[dict]:
    """Average errors over trials per (method, m) and write the report files.

    All result files must carry the same configuration fingerprint.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    result_files = [Path(p) for p in result_files]
    if not result_files:
        raise ValueError("no result files to report")
    prints = set()
    groups = defaultdict(list)
    for path in result_files:
        meta = json.loads(path.with_suffix(".json").read_text())
        prints.add(meta["fingerprint"])
        for row in io.read_csv(path):
            groups[(row["method"], int(row["m"]))].append(row)
    if len(prints) > 1:
        raise ValueError("result files come from different configurations; refusing to aggregate")

    def order(key):
        method, m = key
        rank = METHODS.index(method) if method in METHODS else len(METHODS)
        return rank, method, m

    rows = []
    for key in sorted(groups, key=order):
        grp = groups[key]
        rows.append({
            "method": key[0], "m": key[1], "trials": len(grp),
            "rel_err_mean": float(np.mean([float(r["rel_err_mean"]) for r in grp])),
            "rel_err_std": float(np.mean([float(r["rel_err_std"]) for r in grp])),
            "flagged": sum(int(r["solver_flag"]) > 0 for r in grp),
        })
    io.write_csv(out / "report.csv", REPORT_FIELDS, rows)

    methods = sorted({r["method"] for r in rows}, key=lambda s: order((s, 0)))
    ms = sorted({r["m"] for r in rows})
    lookup = {(r["method"], r["m"]): r for r in rows}
    for metric in ("rel_err_mean", "rel_err_std"):
        lines = ["# m " + " ".join(methods)]
        for m in ms:
            vals = [io.format_float(lookup[(k, m)][metric]) if (k, m) in lookup else "nan"
                    for k in methods]
            lines.append(f"{m} " + " ".join(vals))
        (out / f"report_{metric}.dat").write_text("\n".join(lines) + "\n")
    return rows
