import json

import numpy as np
import pytest

from scspce import io
from scspce.cli import main
from scspce.config import load_config
from scspce.models import MonteCarloMoments
from scspce.polychaos import sample_parameters, trial_rng

AFFINE = """mode=affine
d=4
p=2
Lc=0.25
mesh_n=2
subdivisions=6
trials=2
seed0=5
schedule_k_max=7
"""

SYNTHETIC = """mode=synthetic
d=8
p=2
mesh_n=1
subdivisions=21
trials=2
sparsity=4
noise=1e-3
schedule_k_max=6
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


@pytest.fixture(scope="module")
def affine_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("affine")
    cfg = write_cfg(tmp, AFFINE)
    out = tmp / "run"
    assert main(["generate", "--config", cfg, "--out", str(out)]) == 0
    codes = [main(["solve", "--config", cfg, "--out", str(out), "--method", m])
             for m in ("scs", "pcs", "mc")]
    assert all(c in (0, 2) for c in codes)
    assert main(["report", "--out", str(out)]) == 0
    return tmp, cfg, out


def test_generate_deterministic_and_prefix(affine_run, tmp_path):
    _, cfg, out = affine_run
    again = tmp_path / "again"
    assert main(["generate", "--config", cfg, "--out", str(again)]) == 0
    for name in ("snapshots_t000.scsd", "snapshots_t001.scsd", "reference.scsd"):
        assert (out / name).read_bytes() == (again / name).read_bytes()
    head, y, u = io.read_snapshots(out / "snapshots_t001.scsd")
    assert (head.d, head.m, head.K) == (4, 14, 25)  # N = 15, m_7 = ceil(7 * 15 / 8)
    # trial t uses seed seed0 + t; smaller m reuse a prefix of the same stream
    np.testing.assert_array_equal(y, sample_parameters(trial_rng(6, 0), 14, 4))
    np.testing.assert_array_equal(y[:4], sample_parameters(trial_rng(6, 0), 4, 4))


def test_scs_and_pcs_share_sampling_matrix(affine_run):
    _, _, out = affine_run
    scs = json.loads((out / "results_scs.json").read_text())
    pcs = json.loads((out / "results_pcs.json").read_text())
    assert scs["fingerprint"] == pcs["fingerprint"]
    assert scs["a_checksums"] and scs["a_checksums"] == pcs["a_checksums"]


def test_result_files(affine_run):
    _, _, out = affine_run
    rows = io.read_csv(out / "results_scs.csv")
    assert list(rows[0]) == io.RESULT_FIELDS
    assert len(rows) == 2 * 7
    diag = io.read_csv(out / "diagnostics_pcs.csv")
    assert "node_id" in diag[0] and "residual_V2" in diag[0]
    head, coef = io.read_coefficients(out / "coef_scs_t000_m00014.scsd")
    assert coef.shape == (15, 25)
    _, stats = io.read_coefficients(out / "coef_mc_t000_m00014.scsd")
    assert stats.shape == (2, 25)


def test_report_averages(affine_run):
    _, _, out = affine_run
    report = io.read_csv(out / "report.csv")
    results = io.read_csv(out / "results_mc.csv")
    for row in (r for r in report if r["method"] == "mc"):
        vals = [float(r["rel_err_mean"]) for r in results if r["m"] == row["m"]]
        assert float(row["rel_err_mean"]) == pytest.approx(np.mean(vals), rel=1e-15)
        assert row["trials"] == "2"
    table = (out / "report_rel_err_mean.dat").read_text().splitlines()
    assert table[0] == "# m scs pcs mc"
    assert len(table) == 8


def test_report_single_trial(affine_run, tmp_path):
    _, _, out = affine_run
    rows = io.read_csv(out / "results_scs.csv")
    single = tmp_path / "results_scs.csv"
    io.write_csv(single, io.RESULT_FIELDS, [r for r in rows if r["trial"] == "0"])
    (tmp_path / "results_scs.json").write_text((out / "results_scs.json").read_text())
    assert main(["report", str(single), "--out", str(tmp_path)]) == 0
    for rep, res in zip(io.read_csv(tmp_path / "report.csv"), [r for r in rows if r["trial"] == "0"]):
        assert rep["rel_err_mean"] == res["rel_err_mean"]


def test_report_refuses_mixed_configs(affine_run, tmp_path, capsys):
    _, _, out = affine_run
    other = tmp_path / "results_pcs.csv"
    other.write_text((out / "results_pcs.csv").read_text())
    meta = json.loads((out / "results_pcs.json").read_text())
    meta["fingerprint"] = "0" * 64
    (tmp_path / "results_pcs.json").write_text(json.dumps(meta))
    code = main(["report", str(out / "results_scs.csv"), str(other), "--out", str(tmp_path)])
    assert code == 1
    assert "different configurations" in capsys.readouterr().err


def test_solve_without_snapshots_fails(tmp_path, capsys):
    cfg = write_cfg(tmp_path, AFFINE)
    assert main(["solve", "--config", cfg, "--out", str(tmp_path / "none"), "--method", "scs"]) == 1
    assert "generate" in capsys.readouterr().err


def test_missing_trial_file(tmp_path, capsys):
    cfg = write_cfg(tmp_path, AFFINE)
    out = tmp_path / "r"
    assert main(["generate", "--config", cfg, "--out", str(out)]) == 0
    (out / "snapshots_t001.scsd").unlink()
    assert main(["solve", "--config", cfg, "--out", str(out), "--method", "mc"]) == 1
    assert "missing snapshot file" in capsys.readouterr().err


def test_bad_config_exit_code(tmp_path):
    cfg = write_cfg(tmp_path, "mode=affine\nbogus=3\n")
    assert main(["generate", "--config", cfg, "--out", str(tmp_path)]) == 1


def test_config_mismatch_refused(affine_run, tmp_path):
    _, _, out = affine_run
    cfg = write_cfg(tmp_path, AFFINE.replace("trials=2", "trials=3"))
    assert main(["solve", "--config", cfg, "--out", str(out), "--method", "mc"]) == 1


def test_synthetic_scs_meets_tolerance(tmp_path):
    cfg = write_cfg(tmp_path, SYNTHETIC)
    out = tmp_path / "syn"
    assert main(["generate", "--config", cfg, "--out", str(out)]) == 0
    assert main(["solve", "--config", cfg, "--out", str(out), "--method", "scs"]) == 0
    rows = io.read_csv(out / "diagnostics_scs.csv")
    last = {}
    for r in rows:
        last[(r["trial"], r["m"])] = r
    m_max = max(int(k[1]) for k in last)
    for (t, m), r in last.items():
        if int(m) == m_max:
            assert float(r["residual_V2"]) < float(r["b_tol"])
            assert int(r["bregman_iter"]) <= 50


def test_mc_constant_in_y(tmp_path):
    cfg = write_cfg(tmp_path, SYNTHETIC.replace("sparsity=4", "sparsity=1").replace("noise=1e-3", "noise=0"))
    out = tmp_path / "const"
    assert main(["generate", "--config", cfg, "--out", str(out)]) == 0
    _, ref = io.read_coefficients(out / "reference.scsd")
    _, y, u = io.read_snapshots(out / "snapshots_t000.scsd")
    est = MonteCarloMoments().fit(y, u)
    assert not np.any(est.std_)
    np.testing.assert_array_equal(est.mean_, ref[0])


def test_flagged_run_exit_code(tmp_path):
    cfg = write_cfg(tmp_path, SYNTHETIC.replace("noise=1e-3", "noise=0") + "max_bregman=1\ntrials=1\n")
    out = tmp_path / "flag"
    assert main(["generate", "--config", cfg, "--out", str(out)]) == 0
    assert main(["solve", "--config", cfg, "--out", str(out), "--method", "scs"]) == 2
    assert load_config(cfg).max_bregman == 1


def test_console_script_help():
    import subprocess
    import sys

    res = subprocess.run([sys.executable, "-m", "scspce.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "generate" in res.stdout
