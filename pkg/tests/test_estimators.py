import numpy as np
import pytest

from scspce.coefficient import AffineCoefficient
from scspce.estimators import (
    IllConditionedError,
    btol_rule,
    error_report,
    gpc_mean,
    gpc_std_field,
    least_squares_coefficients,
    mc_estimate,
    reference_oracle,
)
from scspce.fem import build_mesh
from scspce.multiindex import total_degree_set
from scspce.polychaos import SQRT3, basis_matrix, sample_parameters, sampling_matrix, trial_rng
from scspce.sampling import SnapshotSolver

MESH = build_mesh(1, 9)


def test_gpc_moments_trivial(rng):
    c = np.zeros((6, 8))
    c[0] = rng.standard_normal(8)
    np.testing.assert_array_equal(gpc_mean(c), c[0])
    assert not np.any(gpc_std_field(c))
    c[1] = rng.standard_normal(8)
    np.testing.assert_array_equal(gpc_std_field(c[:2]), np.abs(c[1]))


def test_gpc_moments_match_monte_carlo(rng):
    J = total_degree_set(3, 2)
    c = rng.standard_normal((len(J), 4))
    M = 100_000
    vals = basis_matrix(J, sample_parameters(trial_rng(5), M, 3)) @ c
    std = gpc_std_field(c)
    assert np.all(np.abs(vals.mean(axis=0) - gpc_mean(c)) < 3 * std / np.sqrt(M) + 1e-12)
    # the variance estimate fluctuates with the fourth moment of the field
    var_se = np.sqrt(((vals - vals.mean(0)) ** 4).mean(0) - vals.var(0) ** 2) / np.sqrt(M)
    assert np.all(np.abs(vals.var(axis=0, ddof=1) - std**2) < 3 * var_se)
    assert np.array_equal(gpc_std_field(c), gpc_std_field(c.copy()))


def test_mc_estimate_examples(rng):
    v = rng.standard_normal(5)
    mean, std = mc_estimate(np.vstack([v, v, v]))
    assert not np.any(std)
    mean, std = mc_estimate(np.vstack([v, -v]))
    np.testing.assert_allclose(mean, 0, atol=1e-15)
    np.testing.assert_allclose(std, np.sqrt(2) * np.abs(v), rtol=1e-14)
    with pytest.raises(ValueError):
        mc_estimate(v[None, :])


def test_mc_rate():
    J = total_degree_set(2, 2)
    c = np.random.default_rng(1).standard_normal((len(J), 3))
    ms = [2**k for k in range(6, 13)]
    errs = []
    for m in ms:
        e = []
        for t in range(40):
            y = sample_parameters(trial_rng(t, 7), m, 2)
            mean, _ = mc_estimate(basis_matrix(J, y) @ c)
            e.append(np.linalg.norm(mean - gpc_mean(c)) / np.linalg.norm(gpc_mean(c)))
        errs.append(np.mean(e))
    slope = np.polyfit(np.log(ms), np.log(errs), 1)[0]
    assert abs(slope + 0.5) <= 0.2


def test_least_squares_exact(rng):
    J = total_degree_set(3, 2)
    c = rng.standard_normal((len(J), 5))
    y = sample_parameters(trial_rng(0), 60, 3)
    np.testing.assert_allclose(least_squares_coefficients(J, y, basis_matrix(J, y) @ c), c, atol=1e-10)


def test_least_squares_gauss_interpolation():
    J = total_degree_set(1, 4)
    t, _ = np.polynomial.legendre.leggauss(5)
    y = (t * SQRT3)[:, None]
    f = np.exp(y[:, 0])[:, None]
    c = least_squares_coefficients(J, y, f)
    np.testing.assert_allclose(basis_matrix(J, y) @ c, f, atol=1e-12)


def test_least_squares_ill_conditioned():
    J = total_degree_set(2, 2)
    y = np.repeat(sample_parameters(trial_rng(0), 3, 2), 4, axis=0)
    with pytest.raises(IllConditionedError):
        least_squares_coefficients(J, y, np.ones((12, 1)))


def test_reference_oracle_requirements():
    J = total_degree_set(2, 1)
    coef = AffineCoefficient(2, 0.25)
    with pytest.raises(ValueError):
        reference_oracle(J, MESH, coef, 8, 0)
    a = reference_oracle(J, MESH, coef, 30, 0)
    np.testing.assert_array_equal(a, reference_oracle(J, MESH, coef, 30, 0))


def test_reference_residual_shrinks_with_degree():
    coef = AffineCoefficient(8, 0.25)
    y = sample_parameters(trial_rng(11), 80, 8)
    u = SnapshotSolver(coef, MESH).solve(y)
    res = []
    for p in (1, 2, 3):
        J = total_degree_set(8, p)
        c = reference_oracle(J, MESH, coef, max(3 * len(J), 200), 3)
        A = sampling_matrix(J, y)
        res.append(btol_rule(A, u / np.sqrt(80), c, MESH.gram) / 1.2)
    assert res[0] > res[1] > res[2]


def test_btol_rule(rng):
    A = rng.standard_normal((6, 9))
    c = rng.standard_normal((9, 8))
    u = A @ c
    unorm = np.sqrt(np.sum((u @ MESH.gram.toarray()) * u))
    assert btol_rule(A, u, c, MESH.gram) == pytest.approx(1e-12 * unorm)
    e = rng.standard_normal((6, 8))
    b1 = btol_rule(A, u + e, c, MESH.gram)
    b2 = btol_rule(A, u + 2 * e, c, MESH.gram)
    assert b2 == pytest.approx(2 * b1, rel=1e-12)
    assert b1 == pytest.approx(1.2 * np.sqrt(np.sum((e @ MESH.gram.toarray()) * e)), rel=1e-12)


def test_error_report(rng):
    m, s = rng.standard_normal((2, MESH.K))
    assert error_report(m, s, m, s, MESH.gram) == (0.0, 0.0)
    e, _ = error_report(1.03 * m, s, m, s, MESH.gram)
    assert e == pytest.approx(0.03, rel=1e-12)
    am, as_ = rng.standard_normal((2, MESH.K))
    base = error_report(am, as_, m, s, MESH.gram)
    scaled = error_report(5 * am, 5 * as_, 5 * m, 5 * s, MESH.gram)
    np.testing.assert_allclose(base, scaled, rtol=1e-12)
    with pytest.raises(ZeroDivisionError):
        error_report(m, s, np.zeros(MESH.K), s, MESH.gram)
