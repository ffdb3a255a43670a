import numpy as np
import pytest

from scspce.fem import build_mesh
from scspce.multiindex import total_degree_set
from scspce.polychaos import sample_parameters, sampling_matrix, trial_rng


def planted_instance(seed, d=8, p=2, subdivisions=21, s=4, m=30, tail=0.0, noise=0.0):
    """Sparse or compressible Hilbert-valued coefficients on a 1-D mesh and their samples.

    Returns ``(A, u, c, e, gram)`` with ``u = A c + e`` and ``A = Psi / sqrt(m)``.
    """
    rng = np.random.default_rng(seed)
    J = total_degree_set(d, p)
    N = len(J)
    mesh = build_mesh(1, subdivisions)
    gram = mesh.gram
    x = mesh.node_coordinates()[:, 0]
    c = np.zeros((N, mesh.K))
    head = rng.choice(N, size=s, replace=False)
    for nu in head:
        k = rng.integers(1, 4)
        c[nu] = rng.uniform(0.5, 1.5) * np.sin(k * np.pi * x) / k
    if tail:
        rest = np.setdiff1d(np.arange(N), head)
        decay = tail * (1.0 + np.arange(rest.size)) ** -1.5
        rng.shuffle(decay)
        c[rest] = decay[:, None] * np.sin(np.pi * x)[None, :] * rng.choice([-1, 1], size=(rest.size, 1))
    y = sample_parameters(trial_rng(seed, 0), m, d)
    A = sampling_matrix(J, y).matrix
    e = np.zeros((m, mesh.K))
    if noise:
        e = rng.standard_normal((m, mesh.K)) * np.sin(np.pi * x)
        e *= noise * np.sqrt((np.sum(((A @ c) @ gram.toarray()) * (A @ c)))) / np.sqrt(np.sum((e @ gram.toarray()) * e))
    return A, A @ c + e, c, e, gram


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = {}


def record_acceptance(number, passed, detail):
    """Store one pass/fail line for the acceptance summary."""
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
