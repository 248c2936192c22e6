import numpy as np
import pytest
from scipy import stats

from randeriv.errors import SizeExceeded
from randeriv.metrics import max_matched_distance
from randeriv.rmt import MinorProblem, UnitaryMatrix, coupled_check, haar_unitary, minor_spectrum
from randeriv.operator import randomized_derivative
from randeriv.sampling import MeasureSpec, RngStream, sample_points


@pytest.mark.parametrize("n", [2, 5, 40])
@pytest.mark.parametrize("beta", [1, 2])
def test_haar_is_unitary(n, beta):
    u = haar_unitary(n, RngStream(n), beta=beta).entries
    assert np.linalg.norm(u.conj().T @ u - np.eye(n)) <= 1e-10
    if beta == 1:
        assert np.all(u.imag == 0)


def test_haar_guards():
    with pytest.raises(SizeExceeded):
        haar_unitary(257, RngStream(0))
    with pytest.raises(ValueError):
        UnitaryMatrix(np.ones((2, 2)))


def test_haar_last_column_mean():
    g = np.random.default_rng(1)
    vals = [haar_unitary(16, g).entries[0, -1] for _ in range(10_000)]
    assert abs(np.mean(np.abs(vals) ** 2) - 1 / 16) <= 0.003


def test_haar_two_by_two_uniform_weight():
    g = np.random.default_rng(2)
    vals = np.array([abs(haar_unitary(2, g).entries[0, 1]) ** 2 for _ in range(10_000)])
    assert stats.kstest(vals, "uniform").statistic <= 0.02


def test_minor_of_diagonal():
    lam = np.array([1, 2j, -3, 4 + 1j])
    out = minor_spectrum(MinorProblem(lam, UnitaryMatrix(np.eye(4))))
    assert max_matched_distance(out, lam[:3]) <= 1e-14


def test_minor_two_by_two_closed_form():
    u = haar_unitary(2, RngStream(3))
    lam = np.array([0.5 + 1j, -2.0])
    e = u.entries
    expected = abs(e[0, 1]) ** 2 * lam[1] + abs(e[1, 1]) ** 2 * lam[0]
    assert abs(minor_spectrum(MinorProblem(lam, u))[0] - expected) <= 1e-13


def test_minor_scalar_matrix():
    u = haar_unitary(6, RngStream(4))
    out = minor_spectrum(MinorProblem(np.full(6, 2 - 1j), u))
    assert np.abs(out - (2 - 1j)).max() <= 1e-12


def test_coupled_check_n2():
    g = np.random.default_rng(5)
    for _ in range(20):
        diag = g.standard_normal(2) + 1j * g.standard_normal(2)
        assert coupled_check(diag, haar_unitary(2, g)) <= 1e-10


def test_coupled_check_n32():
    root = RngStream(6)
    for d in range(100):
        diag = sample_points(MeasureSpec("uniform_disk"), 32, root.child("diag", d))
        assert coupled_check(diag, haar_unitary(32, root.child("u", d))) <= 1e-8


def test_coupled_check_circle_diagonal():
    root = RngStream(7)
    for d in range(20):
        diag = sample_points(MeasureSpec("uniform_circle"), 16, root.child("diag", d))
        u = haar_unitary(16, root.child("u", d))
        assert coupled_check(diag, u) <= 1e-8
        roots = randomized_derivative(diag, u.last_column_weights()).roots
        assert np.abs(roots).max() < 1


def test_coupled_check_orthogonal():
    root = RngStream(8)
    for d in range(10):
        diag = sample_points(MeasureSpec("gaussian_plane"), 24, root.child("diag", d))
        assert coupled_check(diag, haar_unitary(24, root.child("u", d), beta=1)) <= 1e-8


def test_coupled_check_guard():
    with pytest.raises(SizeExceeded):
        coupled_check(np.zeros(129), UnitaryMatrix(np.eye(129)))
