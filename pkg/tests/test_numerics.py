import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from randeriv.errors import Degenerate, NoConvergence, PoleHit, SizeExceeded
from randeriv.numerics import (Status, ToleranceConfig, aberth_solve, balance, companion_matrix,
                               eigenvalues_dense, eval_log_abs_P, eval_S, eval_T, hessenberg,
                               poly_derivative, poly_from_roots, poly_roots)
from randeriv.metrics import max_matched_distance


def test_log_abs_P_examples():
    assert eval_log_abs_P([0], 1) == 0
    assert abs(eval_log_abs_P([1, -1], 0)) < 1e-15
    assert eval_log_abs_P([0, 0, 0], 2) == pytest.approx(3 * math.log(2))
    with pytest.raises(PoleHit):
        eval_log_abs_P([1, 2], 2)


def test_eval_S_examples():
    v, _ = eval_S([1, -1], [1, 1], 0)
    assert abs(v) < 1e-15
    v, d = eval_S([0], [2], 1)
    assert v == pytest.approx(2) and d == pytest.approx(-2)
    v, _ = eval_S([1, 2], [1, 3], 0)
    assert v == pytest.approx(-2.5)
    with pytest.raises(PoleHit):
        eval_S([1, 2], [1, 1], 1.0)


def test_eval_T_examples():
    assert abs(eval_T([1, -1], [1, 1], 1j)[0]) < 1e-14
    assert eval_T([1], [5], 0)[0] == pytest.approx(5)
    assert eval_T([2], [1], 1)[0] == pytest.approx(3)
    with pytest.raises(PoleHit):
        eval_T([1j], [1], 1j)


@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_eval_S_derivative_matches_finite_difference(z):
    pts = np.array([1.5 + 0.5j, -2, 0.3j + 4])
    w = np.array([0.5, 1.0, 2.0])
    if np.abs(z - pts).min() < 0.3:
        return
    _, d = eval_S(pts, w, z)
    h = 1e-6
    fd = (eval_S(pts, w, z + h)[0] - eval_S(pts, w, z - h)[0]) / (2 * h)
    assert abs(d - fd) <= 1e-5 * max(1, abs(d))


def _poly(c):
    def f(z):
        return np.polyval(c, z), np.polyval(np.polyder(c), z)
    return f


def test_aberth_quadratic():
    rep = aberth_solve(2, _poly([1, 0, -1]), [0.5 + 0.1j, -0.5 - 0.1j])
    assert rep.status is Status.CONVERGED
    assert max_matched_distance(rep.roots, [1, -1]) < 1e-12


def test_aberth_on_S():
    f = lambda z: eval_S([1, -1], [1, 1], z)
    assert abs(aberth_solve(1, f, [0.3j], poles=np.array([1, -1])).roots[0]) < 1e-12
    f = lambda z: eval_S([1, 2], [1, 3], z)
    rep = aberth_solve(1, f, [1.5 + 0.2j], poles=np.array([1, 2]))
    # (z - 2) + 3 (z - 1) = 0  =>  z = 5/4
    assert abs(rep.roots[0] - 1.25) < 1e-12


def test_aberth_degenerate():
    with pytest.raises(Degenerate):
        aberth_solve(2, lambda z: (np.zeros_like(z), np.zeros_like(z)), [0.1, 0.2j])


def test_tolerance_validation():
    with pytest.raises(ValueError):
        ToleranceConfig(root_tol=-1)


def test_eigenvalues_examples():
    assert max_matched_distance(eigenvalues_dense(np.diag([1, 2, 3])), [1, 2, 3]) < 1e-14
    assert max_matched_distance(eigenvalues_dense([[0, 1], [-1, 0]]), [1j, -1j]) < 1e-14
    c = companion_matrix([2, -3, 1])
    assert max_matched_distance(eigenvalues_dense(c), [1, 2]) < 1e-13


@pytest.mark.parametrize("n", [1, 5, 17, 60])
def test_eigenvalues_against_lapack(n, g):
    a = g.standard_normal((n, n)) + 1j * g.standard_normal((n, n))
    ours = eigenvalues_dense(a)
    assert max_matched_distance(ours, np.linalg.eigvals(a)) < 1e-10 * n


def test_eigenvalues_real_nonnormal(g):
    a = np.triu(g.standard_normal((12, 12)), -1)
    assert max_matched_distance(eigenvalues_dense(a), np.linalg.eigvals(a)) < 1e-9


def test_hessenberg_is_similarity(g):
    a = g.standard_normal((9, 9)) + 1j * g.standard_normal((9, 9))
    h = hessenberg(a)
    assert np.allclose(np.tril(h, -2), 0)
    assert max_matched_distance(np.linalg.eigvals(h), np.linalg.eigvals(a)) < 1e-10
    b = balance(a)
    assert max_matched_distance(np.linalg.eigvals(b), np.linalg.eigvals(a)) < 1e-10


def test_eigen_guards():
    with pytest.raises(SizeExceeded):
        eigenvalues_dense(np.zeros((513, 513)))
    with pytest.raises(NoConvergence) as e:
        eigenvalues_dense(np.random.default_rng(0).standard_normal((30, 30)), max_iter_per_eig=0)
    assert e.value.partial is not None


def test_poly_from_roots_examples():
    assert np.allclose(poly_from_roots([1, -1]), [-1, 0, 1])
    assert np.allclose(poly_from_roots([0, 0]), [0, 0, 1])
    assert np.allclose(poly_from_roots([1, 2, 3]), [-6, 11, -6, 1])
    assert np.allclose(poly_derivative([-6, 11, -6, 1]), [11, -12, 3])
    with pytest.raises(SizeExceeded):
        poly_from_roots(np.zeros(65))


@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=8))
def test_poly_roots_roundtrip(roots):
    roots = np.array(roots)
    d = np.abs(roots[:, None] - roots[None, :]) + np.eye(len(roots))
    if d.min() < 0.1:
        return
    assert max_matched_distance(poly_roots(poly_from_roots(roots)), roots) < 1e-7


def test_balance_one_by_one_terminates(g):
    for z in g.standard_normal(200) + 1j * g.standard_normal(200):
        assert eigenvalues_dense([[z]])[0] == pytest.approx(z)
