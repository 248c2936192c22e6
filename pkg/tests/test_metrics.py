import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment
from scipy.stats import wasserstein_distance

from randeriv.errors import OffCircle, PoleHit
from randeriv.metrics import (EmpiricalMeasure, TestFunction, bump_family, bump_integrals,
                              circular_w1, exact_w1_planar, fit_tail_exponent,
                              log_potential_integral, max_bump_deviation, sliced_w1,
                              small_value_tail, test_function_integral, w1_1d)
from randeriv.operator import circular_randomized_derivative
from randeriv.sampling import MeasureSpec, RngStream, sample_points

from strategies import circle_sets

floats = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def test_bump_examples():
    phi = TestFunction(0.3 + 0.2j, 0.7)
    assert test_function_integral([0.3 + 0.2j], phi) == pytest.approx(1.0)
    assert test_function_integral([5, 5j], phi) == 0
    assert test_function_integral([0.5, -0.5], TestFunction(0, 1)) == pytest.approx(math.exp(-1 / 3))
    with pytest.raises(ValueError):
        EmpiricalMeasure([])


@given(st.complex_numbers(max_magnitude=1.2, allow_nan=False, allow_infinity=False))
def test_laplacian_matches_finite_difference(z):
    phi = TestFunction(0.1 - 0.2j, 0.9)
    u = abs(z - phi.center) ** 2 / phi.radius ** 2
    if u > 0.9:
        return
    h = 1e-4
    fd = (phi(z + h) + phi(z - h) + phi(z + 1j * h) + phi(z - 1j * h) - 4 * phi(z)) / h ** 2
    assert abs(phi.laplacian(z) - fd) <= 1e-4 * max(1.0, abs(fd))


def test_bump_family_shape():
    fam = bump_family()
    assert len(fam) == 2 * 9 * 9
    pts = sample_points(MeasureSpec("uniform_disk"), 50, RngStream(0))
    direct = np.array([test_function_integral(pts, f) for f in fam])
    assert np.allclose(bump_integrals(pts, fam), direct)
    assert max_bump_deviation(pts, pts, fam) == 0


@given(st.lists(floats, min_size=1, max_size=30), st.lists(floats, min_size=1, max_size=30))
def test_w1_1d_matches_scipy(x, y):
    assert w1_1d(x, y) == pytest.approx(wasserstein_distance(x, y), abs=1e-9)


def test_sliced_identical_is_zero():
    pts = sample_points(MeasureSpec("uniform_disk"), 100, RngStream(1))
    assert sliced_w1(pts, pts, 32, 0).value == 0


def test_sliced_translation():
    pts = sample_points(MeasureSpec("uniform_disk"), 200, RngStream(2))
    c = 0.7 - 0.4j
    r = sliced_w1(pts, pts + c, 256, RngStream(3))
    assert abs(r.value - 2 / math.pi * abs(c)) <= 3 * r.estimator_error


def test_sliced_same_law_samples_close():
    spec = MeasureSpec("uniform_circle")
    a = sample_points(spec, 10_000, RngStream(4))
    b = sample_points(spec, 10_000, RngStream(5))
    assert sliced_w1(a, b, 64, 0).value <= 0.05


def test_sliced_bounded_by_planar_w1():
    # every 1-D projection is 1-Lipschitz, so sliced W1 never exceeds planar W1
    g = np.random.default_rng(6)
    for _ in range(10):
        a = g.standard_normal(40) + 1j * g.standard_normal(40)
        b = g.standard_normal(40) + 1j * g.standard_normal(40) + 0.5
        assert sliced_w1(a, b, 64, g).value <= exact_w1_planar(a, b) + 1e-12


def test_circular_w1_examples():
    a = np.exp(1j * np.array([0.3, 1.0, 4.0]))
    assert circular_w1(a, a).value == pytest.approx(0, abs=1e-15)
    r = circular_w1(np.exp(1j * np.array([0, np.pi])), np.exp(1j * np.array([np.pi / 2, 3 * np.pi / 2])))
    assert r.value == pytest.approx(np.pi / 2)
    with pytest.raises(OffCircle):
        circular_w1([1.1], [1])


@given(circle_sets(min_n=1, max_n=9, sep=0), circle_sets(min_n=1, max_n=9, sep=0))
def test_circular_w1_matches_hungarian(a, b):
    n = min(len(a), len(b))
    a, b = a[:n], b[:n]
    d = np.abs(np.angle(a[:, None] / b[None, :]))
    r, c = linear_sum_assignment(d)
    assert circular_w1(a, b).value == pytest.approx(d[r, c].mean(), abs=1e-12)


@given(circle_sets(min_n=2, max_n=20))
def test_circular_w1_interlacing_bound(pts):
    roots = circular_randomized_derivative(pts, np.ones(len(pts))).roots
    phi = np.sort(np.mod(np.angle(pts), 2 * np.pi))
    max_gap = np.diff(np.concatenate([phi, [phi[0] + 2 * np.pi]])).max()
    assert circular_w1(roots, pts).value <= max_gap + 1e-12


def test_log_potential_single_point():
    phi = TestFunction(0, 1)
    assert log_potential_integral([0], phi, phi.radius / 100) == pytest.approx(1.0, rel=0.02)


def test_log_potential_outside_point():
    phi = TestFunction(0, 1)
    assert abs(log_potential_integral([3], phi, phi.radius / 100)) <= 1e-3


def test_log_potential_circle_sample():
    pts = sample_points(MeasureSpec("uniform_circle"), 20, RngStream(7)) * 0.45
    phi = TestFunction(0, 0.5)
    lhs = log_potential_integral(pts, phi, phi.radius / 100)
    rhs = 20 * test_function_integral(pts, phi)
    assert lhs == pytest.approx(rhs, rel=0.02)


def test_log_potential_grid_guard():
    with pytest.raises(ValueError):
        log_potential_integral([0], TestFunction(0, 1), 0.1)


def test_small_value_tail_examples():
    tail = small_value_tail([1, -1], 2.0, 0, [0.0, 30.0], 10_000, RngStream(8))
    assert 0 < tail[0][1] < 1
    assert tail[1][1] == 0
    with pytest.raises(PoleHit):
        small_value_tail([1, -1], 2.0, 1, [0.0], 1000, RngStream(8))
    with pytest.raises(ValueError):
        small_value_tail([1, -1], 2.0, 0, [0.0], 10, RngStream(8))


def test_fit_tail_exponent_recovers_rate():
    t = np.linspace(2, 8, 13)
    assert fit_tail_exponent(list(zip(t, 0.3 * np.exp(-1.7 * t)))) == pytest.approx(1.7)


@pytest.mark.xfail(strict=True, reason=(
    "the small-ball exponent of a sum of independent positive-density terms is 1 on the "
    "real line for every beta; min(1, beta/2) is only an upper-bound rate"))
def test_tail_slope_ratio_beta1_vs_beta4():
    pts = np.arange(-4.5, 5.0, 1.0)
    t = np.linspace(2, 8, 13)
    s1 = fit_tail_exponent(small_value_tail(pts, 1.0, 0.1, t, 100_000, RngStream(9)))
    s4 = fit_tail_exponent(small_value_tail(pts, 4.0, 0.1, t, 100_000, RngStream(10)))
    assert s1 / s4 == pytest.approx(0.5, rel=0.3)
