"""Fixed-seed invariant suite covering every module; used by ``randeriv selftest``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .experiments import ExperimentManifest, run_convergence
from .metrics import (TestFunction, bump_integrals, log_potential_integral,
                      max_matched_distance)
from .numerics import ToleranceConfig, eigenvalues_dense, poly_derivative, poly_from_roots, poly_roots
from .operator import ScheduleSpec, circular_randomized_derivative, iterate, randomized_derivative
from .rmt import coupled_check, haar_unitary
from .sampling import MeasureSpec, RngStream, sample_gamma_weights, sample_points


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _solve(fn, pts, w, tol):
    rep = fn(pts, w, tol)
    if not rep.converged:
        raise AssertionError(f"solver status {rep.status.value}, max residual {rep.residuals.max():.3g}")
    return rep.roots


def check_closed_forms(tol, g):
    w = np.array([0.3, 0.7])
    r = _solve(randomized_derivative, np.array([-1.0, 1.0]), w, tol)
    assert abs(r[0] - (w[0] - w[1]) / w.sum()) <= 1e-12, r
    r = _solve(circular_randomized_derivative, np.array([1.0, -1.0]), np.ones(2), tol)
    assert max_matched_distance(r, [1j, -1j]) <= 1e-10, r


def check_flat_cardinality_contraction(tol, g):
    for _ in range(25):
        n = int(g.integers(2, 30))
        pts = g.standard_normal(n) + 1j * g.standard_normal(n)
        r = _solve(randomized_derivative, pts, g.gamma(1.0, size=n), tol)
        assert len(r) == n - 1
        assert np.abs(r).max() <= np.abs(pts).max() * (1 + 1e-9)


def check_real_interlacing(tol, g):
    for _ in range(25):
        n = int(g.integers(2, 30))
        x = np.sort(g.standard_normal(n))
        r = np.sort(_solve(randomized_derivative, x.astype(complex), g.gamma(0.5, size=n) + 1e-3, tol).real)
        assert np.all((x[:-1] < r) & (r < x[1:])), "real roots do not interlace"


def check_circle_interlacing(tol, g):
    for _ in range(25):
        n = int(g.integers(2, 30))
        phi = np.sort(g.uniform(0, 2 * np.pi, n))
        r = _solve(circular_randomized_derivative, np.exp(1j * phi), g.gamma(1.0, size=n), tol)
        assert len(r) == n and np.all(np.abs(np.abs(r) - 1) <= 1e-9)
        t = np.mod(np.angle(r), 2 * np.pi)
        counts = np.bincount(np.searchsorted(phi, t) % n, minlength=n)
        assert np.all(counts == 1), "circle roots do not interlace"


def check_equivariance(tol, g):
    for _ in range(15):
        n = int(g.integers(3, 20))
        pts = g.standard_normal(n) + 1j * g.standard_normal(n)
        w = g.gamma(1.0, size=n)
        a = complex(g.standard_normal(), g.standard_normal())
        b = complex(g.standard_normal(), g.standard_normal())
        base = _solve(randomized_derivative, pts, w, tol)
        moved = _solve(randomized_derivative, a * pts + b, 3.7 * w, tol)
        assert max_matched_distance(a * base + b, moved) <= 1e-8 * (1 + abs(a) + abs(b))


def check_beta_infinity(tol, g):
    for n in (5, 10, 20):
        pts = g.standard_normal(n) + 1j * g.standard_normal(n)
        r = _solve(randomized_derivative, pts, np.ones(n), tol)
        ref = poly_roots(poly_derivative(poly_from_roots(pts)))
        assert max_matched_distance(r, ref) <= 1e-6


def check_eigensolver(tol, g):
    a = g.standard_normal((20, 20)) + 1j * g.standard_normal((20, 20))
    assert max_matched_distance(eigenvalues_dense(a), np.linalg.eigvals(a)) <= 1e-9


def check_rmt_coupling(tol, g):
    for _ in range(3):
        n = 16
        diag = sample_points(MeasureSpec("uniform_disk"), n, g)
        assert coupled_check(diag, haar_unitary(n, g), tol) <= 1e-8


def check_log_potential(tol, g):
    pts = sample_points(MeasureSpec("uniform_disk"), 12, g)
    phi = TestFunction(0.2 + 0.1j, 0.8)
    lhs = log_potential_integral(pts, phi, phi.radius / 100)
    rhs = len(pts) * bump_integrals(pts, [phi])[0]
    assert abs(lhs - rhs) <= 0.02 * max(abs(rhs), 1e-3), (lhs, rhs)


def check_gamma_mean(tol, g):
    for beta in (0.5, 1.0, 2.0, 4.0):
        w = sample_gamma_weights(beta, 20000, g).values
        assert abs(w.mean() - beta / 2) <= 5 * math.sqrt(beta / 2 / 20000)


def check_iterate_monotone(tol, g):
    pts = sample_points(MeasureSpec("uniform_disk"), 40, g)
    seed = int(g.integers(2 ** 31))
    trace = iterate(pts, 10, 2.0, "flat", RngStream(seed), tol)
    assert np.all(np.diff(trace.max_moduli()) <= 1e-9)
    assert [len(s) for s in trace.stages] == list(range(40, 29, -1))


def check_reproducibility(tol, g):
    man = ExperimentManifest(
        measure=MeasureSpec("uniform_circle"), n_grid=[10, 20], trials=2,
        master_seed=int(g.integers(2 ** 31)), schedule=ScheduleSpec("constant", k=2), tol=tol)
    a = run_convergence(man, threads=1).to_csv()
    b = run_convergence(man, threads=3).to_csv()
    assert a == b, "CSV output depends on thread count"


CHECKS = (
    ("closed_forms", check_closed_forms),
    ("flat_cardinality_contraction", check_flat_cardinality_contraction),
    ("real_line_interlacing", check_real_interlacing),
    ("unit_circle_interlacing", check_circle_interlacing),
    ("affine_equivariance", check_equivariance),
    ("beta_infinity_reduction", check_beta_infinity),
    ("dense_eigensolver", check_eigensolver),
    ("rmt_coupling", check_rmt_coupling),
    ("log_potential_identity", check_log_potential),
    ("gamma_sampler_mean", check_gamma_mean),
    ("iterate_monotone_modulus", check_iterate_monotone),
    ("csv_reproducibility", check_reproducibility),
)


def run_selftest(tol: ToleranceConfig | None = None, seed: int = 20240601, stop_on_failure=True) -> list:
    """Run each check with its own fixed-seed generator; returns CheckResults."""
    tol = tol or ToleranceConfig()
    results = []
    for i, (name, fn) in enumerate(CHECKS):
        g = RngStream(seed, i).generator()
        try:
            fn(tol, g)
            results.append(CheckResult(name, True))
        except Exception as e:  # any exception is a failed invariant
            results.append(CheckResult(name, False, f"{type(e).__name__}: {e}"))
            if stop_on_failure:
                break
    return results
