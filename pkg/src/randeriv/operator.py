"""Randomized derivative (flat) and its circular variant, plus the iteration pipeline.

Flat: zeros of Q(z) = sum_k w_k prod_{j != k} (z - Z_j), i.e. of S(z) = sum w_k/(z - Z_k)
together with the multiplicity left behind by repeated points.

Circular: zeros of V(z) = P(z) T(z), T(z) = sum_k w_k (Z_k + z)/(Z_k - z).
Writing T = -sum w - sum 2 w_k Z_k/(z - Z_k) shows a point at the origin is
not a pole of T, so V vanishes there to full multiplicity.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import Degenerate, NoConvergence
from .numerics import DEFAULT_TOL, RootSolveReport, Status, ToleranceConfig, aberth_solve
from .sampling import RngStream, as_generator, sample_gamma_weights

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
ON_CIRCLE_TOL = 1e-8


class Variant(str, enum.Enum):
    FLAT = "flat"
    CIRCULAR = "circular"


def _weights(weights, n):
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise ValueError(f"expected {n} weights, got shape {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be finite and strictly positive")
    return w


def cluster_points(points, weights, cluster_tol):
    """Merge points closer than ``cluster_tol`` (single linkage).

    Returns (centers, summed weights, multiplicities).
    """
    pts = np.asarray(points, dtype=complex)
    n = len(pts)
    xy = np.column_stack([pts.real, pts.imag])
    pairs = cKDTree(xy).query_pairs(cluster_tol, output_type="ndarray")
    if len(pairs) == 0:
        return pts.copy(), np.asarray(weights, dtype=float).copy(), np.ones(n, dtype=int)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    k, labels = connected_components(graph, directed=False)
    mult = np.bincount(labels, minlength=k)
    centers = np.bincount(labels, weights=pts.real, minlength=k) / mult
    centers = centers + 1j * np.bincount(labels, weights=pts.imag, minlength=k) / mult
    w = np.bincount(labels, weights=weights, minlength=k)
    return centers, w, mult


def _nn_distance(c):
    if len(c) < 2:
        return np.ones(len(c))
    xy = np.column_stack([c.real, c.imag])
    d, _ = cKDTree(xy).query(xy, k=2)
    return d[:, 1]


def _perturbed_sites(c, rel, offset=0):
    k = np.arange(len(c)) + offset
    return c + rel * _nn_distance(c) * np.exp(1j * GOLDEN_ANGLE * k)


def _initial_guesses(c, w, num_roots, rel, skip=None):
    sites = _perturbed_sites(c, rel)
    if skip is not None:
        sites = np.delete(sites, skip)
    if num_roots <= len(sites):
        return sites[:num_roots]
    bary = (w * c).sum() / w.sum()
    extra = num_roots - len(sites)
    spread = 1e-3 * max(1.0, np.abs(c - bary).max(initial=1.0))
    ring = bary + spread * np.exp(2j * np.pi * np.arange(extra) / extra)
    return np.concatenate([sites, ring])


def _solve_with_retries(num_roots, make_guesses, f_and_df, poles, residual, tol):
    report = None
    for rel in (1e-3, 1e-1, 0.3):
        report = aberth_solve(num_roots, f_and_df, make_guesses(rel), tol,
                              poles=poles, residual=residual)
        if report.converged:
            return report
    return report


def _assemble(fixed, report, method):
    roots = np.concatenate([fixed, report.roots]) if len(fixed) else report.roots
    res = np.concatenate([np.zeros(len(fixed)), report.residuals]) if len(fixed) else report.residuals
    return RootSolveReport(roots, res, report.iterations, report.status, method=method,
                           extra=report.extra)


def randomized_derivative(points, weights, tol: ToleranceConfig = DEFAULT_TOL) -> RootSolveReport:
    """The n - 1 zeros (with multiplicity) of the randomized derivative Q."""
    pts = np.asarray(points, dtype=complex).ravel()
    n = len(pts)
    if n == 0:
        raise Degenerate("empty point set")
    w = _weights(weights, n)
    if n == 1:
        return RootSolveReport([], [], 0, Status.CONVERGED, method="trivial")
    c, wc, mult = cluster_points(pts, w, tol.cluster_tol)
    fixed = np.repeat(c, mult - 1)
    d = len(c)
    if d == 1:
        return RootSolveReport(fixed, np.zeros(len(fixed)), 0, Status.CONVERGED, method="trivial")
    gamma = wc.sum()

    def f_and_df(z):
        inv = 1.0 / (z[:, None] - c)
        wi = wc * inv
        return wi.sum(axis=1), -(wi * inv).sum(axis=1)

    def residual(z):
        # |S| * d with the nearest pole's term cancelled, finite even when z sits on it
        diff = z[:, None] - c
        k = np.argmin(np.abs(diff), axis=1)
        rows = np.arange(len(z))
        d = diff[rows, k]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = wc / diff
        terms[rows, k] = 0.0
        return np.abs(wc[k] + d * terms.sum(axis=1)) / gamma

    bary = (wc * c).sum() / gamma
    skip = int(np.argmax(np.abs(c - bary)))
    report = _solve_with_retries(
        d - 1, lambda rel: _initial_guesses(c, wc, d - 1, rel, skip=skip),
        f_and_df, c, residual, tol)
    return _assemble(fixed, report, "aberth")


def _arc_bisection(phi, w, iters=200):
    """Zeros of h(t) = sum w cot((phi - t)/2) on each arc between sorted angles.

    h increases from -inf to +inf across every open arc, so each arc holds
    exactly one zero.
    """
    order = np.argsort(phi)
    phi = phi[order]
    w = w[order]
    lo = phi.copy()
    hi = np.roll(phi, -1)
    hi[-1] += 2.0 * np.pi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        stuck = (mid <= lo) | (mid >= hi)
        if stuck.all():
            break
        h = (w / np.tan(0.5 * (phi[None, :] - mid[:, None]))).sum(axis=1)
        neg = h < 0
        lo = np.where(neg & ~stuck, mid, lo)
        hi = np.where(~neg & ~stuck, mid, hi)
    theta = 0.5 * (lo + hi)
    hval = (w / np.tan(0.5 * (phi[None, :] - theta[:, None]))).sum(axis=1)
    return theta, hval


def circular_randomized_derivative(points, weights, tol: ToleranceConfig = DEFAULT_TOL) -> RootSolveReport:
    """The n zeros (with multiplicity) of the circular variant V."""
    pts = np.asarray(points, dtype=complex).ravel()
    n = len(pts)
    if n == 0:
        raise Degenerate("empty point set")
    w = _weights(weights, n)
    c, wc, mult = cluster_points(pts, w, tol.cluster_tol)
    gamma = w.sum()
    at_origin = np.abs(c) <= tol.cluster_tol
    fixed = np.concatenate([np.repeat(c[~at_origin], mult[~at_origin] - 1),
                            np.zeros(int(mult[at_origin].sum()), dtype=complex)])
    p = c[~at_origin]
    wp = wc[~at_origin]
    if len(p) == 0:
        return RootSolveReport(fixed, np.zeros(len(fixed)), 0, Status.CONVERGED, method="trivial")

    if not at_origin.any() and np.all(np.abs(np.abs(p) - 1.0) <= ON_CIRCLE_TOL):
        theta, hval = _arc_bisection(np.angle(p), wp)
        roots = np.exp(1j * theta)
        dist = np.abs(roots[:, None] - p).min(axis=1)
        # on the circle |T| = |h|; same normalization as the off-circle residual
        res = np.abs(hval) * dist / (gamma * (dist + 2.0))
        status = Status.CONVERGED if np.all(res <= tol.residual_tol) else Status.MAX_ITERS
        rep = RootSolveReport(roots, res, 0, status, method="arc-bisection")
        return _assemble(fixed, rep, "arc-bisection")

    r = 2.0 * wp * p
    scale = 2.0 * np.abs(p).max()

    def f_and_df(z):
        inv = 1.0 / (z[:, None] - p)
        ri = r * inv
        return -gamma - ri.sum(axis=1), (ri * inv).sum(axis=1)

    def residual(z):
        diff = z[:, None] - p
        k = np.argmin(np.abs(diff), axis=1)
        rows = np.arange(len(z))
        d = diff[rows, k]
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = r / diff
        terms[rows, k] = 0.0
        td = -gamma * d - r[k] - d * terms.sum(axis=1)
        return np.abs(td) / (gamma * (np.abs(d) + scale))

    m = len(p)
    report = _solve_with_retries(
        m, lambda rel: _initial_guesses(p, wp, m, rel), f_and_df, p, residual, tol)
    return _assemble(fixed, report, "aberth")


# ------------------------------------------------------------------ iteration

@dataclass(frozen=True)
class ScheduleSpec:
    """m(n): ``constant`` gives k, ``log_fraction`` gives floor(a n / (log n)^2)."""

    rule: str = "constant"
    k: int = 1
    a: float = 1.0

    def __post_init__(self):
        if self.rule not in ("constant", "log_fraction"):
            raise ValueError(f"unknown schedule rule {self.rule!r}")
        if self.rule == "constant" and self.k < 1:
            raise ValueError("constant schedule needs k >= 1")
        if self.rule == "log_fraction" and self.a <= 0:
            raise ValueError("log_fraction schedule needs a > 0")

    def m(self, n: int) -> int:
        if self.rule == "constant":
            return self.k
        return int(math.floor(self.a * n / math.log(n) ** 2))

    @classmethod
    def from_dict(cls, d: dict) -> "ScheduleSpec":
        return cls(**d)

    def to_dict(self) -> dict:
        if self.rule == "constant":
            return {"rule": "constant", "k": self.k}
        return {"rule": "log_fraction", "a": self.a}


@dataclass
class StageDiagnostics:
    max_modulus: float
    min_modulus: float
    solver: RootSolveReport | None = None


@dataclass
class IterationTrace:
    stages: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    variant: Variant = Variant.FLAT
    beta: float = 2.0
    m: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.stages[-1]

    def max_moduli(self) -> np.ndarray:
        return np.array([d.max_modulus for d in self.diagnostics])

    def min_moduli(self) -> np.ndarray:
        return np.array([d.min_modulus for d in self.diagnostics])


def _diag(pts, report=None):
    mod = np.abs(pts)
    if len(mod) == 0:
        return StageDiagnostics(float("nan"), float("nan"), report)
    return StageDiagnostics(float(mod.max()), float(mod.min()), report)


def iterate(initial, m: int, beta: float, variant, rng: RngStream,
            tol: ToleranceConfig = DEFAULT_TOL, keep_reports: bool = False) -> IterationTrace:
    """Apply the (flat or circular) randomized derivative m times with fresh weights.

    Stage j draws its weights from ``rng.child("weights", j)``.
    """
    variant = Variant(variant)
    pts = np.asarray(initial, dtype=complex).ravel()
    n = len(pts)
    if m < 0:
        raise ValueError("m must be nonnegative")
    if variant is Variant.FLAT and m > n - 1:
        raise ValueError(f"flat iteration needs m <= n - 1 (m={m}, n={n})")
    step = randomized_derivative if variant is Variant.FLAT else circular_randomized_derivative
    trace = IterationTrace([pts], [_diag(pts)], variant, beta, m)
    for j in range(1, m + 1):
        w = sample_gamma_weights(beta, len(pts), rng.child("weights", j))
        report = step(pts, w.values, tol)
        if not report.converged:
            raise NoConvergence(
                f"stage {j}: solver status {report.status.value}, "
                f"max residual {report.residuals.max():.3g}",
                partial=trace, stage=j)
        pts = report.roots
        trace.stages.append(pts)
        trace.diagnostics.append(_diag(pts, report if keep_reports else None))
    return trace


def beta_zero_step(points, rng) -> np.ndarray:
    """Remove one uniformly chosen point (the beta -> 0 limit of one step)."""
    pts = np.asarray(points, dtype=complex).ravel()
    if len(pts) < 2:
        raise Degenerate("need at least two points")
    k = as_generator(rng).integers(len(pts))
    return np.delete(pts, k)
