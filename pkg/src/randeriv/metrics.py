"""Empirical-measure comparisons: bump integrals, sliced/circular W1,
the log-potential identity, and the small-value tail estimator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import OffCircle, PoleHit
from .sampling import as_generator, standard_gamma


@dataclass(frozen=True)
class EmpiricalMeasure:
    support: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.support, dtype=complex).ravel()
        if len(s) == 0:
            raise ValueError("empirical measure needs at least one atom")
        object.__setattr__(self, "support", s)

    @property
    def n(self) -> int:
        return len(self.support)

    @property
    def mass_per_atom(self) -> float:
        return 1.0 / len(self.support)


def _support(mu) -> np.ndarray:
    if isinstance(mu, EmpiricalMeasure):
        return mu.support
    return EmpiricalMeasure(mu).support


@dataclass(frozen=True)
class MetricReport:
    name: str
    value: float
    estimator_error: float = 0.0


@dataclass(frozen=True)
class TestFunction:
    """Bump exp(1 - 1/(1 - u)), u = |z - a|^2 / r^2, supported on the closed disk."""

    __test__ = False  # not a pytest class

    center: complex = 0j
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def _u(self, z):
        z = np.asarray(z, dtype=complex)
        return np.abs(z - self.center) ** 2 / self.radius ** 2

    def __call__(self, z):
        u = self._u(z)
        inside = u < 1.0
        out = np.zeros(u.shape)
        ui = u[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui))
        return out

    def laplacian(self, z):
        # (4 phi / r^2) (u^2 + u - 1) / (1 - u)^4
        u = self._u(z)
        inside = u < 1.0
        out = np.zeros(u.shape)
        ui = u[inside]
        phi = np.exp(1.0 - 1.0 / (1.0 - ui))
        out[inside] = 4.0 * phi / self.radius ** 2 * (ui * ui + ui - 1.0) / (1.0 - ui) ** 4
        return out


def bump_family(step=0.5, half_width=2.0, radii=(0.5, 1.0)) -> list:
    """Bumps centered on a square lattice over [-half_width, half_width]^2."""
    k = int(round(half_width / step))
    xs = step * np.arange(-k, k + 1)
    return [TestFunction(complex(x, y), float(r)) for r in radii for x in xs for y in xs]


def test_function_integral(mu, phi: TestFunction) -> float:
    s = _support(mu)
    return float(phi(s).mean())


test_function_integral.__test__ = False  # keep pytest from collecting it


def bump_integrals(support, family) -> np.ndarray:
    """Vector of (1/n) sum phi(Z_k) over a bump family (vectorized)."""
    s = np.asarray(support, dtype=complex)
    centers = np.array([f.center for f in family])
    radii = np.array([f.radius for f in family])
    u = np.abs(s[None, :] - centers[:, None]) ** 2 / radii[:, None] ** 2
    inside = u < 1.0
    vals = np.zeros(u.shape)
    vals[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside]))
    return vals.mean(axis=1)


def max_bump_deviation(a, b, family) -> float:
    return float(np.abs(bump_integrals(a, family) - bump_integrals(b, family)).max())


# ----------------------------------------------------------- transport metrics

def w1_1d(x, y) -> float:
    """Exact W1 between two uniform empirical measures on the line.

    The quantile functions are piecewise constant on the merged grid of
    breakpoints i/n and j/m.
    """
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    n, m = len(x), len(y)
    if n == m:
        return float(np.abs(x - y).mean())
    u = np.union1d(np.arange(n + 1) / n, np.arange(m + 1) / m)
    mids = 0.5 * (u[1:] + u[:-1])
    ix = np.minimum((mids * n).astype(int), n - 1)
    iy = np.minimum((mids * m).astype(int), m - 1)
    return float((np.abs(x[ix] - y[iy]) * np.diff(u)).sum())


def sliced_w1(mu, nu, n_directions: int = 64, rng=0) -> MetricReport:
    """Average 1-D W1 over random projection directions."""
    a = _support(mu)
    b = _support(nu)
    theta = np.pi * as_generator(rng).random(n_directions)
    vals = np.empty(n_directions)
    for i, t in enumerate(theta):
        rot = np.exp(-1j * t)
        vals[i] = w1_1d((a * rot).real, (b * rot).real)
    se = vals.std(ddof=1) / np.sqrt(n_directions) if n_directions > 1 else 0.0
    return MetricReport("sliced_w1", float(vals.mean()), float(se))


def circular_w1(mu, nu, modulus_tol=1e-6) -> MetricReport:
    """W1 on the unit circle (arc length) between equal-size atom sets.

    The optimal coupling of sorted angles is a cyclic shift; all n shifts are tried.
    """
    a = _support(mu)
    b = _support(nu)
    for s in (a, b):
        if np.any(np.abs(np.abs(s) - 1.0) > modulus_tol):
            raise OffCircle("atoms must lie on the unit circle")
    if len(a) != len(b):
        raise ValueError("circular_w1 needs equal atom counts")
    ta = np.sort(np.mod(np.angle(a), 2 * np.pi))
    tb = np.sort(np.mod(np.angle(b), 2 * np.pi))
    n = len(ta)
    shifts = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    d = np.abs(ta[None, :] - tb[shifts])
    d = np.minimum(d, 2 * np.pi - d)
    return MetricReport("circular_w1", float(d.mean(axis=1).min()), 0.0)


def matched_distances(a, b) -> np.ndarray:
    """Per-pair distances of the min-cost bipartite matching between two point sets."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if len(a) != len(b):
        raise ValueError("matching needs equal sizes")
    if len(a) == 0:
        return np.zeros(0)
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c]


def max_matched_distance(a, b) -> float:
    d = matched_distances(a, b)
    return float(d.max()) if len(d) else 0.0


def exact_w1_planar(mu, nu) -> float:
    """Exact planar W1 for equal atom counts (Hungarian). Slow oracle, n <= 256."""
    a = _support(mu)
    b = _support(nu)
    if len(a) > 256:
        raise ValueError("exact planar W1 is limited to 256 atoms")
    return float(matched_distances(a, b).mean())


# ------------------------------------------------------------ log potential

def log_potential_integral(points, phi: TestFunction, grid_step: float) -> float:
    """Midpoint-rule value of (1/2 pi) * integral of log|P| * Laplacian(phi) over the bump disk."""
    pts = np.asarray(points, dtype=complex).ravel()
    r = phi.radius
    if grid_step > r / 50:
        raise ValueError("grid_step must be <= radius/50")
    k = int(np.ceil(r / grid_step))
    offs = (np.arange(-k, k) + 0.5) * grid_step
    x, y = np.meshgrid(offs, offs, indexing="ij")
    z = (phi.center + x + 1j * y).ravel()
    lap = phi.laplacian(z)
    keep = lap != 0
    z = z[keep]
    lap = lap[keep]
    if len(pts):
        rel = (pts[:, None] - z[None, :]) / grid_step
        if np.any(np.abs(rel) < 1e-6):
            z = z + grid_step / 7 * (1 + 1j)
            lap = phi.laplacian(z)
    total = 0.0
    for chunk in np.array_split(np.arange(len(z)), max(1, len(z) * max(len(pts), 1) // 2_000_000)):
        zc = z[chunk]
        logp = np.log(np.abs(zc[:, None] - pts[None, :])).sum(axis=1) if len(pts) else 0.0
        total += float((logp * lap[chunk]).sum())
    return total * grid_step ** 2 / (2 * np.pi)


# ------------------------------------------------------------ small values

def small_value_tail(points, beta: float, z, t_grid, trials: int, rng) -> list:
    """Monte Carlo P(|sum g_k/(z - Z_k)| <= e^-t) over fresh Gamma(beta/2) weights."""
    pts = np.asarray(points, dtype=complex).ravel()
    if trials < 1000:
        raise ValueError("need at least 1000 trials")
    d = z - pts
    if np.any(np.abs(d) <= np.finfo(float).eps * np.maximum(abs(z), np.abs(pts))):
        raise PoleHit("z coincides with a point")
    g = as_generator(rng)
    w = standard_gamma(beta / 2.0, (trials, len(pts)), g)
    s = np.abs(w @ (1.0 / d))
    t = np.asarray(t_grid, dtype=float)
    freq = (s[None, :] <= np.exp(-t)[:, None]).mean(axis=1)
    return list(zip(t.tolist(), freq.tolist()))


def fit_tail_exponent(tail) -> float:
    """Least-squares decay rate a in log P ~ -a t (only positive frequencies)."""
    t = np.array([p[0] for p in tail])
    f = np.array([p[1] for p in tail])
    keep = f > 0
    if keep.sum() < 2:
        raise ValueError("not enough nonzero frequencies to fit")
    slope = np.polyfit(t[keep], np.log(f[keep]), 1)[0]
    return float(-slope)
