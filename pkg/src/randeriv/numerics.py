"""Complex numerics: partial-fraction evaluation, Aberth iteration, dense eigenvalues.

Points are plain ``complex128`` numpy arrays throughout the package.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import Degenerate, NoConvergence, PoleHit, SizeExceeded

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ToleranceConfig:
    root_tol: float = 1e-12
    residual_tol: float = 1e-9
    max_iters: int = 200
    cluster_tol: float = 1e-10

    def __post_init__(self):
        if min(self.root_tol, self.residual_tol, self.cluster_tol) <= 0:
            raise ValueError("tolerances must be strictly positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


DEFAULT_TOL = ToleranceConfig()


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxItersReached"
    DEGENERATE = "Degenerate"


@dataclass
class RootSolveReport:
    roots: np.ndarray
    residuals: np.ndarray
    iterations: int
    status: Status
    method: str = "aberth"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.roots = np.asarray(self.roots, dtype=complex)
        self.residuals = np.asarray(self.residuals, dtype=float)
        if len(self.roots) != len(self.residuals):
            raise ValueError("roots and residuals differ in length")

    @property
    def converged(self) -> bool:
        return self.status == Status.CONVERGED


def _check_poles(points, z):
    d = np.abs(z[..., None] - points)
    scale = np.maximum(np.abs(z)[..., None], np.abs(points))
    if np.any(d <= EPS * scale):
        raise PoleHit("evaluation point coincides with a pole")


def eval_log_abs_P(points, z) -> float | np.ndarray:
    """log|P(z)| = sum_k log|z - Z_k|, summed in log form."""
    points = np.asarray(points, dtype=complex)
    zz = np.asarray(z, dtype=complex)
    _check_poles(points, zz)
    return np.log(np.abs(zz[..., None] - points)).sum(axis=-1)


def eval_S(points, weights, z):
    """S(z) = sum_k w_k/(z - Z_k) and its derivative."""
    points = np.asarray(points, dtype=complex)
    w = np.asarray(weights, dtype=float)
    if points.shape != w.shape:
        raise ValueError("points and weights differ in length")
    zz = np.asarray(z, dtype=complex)
    _check_poles(points, zz)
    inv = 1.0 / (zz[..., None] - points)
    val = (w * inv).sum(axis=-1)
    der = -(w * inv * inv).sum(axis=-1)
    return val, der


def eval_T(points, weights, z):
    """T(z) = sum_k w_k (Z_k + z)/(Z_k - z) and its derivative."""
    points = np.asarray(points, dtype=complex)
    w = np.asarray(weights, dtype=float)
    if points.shape != w.shape:
        raise ValueError("points and weights differ in length")
    zz = np.asarray(z, dtype=complex)
    _check_poles(points, zz)
    inv = 1.0 / (points - zz[..., None])
    val = (w * (points + zz[..., None]) * inv).sum(axis=-1)
    der = (2.0 * w * points * inv * inv).sum(axis=-1)
    return val, der


def aberth_solve(num_roots, f_and_df, initial_guesses, tol=DEFAULT_TOL,
                 poles=None, residual=None) -> RootSolveReport:
    """Simultaneous Ehrlich-Aberth iteration with per-root locking.

    ``f_and_df(z)`` evaluates the target and its derivative on an array. When
    ``poles`` is given the target is a rational function f = N/prod(z - p)
    and the iteration runs on the numerator N, whose log-derivative is
    f'/f + sum 1/(z - p). The stopping scale for a root is its distance to the
    nearest pole (or max(1, |z|) without poles). ``residual(z)`` overrides the
    default residual |f(z)|.
    """
    z = np.array(initial_guesses, dtype=complex)
    if len(z) != num_roots:
        raise ValueError("need exactly one initial guess per root")
    if num_roots == 0:
        return RootSolveReport([], [], 0, Status.CONVERGED)
    p = None if poles is None else np.asarray(poles, dtype=complex)

    def scale_of(zz):
        if p is None or len(p) == 0:
            return np.maximum(1.0, np.abs(zz))
        return np.abs(zz[:, None] - p).min(axis=1)

    active = np.ones(num_roots, dtype=bool)
    it = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        f0, df0 = f_and_df(z)
        if np.all(f0 == 0) and np.all(df0 == 0):
            raise Degenerate("target function vanishes identically")
        while it < tol.max_iters and active.any():
            it += 1
            idx = np.flatnonzero(active)
            za = z[idx]
            f, df = f_and_df(za)
            logd = df / f
            if p is not None and len(p):
                logd = logd + (1.0 / (za[:, None] - p)).sum(axis=1)
            diff = za[:, None] - z[None, :]
            diff[np.arange(len(idx)), idx] = np.inf
            rep = (1.0 / diff).sum(axis=1)
            step = 1.0 / (logd - rep)
            exact = f == 0
            step[exact] = 0.0
            bad = ~np.isfinite(step)
            # landed on a pole or on another root: kick it sideways
            step[bad] = 1e-7 * scale_of(za[bad]) * np.exp(1j * (1.0 + idx[bad]))
            z[idx] = za - step
            done = (np.abs(step) <= tol.root_tol * scale_of(za)) & ~bad
            active[idx[done]] = False
    if residual is None:
        with np.errstate(divide="ignore", invalid="ignore"):
            res = np.abs(f_and_df(z)[0])
    else:
        res = np.asarray(residual(z), dtype=float)
    res = np.where(np.isfinite(res), res, np.inf)
    ok = bool(np.all(res <= tol.residual_tol))
    if ok:
        status = Status.CONVERGED
    else:
        status = Status.MAX_ITERS
    return RootSolveReport(z, res, it, status, extra={"unlocked": int(active.sum())})


# ---------------------------------------------------------------- dense eigen

MAX_EIG_DIM = 512


def balance(a):
    """Parlett-Reinsch diagonal similarity scaling by powers of two."""
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    radix = 2.0
    converged = False
    while not converged:
        converged = True
        mag = np.abs(a)
        for i in range(n):
            # off-diagonal sums taken directly; subtracting the diagonal can leave a
            # negative rounding residue and stall the scaling loops
            c = mag[:i, i].sum() + mag[i + 1:, i].sum()
            r = mag[i, :i].sum() + mag[i, i + 1:].sum()
            if not (c > 0 and r > 0):
                continue
            g, f, s = r / radix, 1.0, c + r
            while c < g:
                f *= radix
                c *= radix * radix
            g = r * radix
            while c > g:
                f /= radix
                c /= radix * radix
            if (c + r) / f < 0.95 * s:
                converged = False
                a[:, i] *= f
                a[i, :] /= f
                mag[:, i] *= f
                mag[i, :] /= f
    return a


def hessenberg(a):
    """Householder reduction to upper Hessenberg form (similarity)."""
    h = np.array(a, dtype=complex)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        v = x
        v[0] = x0 + phase * alpha
        v /= np.linalg.norm(v)
        h[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h


def _wilkinson(a, b, c, d):
    half = 0.5 * (a - d)
    disc = np.sqrt(half * half + b * c)
    l1 = 0.5 * (a + d) + disc
    l2 = 0.5 * (a + d) - disc
    return l1 if abs(l1 - d) < abs(l2 - d) else l2


def _qr_sweep(h, sigma):
    """One explicit shifted QR step H - s = QR, H <- RQ + s on a Hessenberg block."""
    m = h.shape[0]
    idx = np.arange(m)
    h[idx, idx] -= sigma
    rots = []
    for k in range(m - 1):
        a = complex(h[k, k])
        b = complex(h[k + 1, k])
        r = np.hypot(abs(a), abs(b))
        if r == 0.0:
            c, s = 1.0 + 0j, 0j
        else:
            c, s = a / r, b / r
        rk = h[k, k:].copy()
        rk1 = h[k + 1, k:]
        h[k, k:] = c.conjugate() * rk + s.conjugate() * rk1
        h[k + 1, k:] = -s * rk + c * rk1
        rots.append((c, s))
    for k, (c, s) in enumerate(rots):
        top = k + 2
        ck = h[:top, k].copy()
        ck1 = h[:top, k + 1]
        h[:top, k] = c * ck + s * ck1
        h[:top, k + 1] = -s.conjugate() * ck + c.conjugate() * ck1
    h[idx, idx] += sigma


def eigenvalues_dense(matrix, balance_first=True, max_iter_per_eig=60):
    """All eigenvalues of a square complex matrix.

    Balancing, Householder Hessenberg reduction, then single-shift complex QR
    with Wilkinson shifts and deflation on the active trailing block.
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if n > MAX_EIG_DIM:
        raise SizeExceeded(f"dimension {n} exceeds {MAX_EIG_DIM}")
    if n == 0:
        return np.zeros(0, dtype=complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if balance_first:
        a = balance(a)
    h = hessenberg(a)
    eig = np.zeros(n, dtype=complex)
    hi = n - 1
    iters = 0
    norm = np.abs(h).max()
    while hi >= 0:
        if hi == 0:
            eig[0] = h[0, 0]
            break
        lo = hi
        while lo > 0:
            sub = abs(h[lo, lo - 1])
            diag = abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])
            if diag == 0.0:
                diag = norm
            if sub <= EPS * diag:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eig[hi] = h[hi, hi]
            hi -= 1
            iters = 0
            continue
        if iters >= max_iter_per_eig:
            partial = eig[hi + 1:].copy()
            raise NoConvergence(f"QR stalled with {hi + 1} eigenvalues left", partial=partial)
        iters += 1
        blk = h[lo:hi + 1, lo:hi + 1]
        if iters % 11 == 0:
            # exceptional shift to break cycles
            sigma = h[hi, hi] + abs(h[hi, hi - 1]) * (0.75 + 0.5j)
        else:
            sigma = _wilkinson(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
        _qr_sweep(blk, sigma)
        h[lo:hi + 1, lo:hi + 1] = blk
    return eig


# ---------------------------------------------------------------- polynomials

MAX_EXPAND_DEGREE = 64


def poly_from_roots(points) -> np.ndarray:
    """Monic coefficients of prod (z - Z_k), constant term first."""
    pts = np.asarray(points, dtype=complex).ravel()
    if len(pts) > MAX_EXPAND_DEGREE:
        raise SizeExceeded(f"degree {len(pts)} exceeds {MAX_EXPAND_DEGREE}")
    c = np.ones(1, dtype=complex)
    for r in pts:
        nxt = np.zeros(len(c) + 1, dtype=complex)
        nxt[1:] += c
        nxt[:-1] -= r * c
        c = nxt
    return c


def poly_derivative(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex)
    return c[1:] * np.arange(1, len(c))


def companion_matrix(coeffs) -> np.ndarray:
    """Companion matrix of a polynomial given constant-first coefficients."""
    c = np.asarray(coeffs, dtype=complex)
    while len(c) > 1 and c[-1] == 0:
        c = c[:-1]
    deg = len(c) - 1
    if deg < 1:
        raise Degenerate("constant polynomial has no roots")
    m = np.zeros((deg, deg), dtype=complex)
    m[1:, :-1] = np.eye(deg - 1)
    m[:, -1] = -c[:-1] / c[-1]
    return m


def poly_roots(coeffs) -> np.ndarray:
    """Roots via eigenvalues of the companion matrix (small-degree cross-check)."""
    return eigenvalues_dense(companion_matrix(coeffs))
