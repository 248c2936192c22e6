"""Haar-unitary minors as an exact cross-check of the randomized derivative.

For M = U* diag(lambda) U, the characteristic polynomial of the top-left
(n-1)x(n-1) block is sum_j |U_jn|^2 prod_{k != j} (lambda_k - z), so with
weights |U_jn|^2 its eigenvalues are exactly the randomized-derivative zeros.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeExceeded
from .metrics import matched_distances
from .numerics import DEFAULT_TOL, ToleranceConfig, eigenvalues_dense
from .operator import randomized_derivative
from .sampling import as_generator

MAX_HAAR_DIM = 256


@dataclass(frozen=True)
class UnitaryMatrix:
    entries: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.entries)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ValueError("unitary must be square")
        err = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))
        if err > 1e-10:
            raise ValueError(f"matrix is not unitary (||U*U - I||_F = {err:.2e})")
        object.__setattr__(self, "entries", u)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def last_column_weights(self) -> np.ndarray:
        return np.abs(self.entries[:, -1]) ** 2


@dataclass(frozen=True)
class MinorProblem:
    diag: np.ndarray
    unitary: UnitaryMatrix

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=complex).ravel()
        if len(d) != self.unitary.n:
            raise ValueError("diag and unitary dimensions disagree")
        object.__setattr__(self, "diag", d)

    def matrix(self) -> np.ndarray:
        u = self.unitary.entries
        return u.conj().T @ (self.diag[:, None] * u)


def haar_unitary(n: int, rng, beta: int = 2) -> UnitaryMatrix:
    """Haar unitary (beta=2) or orthogonal (beta=1) via Ginibre QR with phase fix."""
    if not 2 <= n <= MAX_HAAR_DIM:
        raise SizeExceeded(f"n must be in [2, {MAX_HAAR_DIM}]")
    g = as_generator(rng)
    if beta == 2:
        z = (g.standard_normal((n, n)) + 1j * g.standard_normal((n, n))) / np.sqrt(2)
    elif beta == 1:
        z = g.standard_normal((n, n))
    else:
        raise ValueError("beta must be 1 or 2")
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))[None, :]
    return UnitaryMatrix(q)


def minor_spectrum(problem: MinorProblem) -> np.ndarray:
    m = problem.matrix()
    n = m.shape[0]
    if n < 2:
        raise ValueError("need n >= 2")
    return eigenvalues_dense(m[: n - 1, : n - 1])


def coupled_check(diag, unitary: UnitaryMatrix, tol: ToleranceConfig = DEFAULT_TOL) -> float:
    """Max matched distance between randomized-derivative zeros and the minor spectrum."""
    diag = np.asarray(diag, dtype=complex).ravel()
    if len(diag) > 128:
        raise SizeExceeded("coupled_check is limited to n <= 128")
    w = unitary.last_column_weights()
    roots = randomized_derivative(diag, w, tol).roots
    eig = minor_spectrum(MinorProblem(diag, unitary))
    d = matched_distances(roots, eig)
    return float(d.max()) if len(d) else 0.0
