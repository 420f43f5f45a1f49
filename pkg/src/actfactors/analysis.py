"""Empirical-study helpers: variance shares, principal-component scores,
factor regressions, and subspace distances between factor spaces.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, DataError, ZeroVarianceSeries
from .spectral import DataMatrix, Spectrum

__all__ = [
    "variance_explained",
    "pc_scores",
    "ols_r2",
    "projection_distance",
]


def variance_explained(spec: Spectrum, k: int) -> float:
    """Share of total variance carried by the top k eigenvalues."""
    if not 0 <= k <= spec.p:
        raise ConfigError(f"k={k} must lie in [0, p={spec.p}]")
    total = float(spec.eigenvalues.sum())
    if total <= 0.0:
        raise DataError("total variance is zero")
    return float(spec.eigenvalues[:k].sum()) / total


def pc_scores(
    X: DataMatrix | np.ndarray, k: int, basis: str = "covariance"
) -> np.ndarray:
    """Project centered (and, for basis="correlation", standardized) data
    onto the top-k eigenvectors. Sign convention: the largest-magnitude
    loading of each component is positive."""
    if basis not in ("covariance", "correlation"):
        raise ConfigError(f"basis must be 'covariance' or 'correlation', got {basis!r}")
    arr = X.values if isinstance(X, DataMatrix) else np.asarray(X, dtype=float)
    n, p = arr.shape
    if not 0 <= k <= min(n - 1, p):
        raise ConfigError(f"k={k} must lie in [0, min(n-1, p)={min(n - 1, p)}]")
    if k == 0:
        return np.empty((n, 0))
    z = arr - arr.mean(axis=0)
    if basis == "correlation":
        sd = np.sqrt(np.sum(z**2, axis=0) / n)
        dead = np.flatnonzero(sd <= 0.0)
        if dead.size:
            raise ZeroVarianceSeries(int(dead[0]) + 1)
        z = z / sd
    m = z.T @ z / n
    w, v = np.linalg.eigh((m + m.T) / 2.0)
    order = np.argsort(w)[::-1][:k]
    vk = v[:, order]
    for col in range(k):
        lead = np.argmax(np.abs(vk[:, col]))
        if vk[lead, col] < 0.0:
            vk[:, col] = -vk[:, col]
    return z @ vk


def ols_r2(y: np.ndarray, F: np.ndarray) -> float:
    """Coefficient of determination of y regressed on (1, F)."""
    y = np.asarray(y, dtype=float).ravel()
    F = np.asarray(F, dtype=float)
    if F.ndim != 2:
        raise DataError("factor matrix must be 2-dimensional")
    n, k = F.shape
    if y.shape[0] != n:
        raise DataError(f"series has {y.shape[0]} rows, factors have {n}")
    if not k < n:
        raise ConfigError(f"need fewer regressors than observations, got k={k}, n={n}")
    design = np.column_stack([np.ones(n), F])
    if np.linalg.matrix_rank(design) < k + 1:
        raise DataError("design matrix is rank deficient")
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        return 1.0  # constant series is fit exactly by the intercept
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(min(1.0, max(0.0, r2)))


def _orthonormal_basis(A: np.ndarray, what: str) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] == 0:
        raise DataError(f"{what} must be a non-empty 2-d matrix")
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    tol = s[0] * max(A.shape) * np.finfo(float).eps if s.size else 0.0
    rank = int(np.count_nonzero(s > tol))
    if rank < A.shape[1]:
        raise DataError(f"{what} is rank deficient ({rank} < {A.shape[1]})")
    return u[:, : A.shape[1]]


def projection_distance(A: np.ndarray, B: np.ndarray) -> tuple[float, float]:
    """Operator and Frobenius norms of P_A - P_B, the difference of the
    orthogonal projectors onto the column spans of A and B.

    Computed inside the joint span, so the cost scales with the column
    counts rather than the ambient dimension.
    """
    qa = _orthonormal_basis(A, "first matrix")
    qb = _orthonormal_basis(B, "second matrix")
    if qa.shape[0] != qb.shape[0]:
        raise DataError("matrices must have the same number of rows")
    joint = np.concatenate([qa, qb], axis=1)
    u, s, _ = np.linalg.svd(joint, full_matrices=False)
    tol = s[0] * max(joint.shape) * np.finfo(float).eps
    w = u[:, s > tol]
    wa = w.T @ qa
    wb = w.T @ qb
    diff = wa @ wa.T - wb @ wb.T
    eig = np.linalg.eigvalsh((diff + diff.T) / 2.0)
    op = float(np.abs(eig).max())
    frob = float(np.sqrt(np.sum(eig**2)))
    return op, frob
