"""
Dense brute-force checks used by the tests.

Everything here works on plain 2-D numpy arrays and is O(n^3); the dimension
is capped by ``oracle_limit()`` (env ``PRECOND_LAB_ORACLE_LIMIT``, default 200).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .sparse import CsrMatrix

DEFAULT_ORACLE_LIMIT = 200
ORACLE_REL_EPS = 1e-12


def oracle_limit() -> int:
    raw = os.environ.get("PRECOND_LAB_ORACLE_LIMIT")
    return int(raw) if raw else DEFAULT_ORACLE_LIMIT


def as_dense(a) -> np.ndarray:
    if isinstance(a, CsrMatrix):
        a = a.to_dense()
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def _check_size(a: np.ndarray, limit: int | None):
    limit = oracle_limit() if limit is None else limit
    if a.shape[0] > limit:
        raise ValueError(f"dense oracle refused n={a.shape[0]} > limit {limit}")


@dataclass(frozen=True)
class MatrixCheck:
    """Truthy result of a class-membership test; ``singular`` explains a False."""

    ok: bool
    singular: bool = False

    def __bool__(self):
        return self.ok


def dense_comparison_matrix(a) -> np.ndarray:
    a = as_dense(a)
    c = -np.abs(a)
    np.fill_diagonal(c, np.abs(np.diag(a)))
    return c


def is_m_matrix(a, limit: int | None = None) -> MatrixCheck:
    a = as_dense(a)
    _check_size(a, limit)
    off = a - np.diag(np.diag(a))
    if np.any(off > 0):
        return MatrixCheck(False)
    try:
        inv = np.linalg.inv(a)
    except np.linalg.LinAlgError:
        return MatrixCheck(False, singular=True)
    if not np.all(np.isfinite(inv)) or np.linalg.cond(a) > 1.0 / np.finfo(float).eps:
        return MatrixCheck(False, singular=True)
    scale = np.abs(inv).max()
    return MatrixCheck(bool(np.all(inv >= -ORACLE_REL_EPS * scale)))


def is_h_matrix(a, limit: int | None = None) -> MatrixCheck:
    return is_m_matrix(dense_comparison_matrix(a), limit)


def is_positive_definite(a) -> bool:
    """Positive definite in the real sense: the symmetric part is SPD."""
    a = as_dense(a)
    return bool(np.linalg.eigvalsh(0.5 * (a + a.T)).min() > 0)


def dense_inverse(a, limit: int | None = None) -> np.ndarray:
    a = as_dense(a)
    _check_size(a, limit)
    return np.linalg.inv(a)


def dense_ldu(a):
    """
    Unpivoted LDU of a dense matrix by plain Gaussian elimination.

    Returns (L, piv, U) with L unit lower, U unit upper and A = L diag(piv) U.
    """
    a = as_dense(a).copy()
    n = a.shape[0]
    L = np.eye(n)
    piv = np.zeros(n)
    for k in range(n):
        piv[k] = a[k, k]
        L[k + 1:, k] = a[k + 1:, k] / piv[k]
        a[k + 1:, k:] -= np.outer(L[k + 1:, k], a[k, k:])
    U = np.triu(a) / piv[:, None]
    return L, piv, U


def char_poly(a) -> np.ndarray:
    return np.poly(as_dense(a))
