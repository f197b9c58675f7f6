"""
Sparse storage used throughout the package.

A square matrix lives in exactly one place, a CsrMatrix.  Column access
goes through a ColumnCursorIndex, a set of linked lists threaded through
the CSR entries, so no second copy of the values is ever made.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np
import scipy.sparse as sps


class DimensionError(ValueError):
    """Raised when operands do not agree in size."""


@dataclass(frozen=True, eq=False)
class CsrMatrix:
    """
    Square matrix in compressed sparse row form.

    Column indices are strictly increasing inside each row.  Use
    ``from_coo`` / ``from_dense`` to build one from unsorted data; the
    constructor itself only validates.
    """

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        row_ptr = np.ascontiguousarray(self.row_ptr, dtype=np.int64)
        col_idx = np.ascontiguousarray(self.col_idx, dtype=np.int64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "row_ptr", row_ptr)
        object.__setattr__(self, "col_idx", col_idx)
        object.__setattr__(self, "values", values)
        for arr in (row_ptr, col_idx, values):
            arr.setflags(write=False)

        n = int(self.n)
        object.__setattr__(self, "n", n)
        if n < 0:
            raise ValueError("negative dimension")
        if row_ptr.shape != (n + 1,):
            raise ValueError(f"row_ptr must have length n+1={n + 1}")
        if row_ptr[0] != 0 or row_ptr[-1] != col_idx.size:
            raise ValueError("row_ptr must start at 0 and end at nnz")
        if col_idx.size != values.size:
            raise ValueError("col_idx and values differ in length")
        if np.any(np.diff(row_ptr) < 0):
            raise ValueError("row_ptr must be non-decreasing")
        if col_idx.size:
            if col_idx.min() < 0 or col_idx.max() >= n:
                raise ValueError("column index out of range")
            rows = np.repeat(np.arange(n), np.diff(row_ptr))
            same_row = rows[1:] == rows[:-1]
            if np.any(same_row & (np.diff(col_idx) <= 0)):
                raise ValueError("column indices must be strictly increasing within a row")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_coo(cls, n, rows, cols, vals) -> "CsrMatrix":
        """Build from triplets.  Duplicates are summed, exact zeros dropped."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if rows.size and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n):
            raise ValueError("triplet index out of range")
        m = sps.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        m.sum_duplicates()
        m.eliminate_zeros()
        m.sort_indices()
        return cls(n, m.indptr, m.indices, m.data)

    @classmethod
    def from_dense(cls, a) -> "CsrMatrix":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"expected a square 2-D array, got shape {a.shape}")
        rows, cols = np.nonzero(a)
        return cls.from_coo(a.shape[0], rows, cols, a[rows, cols])

    @classmethod
    def from_scipy(cls, m) -> "CsrMatrix":
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"matrix is not square: {m.shape}")
        m = sps.coo_matrix(m)
        return cls.from_coo(m.shape[0], m.row, m.col, m.data)

    @classmethod
    def identity(cls, n: int) -> "CsrMatrix":
        idx = np.arange(n, dtype=np.int64)
        return cls(n, np.arange(n + 1, dtype=np.int64), idx, np.ones(n))

    # -- queries ----------------------------------------------------------

    @property
    def nnz(self) -> int:
        return int(self.col_idx.size)

    @property
    def shape(self):
        return (self.n, self.n)

    def row(self, i: int):
        lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
        return self.col_idx[lo:hi], self.values[lo:hi]

    def triples(self) -> Iterator[tuple[int, int, float]]:
        """Row-order traversal yielding (row, col, value)."""
        for i in range(self.n):
            for p in range(self.row_ptr[i], self.row_ptr[i + 1]):
                yield i, int(self.col_idx[p]), float(self.values[p])

    def row_of_entries(self) -> np.ndarray:
        return np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.row_ptr))

    def diagonal(self) -> np.ndarray:
        rows = self.row_of_entries()
        d = np.zeros(self.n)
        on_diag = rows == self.col_idx
        d[rows[on_diag]] = self.values[on_diag]
        return d

    def max_abs(self) -> float:
        return float(np.abs(self.values).max()) if self.nnz else 0.0

    # -- conversions ------------------------------------------------------

    @cached_property
    def _scipy(self) -> sps.csr_matrix:
        m = sps.csr_matrix((self.values, self.col_idx, self.row_ptr), shape=self.shape)
        m.has_sorted_indices = True
        return m

    def to_scipy(self) -> sps.csr_matrix:
        return self._scipy

    def to_dense(self) -> np.ndarray:
        return self._scipy.toarray()

    def transpose(self) -> "CsrMatrix":
        return CsrMatrix.from_scipy(self._scipy.T)

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise DimensionError(f"vector of length {x.shape} does not match n={self.n}")
        return self._scipy @ x

    def __matmul__(self, x):
        return self.matvec(x)

    def __repr__(self):
        return f"CsrMatrix(n={self.n}, nnz={self.nnz})"


@dataclass(frozen=True, eq=False)
class ColumnCursorIndex:
    """
    Column-wise linked lists over the entries of a CsrMatrix.

    ``first_in_col[j]`` is the entry index of the topmost stored element of
    column j (or -1), ``next_in_col[e]`` the entry below e in the same column
    (or -1) and ``row_of[e]`` the row that owns entry e.  Entry indices
    address ``a.col_idx`` / ``a.values`` directly.
    """

    first_in_col: np.ndarray
    next_in_col: np.ndarray
    row_of: np.ndarray

    def column(self, a: CsrMatrix, j: int) -> Iterator[tuple[int, float]]:
        e = self.first_in_col[j]
        while e != -1:
            yield int(self.row_of[e]), float(a.values[e])
            e = self.next_in_col[e]

    def triples(self, a: CsrMatrix) -> Iterator[tuple[int, int, float]]:
        for j in range(a.n):
            for i, v in self.column(a, j):
                yield i, j, v


def build_column_index(a: CsrMatrix) -> ColumnCursorIndex:
    row_of = a.row_of_entries()
    # entries sorted by (column, row); consecutive entries of one column get linked
    order = np.lexsort((row_of, a.col_idx))
    cols_sorted = a.col_idx[order]
    next_in_col = np.full(a.nnz, -1, dtype=np.int64)
    if a.nnz > 1:
        same = cols_sorted[:-1] == cols_sorted[1:]
        next_in_col[order[:-1][same]] = order[1:][same]
    first_in_col = np.full(a.n, -1, dtype=np.int64)
    # reversed assignment leaves the first (topmost) entry of each column
    first_in_col[cols_sorted[::-1]] = order[::-1]
    for arr in (first_in_col, next_in_col, row_of):
        arr.setflags(write=False)
    return ColumnCursorIndex(first_in_col, next_in_col, row_of)


def comparison_matrix(a: CsrMatrix) -> CsrMatrix:
    """|a_ii| on the diagonal, -|a_ij| off it; same sparsity pattern."""
    rows = a.row_of_entries()
    vals = -np.abs(a.values)
    on_diag = rows == a.col_idx
    vals[on_diag] = -vals[on_diag]
    return CsrMatrix(a.n, a.row_ptr.copy(), a.col_idx.copy(), vals)


@dataclass(frozen=True, eq=False)
class Permutation:
    """Bijection old index -> new index."""

    perm: np.ndarray

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.int64)
        n = perm.size
        if perm.ndim != 1 or not np.array_equal(np.sort(perm), np.arange(n)):
            raise ValueError("permutation must be a bijection on 0..n-1")
        perm.setflags(write=False)
        object.__setattr__(self, "perm", perm)

    @property
    def n(self) -> int:
        return int(self.perm.size)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.n)
        return Permutation(inv)

    def apply_to_vector(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.n,):
            raise DimensionError(f"vector length {v.shape} does not match permutation size {self.n}")
        out = np.empty_like(v)
        out[self.perm] = v
        return out


def apply_permutation(a: CsrMatrix, p: Permutation) -> CsrMatrix:
    """Symmetric permutation P A P^T: entry (i, j) moves to (perm[i], perm[j])."""
    if p.n != a.n:
        raise DimensionError(f"permutation of size {p.n} applied to matrix of size {a.n}")
    rows = p.perm[a.row_of_entries()]
    cols = p.perm[a.col_idx]
    return CsrMatrix.from_coo(a.n, rows, cols, a.values)
