"""
Forward factored inverse (FFINV) and its drop-tolerance variant (FFAPINV).

Computes unit lower W, unit upper Z and diagonal D with W A Z = D^{-1}, so
that A^{-1} = Z D W.  Two routes are provided:

* ``ffinv_vector`` -- the production path.  Builds z_j and w_j as sparse
  combinations of earlier columns/rows (compiled kernel).
* ``ffinv_scalar`` -- entry-by-entry recurrences in plain Python.  Slow,
  but written independently of the kernel and able to record every
  intermediate coefficient, which is what the tests use it for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
import scipy.sparse as sps

from . import _kernels
from .mmio import read_matrix_market, read_vector, write_matrix_market, write_vector
from .sparse import ColumnCursorIndex, CsrMatrix, DimensionError, build_column_index

EPS = float(np.finfo(np.float64).eps)
SAFE_PIVOT = math.sqrt(EPS)


class FactorizationError(ArithmeticError):
    """Hard failure of a factorization at a given step (0-based column)."""

    def __init__(self, msg, column):
        self.column = column
        super().__init__(f"{msg} (column {column})")


class NotPositiveDefiniteError(FactorizationError):
    pass


@dataclass(frozen=True)
class DropRule:
    """Absolute drop tolerance; tau = 0 means no dropping at all."""

    tau: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.tau) and self.tau >= 0):
            raise ValueError(f"drop tolerance must be finite and >= 0, got {self.tau}")


def _strict_lower(n, ptr, idx, val) -> CsrMatrix:
    nnz = ptr[n]
    return CsrMatrix(n, ptr, idx[:nnz].copy(), val[:nnz].copy())


def _unit_lower(strict: CsrMatrix) -> sps.csr_matrix:
    return (strict.to_scipy() + sps.eye(strict.n, format="csr")).tocsr()


@dataclass(frozen=True, eq=False)
class InverseFactors:
    """
    Inverse factors with W A Z ~= D^{-1}.

    ``w`` holds the strictly lower part of W row by row.  ``z`` holds Z by
    columns: row j of ``z`` lists the entries z_ij, i < j, of column z_j
    (so ``z`` is the strictly lower part of Z^T).  Unit diagonals are
    implicit.
    """

    w: CsrMatrix
    z: CsrMatrix
    d: np.ndarray
    breakdowns: int = 0

    @property
    def n(self) -> int:
        return self.w.n

    @property
    def nnz_offdiag(self) -> int:
        return self.w.nnz + self.z.nnz

    @cached_property
    def W(self) -> sps.csr_matrix:
        return _unit_lower(self.w)

    @cached_property
    def Z(self) -> sps.csc_matrix:
        return _unit_lower(self.z).T.tocsc()

    def dense(self):
        """(W, Z, d) as dense arrays."""
        return self.W.toarray(), self.Z.toarray(), self.d.copy()

    def apply(self, v) -> np.ndarray:
        return apply_factored_inverse(self, v)

    __call__ = apply


@dataclass
class CoefficientTrace:
    """Nonzero alpha, beta, l, u values keyed by 0-based (i, j), i < j."""

    alpha: dict = field(default_factory=dict)
    beta: dict = field(default_factory=dict)
    l: dict = field(default_factory=dict)
    u: dict = field(default_factory=dict)


def _check_square(a: CsrMatrix, cols: ColumnCursorIndex | None) -> ColumnCursorIndex:
    if cols is None:
        return build_column_index(a)
    if cols.row_of.size != a.nnz or cols.first_in_col.size != a.n:
        raise DimensionError("column index was not built from this matrix")
    return cols


def forward_sweep(a: CsrMatrix, cols: ColumnCursorIndex | None, tau: float, ilu: bool, pd: bool):
    """Run the compiled kernel and translate its status into exceptions."""
    cols = _check_square(a, cols)
    n = a.n
    out = _kernels.forward_sweep(
        n, a.row_ptr, a.col_idx, a.values,
        cols.first_in_col, cols.next_in_col, cols.row_of,
        float(tau), bool(ilu), bool(pd), EPS, SAFE_PIVOT,
    )
    status, bad, breakdowns, d = out[:4]
    if status == _kernels.NONFINITE:
        raise FactorizationError("non-finite value during factorization", int(bad))
    if status == _kernels.NOT_POSITIVE_DEFINITE:
        raise NotPositiveDefiniteError("matrix not positive definite: z_j^T A z_j <= 0", int(bad))
    w_ptr, w_idx, w_val, z_ptr, z_idx, z_val, l_ptr, l_idx, l_val, u_ptr, u_idx, u_val = out[4:]
    return {
        "d": d,
        "breakdowns": int(breakdowns),
        "w": _strict_lower(n, w_ptr, w_idx, w_val),
        "z": _strict_lower(n, z_ptr, z_idx, z_val),
        "l": _strict_lower(n, l_ptr, l_idx, l_val),
        "u": _strict_lower(n, u_ptr, u_idx, u_val),
    }


def ffinv_vector(a: CsrMatrix, cols: ColumnCursorIndex | None = None, rule: DropRule = DropRule()) -> InverseFactors:
    """
    FFAPINV in vector form.  With ``rule.tau == 0`` this is the exact FFINV
    factorization (up to round-off).

    Near-zero pivots (|w_j . A[:, j]| < machine epsilon) are replaced by
    sqrt(eps) carrying the sign of a_jj, and counted in ``breakdowns``.
    """
    r = forward_sweep(a, cols, rule.tau, ilu=False, pd=False)
    return InverseFactors(r["w"], r["z"], r["d"], r["breakdowns"])


def _safeguarded(piv, ajj, column):
    if not math.isfinite(piv):
        raise FactorizationError("non-finite value during factorization", column)
    if abs(piv) < EPS:
        return (-SAFE_PIVOT if ajj < 0 else SAFE_PIVOT), True
    return piv, False


def ffinv_scalar(a: CsrMatrix, cols: ColumnCursorIndex | None = None, rule: DropRule = DropRule(), trace: bool = False):
    """
    FFAPINV through the scalar recurrences

        l_i = a_ji + sum_{k<i} a_jk z_ki,        beta_i  = l_i d_i
        w_ji = -beta_i - sum_{i<k<j} beta_k w_ki
        d_j = 1 / (a_jj + sum_{k<j} w_jk a_kj)
        u_i = a_ij + sum_{k<i} w_ik a_kj,        alpha_i = u_i d_i
        z_ij = -alpha_i - sum_{i<k<j} alpha_k z_ik

    with beta, w_ji, alpha and z_ij each set to zero when below tau.

    Returns ``(InverseFactors, CoefficientTrace | None)``.
    """
    cols = _check_square(a, cols)
    n, tau = a.n, rule.tau
    a_rows = [dict(zip(*(x.tolist() for x in a.row(j)))) for j in range(n)]
    a_cols = [dict(cols.column(a, j)) for j in range(n)]
    w_row = [dict() for _ in range(n)]  # w_row[j][i] = w_ji
    w_col = [dict() for _ in range(n)]  # w_col[i][j] = w_ji
    z_col = [dict() for _ in range(n)]  # z_col[j][i] = z_ij
    z_row = [dict() for _ in range(n)]  # z_row[i][j] = z_ij
    d = [0.0] * n
    tr = CoefficientTrace() if trace else None
    breakdowns = 0

    for j in range(n):
        arow, acol = a_rows[j], a_cols[j]

        beta = [0.0] * j
        for i in range(j - 1, -1, -1):
            zi = z_col[i]
            l = arow.get(i, 0.0) + sum(v * zi.get(k, 0.0) for k, v in arow.items() if k < i)
            b = l * d[i]
            if not math.isfinite(b):
                raise FactorizationError("non-finite value during factorization", j)
            if tr is not None and b != 0.0:
                tr.l[(i, j)] = l
                tr.beta[(i, j)] = b
            beta[i] = 0.0 if abs(b) < tau else b

        wj = w_row[j]
        for i in range(j):
            s = -beta[i] - sum(beta[k] * wki for k, wki in w_col[i].items())
            if s != 0.0 and not abs(s) < tau:
                wj[i] = s

        piv = acol.get(j, 0.0) + sum(wjk * acol.get(k, 0.0) for k, wjk in wj.items())
        piv, hit = _safeguarded(piv, acol.get(j, 0.0), j)
        breakdowns += hit
        d[j] = 1.0 / piv

        alpha = [0.0] * j
        for i in range(j - 1, -1, -1):
            wi = w_row[i]
            u = acol.get(i, 0.0) + sum(wi.get(k, 0.0) * v for k, v in acol.items() if k < i)
            al = u * d[i]
            if not math.isfinite(al):
                raise FactorizationError("non-finite value during factorization", j)
            if tr is not None and al != 0.0:
                tr.u[(i, j)] = u
                tr.alpha[(i, j)] = al
            alpha[i] = 0.0 if abs(al) < tau else al

        zj = z_col[j]
        for i in range(j):
            s = -alpha[i] - sum(alpha[k] * zik for k, zik in z_row[i].items())
            if s != 0.0 and not abs(s) < tau:
                zj[i] = s

        for i, v in wj.items():
            w_col[i][j] = v
        for i, v in zj.items():
            z_row[i][j] = v

    def pack(rows):
        r, c, v = [], [], []
        for j, entries in enumerate(rows):
            for i, x in entries.items():
                r.append(j)
                c.append(i)
                v.append(x)
        return CsrMatrix.from_coo(n, r, c, v)

    factors = InverseFactors(pack(w_row), pack(z_col), np.array(d), breakdowns)
    return factors, tr


def apply_factored_inverse(f: InverseFactors, v) -> np.ndarray:
    """Z (D (W v)): two sparse products and a diagonal scaling."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (f.n,):
        raise DimensionError(f"vector of length {v.shape} does not match n={f.n}")
    return f.Z @ (f.d * (f.W @ v))


def save_factors(prefix, f: InverseFactors) -> None:
    """Writes ``<prefix>_W.mtx``, ``<prefix>_Z.mtx`` (full unit triangles) and ``<prefix>_D.txt``."""
    prefix = Path(prefix)
    write_matrix_market(f"{prefix}_W.mtx", f.W, comment="unit lower inverse factor W")
    write_matrix_market(f"{prefix}_Z.mtx", f.Z, comment="unit upper inverse factor Z")
    write_vector(f"{prefix}_D.txt", f.d)


def _strict_part(m: CsrMatrix, lower: bool) -> CsrMatrix:
    s = m.to_scipy()
    s = sps.tril(s, -1) if lower else sps.triu(s, 1).T
    return CsrMatrix.from_scipy(s.tocsr())


def load_factors(prefix) -> InverseFactors:
    w = read_matrix_market(f"{prefix}_W.mtx")
    z = read_matrix_market(f"{prefix}_Z.mtx")
    d = read_vector(f"{prefix}_D.txt")
    return InverseFactors(_strict_part(w, True), _strict_part(z, False), d)
