"""
ILUFF: an incomplete LDU factorization A ~= L D^{-1} U obtained from the
coefficients of the forward FAPINV sweep.

The coefficient that combines z_i into z_j is exactly U_ij, and the one that
combines w_i into w_j is exactly L_ji, so the sweep yields L and U for free.
The inverse factors themselves are only kept while the sweep runs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sps
from scipy.sparse.linalg import spsolve_triangular

from .fapinv import DropRule, _strict_part, _unit_lower, forward_sweep
from .mmio import read_matrix_market, read_vector, write_matrix_market, write_vector
from .sparse import ColumnCursorIndex, CsrMatrix, DimensionError


class PivotMode(str, enum.Enum):
    GENERAL = "general"
    # d_j = 1 / (z_j^T A z_j); breakdown free for (nonsymmetric) positive definite A
    POSITIVE_DEFINITE = "positive_definite"

    @classmethod
    def parse(cls, value) -> "PivotMode":
        if isinstance(value, cls):
            return value
        if value == "pd":
            return cls.POSITIVE_DEFINITE
        return cls(value)


@dataclass(frozen=True, eq=False)
class IlduFactors:
    """
    ``l`` holds the strictly lower part of L by rows; ``u`` holds U by
    columns (row j of ``u`` lists U_ij for i < j).  Unit diagonals implicit.
    The preconditioner applied is (L D^{-1} U)^{-1} = U^{-1} D L^{-1}.
    """

    l: CsrMatrix
    u: CsrMatrix
    d: np.ndarray
    breakdown_count: int = 0

    @property
    def n(self) -> int:
        return self.l.n

    @cached_property
    def L(self) -> sps.csr_matrix:
        return _unit_lower(self.l)

    @cached_property
    def U(self) -> sps.csr_matrix:
        return _unit_lower(self.u).T.tocsr()

    def dense(self):
        return self.L.toarray(), self.U.toarray(), self.d.copy()

    def product(self) -> sps.csr_matrix:
        """L D^{-1} U, the matrix this factorization approximates."""
        return (self.L @ sps.diags(1.0 / self.d) @ self.U).tocsr()

    def apply(self, v) -> np.ndarray:
        return apply_ildu_inverse(self, v)

    __call__ = apply


def iluff_factorize(
    a: CsrMatrix,
    cols: ColumnCursorIndex | None = None,
    rule: DropRule = DropRule(),
    mode: PivotMode | str = PivotMode.GENERAL,
) -> IlduFactors:
    """
    Incomplete LDU of ``a`` by the ILUFF sweep.

    A coefficient U_ij = d_i w_i . A[:, j] (resp. L_ji = d_i A[j, :] . z_i)
    is used and stored only when |U_ij| > tau; after every update, entries
    of z_j (w_j) smaller than tau are dropped.  With tau = 0 and no pivot
    safeguards, L D^{-1} U reproduces A to round-off.

    Raises ``NotPositiveDefiniteError`` in positive-definite mode when some
    z_j^T A z_j <= 0.
    """
    mode = PivotMode.parse(mode)
    r = forward_sweep(a, cols, rule.tau, ilu=True, pd=mode is PivotMode.POSITIVE_DEFINITE)
    return IlduFactors(r["l"], r["u"], r["d"], r["breakdowns"])


def apply_ildu_inverse(f: IlduFactors, v) -> np.ndarray:
    """Solve L a = v, scale by D, solve U x = D a."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (f.n,):
        raise DimensionError(f"vector of length {v.shape} does not match n={f.n}")
    if f.n == 0:
        return v.copy()
    t = spsolve_triangular(f.L, v, lower=True, unit_diagonal=True)
    t *= f.d
    return spsolve_triangular(f.U, t, lower=False, unit_diagonal=True)


def density(f, a: CsrMatrix) -> float:
    """
    (nnz(L) + nnz(U)) / nnz(A) with D merged into U, i.e. the strict
    triangles plus n.  Also accepts InverseFactors (W and Z in place of L, U).
    """
    if hasattr(f, "l"):
        strict = f.l.nnz + f.u.nnz
    else:
        strict = f.w.nnz + f.z.nnz
    return (strict + a.n) / a.nnz


def save_ildu(prefix, f: IlduFactors) -> None:
    write_matrix_market(f"{prefix}_L.mtx", f.L, comment="unit lower ILUFF factor L")
    write_matrix_market(f"{prefix}_U.mtx", f.U, comment="unit upper ILUFF factor U")
    write_vector(f"{prefix}_D.txt", f.d)


def load_ildu(prefix) -> IlduFactors:
    l = read_matrix_market(f"{prefix}_L.mtx")
    u = read_matrix_market(f"{prefix}_U.mtx")
    d = read_vector(f"{prefix}_D.txt")
    return IlduFactors(_strict_part(l, True), _strict_part(u, False), d)
