"""Factored approximate inverse and ILUFF preconditioners for sparse GMRES."""

from .fapinv import (
    CoefficientTrace,
    DropRule,
    FactorizationError,
    InverseFactors,
    NotPositiveDefiniteError,
    apply_factored_inverse,
    ffinv_scalar,
    ffinv_vector,
)
from .iluff import IlduFactors, PivotMode, apply_ildu_inverse, density, iluff_factorize
from .krylov import GmresConfig, Preconditioner, SolveReport, SolverError, gmres_right, make_rhs_ones_solution
from .mmio import MatrixMarketError, read_matrix_market, write_matrix_market
from .oracles import is_h_matrix, is_m_matrix
from .sparse import (
    ColumnCursorIndex,
    CsrMatrix,
    DimensionError,
    Permutation,
    apply_permutation,
    build_column_index,
    comparison_matrix,
)

__version__ = "0.1.0"
