"""Random test matrices with known structural properties."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sps

from .sparse import CsrMatrix


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _offdiag_pattern(n, density, rng):
    """Random off-diagonal coordinates, about ``density * n * n`` of them."""
    count = int(round(density * n * n))
    rows = rng.integers(0, n, size=count)
    cols = rng.integers(0, n, size=count)
    keep = rows != cols
    pairs = np.unique(np.stack([rows[keep], cols[keep]], axis=1), axis=0)
    return pairs[:, 0], pairs[:, 1]


def random_m_matrix(n, density=0.1, seed=None, margin=(0.05, 0.5)) -> CsrMatrix:
    """
    Strictly row diagonally dominant matrix with positive diagonal and
    nonpositive off-diagonal entries, hence an M-matrix.
    """
    rng = _rng(seed)
    rows, cols = _offdiag_pattern(n, density, rng)
    off = rng.uniform(0.1, 1.0, size=rows.size)
    rowsum = np.bincount(rows, weights=off, minlength=n)
    slack = rng.uniform(*margin, size=n)
    diag = rowsum * (1.0 + slack) + np.where(rowsum == 0, rng.uniform(0.5, 2.0, size=n), 0.0)
    idx = np.arange(n)
    return CsrMatrix.from_coo(
        n, np.concatenate([rows, idx]), np.concatenate([cols, idx]), np.concatenate([-off, diag])
    )


def random_h_matrix(n, density=0.1, seed=None, margin=(0.05, 0.5)) -> CsrMatrix:
    """An M-matrix with random sign flips on every entry, diagonal included."""
    rng = _rng(seed)
    m = random_m_matrix(n, density, rng, margin)
    signs = rng.choice([-1.0, 1.0], size=m.nnz)
    return CsrMatrix(n, m.row_ptr.copy(), m.col_idx.copy(), m.values * signs)


def random_spd_matrix(n, density=0.1, seed=None) -> CsrMatrix:
    """B B^T + c I with a sparse random B."""
    rng = _rng(seed)
    b = sps.random(n, n, density=density, random_state=rng, data_rvs=lambda k: rng.uniform(-1, 1, k))
    a = (b @ b.T + rng.uniform(0.05, 1.0) * sps.eye(n)).tocsr()
    return CsrMatrix.from_scipy(a)


def random_nonsymmetric_pd_matrix(n, density=0.1, seed=None) -> CsrMatrix:
    """B + s I with s just large enough that the symmetric part is SPD."""
    rng = _rng(seed)
    b = sps.random(n, n, density=density, random_state=rng, data_rvs=lambda k: rng.uniform(-1, 1, k))
    sym = 0.5 * (b + b.T).toarray()
    lam_min = np.linalg.eigvalsh(sym).min()
    s = max(0.0, -lam_min) + rng.uniform(0.01, 0.5)
    return CsrMatrix.from_scipy((b + s * sps.eye(n)).tocsr())


def random_general_matrix(n, density=0.1, seed=None, max_cond=1e4, min_pivot=1e-2, max_tries=200) -> CsrMatrix:
    """
    Nonsymmetric matrix with mixed-sign entries that is *not* forced to be
    diagonally dominant, resampled until its condition number is at most
    ``max_cond`` and every unpivoted LDU pivot is at least ``min_pivot``
    relative to the largest entry.
    """
    from .oracles import dense_ldu

    rng = _rng(seed)
    for _ in range(max_tries):
        rows, cols = _offdiag_pattern(n, density, rng)
        off = rng.uniform(-1.0, 1.0, size=rows.size)
        rowsum = np.bincount(rows, weights=np.abs(off), minlength=n)
        diag = rng.choice([-1.0, 1.0], size=n) * (rowsum * rng.uniform(0.3, 1.2, size=n) + 0.5)
        idx = np.arange(n)
        a = CsrMatrix.from_coo(
            n, np.concatenate([rows, idx]), np.concatenate([cols, idx]), np.concatenate([off, diag])
        )
        dense = a.to_dense()
        if np.linalg.cond(dense) > max_cond:
            continue
        _, piv, _ = dense_ldu(dense)
        if np.abs(piv).min() >= min_pivot * np.abs(dense).max():
            return a
    raise RuntimeError(f"no acceptable matrix after {max_tries} draws (n={n}, density={density})")


def convection_diffusion_3d(nx, ny, nz, peclet=0.0) -> CsrMatrix:
    """
    7-point upwind convection-diffusion operator on an nx*ny*nz grid,
    nonsymmetric for peclet > 0.  A cheap stand-in for reservoir-type
    problems when benchmarking.
    """
    def lap1d(m, c):
        main = np.full(m, 2.0 + c)
        return sps.diags([-1.0 - c, main, -1.0 * np.ones(m - 1)], [-1, 0, 1], shape=(m, m))

    ix, iy, iz = sps.eye(nx), sps.eye(ny), sps.eye(nz)
    a = (
        sps.kron(iz, sps.kron(iy, lap1d(nx, peclet)))
        + sps.kron(iz, sps.kron(lap1d(ny, 0.5 * peclet), ix))
        + sps.kron(lap1d(nz, 0.0), sps.kron(iy, ix))
    )
    return CsrMatrix.from_scipy(a.tocsr())
