"""Matrix Market coordinate files plus the plain one-value-per-line formats."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .sparse import CsrMatrix, Permutation

HEADER = "%%MatrixMarket"


class MatrixMarketError(ValueError):
    def __init__(self, path, lineno, msg):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {msg}")


def read_matrix_market(path) -> CsrMatrix:
    """
    Read a real ``coordinate`` Matrix Market file into a CsrMatrix.

    Symmetric files are expanded to full storage, duplicate coordinates are
    summed and explicit zeros dropped.  Pattern, complex and dense ``array``
    files are rejected.
    """
    path = Path(path)
    with open(path, "r") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError(path, 1, "empty file")

    tokens = lines[0].split()
    if len(tokens) != 5 or tokens[0] != HEADER:
        raise MatrixMarketError(path, 1, f"expected '{HEADER} matrix coordinate <field> <symmetry>' header")
    obj, fmt, field, symmetry = (t.lower() for t in tokens[1:])
    if obj != "matrix":
        raise MatrixMarketError(path, 1, f"unsupported object '{obj}'")
    if fmt != "coordinate":
        raise MatrixMarketError(path, 1, f"unsupported format '{fmt}' (only coordinate)")
    if field not in ("real", "integer", "double"):
        raise MatrixMarketError(path, 1, f"unsupported field '{field}' (pattern and complex are rejected)")
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(path, 1, f"unsupported symmetry '{symmetry}'")

    lineno = 1
    size = None
    for lineno in range(2, len(lines) + 1):
        s = lines[lineno - 1].strip()
        if not s or s.startswith("%"):
            continue
        size = s.split()
        break
    if size is None:
        raise MatrixMarketError(path, lineno, "missing size line")
    try:
        nrows, ncols, nnz = (int(t) for t in size)
    except ValueError:
        raise MatrixMarketError(path, lineno, f"bad size line: {' '.join(size)!r}") from None
    if nrows != ncols:
        raise MatrixMarketError(path, lineno, f"matrix is not square ({nrows} x {ncols})")
    n = nrows

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    k = 0
    for lineno in range(lineno + 1, len(lines) + 1):
        s = lines[lineno - 1].strip()
        if not s or s.startswith("%"):
            continue
        if k >= nnz:
            raise MatrixMarketError(path, lineno, f"more than the declared {nnz} entries")
        parts = s.split()
        if len(parts) != 3:
            raise MatrixMarketError(path, lineno, f"expected 'row col value', got {s!r}")
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise MatrixMarketError(path, lineno, f"cannot parse entry {s!r}") from None
        if not (1 <= i <= n and 1 <= j <= n):
            raise MatrixMarketError(path, lineno, f"index ({i}, {j}) outside 1..{n}")
        if symmetry == "symmetric" and j > i:
            raise MatrixMarketError(path, lineno, "symmetric file stores an upper-triangle entry")
        rows[k], cols[k], vals[k] = i - 1, j - 1, v
        k += 1
    if k != nnz:
        raise MatrixMarketError(path, len(lines), f"declared {nnz} entries, found {k}")

    if symmetry == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    return CsrMatrix.from_coo(n, rows, cols, vals)


def write_matrix_market(path, a, comment: str | None = None) -> None:
    """Write any square matrix (CsrMatrix or scipy sparse) as general coordinate."""
    if isinstance(a, CsrMatrix):
        n, triples = a.n, a.triples()
        nnz = a.nnz
    else:
        coo = a.tocoo()
        n = coo.shape[0]
        triples = zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist())
        nnz = coo.nnz
    with open(path, "w") as fh:
        fh.write(f"{HEADER} matrix coordinate real general\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{n} {n} {nnz}\n")
        for i, j, v in triples:
            fh.write(f"{i + 1} {j + 1} {v:.17g}\n")


def read_vector(path) -> np.ndarray:
    """One real per line; blank lines ignored."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            try:
                out.append(float(s))
            except ValueError:
                raise MatrixMarketError(path, lineno, f"cannot parse value {s!r}") from None
    return np.array(out, dtype=np.float64)


def write_vector(path, v) -> None:
    with open(path, "w") as fh:
        for x in np.asarray(v, dtype=np.float64).tolist():
            fh.write(f"{x:.17g}\n")


def read_permutation(path) -> Permutation:
    """Line k holds the 1-based new position of old index k."""
    vals = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            try:
                vals.append(int(s) - 1)
            except ValueError:
                raise MatrixMarketError(path, lineno, f"cannot parse index {s!r}") from None
    return Permutation(np.array(vals, dtype=np.int64))


def write_permutation(path, p: Permutation) -> None:
    with open(path, "w") as fh:
        for x in p.perm.tolist():
            fh.write(f"{x + 1}\n")
