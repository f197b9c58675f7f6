"""
Restarted GMRES with right preconditioning.

Solves A M y = b and returns x = M y.  With right preconditioning the
least-squares residual tracked by the Givens rotations is the residual of
the *unpreconditioned* system, so the stopping test
||b - A x_k|| / ||b|| < rel_tol costs no extra products; one explicit
residual is computed at the end of every cycle to confirm it.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .sparse import CsrMatrix, DimensionError

# lucky breakdown: new Arnoldi vector is this small relative to A M v_k
HAPPY_BREAKDOWN = 1e-14


class SolverError(ArithmeticError):
    pass


@dataclass(frozen=True)
class GmresConfig:
    restart: int = 50
    max_iters: int = 10_000
    rel_tol: float = 1e-10

    def __post_init__(self):
        if self.restart < 1:
            raise ValueError("restart must be >= 1")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")


@dataclass(frozen=True)
class Preconditioner:
    """``kind`` is 'none', 'iluff' or 'fapinv'; ``factors`` must provide ``apply``."""

    kind: str = "none"
    factors: object = None

    def __post_init__(self):
        if self.kind not in ("none", "iluff", "fapinv"):
            raise ValueError(f"unknown preconditioner kind {self.kind!r}")
        if self.kind != "none" and self.factors is None:
            raise ValueError(f"preconditioner {self.kind!r} needs factors")

    @property
    def n(self):
        return None if self.factors is None else self.factors.n

    def apply(self, v):
        if self.factors is None:
            return v
        return self.factors.apply(v)

    @property
    def breakdown_count(self) -> int:
        if self.factors is None:
            return 0
        return getattr(self.factors, "breakdown_count", getattr(self.factors, "breakdowns", 0))


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    residual_history: list = field(default_factory=list)
    final_relres: float = math.nan
    setup_seconds: float = 0.0
    solve_seconds: float = 0.0
    density: float | None = None
    breakdown_count: int = 0
    error: str | None = None

    @property
    def total_seconds(self) -> float:
        return self.setup_seconds + self.solve_seconds

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SolveReport":
        data = dict(data)
        data["residual_history"] = list(data.get("residual_history", []))
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SolveReport":
        return cls.from_dict(json.loads(text))

    def write_history(self, path) -> None:
        write_history_csv(path, self.residual_history)


def write_history_csv(path, history) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["iter", "relres"])
        for k, r in enumerate(history):
            out.writerow([k, repr(float(r))])


def read_history_csv(path) -> list:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [float(r["relres"]) for r in rows]


def make_rhs_ones_solution(a: CsrMatrix) -> np.ndarray:
    """b = A e with e = (1, ..., 1): the exact solution is known to be e."""
    return a.matvec(np.ones(a.n))


def gmres_right(a: CsrMatrix, b, m: Preconditioner | None = None, cfg: GmresConfig = GmresConfig()):
    """
    GMRES(cfg.restart) on A M y = b from a zero initial guess.

    Iterations are inner iterations summed over restarts.  The history holds
    ||r_k|| / ||r_0|| for k = 0..iterations (entry 0 is 1.0).  Returns
    ``(x, SolveReport)``; ``converged`` is only set after an explicit
    residual check.
    """
    m = m if m is not None else Preconditioner()
    n = a.n
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (n,):
        raise DimensionError(f"right-hand side of length {b.shape} for n={n}")
    if m.n is not None and m.n != n:
        raise DimensionError(f"preconditioner of size {m.n} for n={n}")
    if not np.all(np.isfinite(b)):
        raise SolverError("right-hand side contains NaN or Inf")

    t0 = time.perf_counter()
    x = np.zeros(n)
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        rep = SolveReport(True, 0, [0.0], 0.0, breakdown_count=m.breakdown_count)
        rep.solve_seconds = time.perf_counter() - t0
        return x, rep

    restart = cfg.restart
    history = [1.0]
    its = 0
    r = b.copy()
    beta = bnorm
    converged = False
    relres = 1.0

    while its < cfg.max_iters:
        V = np.empty((restart + 1, n))
        H = np.zeros((restart + 1, restart))
        cs = np.zeros(restart)
        sn = np.zeros(restart)
        g = np.zeros(restart + 1)
        g[0] = beta
        V[0] = r / beta

        k_done = 0
        for k in range(restart):
            if its >= cfg.max_iters:
                break
            w = a.matvec(m.apply(V[k]))
            w_norm0 = np.linalg.norm(w)
            for i in range(k + 1):
                H[i, k] = np.dot(w, V[i])
                w -= H[i, k] * V[i]
            h_next = np.linalg.norm(w)
            H[k + 1, k] = h_next
            if not (np.all(np.isfinite(H[: k + 2, k])) and math.isfinite(w_norm0)):
                raise SolverError(f"non-finite value in Arnoldi step at iteration {its + 1}")
            lucky = h_next <= HAPPY_BREAKDOWN * w_norm0
            if not lucky:
                V[k + 1] = w / h_next

            for i in range(k):
                hi, hi1 = H[i, k], H[i + 1, k]
                H[i, k] = cs[i] * hi + sn[i] * hi1
                H[i + 1, k] = -sn[i] * hi + cs[i] * hi1
            denom = math.hypot(H[k, k], H[k + 1, k])
            if denom == 0.0:
                raise SolverError(f"A M is singular on the Krylov space (iteration {its + 1})")
            cs[k] = H[k, k] / denom
            sn[k] = H[k + 1, k] / denom
            H[k, k] = denom
            H[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]

            its += 1
            k_done = k + 1
            relres = float(abs(g[k + 1]) / bnorm)
            history.append(relres)
            if relres < cfg.rel_tol or lucky:
                break

        if k_done == 0:
            break
        y = solve_triangular(H[:k_done, :k_done], g[:k_done], lower=False, check_finite=False)
        x += m.apply(V[:k_done].T @ y)
        r = b - a.matvec(x)
        beta = float(np.linalg.norm(r))
        relres = beta / bnorm
        if not math.isfinite(relres):
            raise SolverError("non-finite residual")
        if relres < cfg.rel_tol:
            converged = True
            break

    rep = SolveReport(
        converged=converged,
        iterations=its,
        residual_history=history,
        final_relres=relres,
        breakdown_count=m.breakdown_count,
    )
    rep.solve_seconds = time.perf_counter() - t0
    return x, rep
