"""
Benchmark harness: load a matrix, optionally permute it, build a
preconditioner, run right-preconditioned GMRES and write the reports.

    precond-lab --matrix fs_183_1.mtx --precond iluff --tau 0.1 \\
        --report run.json --history run.csv
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .fapinv import DropRule, ffinv_vector
from .iluff import PivotMode, density, iluff_factorize
from .krylov import GmresConfig, Preconditioner, SolveReport, gmres_right, make_rhs_ones_solution
from .mmio import read_matrix_market, read_permutation, read_vector
from .sparse import CsrMatrix, DimensionError, apply_permutation, build_column_index

log = logging.getLogger("precond_lab")

SWEEP_COLUMNS = ["tau", "density", "Ptime", "It-Time", "Ttime", "Its", "converged", "relres", "breakdowns", "error"]


@dataclass(frozen=True)
class RunConfig:
    matrix_path: str
    perm_path: str | None = None
    precond: str = "iluff"
    tau: float = 0.1
    pivot_mode: str = "general"
    restart: int = 50
    max_iters: int = 10_000
    rel_tol: float = 1e-10
    rhs: str = "ones"
    report_path: str | None = None
    history_path: str | None = None

    def __post_init__(self):
        if self.precond not in ("none", "iluff", "fapinv"):
            raise ValueError(f"unknown preconditioner {self.precond!r}")
        DropRule(self.tau)
        PivotMode.parse(self.pivot_mode)

    @property
    def gmres(self) -> GmresConfig:
        return GmresConfig(self.restart, self.max_iters, self.rel_tol)


def load_problem(cfg: RunConfig):
    """Matrix (permuted if requested) and right-hand side, in that order."""
    a = read_matrix_market(cfg.matrix_path)
    perm = None
    if cfg.perm_path:
        perm = read_permutation(cfg.perm_path)
        a = apply_permutation(a, perm)
    if cfg.rhs == "ones":
        b = make_rhs_ones_solution(a)
    else:
        b = read_vector(cfg.rhs)
        if b.shape != (a.n,):
            raise DimensionError(f"right-hand side has {b.size} values, matrix has n={a.n}")
        if perm is not None:
            b = perm.apply_to_vector(b)
    return a, b


def build_preconditioner(a: CsrMatrix, cfg: RunConfig) -> Preconditioner:
    if cfg.precond == "none":
        return Preconditioner()
    cols = build_column_index(a)
    rule = DropRule(cfg.tau)
    if cfg.precond == "iluff":
        return Preconditioner("iluff", iluff_factorize(a, cols, rule, PivotMode.parse(cfg.pivot_mode)))
    return Preconditioner("fapinv", ffinv_vector(a, cols, rule))


def _solve(cfg: RunConfig, a: CsrMatrix, b: np.ndarray):
    t0 = time.perf_counter()
    m = build_preconditioner(a, cfg)
    setup = time.perf_counter() - t0
    x, rep = gmres_right(a, b, m, cfg.gmres)
    rep.setup_seconds = setup
    if m.factors is not None:
        rep.density = density(m.factors, a)
    return x, rep


def build_record(cfg: RunConfig, a: CsrMatrix, rep: SolveReport, x=None) -> dict:
    """The per-run JSON report.  Times are rounded to milliseconds and Ttime is their sum."""
    ptime = round(rep.setup_seconds, 3)
    itime = round(rep.solve_seconds, 3)
    rec = {
        "matrix": str(cfg.matrix_path),
        "n": a.n,
        "nnz": a.nnz,
        "precond": cfg.precond,
        "tau": cfg.tau if cfg.precond != "none" else None,
        "pivot": PivotMode.parse(cfg.pivot_mode).value,
        "density": rep.density,
        "Ptime": ptime,
        "It-Time": itime,
        "Ttime": ptime + itime,
        "Its": rep.iterations,
        "converged": rep.converged,
        "relres": rep.final_relres,
        "breakdowns": rep.breakdown_count,
        "error": rep.error,
    }
    if x is not None and cfg.rhs == "ones":
        rec["max_error"] = float(np.abs(x - 1.0).max()) if a.n else 0.0
    return rec


def execute(cfg: RunConfig, problem=None):
    """Like ``run_experiment`` but also returns the JSON record."""
    a, b = problem if problem is not None else load_problem(cfg)
    x, rep = _solve(cfg, a, b)
    log.info("%s: precond=%s tau=%s its=%d converged=%s", cfg.matrix_path, cfg.precond, cfg.tau,
             rep.iterations, rep.converged)
    rec = build_record(cfg, a, rep, x)
    if cfg.report_path:
        Path(cfg.report_path).write_text(json.dumps(rec, indent=2) + "\n")
    if cfg.history_path:
        rep.write_history(cfg.history_path)
    return rep, rec


def run_experiment(cfg: RunConfig, problem=None) -> SolveReport:
    """
    read -> permute -> b -> preconditioner (timed) -> GMRES (timed), then
    write the JSON report and the residual history CSV when paths are set.
    ``problem`` may carry an already loaded ``(a, b)`` pair.
    """
    return execute(cfg, problem)[0]


def _history_for_tau(path, tau):
    if not path:
        return None
    p = Path(path)
    return str(p.with_name(f"{p.stem}_tau{tau:g}{p.suffix}"))


def sweep_row(tau, rep: SolveReport) -> dict:
    ptime = round(rep.setup_seconds, 3)
    itime = round(rep.solve_seconds, 3)
    return {
        "tau": tau,
        "density": "" if rep.density is None else f"{rep.density:.4f}",
        "Ptime": ptime,
        "It-Time": itime,
        "Ttime": ptime + itime,
        "Its": rep.iterations,
        "converged": rep.converged,
        "relres": rep.final_relres,
        "breakdowns": rep.breakdown_count,
        "error": rep.error or "",
    }


def run_tau_sweep(cfg: RunConfig, taus, table_path=None) -> list:
    """
    One run per tau on a single loaded problem.  A failing run is recorded
    as a non-converged report with ``error`` set and the sweep goes on.
    The combined table (one row per tau) goes to ``table_path`` as CSV.
    """
    taus = list(taus)
    if not taus:
        raise ValueError("empty tau list")
    problem = load_problem(cfg)
    reports = []
    for tau in taus:
        sub = replace(cfg, tau=tau, report_path=None, history_path=_history_for_tau(cfg.history_path, tau))
        try:
            rep = run_experiment(sub, problem)
        except (ArithmeticError, ValueError) as exc:
            rep = SolveReport(converged=False, iterations=0, error=f"{type(exc).__name__}: {exc}")
        reports.append(rep)
    if table_path:
        with open(table_path, "w", newline="") as fh:
            write_sweep_table(fh, taus, reports)
    return reports


def write_sweep_table(fh, taus, reports):
    out = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
    out.writeheader()
    for tau, rep in zip(taus, reports):
        out.writerow(sweep_row(tau, rep))


def _parse_taus(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tau list {text!r}") from None


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="precond-lab", description=__doc__.split("\n\n")[0])
    p.add_argument("--matrix", required=True, help="Matrix Market coordinate file")
    p.add_argument("--precond", choices=["none", "iluff", "fapinv"], default="iluff")
    p.add_argument("--tau", type=float, default=0.1, help="absolute drop tolerance")
    p.add_argument("--pivot", choices=["general", "pd"], default="general")
    p.add_argument("--restart", type=int, default=50)
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--rhs", default="ones", help="'ones' for b = A e, or a file with one value per line")
    p.add_argument("--perm", help="permutation file, line k = 1-based new position of row k")
    p.add_argument("--report", help="JSON report (CSV table with --sweep); stdout if omitted")
    p.add_argument("--history", help="residual history CSV (iter,relres)")
    p.add_argument("--sweep", type=_parse_taus, help="comma separated taus, e.g. 0.1,0.05,0.01")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = RunConfig(
            matrix_path=args.matrix,
            perm_path=args.perm,
            precond=args.precond,
            tau=args.tau,
            pivot_mode=args.pivot,
            restart=args.restart,
            max_iters=args.max_iters,
            rel_tol=args.tol,
            rhs=args.rhs,
            report_path=None if args.sweep else args.report,
            history_path=args.history,
        )
        if args.sweep:
            reports = run_tau_sweep(cfg, args.sweep, table_path=args.report)
            if not args.report:
                write_sweep_table(sys.stdout, args.sweep, reports)
            return 0 if all(r.converged for r in reports) else 1

        rep, rec = execute(cfg)
        if not args.report:
            print(json.dumps(rec, indent=2))
        return 0 if rep.converged else 1
    except (ArithmeticError, ValueError, OSError) as exc:
        err = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        if getattr(exc, "column", None) is not None:
            err["error"]["column"] = exc.column
        text = json.dumps(err)
        if args.report:
            Path(args.report).write_text(text + "\n")
        print(text, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
