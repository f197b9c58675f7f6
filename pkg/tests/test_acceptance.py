"""
Acceptance suite.  Each criterion prints one PASS/FAIL line to the terminal
(visible without -s) and fails the test on FAIL.

Criterion 6 needs the Harwell-Boeing matrices fs_183_1, fs_183_6 and
sherman3 as Matrix Market files in $PRECOND_LAB_MATRIX_DIR (default
tests/data/matrices).
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest

from precond_lab import generators as gen
from precond_lab.fapinv import DropRule, ffinv_scalar, ffinv_vector
from precond_lab.iluff import PivotMode, density, iluff_factorize
from precond_lab.krylov import GmresConfig, Preconditioner, gmres_right, make_rhs_ones_solution
from precond_lab.mmio import read_matrix_market
from precond_lab.oracles import is_h_matrix, is_m_matrix, is_positive_definite
from precond_lab.sparse import build_column_index, comparison_matrix

MATRIX_DIR = Path(os.environ.get("PRECOND_LAB_MATRIX_DIR", Path(__file__).parent / "data" / "matrices"))


@pytest.fixture
def verdict(capsys):
    def report(name, ok, detail=""):
        with capsys.disabled():
            print(f"\n[acceptance] {name}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"{name}: {detail}"
    return report


@pytest.fixture(scope="module")
def general_suite():
    """50 well-conditioned random matrices, n in 5..100, density 5-30%."""
    rng = np.random.default_rng(1000)
    suite = []
    for k in range(50):
        n = int(rng.integers(5, 101))
        dens = float(rng.uniform(0.05, 0.30))
        suite.append(gen.random_general_matrix(n, dens, seed=rng))
    for a in suite:
        assert np.linalg.cond(a.to_dense()) <= 1e4
    return suite


def test_c1_exact_factorization(general_suite, verdict):
    t0 = time.perf_counter()
    worst_inv = worst_ldu = 0.0
    for a in general_suite:
        A = a.to_dense()
        cols = build_column_index(a)
        W, Z, d = ffinv_vector(a, cols).dense()
        L, U, dl = iluff_factorize(a, cols).dense()
        scale = np.abs(A).max()
        worst_inv = max(worst_inv, np.abs(W @ A @ Z - np.diag(1 / d)).max() / scale)
        worst_ldu = max(worst_ldu, np.abs(L @ np.diag(1 / dl) @ U - A).max() / scale)
    elapsed = time.perf_counter() - t0
    ok = worst_inv <= 1e-10 and worst_ldu <= 1e-10 and elapsed < 10
    verdict("C1 exact factorization", ok,
            f"max|WAZ-D^-1|/|A| = {worst_inv:.2e}, max|LD^-1U-A|/|A| = {worst_ldu:.2e}, {elapsed:.2f} s")


def test_c2_vector_equals_scalar(general_suite, verdict):
    worst = 0.0
    for a in general_suite:
        cols = build_column_index(a)
        for tau in (0.0, 0.05, 0.1):
            fv = ffinv_vector(a, cols, DropRule(tau))
            fs, _ = ffinv_scalar(a, cols, DropRule(tau))
            for x, y in zip(fv.dense(), fs.dense()):
                worst = max(worst, np.abs(x - y).max() / max(1.0, np.abs(y).max()))
    verdict("C2 vector == scalar", worst <= 1e-12, f"max relative difference {worst:.2e}")


def test_c3_inverse_relations(general_suite, verdict):
    worst = 0.0
    for a in general_suite:
        n = a.n
        cols = build_column_index(a)
        W, Z, _ = ffinv_vector(a, cols).dense()
        L, U, _ = iluff_factorize(a, cols).dense()
        err = max(np.abs(L @ W - np.eye(n)).max(), np.abs(Z @ U - np.eye(n)).max())
        worst = max(worst, err / (1e-10 * n))
    verdict("C3 LW = I, ZU = I", worst <= 1.0, f"worst error / (1e-10 n) = {worst:.2e}")


def _h_suite():
    rng = np.random.default_rng(2000)
    ms, hs = [], []
    for k in range(100):
        n = int(rng.integers(5, 201))
        dens = float(rng.uniform(0.01, 0.2))
        margin = (1e-3, 0.5) if k % 4 == 0 else (0.05, 0.5)
        ms.append(gen.random_m_matrix(n, dens, rng, margin))
        hs.append(gen.random_h_matrix(n, dens, rng, margin))
    return ms, hs


def test_c4_h_matrix_existence(verdict):
    t0 = time.perf_counter()
    ms, hs = _h_suite()
    problems = []
    for a in ms:
        assert is_m_matrix(a)
    for a in hs:
        assert is_h_matrix(a)
    for idx, a in enumerate(ms + hs):
        sign = np.sign(a.diagonal())
        cols = build_column_index(a)
        ac = comparison_matrix(a)
        for tau in (0.0, 0.1):
            f = ffinv_vector(a, cols, DropRule(tau))
            fc = ffinv_vector(ac, rule=DropRule(tau))
            il = iluff_factorize(a, cols, DropRule(tau))
            if f.breakdowns or fc.breakdowns or il.breakdown_count:
                problems.append((idx, tau, "safeguard"))
            if not (np.array_equal(np.sign(f.d), sign) and np.array_equal(np.sign(il.d), sign)):
                problems.append((idx, tau, "sign"))
            inv_c = 1 / fc.d
            if not (np.all(inv_c > 0) and np.all(np.abs(1 / f.d) >= inv_c * (1 - 1e-12))):
                problems.append((idx, tau, "comparison"))
    for idx, a in enumerate(ms):
        cols = build_column_index(a)
        W, Z, _ = ffinv_vector(a, cols).dense()
        Wh, Zh, _ = ffinv_vector(a, cols, DropRule(0.1)).dense()
        slack = 1e-12
        if not (np.all(Wh >= -slack) and np.all(W - Wh >= -slack)
                and np.all(Zh >= -slack) and np.all(Z - Zh >= -slack)):
            problems.append((idx, 0.1, "dominance"))
    elapsed = time.perf_counter() - t0
    verdict("C4 H-matrix existence", not problems and elapsed < 60,
            f"{len(problems)} violations {problems[:5]}, {elapsed:.2f} s")


def test_c5_positive_definite_mode(verdict):
    rng = np.random.default_rng(3000)
    bad = []
    for k in range(200):
        n = int(rng.integers(5, 101))
        dens = float(rng.uniform(0.02, 0.2))
        a = gen.random_spd_matrix(n, dens, rng) if k < 100 else gen.random_nonsymmetric_pd_matrix(n, dens, rng)
        assert is_positive_definite(a)
        cols = build_column_index(a)
        for tau in (0.0, 0.1, 0.5):
            f = iluff_factorize(a, cols, DropRule(tau), PivotMode.POSITIVE_DEFINITE)
            if not np.all(f.d > 0) or f.breakdown_count:
                bad.append((k, tau))
    verdict("C5 positive-definite pivots", not bad, f"{len(bad)} failing (matrix, tau) pairs {bad[:5]}")


def _load_or_fail(name, verdict):
    path = MATRIX_DIR / f"{name}.mtx"
    if not path.exists():
        verdict(f"C6 {name}", False, f"matrix file {path} not found")
    return read_matrix_market(path)


def _solve(a, precond, tau=0.1):
    b = make_rhs_ones_solution(a)
    m = Preconditioner()
    if precond == "iluff":
        m = Preconditioner("iluff", iluff_factorize(a, rule=DropRule(tau)))
    x, rep = gmres_right(a, b, m, GmresConfig(restart=50, max_iters=10_000))
    if m.factors is not None:
        rep.density = density(m.factors, a)
    return x, rep


@pytest.mark.slow
@pytest.mark.parametrize("name", ["fs_183_1", "fs_183_6"])
def test_c6_fs_183(name, verdict):
    a = _load_or_fail(name, verdict)
    _, plain = _solve(a, "none")
    _, pre = _solve(a, "iluff")
    ok = (plain.converged and pre.converged and pre.iterations <= 20
          and 0.3 <= pre.density <= 0.9 and pre.iterations < plain.iterations)
    verdict(f"C6 {name}", ok,
            f"none: its={plain.iterations} conv={plain.converged}; iluff(0.1): its={pre.iterations} "
            f"conv={pre.converged} density={pre.density:.3f}")


@pytest.mark.slow
def test_c6_sherman3(verdict):
    a = _load_or_fail("sherman3", verdict)
    _, plain = _solve(a, "none")
    _, pre = _solve(a, "iluff")
    ok = not plain.converged and pre.converged and pre.iterations <= 5000
    verdict("C6 sherman3", ok,
            f"none: its={plain.iterations} conv={plain.converged}; iluff(0.1): its={pre.iterations} "
            f"conv={pre.converged} density={pre.density:.3f}")


def test_c7_tau_trend(verdict):
    a = gen.random_h_matrix(500, 0.02, seed=7)
    assert is_h_matrix(a, limit=500)
    its = {}
    for tau in (0.1, 0.01):
        _, rep = _solve(a, "iluff", tau)
        assert rep.converged
        its[tau] = rep.iterations
    _, plain = _solve(a, "none")
    verdict("C7 tau trend", its[0.01] <= its[0.1],
            f"its(0.1) = {its[0.1]}, its(0.01) = {its[0.01]} (unpreconditioned {plain.iterations})")


def test_c8_solver_correctness(general_suite, verdict):
    worst_err = worst_gap = 0.0
    runs = 0
    for a in general_suite:
        b = make_rhs_ones_solution(a)
        for m in (
            Preconditioner(),
            Preconditioner("iluff", iluff_factorize(a, rule=DropRule(0.1))),
            Preconditioner("fapinv", ffinv_vector(a, rule=DropRule(0.1))),
        ):
            x, rep = gmres_right(a, b, m, GmresConfig(restart=50, max_iters=10_000))
            if not rep.converged:
                continue
            runs += 1
            worst_err = max(worst_err, np.abs(x - 1.0).max())
            explicit = np.linalg.norm(b - a.matvec(x)) / np.linalg.norm(b)
            worst_gap = max(worst_gap, abs(rep.final_relres - explicit))
    ok = runs > 0 and worst_err <= 1e-5 and worst_gap <= 1e-8
    verdict("C8 solver correctness", ok,
            f"{runs} converged runs, max|x-e| = {worst_err:.2e}, max relres gap = {worst_gap:.2e}")
