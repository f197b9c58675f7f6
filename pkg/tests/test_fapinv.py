import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from precond_lab import generators as gen
from precond_lab.fapinv import (
    SAFE_PIVOT,
    DropRule,
    FactorizationError,
    apply_factored_inverse,
    ffinv_scalar,
    ffinv_vector,
    load_factors,
    save_factors,
)
from precond_lab.oracles import dense_inverse, dense_ldu
from precond_lab.sparse import CsrMatrix, DimensionError, build_column_index, comparison_matrix

from reference import fapinv_dense

seeds = st.integers(0, 2**32 - 1)


def assert_close(x, y, rel=1e-12):
    x, y = np.asarray(x), np.asarray(y)
    scale = max(1.0, np.abs(y).max(initial=0.0))
    assert np.abs(x - y).max(initial=0.0) <= rel * scale


def test_identity_gives_trivial_factors():
    for tau in (0.0, 0.3):
        W, Z, d = ffinv_vector(CsrMatrix.identity(4), rule=DropRule(tau)).dense()
        np.testing.assert_array_equal(W, np.eye(4))
        np.testing.assert_array_equal(Z, np.eye(4))
        np.testing.assert_array_equal(d, np.ones(4))


def test_two_by_two_by_hand(a2):
    f = ffinv_vector(a2)
    W, Z, d = f.dense()
    np.testing.assert_allclose(d, [0.5, 2.0 / 3.0], rtol=1e-15)
    np.testing.assert_allclose(W, [[1, 0], [0.5, 1]], rtol=1e-15)
    np.testing.assert_allclose(Z, [[1, 0.5], [0, 1]], rtol=1e-15)
    np.testing.assert_allclose(Z @ np.diag(d) @ W, dense_inverse(a2), atol=1e-15)
    assert f.breakdowns == 0


def test_two_by_two_trace(a2):
    f, tr = ffinv_scalar(a2, trace=True)
    assert tr.alpha == {(0, 1): -0.5}
    assert tr.beta == {(0, 1): -0.5}
    assert tr.u == {(0, 1): -1.0}
    assert tr.l == {(0, 1): -1.0}
    np.testing.assert_allclose(f.d, [0.5, 2.0 / 3.0])


def test_identity_trace_is_empty():
    _, tr = ffinv_scalar(CsrMatrix.identity(3), trace=True)
    assert not (tr.alpha or tr.beta or tr.l or tr.u)


@pytest.mark.parametrize("seed", range(4))
def test_exact_factorization(seed):
    a = gen.random_general_matrix(60, 0.15, seed)
    W, Z, d = ffinv_vector(a).dense()
    A = a.to_dense()
    assert np.abs(W @ A @ Z - np.diag(1 / d)).max() <= 1e-10 * np.abs(A).max()
    np.testing.assert_allclose(Z @ np.diag(d) @ W, dense_inverse(A), atol=1e-10)
    # pivots agree with plain Gaussian elimination
    _, piv, _ = dense_ldu(A)
    np.testing.assert_allclose(1 / d, piv, rtol=1e-10)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 40), tau=st.sampled_from([0.0, 0.05, 0.1, 0.3]))
def test_vector_matches_scalar(seed, n, tau):
    a = gen.random_general_matrix(n, 0.2, seed)
    cols = build_column_index(a)
    fv = ffinv_vector(a, cols, DropRule(tau))
    fs, _ = ffinv_scalar(a, cols, DropRule(tau))
    for x, y in zip(fv.dense(), fs.dense()):
        assert_close(x, y)
    assert fv.breakdowns == fs.breakdowns


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 30), tau=st.sampled_from([0.0, 0.05, 0.2]))
def test_vector_matches_dense_reference(seed, n, tau):
    a = gen.random_h_matrix(n, 0.25, seed)
    W, Z, d = ffinv_vector(a, rule=DropRule(tau)).dense()
    Wr, Zr, dr, _ = fapinv_dense(a.to_dense(), tau)
    assert_close(W, Wr)
    assert_close(Z, Zr)
    assert_close(d, dr)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, n=st.integers(1, 50), tau=st.floats(0.0, 2.0))
def test_factors_are_unit_triangular(seed, n, tau):
    f = ffinv_vector(gen.random_h_matrix(n, 0.2, seed), rule=DropRule(tau))
    assert np.all(f.w.col_idx < np.repeat(np.arange(n), np.diff(f.w.row_ptr)))
    assert np.all(f.z.col_idx < np.repeat(np.arange(n), np.diff(f.z.row_ptr)))
    W, Z, _ = f.dense()
    np.testing.assert_array_equal(np.diag(W), 1)
    np.testing.assert_array_equal(np.diag(Z), 1)
    # every surviving off-diagonal entry passed the drop test
    assert np.all(np.abs(f.w.values) >= tau) and np.all(np.abs(f.z.values) >= tau)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 60), tau=st.sampled_from([0.05, 0.1, 0.3]))
def test_m_matrix_dropping_is_monotone(seed, n, tau):
    a = gen.random_m_matrix(n, 0.15, seed)
    W, Z, d = ffinv_vector(a).dense()
    Wh, Zh, dh = ffinv_vector(a, rule=DropRule(tau)).dense()
    slack = 1e-12
    assert np.all(Wh >= -slack) and np.all(W - Wh >= -slack)
    assert np.all(Zh >= -slack) and np.all(Z - Zh >= -slack)
    # dropping can only raise the pivots 1/d
    assert np.all(1 / dh >= 1 / d * (1 - 1e-12)) and np.all(1 / d > 0)


def test_dropping_raises_pivot_small_case(a2):
    # direction of the pivot inequality, shown on a case small enough to do by hand
    _, _, d = ffinv_vector(a2).dense()
    _, _, dh = ffinv_vector(a2, rule=DropRule(0.6)).dense()
    np.testing.assert_allclose(1 / d, [2.0, 1.5])
    np.testing.assert_allclose(1 / dh, [2.0, 2.0])


@settings(max_examples=40, deadline=None)
@given(seed=seeds, n=st.integers(1, 60), tau=st.sampled_from([0.0, 0.1]))
def test_h_matrix_pivots(seed, n, tau):
    a = gen.random_h_matrix(n, 0.15, seed)
    f = ffinv_vector(a, rule=DropRule(tau))
    fc = ffinv_vector(comparison_matrix(a), rule=DropRule(tau))
    assert f.breakdowns == 0 and fc.breakdowns == 0
    np.testing.assert_array_equal(np.sign(f.d), np.sign(a.diagonal()))
    assert np.all(1 / fc.d > 0)
    assert np.all(np.abs(1 / f.d) >= (1 / fc.d) * (1 - 1e-12))


def test_drop_threshold_keeps_equality(a2):
    # beta = -1/2 equals tau and survives
    W, Z, _ = ffinv_vector(a2, rule=DropRule(0.5)).dense()
    assert W[1, 0] == 0.5 and Z[0, 1] == 0.5
    W, Z, _ = ffinv_vector(a2, rule=DropRule(0.5000001)).dense()
    assert W[1, 0] == 0 and Z[0, 1] == 0


@pytest.mark.parametrize("a00, sign", [(0.0, 1.0), (-1e-20, -1.0), (1e-17, 1.0)])
def test_pivot_safeguard(a00, sign):
    a = CsrMatrix.from_dense([[a00, 1.0], [1.0, 1.0]])
    for f in (ffinv_vector(a), ffinv_scalar(a)[0]):
        assert f.breakdowns == 1
        assert f.d[0] == sign / SAFE_PIVOT


@pytest.mark.parametrize("bad", [np.inf, np.nan])
def test_non_finite_raises_with_column(bad):
    a = CsrMatrix.from_dense([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, bad]])
    with pytest.raises(FactorizationError) as exc:
        ffinv_vector(a)
    assert exc.value.column == 2
    with pytest.raises(FactorizationError):
        ffinv_scalar(a)


def test_overflowing_coefficient_raises():
    a = CsrMatrix.from_dense([[1e-300, 1e300], [1e300, 1.0]])
    with pytest.raises(FactorizationError) as exc:
        ffinv_vector(a)
    assert exc.value.column == 1


def test_apply_factored_inverse(a2, rng):
    f = ffinv_vector(a2)
    np.testing.assert_allclose(apply_factored_inverse(f, [1.0, 1.0]), [1.0, 1.0])
    e = ffinv_vector(CsrMatrix.identity(3))
    v = rng.standard_normal(3)
    np.testing.assert_array_equal(e(v), v)
    a = gen.random_general_matrix(20, 0.2, 4)
    np.testing.assert_allclose(ffinv_vector(a).apply(a.matvec(np.ones(20))), np.ones(20), atol=1e-10)
    with pytest.raises(DimensionError):
        apply_factored_inverse(f, np.ones(3))


def test_empty_matrix():
    f = ffinv_vector(CsrMatrix.from_coo(0, [], [], []))
    assert f.n == 0 and f.d.size == 0


def test_save_load_round_trip(tmp_path):
    a = gen.random_h_matrix(25, 0.2, 1)
    f = ffinv_vector(a, rule=DropRule(0.05))
    save_factors(tmp_path / "f", f)
    g = load_factors(tmp_path / "f")
    for x, y in zip(f.dense(), g.dense()):
        np.testing.assert_array_equal(x, y)


def test_drop_rule_validation():
    for bad in (-0.1, np.inf, np.nan):
        with pytest.raises(ValueError):
            DropRule(bad)
