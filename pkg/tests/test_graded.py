import numpy as np
import pytest

from poleseq.arrangement import parse_arrangement
from poleseq.graded import (FormBasis, GradedRing, exterior_d_matrix,
                            expand_product, form_basis, monomial_basis,
                            monomial_count, omega_dim, partial)

B4 = parse_arrangement("1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1")


def test_monomial_basis_examples():
    assert monomial_basis(4, 0) == [(0, 0, 0, 0)]
    assert len(monomial_basis(4, 2)) == 10
    assert monomial_basis(3, 1) == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]


def test_form_basis_sizes():
    assert form_basis(4, 4, 4).size == 1
    assert form_basis(4, 2, 3).size == 24
    assert form_basis(4, 3, 2).size == 0
    # general count
    from math import comb
    for j in range(5):
        for k in range(8):
            expect = comb(4, j) * comb(k - j + 3, 3) if k >= j else 0
            assert form_basis(4, j, k).size == expect


def test_expand_product_boolean():
    gr = B4.graded_ring()
    assert gr.f == {(1, 1, 1, 1): 1}
    assert gr.partials[0] == {(0, 1, 1, 1): 1}


def test_wedge_df_single_term():
    gr = B4.graded_ring()
    # df^(dx2^dx3^dx4) = x2 x3 x4 dx1^dx2^dx3^dx4 with sign +
    gm = gr.wedge_df(3, 3)
    src = gm.source
    col = src.index((0, 0, 0, 0), (1, 2, 3))
    tgt = gm.target
    row = tgt.index((0, 1, 1, 1), (0, 1, 2, 3))
    ent = {(i, j): v for i, j, v in
           zip(gm.matrix.rows.tolist(), gm.matrix.cols.tolist(), gm.matrix.vals)}
    assert ent.get((row, col)) == 1


def test_wedge_top_degree_is_zero_map():
    gr = B4.graded_ring()
    gm = gr.wedge_df(4, 5)
    assert gm.matrix.nnz == 0 and gm.target.size == 0


def test_wedge_from_functions():
    gr = B4.graded_ring()
    gm = gr.wedge_df(0, 0)
    # 1 -> sum_i (prod_{l != i} x_l) dx_i: 4 nonzero entries
    assert gm.matrix.nnz == 4


def test_exterior_d_examples():
    # d(x1 dx2) = dx1 ^ dx2
    gm = exterior_d_matrix(4, 1, 2)
    src = gm.source
    c = src.index((1, 0, 0, 0), (1,))
    ent = {(i, j): v for i, j, v in
           zip(gm.matrix.rows.tolist(), gm.matrix.cols.tolist(), gm.matrix.vals)}
    r = gm.target.index((0, 0, 0, 0), (0, 1))
    assert ent.get((r, c)) == 1
    # d(x2 dx2) = 0
    c2 = src.index((0, 1, 0, 0), (1,))
    assert all(j != c2 for j in gm.matrix.cols.tolist())
    # d on constant-coefficient forms is 0
    gm0 = exterior_d_matrix(4, 2, 2)
    assert gm0.matrix.nnz == 0


@pytest.mark.parametrize("j,k", [(0, 0), (0, 2), (1, 3), (2, 4), (3, 3)])
def test_dd_zero_and_ww_zero(j, k):
    gr = B4.graded_ring()
    d = gr.d
    w1 = gr.wedge_df(j, k).matrix
    w2 = gr.wedge_df(j + 1, k + d).matrix
    # (df^)o(df^) = 0
    _assert_sparse_product_zero(w2, w1)
    d1 = gr.exterior_d(j, k).matrix
    d2 = gr.exterior_d(j + 1, k).matrix
    _assert_sparse_product_zero(d2, d1)


@pytest.mark.parametrize("j,k", [(0, 1), (1, 2), (2, 3)])
def test_anticommutation(j, k):
    # d(df ^ w) = -df ^ (dw): D_{j+1,k+d} W_{j,k} = - W_{j+1,k} D_{j,k}
    gr = B4.graded_ring()
    d = gr.d
    lhs = _sparse_to_dense(gr.exterior_d(j + 1, k + d).matrix) @ \
        _sparse_to_dense(gr.wedge_df(j, k).matrix)
    rhs = _sparse_to_dense(gr.wedge_df(j + 1, k).matrix) @ \
        _sparse_to_dense(gr.exterior_d(j, k).matrix)
    assert np.array_equal(lhs, -rhs)


def _sparse_to_dense(s):
    out = np.zeros(s.shape, dtype=np.int64)
    for i, j, v in zip(s.rows.tolist(), s.cols.tolist(), s.vals):
        out[i, j] += v
    return out


def _assert_sparse_product_zero(s2, s1):
    a2 = _sparse_to_dense(s2)
    a1 = _sparse_to_dense(s1)
    assert not np.any(a2 @ a1)


def test_degree_bookkeeping():
    gr = parse_arrangement("1 0 0 0\n0 1 0 0\n1 1 1 1\n0 0 1 0\n0 0 0 1").graded_ring()
    gm = gr.wedge_df(2, 5)
    assert gm.target.j == 3 and gm.target.k == 5 + gr.d
    ge = gr.exterior_d(2, 5)
    assert ge.target.j == 3 and ge.target.k == 5
