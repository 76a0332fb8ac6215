import numpy as np
import pytest

from poleseq import modp
from poleseq.modp import (PLUFactor, SparseInt, fast_mod, kernel_exact, plu,
                          rat_reconstruct, solve_exact, verify_zero)


def random_sparse(rng, m, n, density=0.3, lo=-50, hi=50):
    ent = {}
    for i in range(m):
        for j in range(n):
            if rng.random() < density:
                v = int(rng.integers(lo, hi + 1))
                if v:
                    ent[(i, j)] = v
    return SparseInt.from_entries(m, n, ent)


def test_fast_mod_matches_python_mod():
    rng = np.random.default_rng(1)
    p = modp.PRIME_POOL[0]
    a = rng.integers(-2 ** 52, 2 ** 52, size=(200, 7)).astype(np.float64)
    b = a.copy()
    fast_mod(b, p)
    expect = np.vectorize(lambda x: int(x) % p)(a.astype(object)).astype(np.float64)
    assert np.array_equal(b, expect)


@pytest.mark.parametrize("m,n", [(8, 5), (5, 8), (20, 20), (1, 6), (6, 1)])
def test_plu_rank_against_fraction_elimination(m, n):
    rng = np.random.default_rng(m * 31 + n)
    s = random_sparse(rng, m, n, density=0.5, lo=-4, hi=4)
    from poleseq.linalg import QMatrix, rank
    q = QMatrix(m, n, {(i, j): v for i, j, v in
                       zip(s.rows.tolist(), s.cols.tolist(), s.vals)})
    exact = rank(q)
    p = modp.PRIME_POOL[3]
    assert plu(s.dense_mod(p), p).rank == exact


def test_nullspace_annihilates_and_has_right_count():
    rng = np.random.default_rng(7)
    p = modp.PRIME_POOL[1]
    for trial in range(12):
        m, n = int(rng.integers(3, 25)), int(rng.integers(3, 25))
        s = random_sparse(rng, m, n, density=0.4, lo=-9, hi=9)
        f = plu(s.dense_mod(p), p)
        k = f.nullspace()
        assert k.shape == (n, n - f.rank)
        if k.size:
            prod = s.matmat_mod(k, p)
            assert not np.any(prod)


def test_solve_and_membership():
    rng = np.random.default_rng(11)
    p = modp.PRIME_POOL[2]
    s = random_sparse(rng, 18, 11, density=0.5)
    x = rng.integers(0, p, size=(11, 3)).astype(np.float64)
    b = s.matmat_mod(x, p)
    f = plu(s.dense_mod(p), p)
    assert f.in_colspan(b)
    sol = f.solve(b)
    assert sol is not None
    assert np.array_equal(s.matmat_mod(sol, p), b)
    # a vector outside the span (extend with a unit row beyond the rank)
    if f.rank < 18:
        bad = np.zeros((18, 1))
        bad[:, 0] = rng.integers(0, p, size=18)
        # not a proof it's outside, but with random entries over a big prime
        # the residual test must at least be consistent with solve()
        assert (f.solve(bad) is not None) == f.in_colspan(bad)


def test_blocked_factor_matches_small_panels():
    rng = np.random.default_rng(3)
    p = modp.PRIME_POOL[0]
    s = random_sparse(rng, 40, 33, density=0.3)
    f1 = PLUFactor(s.dense_mod(p), p, panel=4)
    f2 = PLUFactor(s.dense_mod(p), p, panel=64)
    assert f1.rank == f2.rank
    assert f1.piv_cols == f2.piv_cols


def test_rat_reconstruct_roundtrip():
    from fractions import Fraction
    m = 1
    for p in modp.PRIME_POOL[:8]:
        m *= p
    for num, den in [(3, 7), (-22, 5), (0, 1), (123456, 789)]:
        fr = Fraction(num, den)
        u = (fr.numerator * pow(fr.denominator, -1, m)) % m
        got = rat_reconstruct(u, m)
        assert got == (fr.numerator, fr.denominator)


def test_kernel_exact_certifies():
    rng = np.random.default_rng(5)
    for trial in range(6):
        m, n = int(rng.integers(4, 14)), int(rng.integers(4, 14))
        s = random_sparse(rng, m, n, density=0.45, lo=-30, hi=30)
        cols, nullity = kernel_exact(s, seed=trial)
        assert cols.shape == (n, nullity)
        assert verify_zero(s, cols)
        from poleseq.linalg import QMatrix, rank
        q = QMatrix(m, n, {(i, j): v for i, j, v in
                           zip(s.rows.tolist(), s.cols.tolist(), s.vals)})
        assert nullity == n - rank(q)


def test_solve_exact_roundtrip():
    rng = np.random.default_rng(9)
    s = random_sparse(rng, 12, 9, density=0.6, lo=-20, hi=20)
    xs = np.array([[int(rng.integers(-40, 41)) for _ in range(2)]
                   for _ in range(9)], dtype=object)
    rhs = np.empty((12, 2), dtype=object)
    for j in range(2):
        col = s.matvec_exact([xs[i, j] for i in range(9)])
        for i in range(12):
            rhs[i, j] = int(col[i])
    got = solve_exact(s, rhs, seed=2)
    assert got is not None
    cols, dens = got
    for j in range(2):
        lhs = s.matvec_exact([cols[i, j] for i in range(9)])
        for i in range(12):
            assert lhs[i] == dens[j] * rhs[i, j]
