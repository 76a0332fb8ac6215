"""Monomial and differential-form bases and the matrices between graded pieces.

Grading convention, fixed once: deg x_i = deg dx_i = 1, so Omega^j is free
with generators in degree j, and derivations carry deg d/dx_i = -1.  The
wedge-by-df map raises internal degree by exactly d; the exterior derivative
preserves it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .linalg import QMatrix
from .modp import SparseInt


@lru_cache(maxsize=None)
def monomials(n: int, k: int):
    """All exponent tuples of degree k in n variables, deterministic order
    (descending lexicographic, so x1^k comes first)."""
    if k < 0:
        return ()
    if n == 1:
        return ((k,),)
    out = []
    for a in range(k, -1, -1):
        for rest in monomials(n - 1, k - a):
            out.append((a,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(n: int, k: int):
    return {m: i for i, m in enumerate(monomials(n, k))}


def monomial_count(n: int, k: int) -> int:
    return comb(k + n - 1, n - 1) if k >= 0 else 0


@lru_cache(maxsize=None)
def mult_shift(n: int, k: int, i: int):
    """Index array: position of x_i * (monomial of degree k) inside degree k+1."""
    idx = monomial_index(n, k + 1)
    out = np.empty(monomial_count(n, k), dtype=np.int64)
    for pos, m in enumerate(monomials(n, k)):
        m2 = list(m)
        m2[i] += 1
        out[pos] = idx[tuple(m2)]
    return out


@lru_cache(maxsize=None)
def subsets(n: int, j: int):
    return tuple(combinations(range(n), j))


@lru_cache(maxsize=None)
def subset_index(n: int, j: int):
    return {s: i for i, s in enumerate(subsets(n, j))}


@dataclass(frozen=True)
class FormBasis:
    """Ordered basis of Omega^j_k: pairs (monomial of degree k-j, j-subset).

    Ordering is subset lex-major, then monomial order; index of (S, mu) is
    subset_pos * n_monomials + monomial_pos.
    """
    n: int
    j: int
    k: int

    @property
    def mono_degree(self):
        return self.k - self.j

    @property
    def size(self):
        if self.j < 0 or self.j > self.n or self.k < self.j:
            return 0
        return comb(self.n, self.j) * monomial_count(self.n, self.k - self.j)

    def elements(self):
        out = []
        for s in subsets(self.n, self.j):
            for m in monomials(self.n, self.mono_degree):
                out.append((m, s))
        return out

    def index(self, mono, sset):
        nm = monomial_count(self.n, self.mono_degree)
        return subset_index(self.n, self.j)[sset] * nm + monomial_index(self.n, self.mono_degree)[mono]


def form_basis(n: int, j: int, k: int) -> FormBasis:
    return FormBasis(n, j, k)


def omega_dim(n: int, j: int, k: int) -> int:
    return FormBasis(n, j, k).size


@dataclass
class GradedMap:
    """A matrix between graded form pieces, kept as exact integer sparse data."""
    source: FormBasis
    target: FormBasis
    matrix: SparseInt

    def qmatrix(self) -> QMatrix:
        ent = {}
        for i, j, v in zip(self.matrix.rows.tolist(), self.matrix.cols.tolist(),
                           self.matrix.vals):
            ent[(i, j)] = v
        return QMatrix(self.matrix.shape[0], self.matrix.shape[1], ent)


# ---------------------------------------------------------------------------
# polynomials as {exponent tuple: int}

def poly_mul_linear(poly: dict, form, n):
    """Multiply an integer polynomial dict by a linear form (coeff list)."""
    out = {}
    for m, c in poly.items():
        for i, a in enumerate(form):
            if a:
                m2 = list(m)
                m2[i] += 1
                key = tuple(m2)
                out[key] = out.get(key, 0) + c * a
    return {m: c for m, c in out.items() if c}


def expand_product(forms, n):
    """Exact expansion of f = prod of integer linear forms."""
    poly = {tuple([0] * n): 1}
    for form in forms:
        poly = poly_mul_linear(poly, form, n)
    return poly


def partial(poly: dict, i: int):
    out = {}
    for m, c in poly.items():
        if m[i]:
            m2 = list(m)
            m2[i] -= 1
            out[tuple(m2)] = c * m[i]
    return out


def insertion_sign(sset, i):
    """Sign of dx_i ^ dx_S -> dx_{S u i}: (-1)^(number of s in S with s < i)."""
    c = sum(1 for s in sset if s < i)
    return -1 if c & 1 else 1


@lru_cache(maxsize=None)
def _shift_by_monomial(n, k, mono):
    """Index array: position of x^mono * (monomial of degree k) in degree
    k + |mono|, computed by composing single-variable shifts."""
    idx = np.arange(monomial_count(n, k), dtype=np.int64)
    deg = k
    for i, a in enumerate(mono):
        for _ in range(a):
            idx = mult_shift(n, deg, i)[idx]
            deg += 1
    return idx


def mult_matrix_coo(n, k, poly):
    """COO data of multiplication by `poly` (dict mono -> int): R_k -> R_{k+e}."""
    nm = monomial_count(n, k)
    cols_base = np.arange(nm, dtype=np.int64)
    rows, cols, vals = [], [], []
    for mono, c in sorted(poly.items()):
        rows.append(_shift_by_monomial(n, k, mono))
        cols.append(cols_base)
        vals.append(np.full(nm, c, dtype=object) if _needs_object(c)
                    else np.full(nm, c, dtype=np.int64))
    if not rows:
        return (np.empty(0, np.int64), np.empty(0, np.int64), [], nm)
    return (np.concatenate(rows), np.concatenate(cols),
            np.concatenate([v.astype(object) for v in vals]) if any(
                v.dtype == object for v in vals)
            else np.concatenate(vals), nm)


def _needs_object(c):
    return not (-(2 ** 62) < c < 2 ** 62)


@lru_cache(maxsize=None)
def _deriv_indices(n, k, i):
    """(rows, cols, vals) of d/dx_i : R_k -> R_{k-1} (vals = exponent)."""
    exps = np.array(monomials(n, k), dtype=np.int64)
    mask = exps[:, i] > 0
    cols = np.nonzero(mask)[0].astype(np.int64)
    vals = exps[mask, i]
    # row index: position of mu / x_i in degree k-1, via the shift inverse
    shift = mult_shift(n, k - 1, i)
    inv = np.full(monomial_count(n, k), -1, dtype=np.int64)
    inv[shift] = np.arange(monomial_count(n, k - 1), dtype=np.int64)
    rows = inv[cols]
    return rows, cols, vals


def wedge_df_sparse(partials, n, j, k, d):
    """df^ : Omega^j_k -> Omega^{j+1}_{k+d} as SparseInt (block-assembled from
    multiplication matrices by the partial derivatives)."""
    src = FormBasis(n, j, k)
    tgt = FormBasis(n, j + 1, k + d)
    if src.size == 0 or j >= n or tgt.size == 0:
        return src, tgt, SparseInt((tgt.size, src.size), [], [], [])
    nm_src = monomial_count(n, src.mono_degree)
    nm_tgt = monomial_count(n, tgt.mono_degree)
    tgt_sidx = subset_index(n, j + 1)
    mult = {i: mult_matrix_coo(n, src.mono_degree, partials[i])
            for i in range(n) if partials[i]}
    rows, cols, vals = [], [], []
    obj = False
    for spos, s in enumerate(subsets(n, j)):
        inset = set(s)
        cbase = spos * nm_src
        for i in range(n):
            if i in inset or i not in mult:
                continue
            t = tuple(sorted(s + (i,)))
            sign = insertion_sign(s, i)
            rbase = tgt_sidx[t] * nm_tgt
            mr, mc, mv, _ = mult[i]
            if len(mv) == 0:
                continue
            rows.append(mr + rbase)
            cols.append(mc + cbase)
            v = mv if sign == 1 else _neg(mv)
            obj = obj or (getattr(v, "dtype", None) == object)
            vals.append(v)
    return src, tgt, _coalesce(tgt.size, src.size, rows, cols, vals, obj)


def exterior_d_sparse(n, j, k):
    """d : Omega^j_k -> Omega^{j+1}_k (degree preserving) as SparseInt."""
    src = FormBasis(n, j, k)
    tgt = FormBasis(n, j + 1, k)
    if src.size == 0 or j >= n or tgt.size == 0:
        return src, tgt, SparseInt((tgt.size, src.size), [], [], [])
    nm_src = monomial_count(n, src.mono_degree)
    nm_tgt = monomial_count(n, tgt.mono_degree)
    tgt_sidx = subset_index(n, j + 1)
    rows, cols, vals = [], [], []
    for spos, s in enumerate(subsets(n, j)):
        inset = set(s)
        cbase = spos * nm_src
        for i in range(n):
            if i in inset:
                continue
            dr, dc, dv = _deriv_indices(n, src.mono_degree, i)
            if dr.size == 0:
                continue
            t = tuple(sorted(s + (i,)))
            sign = insertion_sign(s, i)
            rows.append(dr + tgt_sidx[t] * nm_tgt)
            cols.append(dc + cbase)
            vals.append(dv if sign == 1 else -dv)
    return src, tgt, _coalesce(tgt.size, src.size, rows, cols, vals, False)


def _neg(v):
    if getattr(v, "dtype", None) == object:
        return np.array([-x for x in v], dtype=object)
    return -v


def _coalesce(m, n, rows, cols, vals, obj):
    if not rows:
        return SparseInt((m, n), [], [], [])
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    if obj:
        v = np.concatenate([np.asarray(x, dtype=object) for x in vals])
    else:
        v = np.concatenate(vals)
    # coalesce duplicate coordinates (possible only when partials share
    # monomials across different (S, i) pairs mapping to the same target)
    key = r * n + c
    order = np.argsort(key, kind="stable")
    key, r, c = key[order], r[order], c[order]
    v = v[order]
    uniq, start = np.unique(key, return_index=True)
    if uniq.size == key.size:
        out = SparseInt.__new__(SparseInt)
        out.shape = (m, n)
        out.rows, out.cols = r, c
        out.vals = [int(x) for x in v.tolist()]
        out._int64 = all(-(2 ** 62) < x < 2 ** 62 for x in out.vals)
        return out
    ent = {}
    for i in range(key.size):
        kk = (int(r[i]), int(c[i]))
        ent[kk] = ent.get(kk, 0) + int(v[i])
    return SparseInt.from_entries(m, n, ent)


def wedge_df_entries(partials, n, j, k, d):
    src, tgt, s = wedge_df_sparse(partials, n, j, k, d)
    return src, tgt, {(int(i), int(jj)): v for i, jj, v in
                      zip(s.rows, s.cols, s.vals)}


def exterior_d_entries(n, j, k):
    src, tgt, s = exterior_d_sparse(n, j, k)
    return src, tgt, {(int(i), int(jj)): v for i, jj, v in
                      zip(s.rows, s.cols, s.vals)}


class GradedRing:
    """Cached matrices of df^ and d for one arrangement's defining polynomial."""

    def __init__(self, n, integer_forms):
        self.n = n
        self.d = len(integer_forms)
        self.forms = [tuple(int(c) for c in f) for f in integer_forms]
        self.f = expand_product(self.forms, n)
        self.partials = [partial(self.f, i) for i in range(n)]
        self._wedge = {}
        self._ext = {}

    def wedge_df(self, j, k) -> GradedMap:
        """df^ : Omega^j_k -> Omega^{j+1}_{k+d} as an exact integer matrix."""
        key = (j, k)
        if key not in self._wedge:
            src, tgt, s = wedge_df_sparse(self.partials, self.n, j, k, self.d)
            self._wedge[key] = GradedMap(src, tgt, s)
        return self._wedge[key]

    def exterior_d(self, j, k) -> GradedMap:
        key = (j, k)
        if key not in self._ext:
            src, tgt, s = exterior_d_sparse(self.n, j, k)
            self._ext[key] = GradedMap(src, tgt, s)
        return self._ext[key]

    def dims(self, j, k):
        return omega_dim(self.n, j, k)

    def drop_cache(self, j=None):
        self._wedge.clear()
        self._ext.clear()


def monomial_basis(n: int, k: int):
    """Public op: ordered monomial basis of R_k (exponent tuples)."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    return list(monomials(n, k))


def wedge_df_matrix(arrangement, j: int, k: int) -> GradedMap:
    """Public op on an Arrangement; see GradedRing.wedge_df."""
    return arrangement.graded_ring().wedge_df(j, k)


def exterior_d_matrix(n: int, j: int, k: int) -> GradedMap:
    src, tgt, ent = exterior_d_entries(n, j, k)
    return GradedMap(src, tgt, SparseInt.from_entries(tgt.size, src.size, ent))


def multiplication_matrix(dims_provider, i: int, k: int) -> QMatrix:
    """Matrix of multiplication by x_i between degree pieces of a module
    presented degreewise (see resolution.DegreewiseModule)."""
    return dims_provider.mult_matrix(i, k)
