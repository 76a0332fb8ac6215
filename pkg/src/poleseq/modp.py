"""Modular exact linear algebra kernels.

Dense mod-p elimination runs on float64 arrays so the heavy updates go through
BLAS GEMM.  All primes are < 2896, hence p^2 < 2^23 and a GEMM with inner
dimension up to 2^30 accumulates exact integers below 2^53: every operation is
exact integer arithmetic carried in float64 lanes.

Soundness conventions used throughout the package:
  * for an integer matrix M, rank_p(M) <= rank_Q(M) for every prime p, hence
    nullity_p(M) >= nullity_Q(M);
  * integer vectors independent mod p are independent over Q;
  * a multimodular result (CRT + rational reconstruction) is only released
    after exact re-substitution, performed as a modular zero test against an
    explicit magnitude bound (`verify_zero`), which is a rigorous integer
    proof, never a probabilistic one.
"""

from __future__ import annotations

import numpy as np
from gmpy2 import mpz

# Primes p with p*p < 2**23, largest first.  Deterministic pool.
_POOL_LIMIT = 2896


def _sieve(limit):
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for q in range(2, int(limit ** 0.5) + 1):
        if flags[q]:
            flags[q * q:: q] = False
    return [int(q) for q in np.nonzero(flags)[0]]


PRIME_POOL = tuple(p for p in reversed(_sieve(_POOL_LIMIT)) if p > 2048)


def prime_stream(seed=0):
    """Deterministic pseudo-random ordering of the prime pool."""
    rng = np.random.default_rng(0xA771C0DE + seed)
    order = rng.permutation(len(PRIME_POOL))
    for i in order:
        yield PRIME_POOL[i]


def fast_mod(a, p):
    """In-place reduction of a float64 array of exact integers into [0, p)."""
    np.multiply(a, 1.0 / p, out=_scratch(a))
    q = np.floor(_scratch(a), out=_scratch(a))
    a -= q * p
    np.add(a, p, out=a, where=a < 0)
    np.subtract(a, p, out=a, where=a >= p)
    return a


_SCRATCH = {}


def _scratch(a):
    buf = _SCRATCH.get(a.shape)
    if buf is None or buf.dtype != a.dtype:
        buf = np.empty_like(a)
        if len(_SCRATCH) > 4:
            _SCRATCH.clear()
        _SCRATCH[a.shape] = buf
    return buf


class PLUFactor:
    """Blocked right-looking LU with row pivoting mod p, rank revealing.

    The factored array is kept so that new right-hand sides can be pushed
    through (membership tests, solves) without re-eliminating.
    """

    PANEL = 128

    def __init__(self, a, p, panel=None):
        # a: float64 (m, n), entries already reduced mod p; consumed in place.
        self.p = p
        self.m, self.n = a.shape
        self.a = a
        self.perm = np.arange(self.m)
        self.piv_cols = []
        self.panels = []  # (row0, [pivot cols]) in order
        self._factor(panel or self.PANEL)
        self.rank = len(self.piv_cols)

    def _factor(self, panel):
        a, p = self.a, self.p
        m, n = self.m, self.n
        r = 0
        j0 = 0
        while j0 < n and r < m:
            j1 = min(j0 + panel, n)
            r0 = r
            cols_here = []
            for j in range(j0, j1):
                col = a[r:m, j]
                fast_mod(col, p)
                nz = np.nonzero(col)[0]
                if nz.size == 0:
                    continue
                pi = r + int(nz[0])
                if pi != r:
                    a[[r, pi], :] = a[[pi, r], :]
                    self.perm[[r, pi]] = self.perm[[pi, r]]
                inv = pow(int(a[r, j]), p - 2, p)
                if r + 1 < m:
                    lcol = a[r + 1: m, j]
                    lcol *= inv
                    fast_mod(lcol, p)
                    if j + 1 < j1:
                        row = a[r, j + 1: j1]
                        fast_mod(row, p)
                        a[r + 1: m, j + 1: j1] -= np.outer(lcol, row)
                self.piv_cols.append(j)
                cols_here.append(j)
                r += 1
                if r == m:
                    break
            if cols_here:
                self.panels.append((r0, cols_here))
                if j1 < n:
                    self._push_block(a[:, j1:], r0, cols_here, full=False)
            j0 = j1
        fast_mod(a[:r, :], p) if r else None

    def _push_block(self, b, r0, cols_here, full):
        """Apply one panel's elimination to columns `b` (rows already permuted).

        With full=False, `b` is a view of the factored array during
        factorization; with full=True it is an external RHS block.
        """
        a, p = self.a, self.p
        t = len(cols_here)
        u = b[r0: r0 + t, :]
        fast_mod(u, p)
        for i in range(1, t):
            li = a[r0 + i, cols_here[:i]]
            u[i] -= li @ u[:i]
            fast_mod(u[i], p)
        if r0 + t < self.m:
            l21 = a[r0 + t:, cols_here]
            b[r0 + t:, :] -= l21 @ u
            fast_mod(b[r0 + t:, :], p)

    def forward(self, b):
        """L^{-1} P b mod p for a fresh RHS block b (m, q); returns new array."""
        y = np.array(b[self.perm], dtype=np.float64, order="C")
        if y.ndim == 1:
            y = y.reshape(-1, 1)
        fast_mod(y, self.p)
        for r0, cols_here in self.panels:
            self._push_block(y, r0, cols_here, full=True)
        return y

    def residual_tail(self, b):
        """Rows of L^{-1}Pb below the rank: zero iff b is in the column span."""
        y = self.forward(b)
        return y[self.rank:, :]

    def in_colspan(self, b):
        tail = self.residual_tail(b)
        return not np.any(tail)

    def _back_solve(self, rhs):
        """Solve U[:, piv] x = rhs (rhs: (rank, q)) by blocked back-substitution."""
        a, p = self.a, self.p
        r = self.rank
        piv = self.piv_cols
        x = np.zeros_like(rhs)
        inv = np.array([pow(int(a[i, piv[i]]), p - 2, p) for i in range(r)])
        blk = 256
        hi = r
        while hi > 0:
            lo = max(0, hi - blk)
            for i in range(hi - 1, lo - 1, -1):
                acc = rhs[i]
                if i + 1 < hi:
                    acc = acc - a[i, piv[i + 1: hi]] @ x[i + 1: hi]
                    fast_mod(acc, p)
                x[i] = acc * inv[i]
                fast_mod(x[i], p)
            if lo > 0:
                rhs[:lo] -= a[:lo, piv[lo:hi]] @ x[lo:hi]
                fast_mod(rhs[:lo], p)
            hi = lo
        return x

    def nullspace(self):
        """Kernel basis in RREF normal form: (n, nullity) float64, entries mod p.

        Column i has 1 at free column f_i and 0 at the other free columns.
        """
        r, n, p = self.rank, self.n, self.p
        free = [j for j in range(n) if j not in set(self.piv_cols)]
        k = np.zeros((n, len(free)))
        if free:
            if r:
                rhs = np.ascontiguousarray(self.a[:r, free])
                rhs *= -1
                fast_mod(rhs, p)
                x = self._back_solve(rhs)
                k[self.piv_cols, :] = x
            k[free, np.arange(len(free))] = 1.0
        self.free_cols = free
        return k

    def solve(self, b):
        """Particular solution with free variables 0; None if inconsistent."""
        y = self.forward(b)
        if np.any(y[self.rank:, :]):
            return None
        x = np.zeros((self.n, y.shape[1]))
        if self.rank:
            x[self.piv_cols, :] = self._back_solve(y[: self.rank, :].copy())
        return x


def plu(dense, p, panel=None):
    """Factor a float64 matrix (consumed) mod p."""
    fast_mod(dense, p)
    return PLUFactor(dense, p, panel=panel)


def rank_mod(dense, p):
    return plu(dense, p).rank


# ---------------------------------------------------------------------------
# Exact integer sparse matrices

class SparseInt:
    """Immutable integer sparse matrix (COO, coalesced, python-int values)."""

    __slots__ = ("shape", "rows", "cols", "vals", "_int64")

    def __init__(self, shape, rows, cols, vals):
        self.shape = shape
        self.rows = np.asarray(rows, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.vals = list(vals)
        self._int64 = all(-(2 ** 62) < v < 2 ** 62 for v in self.vals)

    @staticmethod
    def from_entries(m, n, entries):
        """entries: dict (i, j) -> int (zeros allowed, dropped)."""
        rows, cols, vals = [], [], []
        for (i, j), v in sorted(entries.items()):
            if v:
                rows.append(i)
                cols.append(j)
                vals.append(int(v))
        return SparseInt((m, n), rows, cols, vals)

    @property
    def nnz(self):
        return len(self.vals)

    def dense_mod(self, p):
        out = np.zeros(self.shape)
        if self.vals:
            if self._int64:
                v = np.array(self.vals, dtype=np.int64) % p
                np.add.at(out, (self.rows, self.cols), v.astype(np.float64))
            else:
                v = np.array([int(x % p) for x in self.vals], dtype=np.float64)
                np.add.at(out, (self.rows, self.cols), v)
        return out

    def csr_mod(self, p):
        from scipy.sparse import csr_matrix
        if self._int64:
            v = (np.array(self.vals, dtype=np.int64) % p).astype(np.float64)
        else:
            v = np.array([int(x % p) for x in self.vals], dtype=np.float64)
        return csr_matrix((v, (self.rows, self.cols)), shape=self.shape)

    def matmat_mod(self, k, p):
        """(self @ k) mod p for float64 k; exact provided row nnz * p^2 < 2^53."""
        out = self.csr_mod(p) @ k
        return fast_mod(np.asarray(out), p)

    def transpose(self):
        t = SparseInt.__new__(SparseInt)
        t.shape = (self.shape[1], self.shape[0])
        t.rows = self.cols
        t.cols = self.rows
        t.vals = self.vals
        t._int64 = self._int64
        return t

    def row_abs_sums(self):
        s = [0] * self.shape[0]
        for i, v in zip(self.rows.tolist(), self.vals):
            s[i] += abs(v)
        return s

    def matvec_exact(self, col):
        """Exact integer mat-vec: col is a sequence of ints of length n."""
        out = [mpz(0)] * self.shape[0]
        for i, j, v in zip(self.rows.tolist(), self.cols.tolist(), self.vals):
            c = col[j]
            if c:
                out[i] += mpz(v) * c
        return out

    def max_abs(self):
        return max((abs(v) for v in self.vals), default=0)


def verify_zero(s, int_cols, seed=7):
    """Exact proof that s @ int_cols == 0 (integer matrix times integer columns).

    Magnitude bound: |entry| <= max_row_abs_sum(s) * max|int_cols|.  Testing
    mod fresh primes whose product exceeds twice the bound is a rigorous
    integer zero test.
    """
    if not int_cols.size or s.nnz == 0:
        return True
    bound = max(s.row_abs_sums(), default=0) * _maxabs_obj(int_cols)
    if bound == 0:
        return True
    need = int(bound).bit_length() + 2
    got = 0
    for p in prime_stream(seed):
        km = reduce_obj_mod(int_cols, p)
        prod = s.matmat_mod(km, p)
        if np.any(prod):
            return False
        got += p.bit_length() - 1
        if got >= need:
            return True
    raise RuntimeError("prime pool exhausted during verification")


def _maxabs_obj(cols):
    m = 0
    for v in cols.flat:
        a = abs(v)
        if a > m:
            m = a
    return int(m)


def reduce_obj_mod(cols, p):
    """Reduce an integer array (object or int64) mod p into float64."""
    if cols.dtype != object:
        return (cols.astype(np.int64) % p).astype(np.float64)
    try:
        as64 = cols.astype(np.int64)  # raises OverflowError on big entries
        return (as64 % p).astype(np.float64)
    except (OverflowError, TypeError):
        pass
    out = np.empty(cols.shape, dtype=np.float64)
    flat_in = cols.reshape(-1)
    flat_out = out.reshape(-1)
    for i in range(flat_in.shape[0]):
        flat_out[i] = int(flat_in[i] % p)
    return out


# ---------------------------------------------------------------------------
# CRT and rational reconstruction

def crt_pair(r1, m1, r2, m2):
    """Combine x = r1 mod m1, x = r2 mod m2 (coprime moduli)."""
    inv = pow(m1 % m2, m2 - 2, m2) if _is_prime_small(m2) else pow(m1, -1, m2)
    t = ((r2 - r1) * inv) % m2
    return r1 + m1 * t, m1 * m2


def _is_prime_small(m):
    return m in _PRIME_SET


_PRIME_SET = set(PRIME_POOL)


def rat_reconstruct(u, m):
    """Wang reconstruction: find n/d = u mod m with |n|, d <= sqrt(m/2)."""
    u = int(u % m)
    if u == 0:
        return 0, 1
    bnd = mpz(m // 2).isqrt() if hasattr(mpz(m), "isqrt") else int((m // 2) ** 0.5)
    bnd = int(bnd)
    r0, r1 = int(m), u
    s0, s1 = 0, 1
    while r1 > bnd:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    n, d = r1, s1
    if d < 0:
        n, d = -n, -d
    if d == 0 or d > bnd:
        return None
    from math import gcd
    if gcd(n, d) != 1:
        return None
    return n, d


class ReconstructionFailed(Exception):
    pass


class CertificationError(Exception):
    """A multimodular result failed exact verification (hard error)."""


def kernel_exact(s, seed=0, max_primes=60, columns=None):
    """Certified exact kernel of an integer sparse matrix.

    Multimodular RREF kernels, CRT-combined, rationally reconstructed,
    denominators cleared per column, then exactly verified (verify_zero).
    The RREF normal form makes the columns visibly independent over Q, and
    nullity_Q <= nullity_p closes the sandwich: the result is a certified
    basis of ker_Q.  Returns (int_cols object array (n, N), nullity N).

    `columns`: optionally restrict to the kernel columns associated with the
    listed free-column positions (after the pivot structure is known).
    """
    stream = prime_stream(seed)
    p0 = next(stream)
    f0 = plu(s.dense_mod(p0), p0)
    k0 = f0.nullspace()
    piv0 = tuple(f0.piv_cols)
    free0 = list(f0.free_cols)
    n = s.shape[1]
    nullity = k0.shape[1]
    if columns is not None:
        sel = [free0.index(c) for c in columns]
        k0 = k0[:, sel]
    if k0.shape[1] == 0:
        # nullity_p = 0 certifies nullity_Q = 0 outright.
        if nullity == 0:
            return np.empty((n, 0), dtype=object), 0
    res = [[mpz(int(x)) for x in row] for row in k0]
    mod = p0
    prev = None
    used = 1
    for p in stream:
        if used >= max_primes:
            break
        cand = _try_reconstruct(res, mod)
        if cand is not None and cand == prev:
            cols = _clear_denominators(cand, n, k0.shape[1])
            if verify_zero(s, cols, seed=seed + 1):
                return cols, nullity
            raise CertificationError("kernel verification failed")
        prev = cand
        f = plu(s.dense_mod(p), p)
        used += 1
        if tuple(f.piv_cols) != piv0 or f.rank != len(piv0):
            continue  # bad prime; skip
        k = f.nullspace()
        if columns is not None:
            k = k[:, [list(f.free_cols).index(c) for c in columns]]
        inv = pow(mod % p, p - 2, p)
        for i in range(len(res)):
            ki = k[i]
            for j in range(len(res[i])):
                r = res[i][j]
                t = ((int(ki[j]) - r) * inv) % p
                res[i][j] = r + mod * t
        mod *= p
    raise ReconstructionFailed(
        f"kernel reconstruction did not stabilize within {max_primes} primes")


def _try_reconstruct(res, mod):
    out = []
    for row in res:
        orow = []
        for u in row:
            rc = rat_reconstruct(int(u), mod)
            if rc is None:
                return None
            orow.append(rc)
        out.append(orow)
    return out


def _clear_denominators(frac_rows, n, ncols):
    from math import lcm
    cols = np.empty((n, ncols), dtype=object)
    for j in range(ncols):
        den = 1
        for i in range(n):
            den = lcm(den, frac_rows[i][j][1])
        for i in range(n):
            num, dd = frac_rows[i][j]
            cols[i, j] = num * (den // dd)
    return cols


def solve_exact(s, rhs_cols, seed=0, max_primes=60):
    """Certified particular solution X (free vars 0) of s @ X = rhs, or None.

    rhs_cols: object array (m, q) of integers.  Returns object array of
    rationals as (num, den) cleared to integers with a per-column denominator:
    (int_cols (n, q), dens list) with s @ int_cols == rhs * den exactly.
    """
    stream = prime_stream(seed + 13)
    p0 = next(stream)
    f0 = plu(s.dense_mod(p0), p0)
    piv0 = tuple(f0.piv_cols)
    x0 = f0.solve(reduce_obj_mod(rhs_cols, p0))
    if x0 is None:
        return None
    res = [[mpz(int(v)) for v in row] for row in x0]
    mod = p0
    prev = None
    used = 1
    for p in stream:
        if used >= max_primes:
            break
        cand = _try_reconstruct(res, mod)
        if cand is not None and cand == prev:
            n, q = s.shape[1], rhs_cols.shape[1]
            cols = _clear_denominators(cand, n, q)
            dens = []
            from math import lcm
            for j in range(q):
                den = 1
                for i in range(n):
                    den = lcm(den, cand[i][j][1])
                dens.append(den)
            ok = _verify_solve(s, cols, rhs_cols, dens, seed)
            if not ok:
                raise CertificationError("solve verification failed")
            return cols, dens
        prev = cand
        f = plu(s.dense_mod(p), p)
        used += 1
        if tuple(f.piv_cols) != piv0:
            continue
        x = f.solve(reduce_obj_mod(rhs_cols, p))
        if x is None:
            continue
        inv = pow(mod % p, p - 2, p)
        for i in range(len(res)):
            xi = x[i]
            for j in range(len(res[i])):
                r = res[i][j]
                t = ((int(xi[j]) - r) * inv) % p
                res[i][j] = r + mod * t
        mod *= p
    raise ReconstructionFailed("solve reconstruction did not stabilize")


def _verify_solve(s, x_cols, rhs_cols, dens, seed):
    bound = max(s.row_abs_sums(), default=0) * _maxabs_obj(x_cols)
    bound += max(dens) * _maxabs_obj(rhs_cols)
    need = int(bound).bit_length() + 2
    got = 0
    dens_arr = np.array(dens, dtype=object)
    for p in prime_stream(seed + 29):
        xm = reduce_obj_mod(x_cols, p)
        lhs = s.matmat_mod(xm, p)
        rm = reduce_obj_mod(rhs_cols, p)
        dm = np.array([int(d % p) for d in dens_arr], dtype=np.float64)
        rhs = fast_mod(rm * dm[None, :], p)
        if np.any(lhs != rhs):
            return False
        got += p.bit_length() - 1
        if got >= need:
            return True
    raise RuntimeError("prime pool exhausted during solve verification")
