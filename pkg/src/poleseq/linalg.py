"""Exact rational linear algebra: the public, always-exact layer.

QMatrix is a sparse exact rational matrix; elimination densifies per block.
The default algorithm is fraction-free Bareiss on cleared integers; results
are exact rationals with no floating point involved.  The accelerated
multimodular engines live in :mod:`poleseq.modp` and are certified back to Q
before anything downstream consumes them.
"""

from __future__ import annotations

from gmpy2 import mpq, mpz

from .errors import NotContained, NotWellDefined


class QMatrix:
    """Sparse exact rational matrix (coordinate storage)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows, cols, entries=None):
        self.rows = rows
        self.cols = cols
        self.entries = {}
        if entries:
            for (i, j), v in entries.items():
                q = mpq(v)
                if q != 0:
                    if not (0 <= i < rows and 0 <= j < cols):
                        raise IndexError((i, j))
                    self.entries[(i, j)] = q

    @staticmethod
    def from_rows(data):
        rows = len(data)
        cols = len(data[0]) if rows else 0
        ent = {}
        for i, row in enumerate(data):
            if len(row) != cols:
                raise ValueError("ragged rows")
            for j, v in enumerate(row):
                if v:
                    ent[(i, j)] = v
        return QMatrix(rows, cols, ent)

    @staticmethod
    def identity(n):
        return QMatrix(n, n, {(i, i): 1 for i in range(n)})

    @staticmethod
    def zero(rows, cols):
        return QMatrix(rows, cols)

    def copy(self):
        m = QMatrix(self.rows, self.cols)
        m.entries = dict(self.entries)
        return m

    def __getitem__(self, ij):
        return self.entries.get(ij, mpq(0))

    def __eq__(self, other):
        return (isinstance(other, QMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def to_lists(self):
        out = [[mpq(0)] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def column(self, j):
        return [self.entries.get((i, j), mpq(0)) for i in range(self.rows)]

    def columns(self):
        return [self.column(j) for j in range(self.cols)]

    def hstack(self, other):
        if other.rows != self.rows:
            raise ValueError("row mismatch")
        ent = dict(self.entries)
        for (i, j), v in other.entries.items():
            ent[(i, j + self.cols)] = v
        return QMatrix(self.rows, self.cols + other.cols, ent)

    def matmul(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        by_row = {}
        for (i, k), v in self.entries.items():
            by_row.setdefault(k, []).append((i, v))
        ent = {}
        for (k, j), w in other.entries.items():
            for i, v in by_row.get(k, ()):
                key = (i, j)
                ent[key] = ent.get(key, mpq(0)) + v * w
        return QMatrix(self.rows, other.cols, {k: v for k, v in ent.items() if v})

    def matvec(self, vec):
        out = [mpq(0)] * self.rows
        for (i, j), v in self.entries.items():
            if vec[j]:
                out[i] += v * vec[j]
        return out

    def is_zero(self):
        return not self.entries

    def __repr__(self):
        return f"QMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


def _dense_int_rows(m: QMatrix):
    """Clear denominators row-wise; returns list of lists of mpz."""
    from math import lcm
    out = []
    for i in range(m.rows):
        den = 1
        row = [m.entries.get((i, j)) for j in range(m.cols)]
        for v in row:
            if v is not None:
                den = lcm(den, int(v.denominator))
        out.append([mpz(0) if v is None else mpz(v * den) for v in row])
    return out


def rank(m: QMatrix) -> int:
    """Exact rank via fraction-free Bareiss elimination."""
    a = _dense_int_rows(m)
    nr, nc = m.rows, m.cols
    r = 0
    prev = mpz(1)
    for j in range(nc):
        piv = None
        for i in range(r, nr):
            if a[i][j]:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            a[r], a[piv] = a[piv], a[r]
        pv = a[r][j]
        for i in range(r + 1, nr):
            ai = a[i]
            ar = a[r]
            aij = ai[j]
            if aij:
                for jj in range(j + 1, nc):
                    ai[jj] = (pv * ai[jj] - aij * ar[jj]) // prev
                ai[j] = mpz(0)
            elif prev != pv:
                for jj in range(j + 1, nc):
                    if ai[jj]:
                        ai[jj] = (pv * ai[jj]) // prev
        prev = pv
        r += 1
        if r == nr:
            break
    return r


def rref(m: QMatrix):
    """Exact reduced row echelon form; returns (list of pivot cols, rows as lists of mpq)."""
    a = [[mpq(v) for v in row] for row in m.to_lists()]
    nr, nc = m.rows, m.cols
    piv_cols = []
    r = 0
    for j in range(nc):
        piv = None
        for i in range(r, nr):
            if a[i][j]:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][j]
        a[r] = [v * inv for v in a[r]]
        for i in range(nr):
            if i != r and a[i][j]:
                c = a[i][j]
                ai = a[i]
                ar = a[r]
                for jj in range(j, nc):
                    ai[jj] -= c * ar[jj]
        piv_cols.append(j)
        r += 1
        if r == nr:
            break
    return piv_cols, a[:r]


def kernel_basis(m: QMatrix) -> QMatrix:
    """Columns form an exact basis of ker(m); m @ result == 0."""
    piv_cols, rows = rref(m)
    pivset = set(piv_cols)
    free = [j for j in range(m.cols) if j not in pivset]
    ent = {}
    for c, f in enumerate(free):
        ent[(f, c)] = mpq(1)
        for r, j in enumerate(piv_cols):
            v = rows[r][f]
            if v:
                ent[(j, c)] = -v
    return QMatrix(m.cols, len(free), ent)


def column_space_contains(z: QMatrix, b: QMatrix) -> bool:
    """True iff every column of b lies in the column space of z (exact)."""
    if b.cols == 0:
        return True
    if z.rows != b.rows:
        raise ValueError("ambient mismatch")
    return rank(z.hstack(b)) == rank(z)


def subquotient_dim(z: QMatrix, b: QMatrix) -> int:
    """rank(z) - rank(b), checking b's columns lie inside span(z)."""
    if not column_space_contains(z, b):
        raise NotContained("boundary space not inside cycle space")
    return rank(z) - rank(b)


class Subquotient:
    """A vector space presented as cycles modulo boundaries inside an ambient
    coordinate space: the universal representation of cohomology and page
    entries."""

    def __init__(self, ambient_dim, cycle_basis: QMatrix, boundary_basis: QMatrix):
        if cycle_basis.rows != ambient_dim or boundary_basis.rows != ambient_dim:
            raise ValueError("ambient dimension mismatch")
        if not column_space_contains(cycle_basis, boundary_basis):
            raise NotContained("boundaries not contained in cycles")
        self.ambient_dim = ambient_dim
        self.cycle_basis = cycle_basis
        self.boundary_basis = boundary_basis
        self.dim = rank(cycle_basis) - rank(boundary_basis)

    @staticmethod
    def full(n):
        return Subquotient(n, QMatrix.identity(n), QMatrix.zero(n, 0))

    def coset_representatives(self) -> QMatrix:
        """Columns of cycle_basis forming a basis of the quotient (greedy)."""
        picked = []
        base = self.boundary_basis
        r0 = rank(base)
        cur = base
        cur_rank = r0
        for j in range(self.cycle_basis.cols):
            col = QMatrix(self.ambient_dim, 1,
                          {(i, 0): v for (i, jj), v in self.cycle_basis.entries.items() if jj == j})
            cand = cur.hstack(col)
            rr = rank(cand)
            if rr > cur_rank:
                picked.append(j)
                cur = cand
                cur_rank = rr
            if len(picked) == self.dim:
                break
        ent = {}
        for c, j in enumerate(picked):
            for (i, jj), v in self.cycle_basis.entries.items():
                if jj == j:
                    ent[(i, c)] = v
        return QMatrix(self.ambient_dim, len(picked), ent)

    def coordinates(self, vec):
        """Coordinates of [vec] w.r.t. coset_representatives; NotWellDefined if
        vec is outside cycles + boundaries."""
        reps = self.coset_representatives()
        sys = self.boundary_basis.hstack(reps)
        sol = solve_dense(sys, vec)
        if sol is None:
            raise NotWellDefined("vector not in cycles + boundaries")
        nb = self.boundary_basis.cols
        return sol[nb:]


def solve_dense(a: QMatrix, b_vec):
    """Exact particular solution of a @ x = b (free vars 0), or None."""
    aug = a.hstack(QMatrix(a.rows, 1, {(i, 0): v for i, v in enumerate(b_vec) if v}))
    piv_cols, rows = rref(aug)
    if piv_cols and piv_cols[-1] == a.cols:
        return None
    x = [mpq(0)] * a.cols
    for r, j in enumerate(piv_cols):
        x[j] = rows[r][a.cols]
    return x


def induced_map(source: Subquotient, target: Subquotient, ambient_map: QMatrix) -> QMatrix:
    """Matrix of the map induced by ambient_map on the chosen subquotient bases.

    Checks that cycles map into cycles and boundaries into boundaries (the map
    must descend); raises NotWellDefined otherwise.
    """
    if ambient_map.cols != source.ambient_dim or ambient_map.rows != target.ambient_dim:
        raise ValueError("ambient map shape mismatch")
    img_cycles = ambient_map.matmul(source.cycle_basis)
    if not column_space_contains(target.cycle_basis, img_cycles):
        raise NotWellDefined("source cycles map outside target cycles")
    img_bnd = ambient_map.matmul(source.boundary_basis)
    if not column_space_contains(target.boundary_basis, img_bnd):
        raise NotWellDefined("source boundaries map outside target boundaries")
    src_reps = source.coset_representatives()
    ent = {}
    for c in range(src_reps.cols):
        vec = ambient_map.matvec(src_reps.column(c))
        coords = target.coordinates(vec)
        for i, v in enumerate(coords):
            if v:
                ent[(i, c)] = v
    return QMatrix(target.dim, source.dim, ent)
