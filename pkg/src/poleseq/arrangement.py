"""Central reduced hyperplane arrangements: parsing, lattice combinatorics,
deletion, matroid product decomposition and generic hyperplane sections.

All data is exact rational.  Flats are canonicalized by the reduced row
echelon form of their equation spaces, so lattice equality is syntactic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm

import numpy as np
from gmpy2 import mpq

from .errors import (BadToken, DuplicateForm, EmptyResult, GenericityFailed,
                     IndexOutOfRange, NotEssential, ZeroForm)
from .graded import GradedRing
from .linalg import QMatrix, rank, rref


def _normalize(coeffs):
    """Scale so the first nonzero coefficient is 1."""
    for c in coeffs:
        if c != 0:
            return tuple(x / c for x in coeffs)
    raise ZeroForm("all coefficients vanish")


@dataclass(frozen=True)
class LinearForm:
    """A hyperplane's defining linear form, normalized (first nonzero = 1)."""
    coefficients: tuple

    @staticmethod
    def make(coeffs):
        return LinearForm(_normalize(tuple(mpq(c) for c in coeffs)))

    @property
    def n(self):
        return len(self.coefficients)

    def integer_primitive(self):
        """The integer form with content 1 and positive leading coefficient."""
        den = 1
        for c in self.coefficients:
            den = lcm(den, int(c.denominator))
        ints = [int(c * den) for c in self.coefficients]
        g = 0
        for v in ints:
            g = gcd(g, abs(v))
        return tuple(v // g for v in ints)

    def __str__(self):
        return " ".join(str(Fraction(int(c.numerator), int(c.denominator)))
                        for c in self.coefficients)


@dataclass(frozen=True)
class Arrangement:
    """A central reduced arrangement: d pairwise non-proportional forms in n
    variables (n = 3 or 4 for the analysis modules; parsing is n-agnostic)."""
    n: int
    forms: tuple

    def __post_init__(self):
        seen = {}
        for i, f in enumerate(self.forms):
            if f.n != self.n:
                raise BadToken("inconsistent number of coefficients")
            if f.coefficients in seen:
                raise DuplicateForm(
                    f"forms {seen[f.coefficients]} and {i} are proportional")
            seen[f.coefficients] = i
        if self.d < 1:
            raise EmptyResult("empty arrangement")

    @property
    def d(self):
        return len(self.forms)

    def coefficient_matrix(self) -> QMatrix:
        ent = {}
        for i, f in enumerate(self.forms):
            for j, c in enumerate(f.coefficients):
                if c:
                    ent[(i, j)] = c
        return QMatrix(self.d, self.n, ent)

    def integer_forms(self):
        return [f.integer_primitive() for f in self.forms]

    def graded_ring(self) -> GradedRing:
        gr = getattr(self, "_gr", None)
        if gr is None:
            gr = GradedRing(self.n, self.integer_forms())
            object.__setattr__(self, "_gr", gr)
        return gr

    def to_text(self):
        return "\n".join(str(f) for f in self.forms) + "\n"


def parse_arrangement(text: str) -> Arrangement:
    """Parse the shared file format: one form per line, whitespace-separated
    rationals (p/q or integers), '#' starts a comment."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        coeffs = []
        for tok in line.split():
            try:
                coeffs.append(mpq(Fraction(tok)))
            except (ValueError, ZeroDivisionError):
                raise BadToken(f"line {lineno}: bad token {tok!r}")
        if all(c == 0 for c in coeffs):
            raise ZeroForm(f"line {lineno}: zero form")
        rows.append(coeffs)
    if not rows:
        raise EmptyResult("no forms found")
    n = len(rows[0])
    for r in rows:
        if len(r) != n:
            raise BadToken("rows have differing lengths")
    return Arrangement(n, tuple(LinearForm.make(r) for r in rows))


def arrangement_from_rows(rows) -> Arrangement:
    rows = [tuple(mpq(Fraction(str(c))) for c in r) for r in rows]
    return Arrangement(len(rows[0]), tuple(LinearForm.make(r) for r in rows))


def is_essential(a: Arrangement) -> bool:
    """True iff the normals span: rank of the coefficient matrix equals n."""
    return rank(a.coefficient_matrix()) == a.n


@dataclass(frozen=True)
class Flat:
    """A lattice flat, canonicalized by the RREF rows of its equation space."""
    rank: int
    equations: tuple  # RREF rows, tuples of mpq
    multiplicity: int

    def contains_flat(self, other: "Flat") -> bool:
        """self >= other in the lattice (self's subspace contains other's),
        i.e. self's equations are a subspace of other's equations."""
        return _rowspan_contains(other.equations, self.equations)


def _rowspan_contains(big_rows, small_rows):
    if not small_rows:
        return True
    if not big_rows:
        return False
    m = QMatrix.from_rows(list(big_rows))
    both = QMatrix.from_rows(list(big_rows) + list(small_rows))
    return rank(m) == rank(both)


def _rref_key(rows):
    m = QMatrix.from_rows(rows)
    _, rr = rref(m)
    return tuple(tuple(v for v in row) for row in rr)


@dataclass
class LatticeInvariants:
    flats_by_rank: dict
    moebius: dict
    poincare_coefficients: list
    chi_u: int
    tjurina_section: int
    flats: list = field(default_factory=list)


def intersection_lattice(a: Arrangement) -> LatticeInvariants:
    """All flats with Moebius values, Poincare polynomial, chi(U) and the
    global Tjurina number of a generic section (sum over rank-2 flats of
    (m_X - 1)^2)."""
    normals = [list(f.coefficients) for f in a.forms]
    # Closure under intersections, canonicalized by RREF keys.
    flat_keys = {(): 0}          # key -> rank (ambient flat: no equations)
    frontier = [()]
    while frontier:
        new = []
        for key in frontier:
            for nf in normals:
                rows = list(key) + [tuple(nf)]
                k2 = _rref_key(rows)
                if k2 not in flat_keys:
                    flat_keys[k2] = len(k2)
                    new.append(k2)
        frontier = new
    flats = []
    for key, rk in flat_keys.items():
        mult = sum(1 for nf in normals
                   if _rowspan_contains(list(key) if key else [], [tuple(nf)])
                   ) if key else 0
        flats.append(Flat(rk, key, mult))
    flats.sort(key=lambda fl: (fl.rank, fl.equations))
    # Moebius recursion down the lattice (ordered by reverse inclusion).
    moebius = {}
    for fl in flats:
        if fl.rank == 0:
            moebius[fl] = 1
            continue
        s = 0
        for other in flats:
            if other.rank < fl.rank and _rowspan_contains(fl.equations, other.equations):
                s += moebius[other]
        moebius[fl] = -s
    by_rank = {}
    for fl in flats:
        by_rank.setdefault(fl.rank, []).append(fl)
    top_rank = max(by_rank)
    poincare = [0] * (top_rank + 1)
    for fl in flats:
        poincare[fl.rank] += abs(moebius[fl])
    # chi(U) = (pi(A,t)/(1+t)) at t = -1; for central arrangements (1+t) | pi.
    chi_u = _quotient_by_1_plus_t_at_minus_1(poincare)
    tau = sum((fl.multiplicity - 1) ** 2 for fl in by_rank.get(2, []))
    return LatticeInvariants(by_rank, moebius, poincare, chi_u, tau, flats)


def _quotient_by_1_plus_t_at_minus_1(coeffs):
    # synthetic division by (1+t); remainder must vanish for central A.
    q = []
    rem = 0
    for c in reversed(coeffs):
        rem = c - rem
        q.append(rem)
    # q holds quotient coefficients from top degree down, last entry = remainder
    q, check = q[:-1], q[-1]
    if check != 0:
        raise AssertionError("Poincare polynomial not divisible by (1+t)")
    val = 0
    # q[0] is the top coefficient of the quotient, degree len(coeffs)-2
    deg = len(coeffs) - 2
    for i, c in enumerate(q):
        e = deg - i
        val += c * ((-1) ** e)
    return val


def delete(a: Arrangement, i: int) -> Arrangement:
    if not (0 <= i < a.d):
        raise IndexOutOfRange(f"index {i} out of range for d={a.d}")
    if a.d == 1:
        raise EmptyResult("deleting the last hyperplane")
    forms = a.forms[:i] + a.forms[i + 1:]
    return Arrangement(a.n, forms)


# ---------------------------------------------------------------------------
# matroid decomposition

def _subset_rank(normals, idxs):
    m = QMatrix.from_rows([normals[i] for i in idxs])
    return rank(m)


def matroid_circuits(a: Arrangement, max_size=None):
    """Circuits of the linear matroid of the normals, sizes <= n+1."""
    from itertools import combinations
    normals = [list(f.coefficients) for f in a.forms]
    max_size = max_size or a.n + 1
    circuits = []
    for size in range(2, max_size + 1):
        for s in combinations(range(a.d), size):
            if _subset_rank(normals, s) < size:
                if not any(set(c) <= set(s) for c in circuits):
                    circuits.append(s)
    return circuits


def product_decomposition(a: Arrangement):
    """Partition into matroid-connected components, with each factor expressed
    in a basis of its span; None if indecomposable.

    Two normals are linked iff they share a circuit; for an essential
    arrangement the component spans decompose C^n, realizing the canonical
    product-splitting of the logarithmic derivation module.
    """
    if not is_essential(a):
        raise NotEssential("decomposition needs an essential arrangement")
    parent = list(range(a.d))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        parent[find(x)] = find(y)

    for c in matroid_circuits(a):
        for i in c[1:]:
            union(c[0], i)
    comps = {}
    for i in range(a.d):
        comps.setdefault(find(i), []).append(i)
    if len(comps) == 1:
        return None
    out = []
    for idxs in sorted(comps.values()):
        normals = [list(a.forms[i].coefficients) for i in idxs]
        piv, basis_rows = rref(QMatrix.from_rows(normals))
        # coordinates of each normal w.r.t. the RREF basis of the span:
        # since basis_rows are RREF, the coordinate of a normal on basis row r
        # is its entry at pivot column piv[r] (after reduction).
        sub_forms = []
        for nf in normals:
            vec = list(nf)
            coords = []
            for r, j in enumerate(piv):
                c = vec[j]
                coords.append(c)
                if c:
                    for jj in range(len(vec)):
                        vec[jj] -= c * basis_rows[r][jj]
            if any(v != 0 for v in vec):
                raise AssertionError("normal outside component span")
            sub_forms.append(coords)
        sub = Arrangement(len(piv), tuple(LinearForm.make(r) for r in sub_forms))
        out.append((tuple(tuple(r) for r in basis_rows), sub))
    return out


# ---------------------------------------------------------------------------
# generic section

def _rank2_multiset(a: Arrangement):
    lat = intersection_lattice(a)
    return sorted(fl.multiplicity for fl in lat.flats_by_rank.get(2, []))


def generic_section(a: Arrangement, seed: int = 0, max_tries: int = 25):
    """Restrict to a random rational hyperplane through 0 (n = 4 -> 3).

    The certificate requires: restricted forms pairwise non-proportional, the
    section essential, and the rank-2 multiplicity multiset preserved.  The
    spec's open question (whether these conditions suffice for all downstream
    uses) is assumed here.
    """
    if a.n != 4:
        raise NotEssential("generic_section expects n = 4")
    if not is_essential(a):
        raise NotEssential("section of a non-essential arrangement")
    bound = 10 * a.d * a.d
    rng = np.random.default_rng(0x5EC710 + seed)
    target = _rank2_multiset(a)
    for attempt in range(max_tries):
        h = [int(rng.integers(-bound, bound + 1)) for _ in range(4)]
        if all(v == 0 for v in h):
            continue
        # basis of ker(h): three integer columns
        basis = _kernel_basis_int(h)
        try:
            rows = []
            for f in a.forms:
                coeffs = [sum(c * b[i] for i, c in enumerate(f.coefficients))
                          for b in basis]
                rows.append(coeffs)
            sec = Arrangement(3, tuple(LinearForm.make(r) for r in rows))
        except (ZeroForm, DuplicateForm):
            continue
        if not is_essential(sec):
            continue
        if _rank2_multiset(sec) != target:
            continue
        certificate = {
            "hyperplane": h,
            "attempts": attempt + 1,
            "rank2_multiset": target,
        }
        return sec, certificate
    raise GenericityFailed(f"no generic section after {max_tries} tries")


def _kernel_basis_int(h):
    """Three integer vectors spanning ker(h . x) in Q^4."""
    j0 = next(i for i, v in enumerate(h) if v != 0)
    basis = []
    for j in range(4):
        if j == j0:
            continue
        v = [0, 0, 0, 0]
        v[j] = h[j0]
        v[j0] = -h[j]
        g = gcd(abs(v[j]), abs(v[j0]))
        basis.append([x // g for x in v])
    return basis
