import pytest
from gmpy2 import mpq

from poleseq.arrangement import (Arrangement, LinearForm, arrangement_from_rows,
                                 delete, generic_section, intersection_lattice,
                                 is_essential, matroid_circuits,
                                 parse_arrangement, product_decomposition)
from poleseq.errors import (DuplicateForm, EmptyResult, GenericityFailed,
                            IndexOutOfRange, NotEssential, ZeroForm)

B4_TEXT = "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1"
G5_TEXT = "1 1 1 1\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1"


def test_parse_boolean():
    a = parse_arrangement(B4_TEXT)
    assert a.n == 4 and a.d == 4


def test_parse_duplicate():
    with pytest.raises(DuplicateForm):
        parse_arrangement("1 0 0 0\n2 0 0 0")


def test_parse_generic5_and_comments():
    a = parse_arrangement("# generic 5\n" + G5_TEXT + "\n# trailing\n")
    assert a.d == 5 and a.n == 4


def test_parse_zero_and_rationals():
    with pytest.raises(ZeroForm):
        parse_arrangement("0 0 0 0")
    a = parse_arrangement("1/2 0 0 1\n0 1/3 0 0")
    assert a.forms[0].coefficients[0] == 1  # normalized
    assert a.forms[0].coefficients[3] == 2


def test_is_essential():
    assert is_essential(parse_arrangement(B4_TEXT))
    assert not is_essential(parse_arrangement("1 0 0 0\n0 1 0 0\n0 0 1 0\n1 1 0 0"))
    assert is_essential(parse_arrangement(G5_TEXT))


def test_lattice_boolean4():
    lat = intersection_lattice(parse_arrangement(B4_TEXT))
    r2 = lat.flats_by_rank[2]
    assert len(r2) == 6 and all(f.multiplicity == 2 for f in r2)
    r3 = lat.flats_by_rank[3]
    assert len(r3) == 4 and all(f.multiplicity == 3 for f in r3)
    assert lat.tjurina_section == 6
    assert lat.chi_u == 0
    assert lat.poincare_coefficients == [1, 4, 6, 4, 1]


def test_lattice_generic5():
    lat = intersection_lattice(parse_arrangement(G5_TEXT))
    assert len(lat.flats_by_rank[2]) == 10
    assert len(lat.flats_by_rank[3]) == 10
    assert lat.poincare_coefficients == [1, 5, 10, 10, 4]
    assert lat.chi_u == -1
    assert lat.tjurina_section == 10


def test_lattice_single_hyperplane():
    lat = intersection_lattice(arrangement_from_rows([[1, 0, 0, 0]]))
    assert 2 not in lat.flats_by_rank
    assert lat.tjurina_section == 0


def test_moebius_alternating_sum_zero():
    for text in (B4_TEXT, G5_TEXT):
        lat = intersection_lattice(parse_arrangement(text))
        assert sum(lat.moebius.values()) == 0


def test_poincare_at_minus_one_zero():
    for text in (B4_TEXT, G5_TEXT):
        lat = intersection_lattice(parse_arrangement(text))
        val = sum(c * (-1) ** i for i, c in enumerate(lat.poincare_coefficients))
        assert val == 0


def test_delete():
    b4 = parse_arrangement(B4_TEXT)
    a = delete(b4, 3)
    assert a.d == 3 and not is_essential(a)
    g5 = parse_arrangement(G5_TEXT)
    assert delete(g5, 0).forms == b4.forms
    with pytest.raises(IndexOutOfRange):
        delete(b4, 4)
    single = arrangement_from_rows([[1, 0, 0, 0]])
    with pytest.raises(EmptyResult):
        delete(single, 0)


def test_deletion_flats_are_flats_of_sub_collection():
    g5 = parse_arrangement(G5_TEXT)
    sub = delete(g5, 0)
    lat_sub = intersection_lattice(sub)
    lat = intersection_lattice(g5)
    keys = {f.equations for f in lat.flats}
    for f in lat_sub.flats:
        assert f.equations in keys


def test_product_decomposition_boolean():
    comps = product_decomposition(parse_arrangement(B4_TEXT))
    assert comps is not None and len(comps) == 4
    for _, sub in comps:
        assert sub.n == 1 and sub.d == 1


def test_product_decomposition_generic5_indecomposable():
    assert product_decomposition(parse_arrangement(G5_TEXT)) is None
    circuits = matroid_circuits(parse_arrangement(G5_TEXT))
    assert circuits == [(0, 1, 2, 3, 4)]


def test_product_decomposition_two_blocks():
    a = parse_arrangement("1 0 0 0\n0 1 0 0\n1 1 0 0\n0 0 1 0\n0 0 0 1\n0 0 1 1")
    comps = product_decomposition(a)
    assert comps is not None and len(comps) == 2
    assert all(sub.d == 3 and sub.n == 2 for _, sub in comps)
    # factors reassemble the normal multiset up to recorded change of basis
    got = set()
    for basis, sub in comps:
        for f in sub.forms:
            vec = [sum(c * b[i] for c, b in zip(f.coefficients, basis))
                   for i in range(4)]
            got.add(LinearForm.make(vec).coefficients)
    want = {f.coefficients for f in a.forms}
    assert got == want


def test_product_requires_essential():
    with pytest.raises(NotEssential):
        product_decomposition(parse_arrangement("1 0 0 0\n0 1 0 0\n1 1 0 0"))


def test_generic_section_boolean():
    b4 = parse_arrangement(B4_TEXT)
    sec, cert = generic_section(b4, seed=1)
    assert sec.n == 3 and sec.d == 4
    lat = intersection_lattice(sec)
    assert sorted(f.multiplicity for f in lat.flats_by_rank[2]) == [2] * 6
    assert lat.tjurina_section == 6


def test_generic_section_generic5():
    g5 = parse_arrangement(G5_TEXT)
    sec, cert = generic_section(g5, seed=3)
    lat = intersection_lattice(sec)
    assert lat.tjurina_section == 10
    assert len(lat.flats_by_rank[2]) == 10
