import json
from fractions import Fraction

import pytest

from bianchihom.abelianlin import matmul
from bianchihom.orbifold import (
    CUSP_TYPE,
    Wall,
    act_on_point,
    equivariant_euler_characteristic,
    euler_summands,
    fixes_pointwise,
    gamma_from_json,
    gamma_to_json,
    recognize,
)
from bianchihom.reportcli import load_fixture, mass_terms
from conftest import FIGURE_M, TRIVIAL_CLASS_M, gamma
from oracles import chi_from_counts

ALL_M = FIGURE_M + TRIVIAL_CLASS_M


@pytest.mark.parametrize("m", FIGURE_M)
def test_orbit_counts_and_types(m):
    # published
    fx = load_fixture(m).data
    gx = gamma(m)
    assert list(gx.counts()) == fx["orbit_counts"]
    assert [gx.type_multiset(d) for d in range(3)] == fx["stabilizer_types"]


@pytest.mark.parametrize("m", FIGURE_M)
def test_mass_formula_terms(m):
    # published summands; the total is zero
    assert sorted(mass_terms(gamma(m))) == sorted(load_fixture(m).data["chi_terms"])
    assert equivariant_euler_characteristic(gamma(m)) == 0


@pytest.mark.parametrize("m", ALL_M)
def test_euler_characteristic_vanishes(m):
    # derived: recomputed from raw element lists
    gx = gamma(m)
    assert chi_from_counts(gx) == 0 == sum(euler_summands(gx), Fraction(0))


@pytest.mark.parametrize("m", ALL_M)
def test_quotient_boundary_squares_to_zero(m):
    # trivial
    gx = gamma(m)
    d1, d2 = gx.boundary_matrix(1), gx.boundary_matrix(2)
    prod = matmul(d1, d2, len(gx.cells[1]))
    assert all(v == 0 for row in prod for v in row)


@pytest.mark.parametrize("m", ALL_M)
def test_stabilizers_fix_cells_pointwise(m):
    # trivial: the complex is rigid
    for cells in gamma(m).cells:
        for c in cells:
            st = c.stabilizer
            if st.type_tag == CUSP_TYPE:
                p = c.points[0]
                assert p.t == 0
                for g in st.generators:
                    assert g.trace() in ((2, 0), (-2, 0))
                    assert act_on_point(g, p) == p
            else:
                assert fixes_pointwise_all(st.elements, c.points)
                assert recognize(st.elements) == st.type_tag


def fixes_pointwise_all(elements, points):
    return all(fixes_pointwise(h, points) for h in elements)


@pytest.mark.parametrize("m", ALL_M)
def test_pairings_map_representatives_onto_boundary(m):
    # trivial: the stored pairing carries the face representative to the actual boundary cell
    gx = gamma(m)
    for e in gx.cells[1]:
        for inc, end in zip(e.boundary, e.points):
            rep = gx.cells[0][inc.face].points[0]
            assert act_on_point(inc.pairing, rep) == end
    for f in gx.cells[2]:
        n = len(f.points)
        for i, inc in enumerate(f.boundary):
            a, b = gx.cells[1][inc.face].points
            image = (act_on_point(inc.pairing, a), act_on_point(inc.pairing, b))
            edge = (f.points[i], f.points[(i + 1) % n])
            assert image == (edge if inc.sign == 1 else edge[::-1])


@pytest.mark.parametrize("m", ALL_M)
def test_singular_orbits_match_class_number(m):
    # trivial: one cusp orbit per nontrivial ideal class
    expected = 0 if m in TRIVIAL_CLASS_M else 1
    assert sum(1 for c in gamma(m).cells[0] if c.is_singular) == expected


@pytest.mark.parametrize("m", (5, 15))
def test_json_round_trip(m):
    # trivial
    gx = gamma(m)
    blob = json.dumps(gamma_to_json(gx), sort_keys=True)
    back = gamma_from_json(json.loads(blob))
    assert back == gx
    assert json.dumps(gamma_to_json(back), sort_keys=True) == blob


def test_wall_json():
    # trivial
    w = Wall.imaginary_part(Fraction(1, 2))
    assert Wall.from_json(w.to_json()) == w
