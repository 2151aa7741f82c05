import json
import random
from fractions import Fraction

import pytest

from bianchihom.halfspace import HPoint
from bianchihom.quadring import RingSpec
from bianchihom.swanfloor import (
    BoundExceeded,
    Hemisphere,
    Lattice,
    compute_floor,
    covering_violation,
    enumerate_hemispheres,
    extract_cells,
    is_strictly_below,
    singular_certificate,
    singular_points,
)
from oracles import brute_floor_height

ALL_M = (1, 2, 3, 5, 6, 7, 10, 11, 13, 15)


@pytest.fixture(scope="module")
def floors():
    return {m: compute_floor(RingSpec(m)) for m in ALL_M}


def _floor_height(floor, x, y):
    lat = floor.lattice
    best = None
    for h in floor.hemispheres:
        for s in lat.nearby_shifts(2):
            g = h.translated(floor.ring, s)
            v = g.height(floor.ring.m, x, y)
            best = v if best is None or v > best else best
    return best


@pytest.mark.parametrize("m", [5, 6, 13, 15])
def test_floor_height_matches_bruteforce(floors, m):
    # derived: maximum over an independently enumerated hemisphere family
    floor = floors[m]
    rng = random.Random(m)
    top = floor.strip.im_range[1]
    bound = floor.certificate.max_norm_used
    for _ in range(6):
        x = Fraction(rng.randrange(0, 97), 97)
        y = top * Fraction(rng.randrange(0, 89), 89)
        assert _floor_height(floor, x, y) == brute_floor_height(m, x, y, bound)


@pytest.mark.parametrize("m", ALL_M)
def test_vertices_certified(floors, m):
    # trivial: no hemisphere passes above a vertex of the floor
    floor = floors[m]
    for cell in floor.cells:
        for (x, y), t in zip(cell.polygon, cell.heights):
            if t > 0:
                assert covering_violation(floor.ring, HPoint(x, y, t)) is None


@pytest.mark.parametrize("m,count", [(1, 0), (2, 0), (3, 0), (7, 0), (11, 0), (5, 1), (6, 1), (10, 1), (13, 1), (15, 1)])
def test_one_singular_cusp_per_nontrivial_class(m, count):
    # trivial: class number minus one
    cusps = singular_points(RingSpec(m))
    assert len(cusps) == count
    for c in cusps:
        assert singular_certificate(RingSpec(m), HPoint(c.x, c.y, 0))


def test_known_singular_points(floors):
    # published: (1 + sqrt(-5))/2 for m = 5 and sqrt(-6)/2 for m = 6
    assert [(p.x, p.y) for p in floors[5].singular_points()] == [(Fraction(1, 2), Fraction(1, 2))]
    assert [(p.x, p.y) for p in floors[6].singular_points()] == [(0, Fraction(1, 2))]


def test_unit_hemisphere_is_on_the_floor(floors):
    # trivial: S(1, 0) always carries a face
    for m in ALL_M:
        keys = {h.geometry_key() for h in floors[m].hemispheres}
        assert ((Fraction(0), Fraction(0)), Fraction(1)) in keys


def test_strictly_below():
    # trivial: the hemisphere of radius 1/3 at 1/3 lies under the unit hemispheres at 0 and 1
    ring = RingSpec(5)
    small = Hemisphere.make(ring, (1, 0), (3, 0))
    units = [Hemisphere.make(ring, (k, 0), (1, 0)) for k in (-1, 0, 1, 2)]
    assert is_strictly_below(ring, small, units)
    assert not is_strictly_below(ring, units[1], [small, units[0], units[2]])


def test_enumeration_is_unimodular_and_in_strip():
    # trivial
    ring = RingSpec(13)
    lat = Lattice(ring)
    for h in enumerate_hemispheres(ring, 20):
        assert ring.norm_ab(*h.mu) <= 20
        (x, y), shift = lat.reduce(*h.center)
        assert shift == (0, 0)


def test_norm_ceiling_enforced():
    # trivial: m = 13 needs hemispheres of norm above 2
    with pytest.raises(BoundExceeded):
        compute_floor(RingSpec(13), norm_ceiling=2)


@pytest.mark.parametrize("m", ALL_M)
def test_raw_cells_form_a_torus(floors, m):
    # trivial: the floor modulo translations is a torus
    raw = extract_cells(floors[m])
    assert raw.euler_count() == 0
    data = json.loads(json.dumps(raw.to_json()))
    assert data["schema"] == "bianchihom.rawcells/1"
    assert len(data["vertices"]) == len(raw.vertices)
    obj = raw.to_obj()
    assert obj.count("\nv ") == len(raw.vertices)
    assert obj.count("\nf ") == len(raw.faces)
