import pytest

from bianchihom.quadring import (
    OmegaKind,
    RingSpec,
    class_group_order,
    ideal_class_is_principal,
    ideal_from_pair,
    is_unimodular_pair,
    norm,
    reduced_forms,
    same_ideal_class,
)
from oracles import reduced_form_count, sympy_norm


def test_square_free_required():
    # trivial
    for bad in (0, -1, 4, 12, 18):
        with pytest.raises(ValueError):
            RingSpec(bad)


def test_omega_kind_by_residue():
    # trivial: w = sqrt(-m) unless m = 3 mod 4
    assert RingSpec(5).omega_kind is not RingSpec(3).omega_kind
    assert RingSpec(7).half and RingSpec(15).half
    assert not RingSpec(6).half and not RingSpec(13).half


@pytest.mark.parametrize("m,disc", [(1, -4), (2, -8), (3, -3), (5, -20), (6, -24), (7, -7), (15, -15)])
def test_discriminant(m, disc):
    # trivial
    assert RingSpec(m).discriminant == disc


@pytest.mark.parametrize("m,a,b", [(5, 1, 1), (5, 2, -3), (13, 4, 1), (15, 1, 1), (15, -3, 2), (3, 1, 1), (1, 3, 4)])
def test_norm_matches_algebraic_numbers(m, a, b):
    # derived: sympy algebraic numbers
    R = RingSpec(m)
    assert norm(R.element(a, b)) == sympy_norm(m, a, b)


@pytest.mark.parametrize("m,units", [(1, 2), (3, 3), (2, 1), (5, 1), (15, 1)])
def test_units_modulo_sign(m, units):
    # trivial: 4, 6 or 2 units in O, halved in PSL2
    assert len(RingSpec(m).units()) in (units, 2 * units)


@pytest.mark.parametrize("m,h", [(1, 1), (2, 1), (3, 1), (7, 1), (11, 1), (5, 2), (6, 2), (10, 2), (13, 2), (15, 2), (14, 4), (17, 4), (23, 3), (19, 1)])
def test_class_number(m, h):
    # published class numbers; also derived from an independent reduced-form count
    R = RingSpec(m)
    assert class_group_order(R) == h
    assert reduced_form_count(R.discriminant) == h
    assert len(reduced_forms(R.discriminant)) == h


def test_nonprincipal_ideal_for_m5():
    # trivial: (2, 1 + sqrt(-5)) is the standard non-principal ideal
    R = RingSpec(5)
    two, other = R.element(2), R.element(1, 1)
    ideal = ideal_from_pair(two, other)
    assert ideal.norm == 2
    assert not ideal_class_is_principal(ideal)
    assert not is_unimodular_pair(two, other)
    conj = ideal.conjugate()
    assert same_ideal_class(ideal, conj)  # class group of order two


def test_unimodular_pair_example():
    # trivial: 1*3 - 1*2 = 1
    R = RingSpec(13)
    assert is_unimodular_pair(R.element(3), R.element(2))
    assert ideal_class_is_principal(ideal_from_pair(R.element(3), R.element(2)))


def test_ideal_containment_and_product():
    # trivial: the square of a non-principal ideal in a class group of order two is principal
    R = RingSpec(10)
    ideal = ideal_from_pair(R.element(2), R.element(0, 1))
    assert not ideal_class_is_principal(ideal)
    sq = ideal * ideal
    assert ideal_class_is_principal(sq)
    assert sq.norm == ideal.norm**2
    assert all(ideal.contains(v) for v in sq.basis())
