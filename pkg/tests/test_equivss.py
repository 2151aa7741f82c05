import pytest

from bianchihom.abelianlin import FgAbelianGroup, matmul
from bianchihom.equivss import (
    Family,
    FamilyBranch,
    Presentation,
    chain_candidates,
    detect_family,
    low_degree_check,
    mod_p_dimensions,
    uct,
)
from bianchihom.reportcli import load_fixture
from conftest import FIGURE_M, Q_TOP, TRIVIAL_CLASS_M, pages, resolved

G = FgAbelianGroup.parse
COEFFS = ("Z", "Z2", "Z3", "Z4")


def _with(field):
    return [m for m in FIGURE_M if field in load_fixture(m).data]


def _expected_rank(rules, q):
    for rule in rules:
        top = rule.get("q_to", 10**6)
        if rule["q_from"] <= q <= top and (q - rule["q_from"]) % rule["step"] == 0:
            return rule["rank"]
    return None


@pytest.mark.parametrize("m", FIGURE_M)
@pytest.mark.parametrize("tag", COEFFS)
def test_d1_squares_to_zero(m, tag):
    """trivial: d1 composed with d1 vanishes modulo the target orders."""
    pg = pages(m, tag)
    for q in range(pg.q_max + 1):
        a, b = pg.d1[(1, q)], pg.d1[(2, q)]
        if not a or not b or not b[0]:
            continue
        prod = matmul(a, b)
        orders = pg.e1[(0, q)].orders
        assert all(v % o == 0 if o else v == 0 for row, o in zip(prod, orders) for v in row)


@pytest.mark.parametrize("m", _with("d1_ranks"))
def test_d1_primary_ranks(m):
    """published: ranks of the primary blocks of d1 on the odd rows."""
    rules = load_fixture(m).data["d1_ranks"]
    pg = pages(m, "Z")
    checked = 0
    for prime in (2, 3):
        mine = [r for r in rules if r["prime"] == prime]
        for q in range(1, Q_TOP + 1):
            want = _expected_rank(mine, q)
            if want is None:
                continue
            assert pg.d1_primary_rank(1, q, prime) == want, (prime, q)
            checked += 1
    assert checked


@pytest.mark.parametrize("m", _with("elementary_divisors"))
def test_bottom_row_elementary_divisors(m):
    """published: elementary divisors of the bottom row."""
    pg = pages(m, "Z")
    for entry in load_fixture(m).data["elementary_divisors"]:
        divs = pg.d1_elementary_divisors(entry["p"])
        assert divs.count(entry["divisor"]) == entry["multiplicity"]
        assert set(divs) == {entry["divisor"]}


@pytest.mark.parametrize("m", FIGURE_M)
def test_second_page_groups(m):
    """published: low entries of the second page and the corrected E3 term."""
    fx = load_fixture(m).data
    pg = pages(m, "Z")
    for entry in fx.get("e2", []):
        assert pg.e2_group(entry["p"], entry["q"]) == G(entry["group"]), entry
    for entry in fx.get("e3", []):
        assert pg.e3[(entry["p"], entry["q"])] == G(entry["group"]), entry


class TestSecondDifferential:
    def test_thirteen_integral(self):
        """published: one primitive infinite image and one zero image."""
        pg = pages(13, "Z")
        kinds = sorted("primitive" if pg.is_primitive_infinite(v) else ("zero" if not any(v) else "other") for v in pg.d2_images)
        assert kinds == ["primitive", "zero"]
        assert pg.e3[(0, 1)] == G("Z + (Z/2)^2")
        assert pg.d2_rank() == 1

    def test_thirteen_mod_two(self):
        """published: the rank over F_2 is one."""
        assert pages(13, "Z2").d2_rank() == 1

    def test_ten_has_order_three_image(self):
        """published: one image has order three."""
        pg = pages(10, "Z")
        orders = [pg.image_order(v) for v in pg.d2_images]
        assert 3 in orders
        assert any(pg.is_primitive_infinite(v) for v in pg.d2_images)

    def test_rank_undefined_for_z4(self):
        with pytest.raises(ValueError):
            pages(13, "Z4").d2_rank()

    @pytest.mark.parametrize("m", FIGURE_M)
    @pytest.mark.parametrize("tag", COEFFS)
    def test_independent_of_section(self, m, tag):
        """trivial: the d2 class does not depend on the coset section."""
        pg = pages(m, tag)
        assert pg.compute_d2(reverse_section=True) == pg.d2[(2, 0)]

    @pytest.mark.parametrize("m", TRIVIAL_CLASS_M)
    @pytest.mark.parametrize("tag", COEFFS)
    def test_vanishes_without_cusps(self, m, tag):
        """published: no singular points, so d2 vanishes."""
        assert pages(m, tag).d2_is_zero()


@pytest.mark.parametrize("m", FIGURE_M)
def test_mod_p_dimensions(m):
    """published: dimensions over F_2 and F_3 for q <= 12."""
    fx = load_fixture(m)
    for tag in ("Z2", "Z3"):
        dims = mod_p_dimensions(pages(m, tag), Q_TOP)
        for q in range(1, Q_TOP + 1):
            want = fx.expected_dimension(tag, q)
            if want is not None:
                assert dims[q] == want, (tag, q)


@pytest.mark.parametrize("m", FIGURE_M)
def test_universal_coefficients_consistency(m):
    """derived: the integral answer reproduces every finite-coefficient run."""
    hom = [r.group for r in resolved(m)]
    dims2 = mod_p_dimensions(pages(m, "Z2"), Q_TOP)
    dims3 = mod_p_dimensions(pages(m, "Z3"), Q_TOP)
    z4 = pages(m, "Z4")
    for q in range(1, Q_TOP + 1):
        assert uct(hom[q], hom[q - 1], 2).dim_mod_p(2) == dims2[q]
        assert uct(hom[q], hom[q - 1], 3).dim_mod_p(3) == dims3[q]
        assert uct(hom[q], hom[q - 1], 4) in chain_candidates(z4.filtration_pieces(q), exponent=4)


@pytest.mark.parametrize("m", FIGURE_M)
def test_resolution_is_unique_and_matches(m):
    """published: integral homology in degrees up to 12."""
    fx = load_fixture(m)
    for r in resolved(m):
        assert r.status == "Unique", r.q
        assert r.group == fx.expected_homology(r.q), r.q


@pytest.mark.parametrize("m", FIGURE_M)
def test_detected_family_agrees(m):
    """published: the closed form agrees with the detected periodic family."""
    values = {r.q: r.group for r in resolved(m)}
    fam = detect_family(values)
    assert fam is not None
    assert 12 % fam.period == 0
    stored = load_fixture(m).homology_family()
    for q in range(3, 3 * 12):
        assert fam.value(q) == stored.value(q), q


@pytest.mark.parametrize("m", (5, 10, 15, 6))
def test_low_degree_sequence(m):
    """published: the stored abelianized presentation fits the low-degree sequence."""
    pres = load_fixture(m).data["presentation"]
    report = low_degree_check(pages(m, "Z"), Presentation(pres["generators"], pres["relators"]))
    assert report.consistent
    assert report.abelianization == resolved(m)[1].group


def test_chain_candidates_exponent_filter():
    assert chain_candidates([G("(Z/2)^5"), G("Z/2")]) == [G("(Z/2)^6"), G("Z/4 + (Z/2)^4")]
    pieces = [G("Z/4"), G("Z/2")]
    assert set(chain_candidates(pieces)) == {G("Z/8"), G("Z/4 + Z/2")}
    assert chain_candidates(pieces, exponent=4) == [G("Z/4 + Z/2")]


def test_family_describe_and_value():
    fam = Family(2, [FamilyBranch(3, 0, {2: (1, 1)}), FamilyBranch(4, 0, {3: (2, 0)})])
    assert fam.value(5) == G("(Z/2)^2")
    assert fam.value(6) == G("(Z/3)^2")
    assert fam.value(2) is None
    assert fam.describe() == ["q = 2k+3: (Z/2)^(k+1)", "q = 2k+4: (Z/3)^2"]


def test_detect_family_needs_samples():
    assert detect_family({3: G("Z/2")}) is None
