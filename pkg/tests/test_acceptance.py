"""The eight acceptance criteria, each reported as one PASS/FAIL line in the summary.

Expected values here are literal transcriptions of the published tables; they
do not go through the bundled fixtures.
"""

import random
from fractions import Fraction

from bianchihom.abelianlin import FgAbelianGroup, matmul, smith_normal_form
from bianchihom.equivss import Presentation, chain_candidates, low_degree_check, mod_p_dimensions, uct
from bianchihom.finhom import CoeffRing, InclusionData, StabilizerHomology, induced_map, lemma_rule
from bianchihom.halfspace import HPoint, PslMatrix, act_interior
from bianchihom.orbifold import equivariant_euler_characteristic
from bianchihom.quadring import RingSpec, norm
from bianchihom.reportcli import load_fixture, mass_terms
from conftest import FIGURE_M, Q_TOP, TRIVIAL_CLASS_M, gamma, pages, record_acceptance, resolved
from oracles import invariant_factors
from test_finhom import _incidences, _is_injective

G = FgAbelianGroup.parse


def _report(number, failures, ok_detail):
    passed = not failures
    record_acceptance(number, passed, ok_detail if passed else "; ".join(failures[:4]))
    assert passed, failures


# -- criterion 1 -------------------------------------------------------------

ORBIT_COUNTS = {5: (5, 7, 3), 6: (5, 7, 3), 10: (9, 15, 7), 13: (17, 28, 12), 15: (5, 8, 4)}
STABILIZERS = {
    5: [{"C2": 1, "C3": 1, "V4": 2, "ZxZ": 1}, {"C2": 4, "C3": 1, "Trivial": 2}, {"Trivial": 3}],
    6: [{"A4": 2, "C2": 1, "C3": 1, "ZxZ": 1}, {"C2": 2, "C3": 3, "Trivial": 2}, {"Trivial": 3}],
    10: [{"C2": 3, "C3": 3, "V4": 2, "ZxZ": 1}, {"C2": 6, "C3": 3, "Trivial": 6}, {"Trivial": 7}],
    13: [{"C2": 6, "C3": 4, "S3": 4, "V4": 2, "ZxZ": 1}, {"C2": 13, "C3": 6, "Trivial": 9}, {"Trivial": 12}],
    15: [{"C2": 2, "C3": 2, "ZxZ": 1}, {"C2": 2, "C3": 2, "Trivial": 4}, {"Trivial": 4}],
}


def test_criterion_1_geometry():
    """published: orbit counts and stabilizer multisets."""
    failures = []
    for m in FIGURE_M:
        gx = gamma(m)
        if tuple(gx.counts()) != ORBIT_COUNTS[m]:
            failures.append(f"m={m} counts {gx.counts()}")
        types = [gx.type_multiset(d) for d in range(3)]
        if types != STABILIZERS[m]:
            failures.append(f"m={m} types {types}")
    _report(1, failures, "orbit counts and stabilizer types match for m = 5, 6, 10, 13, 15")


# -- criterion 2 -------------------------------------------------------------

MASS_TERMS = {
    5: ["1/2", "1/3", "2/4", "-2", "-4/2", "-1/3", "3"],
    6: ["2/12", "1/3", "1/2", "-2", "-3/3", "-2/2", "3"],
    10: ["3/3", "2/4", "3/2", "-3/3", "-6/2", "-6", "7"],
    13: ["6/2", "4/3", "2/4", "4/6", "-9", "-13/2", "-6/3", "12"],
    15: ["2/2", "2/3", "-4", "-2/2", "-2/3", "4"],
}


def test_criterion_2_mass_formula():
    """published: summands of the mass formula; the total vanishes exactly."""
    failures = []
    for m in FIGURE_M:
        gx = gamma(m)
        chi = equivariant_euler_characteristic(gx)
        if chi != Fraction(0):
            failures.append(f"m={m} chi={chi}")
        if sorted(mass_terms(gx)) != sorted(MASS_TERMS[m]):
            failures.append(f"m={m} terms {mass_terms(gx)}")
        if sum(Fraction(t) for t in MASS_TERMS[m]) != 0:
            failures.append(f"m={m} transcription does not sum to zero")
    _report(2, failures, "equivariant Euler characteristic is 0 with the expected summands")


# -- criterion 3 -------------------------------------------------------------

BOTTOM_ROW = {5: (4, 2), 6: (4, 2), 10: (8, 5), 13: (16, 10), 15: (4, 3)}


def test_criterion_3_first_differential():
    """published: primary ranks of d1 on odd rows and the bottom-row divisors."""
    failures = []
    p13, p5 = pages(13, "Z"), pages(5, "Z")
    for q in range(1, Q_TOP + 1, 2):
        want2 = 12 if q == 1 else 13
        want3 = 4 if q % 4 == 1 else 6
        if p13.d1_primary_rank(1, q, 2) != want2:
            failures.append(f"m=13 q={q} 2-rank {p13.d1_primary_rank(1, q, 2)}")
        if p13.d1_primary_rank(1, q, 3) != want3:
            failures.append(f"m=13 q={q} 3-rank {p13.d1_primary_rank(1, q, 3)}")
        want5 = 3 if q == 1 else 4
        if p5.d1_primary_rank(1, q, 2) != want5:
            failures.append(f"m=5 q={q} 2-rank {p5.d1_primary_rank(1, q, 2)}")
    for m, (mult1, mult2) in BOTTOM_ROW.items():
        pg = pages(m, "Z")
        for p, mult in ((1, mult1), (2, mult2)):
            divs = pg.d1_elementary_divisors(p)
            if divs != [1] * mult:
                failures.append(f"m={m} p={p} divisors {divs}")
    _report(3, failures, "d1 primary ranks and bottom-row elementary divisors match")


# -- criterion 4 -------------------------------------------------------------


def test_criterion_4_second_differential():
    """published: the d2 images for m = 13 and 10; vanishing for trivial class number."""
    failures = []
    pg = pages(13, "Z")
    kinds = sorted("primitive" if pg.is_primitive_infinite(v) else "zero" if not any(v) else "other" for v in pg.d2_images)
    if kinds != ["primitive", "zero"]:
        failures.append(f"m=13 images {kinds}")
    # a primitive image spans a direct summand: its column has Smith diagonal (1)
    for v in pg.d2_images:
        if pg.is_primitive_infinite(v):
            free = [x for x, o in zip(v, pg.e2[(0, 1)].orders) if o == 0]
            if smith_normal_form([[x] for x in free], 1).diagonal != [1]:
                failures.append("m=13 primitive image is not a summand")
    if pg.e3[(0, 1)] != G("Z + (Z/2)^2"):
        failures.append(f"m=13 E3(0,1) = {pg.e3[(0, 1)]}")
    if pages(13, "Z2").d2_rank() != 1:
        failures.append("m=13 mod-2 rank")
    p10 = pages(10, "Z")
    if 3 not in [p10.image_order(v) for v in p10.d2_images]:
        failures.append("m=10 has no order-3 image")
    for m in TRIVIAL_CLASS_M:
        for tag in ("Z", "Z2", "Z3", "Z4"):
            if not pages(m, tag).d2_is_zero():
                failures.append(f"m={m} {tag} d2 nonzero")
    _report(4, failures, "d2 images for m = 13, 10 and vanishing for m = 1, 2, 3, 7, 11")


# -- criterion 5 -------------------------------------------------------------


def _table(m, q):
    if m == 5:
        return {1: "Z^2 + Z/3 + (Z/2)^2", 2: "Z + Z/4 + Z/3 + Z/2"}.get(q) or f"Z/3 + (Z/2)^{q}"
    if m == 10:
        return {1: "Z^3 + (Z/2)^2", 2: "Z^2 + Z/4 + Z/3 + Z/2"}.get(q) or f"Z/3 + (Z/2)^{q}"
    if m == 15:
        return {1: "Z^2 + Z/3 + Z/2", 2: "Z + Z/3 + Z/2"}.get(q) or "Z/3 + Z/2"
    if m == 13:
        if q <= 2:
            return {1: "Z^3 + (Z/2)^2", 2: "Z^2 + Z/4 + (Z/3)^2 + Z/2"}[q]
        return f"(Z/2)^{q}" + (" + (Z/3)^2" if q % 4 in (2, 3) else "")
    if m == 6:
        if q <= 2:
            return {1: "Z^2 + Z/3 + Z/2", 2: "Z + Z/4 + Z/3 + (Z/2)^2"}[q]
        k, r = divmod(q - 3, 6)
        return f"Z/3 + (Z/2)^{2 * k + (2, 1, 4, 3, 2, 5)[r]}"
    raise KeyError(m)


def test_criterion_5_final_tables():
    """published: integral homology for 1 <= q <= 12 with unique resolution."""
    failures = []
    for m in FIGURE_M:
        for r in resolved(m)[1:]:
            if r.status != "Unique":
                failures.append(f"m={m} q={r.q} {r.status}")
            elif r.group != G(_table(m, r.q)):
                failures.append(f"m={m} q={r.q} got {r.group}")
    _report(5, failures, "H_q(Gamma; Z) for q <= 12 matches all five tables, every degree Unique")


# -- criterion 6 -------------------------------------------------------------


def _dims(m, p, q):
    if m == 13:
        if p == 2:
            return {1: 5, 2: 6}.get(q, 2 * q - 1)
        return None if q <= 2 else {3: 4, 0: 2, 2: 2, 1: 0}[q % 4]
    if m in (5, 10):
        if p == 2:
            return {1: 4, 2: 5}.get(q, 2 * q - 1) if m == 5 else {1: 5, 2: 6}.get(q, 2 * q - 1)
        return None if q <= 2 else 2
    if m == 15:
        return 3 if q <= 2 else 2
    if m == 6:
        if p == 3:
            return None if q <= 2 else 2
        if q <= 2:
            return {1: 3, 2: 5}[q]
        k, r = divmod(q - 3, 6)
        return 4 * k + (5, 3, 5, 7, 5, 7)[r]
    raise KeyError(m)


def test_criterion_6_mod_p_dimensions():
    """published: dimensions over F_2 and F_3 for q <= 12."""
    failures = []
    for m in FIGURE_M:
        for p, tag in ((2, "Z2"), (3, "Z3")):
            dims = mod_p_dimensions(pages(m, tag), Q_TOP)
            for q in range(1, Q_TOP + 1):
                want = _dims(m, p, q)
                if want is not None and dims[q] != want:
                    failures.append(f"m={m} F_{p} q={q}: {dims[q]} != {want}")
    _report(6, failures, "mod-2 and mod-3 dimension families match for q <= 12")


# -- criterion 7 -------------------------------------------------------------


def _random_words(rnd, ring, length=6):
    gens = [PslMatrix.of(ring, 1, 1, 0, 1), PslMatrix.translation(ring, (0, 1)), PslMatrix.of(ring, 0, -1, 1, 0)]
    gens += [g.inverse() for g in gens]
    g = PslMatrix.identity(ring)
    for _ in range(rnd.randint(0, length)):
        g = g @ rnd.choice(gens)
    return g


def test_criterion_7_property_suites():
    """derived and trivial: the always-on laws, re-run with a fixed seed."""
    failures = []
    rnd = random.Random(20240601)
    rings = [RingSpec(m) for m in FIGURE_M + TRIVIAL_CLASS_M]

    for _ in range(500):
        ring = rnd.choice(rings)
        x = ring.element(rnd.randint(-50, 50), rnd.randint(-50, 50))
        y = ring.element(rnd.randint(-50, 50), rnd.randint(-50, 50))
        if norm(x * y) != norm(x) * norm(y):
            failures.append(f"norm m={ring.m}")
    for _ in range(500):
        ring = rnd.choice(rings)
        g, h = _random_words(rnd, ring), _random_words(rnd, ring)
        p = HPoint(Fraction(rnd.randint(-9, 9), rnd.randint(1, 7)), Fraction(rnd.randint(-9, 9), rnd.randint(1, 7)), Fraction(rnd.randint(1, 20), rnd.randint(1, 7)))
        if act_interior(g @ h, p) != act_interior(g, act_interior(h, p)):
            failures.append(f"action m={ring.m}")
    for _ in range(100):
        r, c = rnd.randint(1, 4), rnd.randint(1, 4)
        mat = [[rnd.randint(-9, 9) for _ in range(c)] for _ in range(r)]
        sf = smith_normal_form(mat, c)
        if matmul(matmul(sf.u, mat), sf.v) != sf.s or sf.elementary_divisors != invariant_factors(mat, r, c):
            failures.append(f"snf {mat}")

    for m in FIGURE_M:
        for tag in ("Z", "Z2", "Z3", "Z4"):
            pg = pages(m, tag)
            for q in range(pg.q_max + 1):
                a, b = pg.d1[(1, q)], pg.d1[(2, q)]
                if a and b and b[0]:
                    orders = pg.e1[(0, q)].orders
                    prod = matmul(a, b)
                    if any(v % o if o else v for row, o in zip(prod, orders) for v in row):
                        failures.append(f"d1 squared m={m} {tag} q={q}")
            if pg.compute_d2(reverse_section=True) != pg.d2[(2, 0)]:
                failures.append(f"section dependence m={m} {tag}")

    for m in FIGURE_M:
        gx = gamma(m)
        for src, tgt, conj in _incidences(m):
            for tag in ("Z", "Z2", "Z3", "Z4"):
                ring = CoeffRing(tag)
                for q in range(1, Q_TOP + 1):
                    sh_s = StabilizerHomology(src, gx.ring, q, ring)
                    sh_t = StabilizerHomology(tgt, gx.ring, q, ring)
                    if not sh_s.size:
                        continue
                    block = induced_map(InclusionData(src, tgt, conj), sh_s, sh_t)
                    red = [[v % o for v in row] for row, o in zip(block, sh_t.orders)]
                    rule = lemma_rule(src.type_tag, tgt.type_tag, q, tag)
                    ok = not any(any(row) for row in red) if rule == "zero" else _is_injective(red, sh_s, sh_t)
                    if not ok:
                        failures.append(f"rule {src.type_tag}->{tgt.type_tag} q={q} {tag}")
            if tgt.is_finite:
                sh_s = StabilizerHomology(src, gx.ring, 1, CoeffRing("Z2"))
                sh_t = StabilizerHomology(tgt, gx.ring, 1, CoeffRing("Z2"))
                base = induced_map(InclusionData(src, tgt, conj), sh_s, sh_t)
                for t in tgt.elements:
                    if induced_map(InclusionData(src, tgt, conj @ t), sh_s, sh_t) != base:
                        failures.append(f"conjugation m={m}")

    for m in FIGURE_M:
        hom = [r.group for r in resolved(m)]
        d2s = mod_p_dimensions(pages(m, "Z2"), Q_TOP)
        d3s = mod_p_dimensions(pages(m, "Z3"), Q_TOP)
        z4 = pages(m, "Z4")
        for q in range(1, Q_TOP + 1):
            if uct(hom[q], hom[q - 1], 2).dim_mod_p(2) != d2s[q] or uct(hom[q], hom[q - 1], 3).dim_mod_p(3) != d3s[q]:
                failures.append(f"UCT m={m} q={q}")
            if uct(hom[q], hom[q - 1], 4) not in chain_candidates(z4.filtration_pieces(q), exponent=4):
                failures.append(f"UCT Z/4 m={m} q={q}")
    _report(7, failures, "property suites hold (norm, action, SNF, d1^2, section, induced maps, conjugation, UCT)")


# -- criterion 8 -------------------------------------------------------------


def test_criterion_8_low_degree():
    """published: stored presentations fit the low-degree exact sequence."""
    failures = []
    for m in (5, 10, 15):
        pres = load_fixture(m).data["presentation"]
        report = low_degree_check(pages(m, "Z"), Presentation(pres["generators"], pres["relators"]))
        if not report.consistent:
            failures.append(f"m={m}: {report.abelianization} not among {[str(c) for c in report.candidates]}")
    _report(8, failures, "low-degree sequence is consistent for m = 5, 10, 15")
