"""The equivariant spectral sequence of the Gamma-complex and the resolution of extensions.

E1_{p,q} is the sum over p-cell orbits of H_q(Gamma_sigma; M).  The first
differential comes from the stabilizer inclusions twisted by the incidence
pairings.  Since the complex is two-dimensional, d2: E2_{2,q} -> E2_{0,q+1} is
the only further differential and E3 = E-infinity.

d2 on the bottom row is computed in the double complex C_*(X) tensor_Gamma B_*
with B the homogeneous bar resolution of Gamma: a face cycle is pushed to the
edges, lifted along the bar differential, pushed to the vertices, and finally
retracted into the bar resolution of each vertex stabilizer by a coset section.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Sequence

from .abelianlin import (
    FgAbelianGroup,
    Matrix,
    Subquotient,
    columns,
    from_columns,
    group_extension_candidates,
    matvec,
    rank_mod_p,
    relations_from_orders,
    smith_normal_form,
    zeros,
)
from .finhom import ALL_COEFFS, CoeffRing, InclusionData, StabilizerHomology, induced_map
from .halfspace import Cusp, PslMatrix, act_cusp
from .orbifold import CUSP_TYPE, GammaComplex, OrbitCell, StabilizerInfo


class CycleConditionViolated(RuntimeError):
    """The lifted chain is not a cycle; pairings or geometry are inconsistent."""


class CosetUndecidable(ValueError):
    """A coset of an infinite stabilizer was requested for an element outside its scope."""


class NoConsistentExtension(RuntimeError):
    """No candidate extension is compatible with the finite-coefficient data."""


class CheckFailed(RuntimeError):
    """A consistency check between independent data failed."""


# ---------------------------------------------------------------------------
# coset sections and the retraction


class EpsilonContext:
    """Right-coset section for a vertex stabilizer and the induced retraction.

    ``epsilon(g) = g * r(Gamma_sigma g)^(-1)`` where r picks one representative
    of each coset Gamma_sigma g, with r(Gamma_sigma) = 1.  For finite
    stabilizers the representative is the least element of the coset in the
    matrix order (``reverse`` picks the greatest instead); for a cusp
    stabilizer the coset of g is determined by the cusp g^(-1) s and the first
    element seen for each such cusp is used.
    """

    def __init__(self, cell: OrbitCell, reverse: bool = False):
        self.cell = cell
        self.stab = cell.stabilizer
        self.reverse = reverse
        self._seen: dict = {}
        if self.stab.is_finite:
            self._keys = {g.key() for g in self.stab.elements}
        else:
            p = cell.points[0]
            self.cusp = Cusp(p.x, p.y)

    def representative(self, g: PslMatrix) -> PslMatrix:
        if self.stab.is_finite:
            coset = [s @ g for s in self.stab.elements]
            if any(c.is_identity() for c in coset):
                return PslMatrix.identity(g.ring)
            return max(coset) if self.reverse else min(coset)
        key = act_cusp(g.inverse(), self.cusp).key()
        if key == self.cusp.key():
            return PslMatrix.identity(g.ring)
        if key not in self._seen:
            self._seen[key] = g
        return self._seen[key]

    def epsilon(self, g: PslMatrix) -> PslMatrix:
        out = g @ self.representative(g).inverse()
        if self.stab.is_finite:
            if out.key() not in self._keys:
                raise CosetUndecidable("retraction left the stabilizer")
        elif act_cusp(out, self.cusp) != self.cusp:
            raise CosetUndecidable("retraction does not fix the cusp")
        return out


# ---------------------------------------------------------------------------
# pages


@dataclass
class E1Column:
    """The stabilizer homologies making up E1_{p,q} with their coordinate offsets."""

    cells: list[StabilizerHomology]

    @property
    def orders(self) -> list[int]:
        return [o for h in self.cells for o in h.orders]

    @property
    def size(self) -> int:
        return sum(h.size for h in self.cells)

    def offsets(self) -> list[int]:
        out, pos = [], 0
        for h in self.cells:
            out.append(pos)
            pos += h.size
        return out

    def group(self) -> FgAbelianGroup:
        return FgAbelianGroup.from_cyclics(0, self.orders)

    def prime_labels(self) -> list[int]:
        """Prime of each coordinate (0 for degree-zero and cusp coordinates)."""
        return [part.prime for h in self.cells for part in h.parts for _ in part.orders]

    def labels(self) -> list[str]:
        out = []
        for idx, h in enumerate(self.cells):
            for part in h.parts:
                for k, _ in enumerate(part.orders):
                    tag = f"p{part.prime}" if part.prime else "main"
                    out.append(f"{idx}:{tag}:{k}")
        return out


class SpectralPages:
    """E1, d1, E2, d2 and E3 for one coefficient ring up to degree q_max."""

    def __init__(self, gx: GammaComplex, coeff: CoeffRing | str = "Z", q_max: int = 12):
        if isinstance(coeff, str):
            coeff = CoeffRing(coeff)
        self.gx, self.coeff, self.q_max = gx, coeff, q_max
        self.ring = gx.ring
        self.e1: dict[tuple[int, int], E1Column] = {}
        self.d1: dict[tuple[int, int], Matrix] = {}
        self.e2: dict[tuple[int, int], Subquotient] = {}
        self.d2: dict[tuple[int, int], Matrix] = {}
        self.d2_images: list[list[int]] = []
        self.e3: dict[tuple[int, int], FgAbelianGroup] = {}
        self.assemble_e1()
        self.compute_d1()
        self.compute_e2()
        self.compute_d2()

    # -- E1 and d1

    def assemble_e1(self) -> None:
        for q in range(self.q_max + 1):
            for p in range(3):
                self.e1[(p, q)] = E1Column(
                    [StabilizerHomology(c.stabilizer, self.ring, q, self.coeff) for c in self.gx.cells[p]]
                )

    def compute_d1(self) -> None:
        for q in range(self.q_max + 1):
            for p in (1, 2):
                src, dst = self.e1[(p, q)], self.e1[(p - 1, q)]
                mat = zeros(dst.size, src.size)
                soff, doff = src.offsets(), dst.offsets()
                for j, cell in enumerate(self.gx.cells[p]):
                    sh = src.cells[j]
                    for inc in cell.boundary:
                        th = dst.cells[inc.face]
                        if sh.size == 0 or th.size == 0:
                            continue
                        target = self.gx.cells[p - 1][inc.face].stabilizer
                        block = induced_map(InclusionData(cell.stabilizer, target, inc.pairing), sh, th)
                        for a in range(th.size):
                            for b in range(sh.size):
                                if block[a][b]:
                                    mat[doff[inc.face] + a][soff[j] + b] += inc.sign * block[a][b]
                orders = dst.orders
                self.d1[(p, q)] = [[v % o if o else v for v in row] for row, o in zip(mat, orders)]

    def d1_primary_rank(self, p: int, q: int, prime: int) -> int:
        """Rank over F_prime of the prime-primary block of d1_{p,q}."""
        src, dst = self.e1[(p, q)], self.e1[(p - 1, q)]
        rows = [i for i, lab in enumerate(dst.prime_labels()) if lab == prime]
        cols = [j for j, lab in enumerate(src.prime_labels()) if lab == prime]
        if not rows or not cols:
            return 0
        for idx_list, col in ((rows, dst), (cols, src)):
            if any(col.orders[i] != prime for i in idx_list):
                raise ValueError("primary block is not elementary abelian")
        block = [[self.d1[(p, q)][i][j] for j in cols] for i in rows]
        return rank_mod_p(block, prime)

    def d1_elementary_divisors(self, p: int) -> list[int]:
        """Elementary divisors of the bottom-row differential d1_{p,0} over Z."""
        mat = self.gx.boundary_matrix(p)
        return smith_normal_form(mat, len(self.gx.cells[p])).elementary_divisors

    # -- E2

    def compute_e2(self) -> None:
        for q in range(self.q_max + 1):
            for p in range(3):
                col = self.e1[(p, q)]
                n = col.size
                d_out = self.d1.get((p, q)) if p >= 1 else None
                tgt = relations_from_orders(self.e1[(p - 1, q)].orders) if p >= 1 else []
                d_in = columns(self.d1[(p + 1, q)], self.e1[(p + 1, q)].size) if p < 2 else []
                if d_out is not None and len(d_out) == 0:
                    d_out = None
                self.e2[(p, q)] = Subquotient(n, d_out, d_in, relations_from_orders(col.orders), tgt)

    def e2_group(self, p: int, q: int) -> FgAbelianGroup:
        return self.e2[(p, q)].group

    # -- d2

    def compute_d2(self, reverse_section: bool = False) -> Matrix:
        """d2: E2_{2,0} -> E2_{0,1} in normal coordinates, and E3."""
        for q in range(1, self.q_max + 1):
            if self.e2[(2, q)].nf.size:
                raise NotImplementedError("d2 on rows above the bottom row is not supported")
        src = self.e2[(2, 0)]
        dst = self.e2[(0, 1)]
        images = []
        raw = []
        contexts = {i: EpsilonContext(c, reverse_section) for i, c in enumerate(self.gx.cells[0])}
        for x in src.gens():
            vec = self.d2_raw(x, contexts)
            raw.append(vec)
            images.append(dst.coords(vec))
        mat = from_columns(images, dst.nf.size) if images else zeros(dst.nf.size, 0)
        if not reverse_section:
            self.d2[(2, 0)] = mat
            self.d2_images = images
            self.d2_raw_images = raw
            self._compute_e3()
        return mat

    def d2_raw(self, face_cycle: Sequence[int], contexts: dict[int, EpsilonContext]) -> list[int]:
        """Image of a face cycle in E1_{0,1} coordinates (before passing to E2)."""
        n = self.coeff.modulus
        gx = self.gx
        if any(not c.stabilizer.is_finite or c.stabilizer.order != 1 for c in gx.cells[2]):
            raise NotImplementedError("faces with nontrivial stabilizer are not supported in d2")
        edge_terms: dict[int, list[tuple[int, PslMatrix]]] = {}
        for f, coef in enumerate(face_cycle):
            if not coef:
                continue
            for inc in gx.cells[2][f].boundary:
                edge_terms.setdefault(inc.face, []).append((coef * inc.sign, inc.pairing.inverse()))
        vertex_terms: dict[int, list[tuple[int, PslMatrix, PslMatrix]]] = {}
        for e, terms in edge_terms.items():
            total = sum(c for c, _ in terms)
            if (total % n if n else total) != 0:
                raise CycleConditionViolated(f"edge {e} coefficients do not cancel")
            h0 = terms[0][1]
            for coef, h in terms:
                if h.key() == h0.key():
                    continue
                for vinc in gx.cells[1][e].boundary:
                    gi = vinc.pairing.inverse()
                    vertex_terms.setdefault(vinc.face, []).append((coef * vinc.sign, gi @ h0, gi @ h))
        e01 = self.e1[(0, 1)]
        out = [0] * e01.size
        offs = e01.offsets()
        for v, terms in vertex_terms.items():
            hom = e01.cells[v]
            if hom.size == 0:
                continue
            ctx = contexts[v]
            acc = [0] * hom.size
            for coef, a, b in terms:
                elt = ctx.epsilon(a).inverse() @ ctx.epsilon(b)
                cls = hom.element_class(elt)
                acc = [x + coef * y for x, y in zip(acc, cls)]
            acc = hom.reduce(acc)
            for i, val in enumerate(acc):
                out[offs[v] + i] = val
        return out

    def _compute_e3(self) -> None:
        src, dst = self.e2[(2, 0)], self.e2[(0, 1)]
        d2 = self.d2[(2, 0)]
        kernel = Subquotient(
            src.nf.size,
            d2 if dst.nf.size else None,
            [],
            relations_from_orders(src.orders),
            relations_from_orders(dst.orders),
        )
        coker = Subquotient(dst.nf.size, None, columns(d2, src.nf.size), relations_from_orders(dst.orders))
        self.e3_kernel, self.e3_cokernel = kernel, coker
        for key, sq in self.e2.items():
            self.e3[key] = sq.group
        self.e3[(2, 0)] = kernel.group
        self.e3[(0, 1)] = coker.group

    def d2_rank(self) -> int:
        """Rank of d2 over the prime field (for Z/p coefficients) or over Q.

        Z/4 coefficients have no rank in this sense; use the E3 groups instead.
        """
        n = self.coeff.modulus
        if n not in (0, 2, 3):
            raise ValueError("d2 rank is defined for Z, Z/2 and Z/3 coefficients")
        mat = self.d2[(2, 0)]
        if not mat or not mat[0]:
            return 0
        if n in (2, 3):
            return rank_mod_p(mat, n)
        free = [i for i, o in enumerate(self.e2[(0, 1)].orders) if o == 0]
        return smith_normal_form([mat[i] for i in free], len(mat[0])).rank if free else 0

    def d2_is_zero(self) -> bool:
        return all(v == 0 for row in self.d2[(2, 0)] for v in row)

    def is_primitive_infinite(self, image: Sequence[int]) -> bool:
        """The class generates a direct summand Z modulo torsion."""
        orders = self.e2[(0, 1)].orders
        free = [v for v, o in zip(image, orders) if o == 0]
        g = 0
        for v in free:
            g = gcd(g, v)
        return g == 1

    def image_order(self, image: Sequence[int]) -> int | None:
        """Order of a class in E2_{0,1} (None when infinite)."""
        orders = self.e2[(0, 1)].orders
        out = 1
        for v, o in zip(image, orders):
            if o == 0:
                if v:
                    return None
            elif v % o:
                out = out * (o // gcd(o, v)) // gcd(out, o // gcd(o, v))
        return out

    # -- summaries

    def e_infinity(self, p: int, q: int) -> FgAbelianGroup:
        return self.e3[(p, q)]

    def grid(self, page: int) -> dict[tuple[int, int], FgAbelianGroup]:
        if page == 1:
            return {k: v.group() for k, v in self.e1.items()}
        if page == 2:
            return {k: v.group for k, v in self.e2.items()}
        return dict(self.e3)

    def filtration_pieces(self, n: int) -> list[FgAbelianGroup]:
        """E-infinity terms on the diagonal p + q = n, from p = 0 upward."""
        return [self.e3[(p, n - p)] for p in range(3) if 0 <= n - p <= self.q_max]


# ---------------------------------------------------------------------------
# extensions and the universal coefficient filter


def uct(hq: FgAbelianGroup, hprev: FgAbelianGroup, n: int) -> FgAbelianGroup:
    """H_q(-; Z/n) from integral H_q and H_{q-1}."""
    return hq.tensor(n) + hprev.tor(n)


def chain_candidates(pieces: Sequence[FgAbelianGroup], exponent: int = 0) -> list[FgAbelianGroup]:
    """Groups with a filtration whose successive quotients are ``pieces`` (bottom first).

    A nonzero ``exponent`` keeps only groups annihilated by it (modules over Z/exponent).
    """
    current = {pieces[0]}
    for nxt in pieces[1:]:
        acc = set()
        for c in current:
            acc.update(group_extension_candidates(c, nxt))
        current = acc
    if exponent:
        current = {g for g in current if g.free_rank == 0 and all(exponent % d == 0 for d in g.invariant_factors)}
    return sorted(current, key=FgAbelianGroup.sort_key)


@dataclass
class ResolvedDegree:
    q: int
    candidates: list[FgAbelianGroup]
    survivors: list[FgAbelianGroup]

    @property
    def status(self) -> str:
        return "Unique" if len(self.survivors) == 1 else ("Ambiguous" if self.survivors else "Inconsistent")

    @property
    def group(self) -> FgAbelianGroup | None:
        return self.survivors[0] if len(self.survivors) == 1 else None


def resolve_extensions(pages: dict[str, SpectralPages], q_top: int | None = None) -> list[ResolvedDegree]:
    """Integral homology for q = 0..q_top, filtered by the Z/2, Z/3 and Z/4 runs."""
    zp = pages["Z"]
    top = q_top if q_top is not None else zp.q_max
    cands = {0: [FgAbelianGroup(1, ())]}
    for q in range(1, top + 1):
        cands[q] = chain_candidates(zp.filtration_pieces(q))
    finite = {}
    for tag in ("Z2", "Z3", "Z4"):
        if tag not in pages:
            continue
        pg = pages[tag]
        n = pg.coeff.modulus
        for q in range(0, top + 1):
            pieces = pg.filtration_pieces(q)
            if n in (2, 3):
                finite[(n, q)] = ("dim", sum(x.dim_mod_p(n) for x in pieces))
            else:
                finite[(n, q)] = ("groups", set(chain_candidates(pieces, exponent=n)))

    def compatible(prev: FgAbelianGroup, cur: FgAbelianGroup, q: int) -> bool:
        for n in (2, 3, 4):
            if (n, q) not in finite:
                continue
            kind, val = finite[(n, q)]
            g = uct(cur, prev, n)
            if kind == "dim" and g.dim_mod_p(n) != val:
                return False
            if kind == "groups" and g not in val:
                return False
        return True

    alive = {q: list(cands[q]) for q in cands}
    changed = True
    while changed:
        changed = False
        for q in range(1, top + 1):
            keep_cur = [c for c in alive[q] if any(compatible(p, c, q) for p in alive[q - 1])]
            keep_prev = [p for p in alive[q - 1] if any(compatible(p, c, q) for c in alive[q])]
            if len(keep_cur) != len(alive[q]) or len(keep_prev) != len(alive[q - 1]):
                changed = True
            alive[q], alive[q - 1] = keep_cur, keep_prev
    out = [ResolvedDegree(q, cands[q], alive[q]) for q in range(0, top + 1)]
    if any(not r.survivors for r in out):
        raise NoConsistentExtension("no candidate survives the coefficient checks")
    return out


def compute_all_pages(gx: GammaComplex, q_max: int = 12, coeffs: Sequence[str] = ("Z", "Z2", "Z3", "Z4")) -> dict[str, SpectralPages]:
    return {tag: SpectralPages(gx, tag, q_max) for tag in coeffs}


def integral_homology(gx: GammaComplex, q_max: int = 12) -> list[ResolvedDegree]:
    """H_q(Gamma; Z) for q <= q_max; one extra degree is computed for the filter."""
    pages = compute_all_pages(gx, q_max + 1)
    return resolve_extensions(pages, q_max + 1)[: q_max + 1]


def mod_p_dimensions(pages: SpectralPages, q_top: int | None = None) -> list[int]:
    """dim H_q(Gamma; Z/p) from the E-infinity page, q = 0..q_top."""
    n = pages.coeff.modulus
    top = q_top if q_top is not None else pages.q_max
    return [sum(x.dim_mod_p(n) for x in pages.filtration_pieces(q)) for q in range(top + 1)]


# ---------------------------------------------------------------------------
# low degree sequence


@dataclass
class Presentation:
    """Generators and relators of Gamma, relators given as abelianized exponent vectors."""

    generators: list[str]
    relators: list[list[int]]

    def abelianization(self) -> FgAbelianGroup:
        from .abelianlin import normal_form_of

        return normal_form_of(len(self.generators), self.relators).group


@dataclass
class LowDegreeReport:
    abelianization: FgAbelianGroup
    e_inf_01: FgAbelianGroup
    e_inf_10: FgAbelianGroup
    candidates: list[FgAbelianGroup]
    consistent: bool


def low_degree_check(pages: SpectralPages, presentation: Presentation) -> LowDegreeReport:
    """0 -> E_inf(0,1) -> Gamma^ab -> E_inf(1,0) -> 0 must be realizable."""
    ab = presentation.abelianization()
    a, b = pages.e3[(0, 1)], pages.e3[(1, 0)]
    cands = group_extension_candidates(a, b)
    ok = ab in cands
    return LowDegreeReport(ab, a, b, cands, ok)


# ---------------------------------------------------------------------------
# closed-form families


@dataclass
class FamilyBranch:
    residue: int
    free_rank: int
    torsion: dict[int, tuple[int, int]]  # prime power -> (constant, slope in k)

    def group(self, k: int) -> FgAbelianGroup:
        orders = []
        for pp, (c0, c1) in self.torsion.items():
            orders += [pp] * (c0 + c1 * k)
        return FgAbelianGroup.from_cyclics(self.free_rank, orders)


@dataclass
class Family:
    """H_q for q = period*k + residue, k >= 0, over branches with residues >= start."""

    period: int
    branches: list[FamilyBranch]

    def value(self, q: int) -> FgAbelianGroup | None:
        for br in self.branches:
            if q >= br.residue and (q - br.residue) % self.period == 0:
                return br.group((q - br.residue) // self.period)
        return None

    def describe(self) -> list[str]:
        out = []
        for br in self.branches:
            terms = []
            if br.free_rank:
                terms.append("Z" if br.free_rank == 1 else f"Z^{br.free_rank}")
            for pp, (c0, c1) in sorted(br.torsion.items(), key=lambda t: (-t[0])):
                if c1 == 0 and c0 == 0:
                    continue
                if c1 == 0:
                    terms.append(f"Z/{pp}" if c0 == 1 else f"(Z/{pp})^{c0}")
                else:
                    expo = f"{c1 if c1 != 1 else ''}k" + (f"+{c0}" if c0 else "")
                    terms.append(f"(Z/{pp})^({expo})")
            out.append(f"q = {self.period}k+{br.residue}: " + (" + ".join(terms) or "0"))
        return out


def detect_family(values: dict[int, FgAbelianGroup], start: int = 3) -> Family | None:
    """Smallest period dividing 12 whose branches have exponents affine in k.

    Every branch needs at least two sample degrees at or above ``start``.
    """
    qs = sorted(q for q in values if q >= start)
    for period in (1, 2, 3, 4, 6, 12):
        branches = []
        ok = True
        for r in range(start, start + period):
            samples = [q for q in qs if q >= r and (q - r) % period == 0]
            if len(samples) < 2:
                ok = False
                break
            g0 = values[samples[0]]
            g1 = values[samples[1]]
            if g0.free_rank != g1.free_rank:
                ok = False
                break
            c0 = _pp_counts(g0)
            c1 = _pp_counts(g1)
            tors = {}
            for pp in set(c0) | set(c1):
                a, b = c0.get(pp, 0), c1.get(pp, 0)
                tors[pp] = (a, b - a)
            br = FamilyBranch(r, g0.free_rank, tors)
            if any(br.group((q - r) // period) != values[q] or min(0, *(c + s * ((q - r) // period) for c, s in tors.values())) < 0 for q in samples):
                ok = False
                break
            branches.append(br)
        if ok:
            return Family(period, branches)
    return None


def _pp_counts(g: FgAbelianGroup) -> dict[int, int]:
    out: dict[int, int] = {}
    for pp in g.primary_cyclics():
        out[pp] = out.get(pp, 0) + 1
    return out
