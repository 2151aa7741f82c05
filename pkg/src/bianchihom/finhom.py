"""Homology of cell stabilizers and the maps induced by their inclusions.

Finite stabilizers here have abelian Sylow subgroups (cyclic of order 2 or 3,
or a Klein four-group), so for q >= 1 the p-primary part of H_q(G; M) is the
module of N_G(P)-coinvariants of H_q(P; M).  H_q(P; M) is computed from the
periodic (cyclic) or tensor-product (Klein) free resolution, and every map
induced by a homomorphism of such groups comes from a chain map obtained by
the comparison theorem: each basis element is lifted by solving an integer
linear system over the group ring.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .abelianlin import (
    FgAbelianGroup,
    IntMatrix,
    Matrix,
    Subquotient,
    from_columns,
    matvec,
    relations_from_orders,
    smith_normal_form,
    solve_integer,
    zeros,
)
from .halfspace import PslMatrix
from .orbifold import CUSP_TYPE, StabilizerInfo, TYPE_ORDERS, close_group
from .quadring import RingSpec


class UnsupportedInclusion(ValueError):
    """Raised for a subgroup inclusion outside the supported stabilizer lattice."""


class LiftFailure(RuntimeError):
    """The comparison-theorem lift did not exist; this indicates a bug."""


# ---------------------------------------------------------------------------
# coefficient rings


@dataclass(frozen=True)
class CoeffRing:
    """Trivial coefficients Z, Z/2, Z/3 or Z/4."""

    tag: str

    MODULI = {"Z": 0, "Z2": 2, "Z3": 3, "Z4": 4}

    def __post_init__(self):
        if self.tag not in self.MODULI:
            raise ValueError(f"unknown coefficient ring {self.tag!r}")

    @property
    def modulus(self) -> int:
        return self.MODULI[self.tag]

    def relations(self, n: int) -> list[list[int]]:
        return relations_from_orders([self.modulus] * n) if self.modulus else []

    def group(self) -> FgAbelianGroup:
        return FgAbelianGroup.from_cyclics(0, [self.modulus])

    def __str__(self):
        return "Z" if self.tag == "Z" else f"Z/{self.modulus}"


ALL_COEFFS = tuple(CoeffRing(t) for t in ("Z", "Z2", "Z3", "Z4"))


# ---------------------------------------------------------------------------
# standard abelian models: products of cyclic groups with their resolutions


Elt = tuple[int, ...]


@dataclass(frozen=True)
class AbelianModel:
    """The group Z/n1 x ... x Z/ns with elements written as exponent tuples."""

    orders: tuple[int, ...]

    @property
    def elements(self) -> list[Elt]:
        return list(itertools.product(*(range(n) for n in self.orders)))

    @property
    def size(self) -> int:
        out = 1
        for n in self.orders:
            out *= n
        return out

    def index(self, g: Elt) -> int:
        idx = 0
        for n, e in zip(self.orders, g):
            idx = idx * n + e % n
        return idx

    def mul(self, g: Elt, h: Elt) -> Elt:
        return tuple((a + b) % n for a, b, n in zip(g, h, self.orders))

    def basis(self, degree: int) -> list[tuple[int, ...]]:
        """Multi-indices of total degree ``degree`` (generators of the free module)."""
        s = len(self.orders)
        if s == 0:
            return [()] if degree == 0 else []
        return sorted((c for c in itertools.product(range(degree + 1), repeat=s) if sum(c) == degree), reverse=True)

    def rank(self, degree: int) -> int:
        return len(self.basis(degree))

    def boundary_terms(self, idx: tuple[int, ...]) -> list[tuple[int, Elt, tuple[int, ...]]]:
        """Boundary of a basis element as (coefficient, group element, lower multi-index)."""
        out = []
        sign = 1
        zero = tuple(0 for _ in self.orders)
        for j, i in enumerate(idx):
            if i > 0:
                low = idx[:j] + (i - 1,) + idx[j + 1 :]
                if i % 2:  # t_j - 1
                    t = list(zero)
                    t[j] = 1
                    out.append((sign, tuple(t), low))
                    out.append((-sign, zero, low))
                else:  # norm element
                    for a in range(self.orders[j]):
                        t = list(zero)
                        t[j] = a
                        out.append((sign, tuple(t), low))
            if i % 2:
                sign = -sign
        return out

    def free_boundary(self, degree: int) -> Matrix:
        """Z-matrix of the differential F_degree -> F_{degree-1} on the basis (multi-index, element)."""
        src, dst = self.basis(degree), self.basis(degree - 1)
        dpos = {b: i for i, b in enumerate(dst)}
        n = self.size
        mat = zeros(len(dst) * n, len(src) * n)
        elts = self.elements
        for si, b in enumerate(src):
            terms = self.boundary_terms(b)
            for g in elts:
                col = si * n + self.index(g)
                for c, h, low in terms:
                    mat[dpos[low] * n + self.index(self.mul(g, h))][col] += c
        return mat

    def trivial_boundary(self, degree: int) -> Matrix:
        """Differential of F tensor_G Z."""
        src, dst = self.basis(degree), self.basis(degree - 1)
        dpos = {b: i for i, b in enumerate(dst)}
        mat = zeros(len(dst), len(src))
        for si, b in enumerate(src):
            for c, _, low in self.boundary_terms(b):
                mat[dpos[low]][si] += c
        return mat


@lru_cache(maxsize=None)
def _free_boundary_smith(orders: tuple[int, ...], degree: int):
    model = AbelianModel(orders)
    mat = model.free_boundary(degree)
    return mat, smith_normal_form(mat, model.rank(degree) * model.size)


@lru_cache(maxsize=None)
def chain_map(src: tuple[int, ...], dst: tuple[int, ...], images: tuple[Elt, ...], degree: int) -> tuple[tuple[int, ...], ...]:
    """Comparison-theorem lift of a homomorphism, as vectors in F_degree(dst).

    ``images[j]`` is the image of the j-th cyclic generator of ``src``.  Entry
    k of the result is the image of the k-th basis element of F_degree(src),
    written on the Z-basis (multi-index, element) of F_degree(dst).
    """
    s_model, d_model = AbelianModel(src), AbelianModel(dst)
    n = d_model.size
    if degree == 0:
        out = [0] * (d_model.rank(0) * n)
        out[d_model.index(tuple(0 for _ in dst))] = 1
        return (tuple(out),)
    lower = chain_map(src, dst, images, degree - 1)
    lower_basis = {b: i for i, b in enumerate(s_model.basis(degree - 1))}
    d_lower = d_model.basis(degree - 1)
    mat, sf = _free_boundary_smith(dst, degree)
    cols = d_model.rank(degree) * n
    result = []
    for b in s_model.basis(degree):
        target = [0] * (len(d_lower) * n)
        for c, h, low in s_model.boundary_terms(b):
            img = _apply_hom(d_model, images, h)
            vec = lower[lower_basis[low]]
            for pos, coef in enumerate(vec):
                if coef:
                    blk, elt = divmod(pos, n)
                    g = d_model.elements[elt]
                    target[blk * n + d_model.index(d_model.mul(img, g))] += c * coef
        x = solve_integer(mat, target, cols, sf)
        if x is None:
            raise LiftFailure(f"no lift in degree {degree}")
        result.append(tuple(x))
    return tuple(result)


def _apply_hom(d_model: AbelianModel, images: Sequence[Elt], h: Elt) -> Elt:
    out = tuple(0 for _ in d_model.orders)
    for e, img in zip(h, images):
        for _ in range(e):
            out = d_model.mul(out, img)
    return out


def augmented_chain_map(src, dst, images, degree) -> Matrix:
    """The chain map tensored with trivial coefficients: rows dst basis, columns src basis."""
    d_model = AbelianModel(dst)
    n = d_model.size
    vecs = chain_map(tuple(src), tuple(dst), tuple(tuple(i) for i in images), degree)
    rows = d_model.rank(degree)
    mat = zeros(rows, len(vecs))
    for j, vec in enumerate(vecs):
        for pos, coef in enumerate(vec):
            if coef:
                mat[pos // n][j] += coef
    return mat


@lru_cache(maxsize=None)
def model_homology(orders: tuple[int, ...], degree: int, modulus: int) -> Subquotient:
    """H_degree(model; Z/modulus) on the trivial resolution complex (modulus 0 means Z)."""
    model = AbelianModel(orders)
    n = model.rank(degree)
    rel = relations_from_orders([modulus] * n) if modulus else []
    d_out = model.trivial_boundary(degree) if degree > 0 else None
    tgt = relations_from_orders([modulus] * model.rank(degree - 1)) if modulus and degree > 0 else []
    d_in = model.trivial_boundary(degree + 1)
    from .abelianlin import columns

    return Subquotient(n, d_out, columns(d_in, model.rank(degree + 1)), rel, tgt)


def resolution_oracle(src: tuple[int, ...], dst: tuple[int, ...], images, q_max: int, modulus: int = 0) -> list[Matrix]:
    """Induced maps H_q(src) -> H_q(dst) for q = 0..q_max in normal coordinates."""
    from .abelianlin import induced_matrix

    out = []
    for q in range(q_max + 1):
        f = augmented_chain_map(src, dst, images, q)
        out.append(induced_matrix(model_homology(tuple(src), q, modulus), model_homology(tuple(dst), q, modulus), f))
    return out


# ---------------------------------------------------------------------------
# tabulated homology of the stabilizer types


def stab_homology(type_tag: str, q: int, coeff: CoeffRing | str) -> FgAbelianGroup:
    """Known homology of the stabilizer types with trivial coefficients."""
    if isinstance(coeff, str):
        coeff = CoeffRing(coeff)
    n = coeff.modulus
    G = FgAbelianGroup.from_cyclics
    if q < 0:
        raise ValueError("degree must be nonnegative")
    if q == 0:
        return G(1, []) if n == 0 else G(0, [n])
    if type_tag == CUSP_TYPE:
        r = {1: 2, 2: 1}.get(q, 0)
        return G(r, []) if n == 0 else G(0, [n] * r)
    if type_tag == "Trivial":
        return G(0, [])
    if n == 4:
        n = 2  # the finite types have Z/4 homology equal to Z/2 homology in positive degrees
    if type_tag in ("C2", "C3"):
        k = TYPE_ORDERS[type_tag]
        if n == 0:
            return G(0, [k] if q % 2 else [])
        return G(0, [k] if n == k else [])
    if type_tag == "V4":
        if n == 0:
            return G(0, [2] * ((q + 3) // 2 if q % 2 else q // 2))
        return G(0, [2] * (q + 1) if n == 2 else [])
    if type_tag == "S3":
        r = q % 4
        if n == 0:
            return G(0, {1: [2], 2: [], 3: [6], 0: []}[r])
        if n == 3:
            return G(0, [3] if r in (3, 0) else [])
        return G(0, [2])
    if type_tag == "A4":
        k, r = divmod(q - 1, 6)
        if n == 0:
            extra = {0: [3], 1: [2], 2: [6], 3: [], 4: [2, 6], 5: [2]}[r]
            return G(0, [2] * k + extra)
        if n == 3:
            return G(0, [3])
        dims = {0: 2 * k, 1: 2 * k + 1, 2: 2 * k + 2, 3: 2 * k + 1, 4: 2 * k + 2, 5: 2 * k + 3}
        return G(0, [2] * dims[r])
    raise UnsupportedInclusion(f"unknown stabilizer type {type_tag}")


# ---------------------------------------------------------------------------
# finite stabilizers: Sylow data


def _is_p_power(n: int, p: int) -> bool:
    while n % p == 0:
        n //= p
    return n == 1


def _p_part(n: int, p: int) -> int:
    out = 1
    while n % p == 0:
        n //= p
        out *= p
    return out


@dataclass
class SylowData:
    """A Sylow p-subgroup with a fixed identification to a standard model."""

    p: int
    model: tuple[int, ...]
    generators: list[PslMatrix]
    exponents: dict  # element key -> exponent tuple
    elements: list[PslMatrix]
    normalizer_autos: list[tuple[Elt, ...]]  # generator images under conjugation


def _sylow(elements: list[PslMatrix], ring: RingSpec, p: int) -> SylowData:
    target = _p_part(len(elements), p)
    pel = sorted(g for g in elements if _is_p_power(g.order(), p))
    gens: list[PslMatrix] = []
    group = [PslMatrix.identity(ring)]
    for g in pel:
        if len(group) == target:
            break
        if any(g.key() == h.key() for h in group):
            continue
        trial = close_group(gens + [g], ring)
        if _is_p_power(len(trial), p) and target % len(trial) == 0:
            gens.append(g)
            group = trial
    if len(group) != target:
        raise UnsupportedInclusion("could not find a Sylow subgroup")
    if len(gens) == 1:
        model = (gens[0].order(),)
    elif len(gens) == 2 and target == 4:
        model = (2, 2)
    elif not gens:
        model = ()
    else:
        raise UnsupportedInclusion("Sylow subgroup is not of a supported shape")
    mod = AbelianModel(model)
    exps = {}
    for e in mod.elements:
        g = PslMatrix.identity(ring)
        for gen, k in zip(gens, e):
            g = g @ (gen**k)
        exps[g.key()] = e
    keys = set(exps)
    autos = []
    for nrm in elements:
        ninv = nrm.inverse()
        conj = [nrm @ x @ ninv for x in group]
        if {c.key() for c in conj} == keys:
            auto = tuple(exps[(nrm @ gen @ ninv).key()] for gen in gens)
            if auto not in autos:
                autos.append(auto)
    autos.sort()
    return SylowData(p, model, gens, exps, group, autos)


def _primes_of(n: int) -> list[int]:
    return [p for p in (2, 3) if n % p == 0]


@dataclass
class HomologyPart:
    """One summand of a stabilizer homology group, with its coordinate block."""

    prime: int  # 0 for the degree-zero or cusp part
    group: Subquotient | None
    orders: list[int]


class StabilizerHomology:
    """H_q(Gamma_sigma; M) with explicit coordinates.

    Coordinates are the concatenation of the normal coordinates of the p-primary
    parts (primes increasing); in degree zero there is one coordinate for M.
    """

    def __init__(self, stab: StabilizerInfo, ring: RingSpec, q: int, coeff: CoeffRing):
        self.stab, self.ring, self.q, self.coeff = stab, ring, q, coeff
        n = coeff.modulus
        self.parts: list[HomologyPart] = []
        self.sylow: dict[int, SylowData] = {}
        if q == 0:
            self.parts.append(HomologyPart(0, None, [n]))
        elif stab.type_tag == CUSP_TYPE:
            r = {1: 2, 2: 1}.get(q, 0)
            if r:
                self.parts.append(HomologyPart(0, None, [n] * r))
        elif stab.is_finite:
            for p in _primes_of(len(stab.elements)):
                syl = _sylow(stab.elements, ring, p)
                self.sylow[p] = syl
                base = model_homology(syl.model, q, n)
                extra = []
                for auto in syl.normalizer_autos:
                    f = augmented_chain_map(syl.model, syl.model, auto, q)
                    for g in base.gens():
                        img = matvec(f, g)
                        extra.append([a - b for a, b in zip(img, g)])
                coinv = base.quotient(extra, d_in_cols=base_d_in(syl.model, q, n), ambient_rel=base_rel(syl.model, q, n))
                if coinv.nf.size:
                    self.parts.append(HomologyPart(p, coinv, coinv.orders))
                else:
                    self.parts.append(HomologyPart(p, coinv, []))
        self.orders = [o for part in self.parts for o in part.orders]
        self.group = FgAbelianGroup.from_cyclics(0, self.orders)

    @property
    def size(self) -> int:
        return len(self.orders)

    def offset(self, p: int) -> int:
        pos = 0
        for part in self.parts:
            if part.prime == p:
                return pos
            pos += len(part.orders)
        raise KeyError(p)

    def part(self, p: int) -> HomologyPart | None:
        return next((pt for pt in self.parts if pt.prime == p), None)

    def reduce(self, vec: Sequence[int]) -> list[int]:
        return [v % o if o else v for v, o in zip(vec, self.orders)]

    # -- classes of group elements in degree one

    def element_class(self, h: PslMatrix) -> list[int]:
        """Coordinates of the class of h in H_1 (which is the abelianization tensored with M)."""
        if self.q != 1:
            raise ValueError("element classes live in degree one")
        if self.stab.type_tag == CUSP_TYPE:
            return self.reduce(cusp_coordinates(self.stab, self.ring, h))
        out = [0] * self.size
        if not self.stab.is_finite:
            raise UnsupportedInclusion("element classes need a finite or cusp stabilizer")
        order = h.order()
        for part in self.parts:
            p = part.prime
            if not part.orders:
                continue
            pp = _p_part(order, p)
            rest = order // pp
            k = rest * pow(rest, -1, pp) if pp > 1 else 0
            hp = h**k
            syl = self.sylow[p]
            c = _conjugator_into(self.stab.elements, [hp], syl)
            e = syl.exponents[(c @ hp @ c.inverse()).key()]
            model = AbelianModel(syl.model)
            vec = [0] * model.rank(1)
            for j, idx in enumerate(model.basis(1)):
                vec[j] = e[idx.index(1)]
            coords = part.group.coords(vec)
            pos = self.offset(p)
            for i, v in enumerate(coords):
                out[pos + i] = v
        return self.reduce(out)


def base_d_in(model: tuple[int, ...], q: int, n: int) -> list[list[int]]:
    from .abelianlin import columns

    m = AbelianModel(model)
    return columns(m.trivial_boundary(q + 1), m.rank(q + 1))


def base_rel(model: tuple[int, ...], q: int, n: int) -> list[list[int]]:
    return relations_from_orders([n] * AbelianModel(model).rank(q)) if n else []


def _conjugator_into(elements: list[PslMatrix], subset: list[PslMatrix], syl: SylowData) -> PslMatrix:
    keys = set(syl.exponents)
    for c in elements:
        ci = c.inverse()
        if all((c @ x @ ci).key() in keys for x in subset):
            return c
    raise UnsupportedInclusion("p-subgroup is not conjugate into the chosen Sylow subgroup")


def cusp_coordinates(stab: StabilizerInfo, ring: RingSpec, h: PslMatrix) -> list[int]:
    """Coordinates of a parabolic element in the generator basis of the cusp stabilizer."""
    vals = [_parabolic_parameter(ring, g) for g in stab.generators]
    x = _parabolic_parameter(ring, h)
    # solve x = a*vals[0] + b*vals[1] over the integers (field elements as pairs)
    (p0, p1), (q0, q1) = vals
    det = p0 * q1 - p1 * q0
    if det == 0:
        raise UnsupportedInclusion("degenerate cusp lattice")
    a = (x[0] * q1 - x[1] * q0) / det
    b = (p0 * x[1] - p1 * x[0]) / det
    if Fraction(a).denominator != 1 or Fraction(b).denominator != 1:
        raise UnsupportedInclusion("element is not in the cusp stabilizer")
    return [int(a), int(b)]


def _parabolic_parameter(ring: RingSpec, g: PslMatrix):
    """x with g = (1 - x lam mu, -x lam^2; x mu^2, 1 + x lam mu) up to sign; computed as x = c / mu^2.

    For the cusp at infinity the parameter is -b.
    """
    sign = 1 if g.trace() == (2, 0) else -1
    if g.trace() not in ((2, 0), (-2, 0)):
        raise UnsupportedInclusion("element is not parabolic")
    c = (sign * g.c[0], sign * g.c[1])
    return c


# ---------------------------------------------------------------------------
# induced maps


@dataclass
class InclusionData:
    """Gamma_source -> Gamma_target given by h -> conj^{-1} h conj."""

    source: StabilizerInfo
    target: StabilizerInfo
    conj: PslMatrix

    def embed(self, h: PslMatrix) -> PslMatrix:
        return self.conj.inverse() @ h @ self.conj

    def verify(self) -> bool:
        """The embedding is an injective homomorphism into the target."""
        if not self.source.is_finite:
            return False
        tgt = {g.key() for g in self.target.elements} if self.target.is_finite else None
        imgs = [self.embed(h) for h in self.source.elements]
        if len({g.key() for g in imgs}) != len(imgs):
            return False
        if tgt is not None and not all(g.key() in tgt for g in imgs):
            return False
        for a in self.source.elements:
            for b in self.source.elements:
                if self.embed(a @ b).key() != (self.embed(a) @ self.embed(b)).key():
                    return False
        return True


def induced_map(inc: InclusionData, src: StabilizerHomology, dst: StabilizerHomology) -> Matrix:
    """Matrix (dst coordinates x src coordinates) of the map on homology."""
    out = zeros(dst.size, src.size)
    if src.q == 0:
        if src.size and dst.size:
            out[0][0] = 1
        return out
    if src.size == 0 or dst.size == 0:
        return out
    if not src.stab.is_finite:
        raise UnsupportedInclusion("inclusions out of infinite stabilizers do not occur")
    if dst.stab.type_tag == CUSP_TYPE:
        # torsion cannot map into the cusp stabilizer
        raise UnsupportedInclusion("finite nontrivial subgroup of a cusp stabilizer")
    n = src.coeff.modulus
    for part in src.parts:
        p = part.prime
        dpart = dst.part(p)
        if not part.orders or dpart is None or not dpart.orders:
            continue
        syl_s = src.sylow[p]
        syl_t = dst.sylow[p]
        imgs = [inc.embed(g) for g in syl_s.generators]
        c = _conjugator_into(dst.stab.elements, imgs, syl_t)
        ci = c.inverse()
        images = tuple(syl_t.exponents[(c @ g @ ci).key()] for g in imgs)
        f = augmented_chain_map(syl_s.model, syl_t.model, images, src.q)
        so, do = src.offset(p), dst.offset(p)
        for j, g in enumerate(part.group.gens()):
            coords = dpart.group.coords(matvec(f, g))
            for i, v in enumerate(coords):
                out[do + i][so + j] = v
    return out


class HomologyCache:
    """Memoizes StabilizerHomology objects per (cell, degree, coefficients)."""

    def __init__(self, ring: RingSpec):
        self.ring = ring
        self._store: dict = {}

    def get(self, cell_id, stab: StabilizerInfo, q: int, coeff: CoeffRing) -> StabilizerHomology:
        key = (cell_id, q, coeff.tag)
        if key not in self._store:
            self._store[key] = StabilizerHomology(stab, self.ring, q, coeff)
        return self._store[key]


# ---------------------------------------------------------------------------
# the rules of the known lemma, stated on group types


def lemma_rule(source: str, target: str, q: int, coeff: CoeffRing | str) -> str:
    """'injective', 'zero' or 'unknown' for an inclusion of stabilizer types in degree q >= 1."""
    if isinstance(coeff, str):
        coeff = CoeffRing(coeff)
    n = coeff.modulus
    if source == "Trivial":
        return "zero"
    pair = (source, target)
    if pair in (("C2", "C2"), ("C3", "C3"), ("C2", "S3"), ("C2", "V4"), ("C3", "A4")):
        return "injective"
    if pair == ("C3", "S3"):
        return "injective" if q % 4 in (0, 3) else "zero"
    if pair == ("C2", "A4"):
        if q == 1:
            return "zero"
        if q == 2 and n == 4:
            return "zero"
        return "injective"
    raise UnsupportedInclusion(f"{source} -> {target}")


def cyclic_rule(order: int, k: int, q: int, modulus: int) -> int:
    """Multiplier of generator -> generator^k on H_q(Z/order; Z/modulus), q >= 1."""
    i = (q + 1) // 2
    return pow(k, i, order)
