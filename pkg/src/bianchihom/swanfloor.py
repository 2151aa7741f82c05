"""The floor of the region above all hemispheres, computed exactly.

Every hemisphere S(mu, lam) has height function t(z) = 1/N(mu) - |z - lam/mu|^2,
so the floor is the upper envelope of finitely many paraboloids with identical
quadratic part.  Its projection to the boundary plane is the power diagram of
the circles: the cell of a hemisphere is an intersection of half-planes, all
vertices are rational, and comparisons never need square roots.

Swan's termination test becomes a finite check: a hemisphere pokes above the
envelope somewhere over a cell only if it does so at a vertex of that cell,
and at a vertex of height t only hemispheres with N(mu) < 1/t can do that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .halfspace import Cusp, HPoint, fabs2, fdiv, fmul
from .quadring import (
    OIdeal,
    RingSpec,
    class_group_order,
    ideal_class_is_principal,
    ideal_from_generators,
    pair_ideal_norm,
    same_ideal_class,
)


class BoundExceeded(RuntimeError):
    """Raised when the envelope does not stabilise below the norm ceiling."""


class DegenerateArrangement(RuntimeError):
    """Raised when the arrangement has a configuration the extractor cannot cell."""


Point2 = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class Hemisphere:
    """S(mu, lam): centre lam/mu, radius squared 1/N(mu); (lam, mu) unimodular."""

    lam: tuple[int, int]
    mu: tuple[int, int]
    center: Point2
    radius_sq: Fraction

    @staticmethod
    def make(ring: RingSpec, lam: tuple[int, int], mu: tuple[int, int]) -> "Hemisphere":
        if mu == (0, 0):
            raise ValueError("mu must be nonzero")
        if mu < (0, 0):
            lam, mu = (-lam[0], -lam[1]), (-mu[0], -mu[1])
        center = fdiv(ring.m, ring.to_plane(*lam), ring.to_plane(*mu))
        return Hemisphere(lam, mu, center, Fraction(1, ring.norm_ab(*mu)))

    def height(self, m: int, x, y) -> Fraction:
        dx = x - self.center[0]
        dy = y - self.center[1]
        return self.radius_sq - dx * dx - m * dy * dy

    def translated(self, ring: RingSpec, shift: tuple[int, int]) -> "Hemisphere":
        """The hemisphere moved by the lattice vector ``shift`` (a ring element)."""
        lam = ring.mul(shift, self.mu)
        lam = (self.lam[0] + lam[0], self.lam[1] + lam[1])
        return Hemisphere.make(ring, lam, self.mu)

    def geometry_key(self):
        return (self.center, self.radius_sq)


@dataclass(frozen=True)
class Strip:
    """One translation cell: re in [0, 1], im (in units of sqrt(m)) in [0, height]."""

    re_range: tuple[Fraction, Fraction]
    im_range: tuple[Fraction, Fraction]

    @staticmethod
    def for_ring(ring: RingSpec) -> "Strip":
        top = Fraction(1, 2) if ring.half else Fraction(1)
        return Strip((Fraction(0), Fraction(1)), (Fraction(0), top))

    def contains(self, x, y) -> bool:
        return self.re_range[0] <= x <= self.re_range[1] and self.im_range[0] <= y <= self.im_range[1]


class Lattice:
    """The translation lattice O inside the boundary plane."""

    def __init__(self, ring: RingSpec):
        self.ring = ring
        self.e2 = ring.to_plane(0, 1)
        self.strip = Strip.for_ring(ring)

    def vector(self, shift: tuple[int, int]) -> Point2:
        return self.ring.to_plane(*shift)

    def reduce(self, x, y) -> tuple[Point2, tuple[int, int]]:
        """(x', y') in the half-open strip and the shift tau with (x, y) = (x', y') + tau."""
        height = self.e2[1]
        k = math.floor(Fraction(y) / height)
        x1 = x - k * self.e2[0]
        y1 = y - k * height
        j = math.floor(x1)
        return (x1 - j, y1), (j, k)

    def shift_point(self, p: HPoint, shift: tuple[int, int], sign: int = 1) -> HPoint:
        v = self.vector(shift)
        return HPoint(p.x + sign * v[0], p.y + sign * v[1], p.t)

    def nearby_shifts(self, radius: float) -> list[tuple[int, int]]:
        """Shifts tau with |tau| possibly below radius plus one strip diameter."""
        m = self.ring.m
        height = float(self.e2[1]) * math.sqrt(m)
        kmax = int(math.ceil((radius + 2 * height) / height)) + 1
        jmax = int(math.ceil(radius)) + 2
        return [(j, k) for k in range(-kmax, kmax + 1) for j in range(-jmax - kmax, jmax + kmax + 1)]


def canonical_translate(lattice: Lattice, points: Sequence[HPoint]) -> tuple[tuple[HPoint, ...], tuple[int, int]]:
    """Translate a finite point set so its lexicographically least point lies in the strip.

    Returns the translated points (sorted) and the shift that was subtracted.
    """
    lead = min(points, key=lambda p: (p.x, p.y, p.t))
    _, shift = lattice.reduce(lead.x, lead.y)
    moved = tuple(sorted((lattice.shift_point(p, shift, -1) for p in points), key=HPoint.key))
    return moved, shift


# ---------------------------------------------------------------------------
# hemisphere enumeration


def enumerate_hemispheres(ring: RingSpec, norm_bound: int) -> list[Hemisphere]:
    """Hemispheres with N(mu) <= norm_bound and centre in the half-open strip.

    Sorted by radius (descending) and then centre.
    """
    if norm_bound < 1:
        raise ValueError("norm_bound must be at least 1")
    lattice = Lattice(ring)
    out = []
    seen = set()
    for n in range(1, norm_bound + 1):
        for mu in ring.elements_of_norm(n):
            if mu < (0, 0):
                continue
            for lam in _numerators_in_strip(ring, lattice, mu):
                if pair_ideal_norm(ring, lam, mu) != 1:
                    continue
                h = Hemisphere.make(ring, lam, mu)
                if h.geometry_key() in seen:
                    continue
                seen.add(h.geometry_key())
                out.append(h)
    out.sort(key=lambda h: (-h.radius_sq, h.center))
    return out


def _numerators_in_strip(ring: RingSpec, lattice: Lattice, mu: tuple[int, int]) -> list[tuple[int, int]]:
    """All lam with lam/mu in the half-open strip."""
    strip = lattice.strip
    top = strip.im_range[1]
    # |lam| <= |mu| * diameter of the strip
    bound = ring.norm_ab(*mu) * (1 + ring.m * top * top)
    out = []
    mu_plane = ring.to_plane(*mu)
    for lam in ring.elements_up_to_norm(bound):
        c = fdiv(ring.m, ring.to_plane(*lam), mu_plane)
        if 0 <= c[0] < 1 and 0 <= c[1] < top:
            out.append(lam)
    return out


# ---------------------------------------------------------------------------
# power-diagram cells


@dataclass
class Cell:
    """The projection of one face of the floor: a convex polygon, counter-clockwise."""

    hemisphere: Hemisphere
    polygon: list[Point2]
    heights: list[Fraction]
    neighbours: list[object]  # label of the edge polygon[i] -> polygon[i+1]

    def vertices(self) -> list[HPoint]:
        return [HPoint(p[0], p[1], t) for p, t in zip(self.polygon, self.heights)]


def _halfplane(m: int, h: Hemisphere, other: Hemisphere):
    """Coefficients (A, B, C) of the affine map (x, y) -> t_h - t_other."""
    cx, cy = h.center
    ox, oy = other.center
    A = 2 * (cx - ox)
    B = 2 * m * (cy - oy)
    C = (h.radius_sq - cx * cx - m * cy * cy) - (other.radius_sq - ox * ox - m * oy * oy)
    return A, B, C


def _clip(poly: list[tuple[Point2, object]], A, B, C, label) -> list[tuple[Point2, object]]:
    n = len(poly)
    if n == 0:
        return poly
    out = []
    vals = [A * p[0] + B * p[1] + C for p, _ in poly]
    for i in range(n):
        cur, lab = poly[i]
        nxt, _ = poly[(i + 1) % n]
        fc, fn = vals[i], vals[(i + 1) % n]
        if fc >= 0:
            out.append((cur, lab))
            if fn < 0 and fc > 0:
                s = fc / (fc - fn)
                out.append(((cur[0] + s * (nxt[0] - cur[0]), cur[1] + s * (nxt[1] - cur[1])), label))
            elif fn < 0 and fc == 0:
                out[-1] = (cur, label)
        elif fn > 0:
            s = fc / (fc - fn)
            out.append(((cur[0] + s * (nxt[0] - cur[0]), cur[1] + s * (nxt[1] - cur[1])), lab))
    return _dedupe(out)


def _dedupe(poly):
    if not poly:
        return poly
    out = []
    for p, lab in poly:
        if out and out[-1][0] == p:
            out[-1] = (p, lab)
        else:
            out.append((p, lab))
    while len(out) > 1 and out[0][0] == out[-1][0]:
        out.pop()
    return out


def _area2(points: Sequence[Point2]) -> Fraction:
    s = Fraction(0)
    n = len(points)
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return s


def _disks_meet(m: int, h: Hemisphere, other: Hemisphere) -> bool:
    dx = h.center[0] - other.center[0]
    dy = h.center[1] - other.center[1]
    d2 = dx * dx + m * dy * dy
    lhs = d2 - h.radius_sq - other.radius_sq
    if lhs <= 0:
        return True
    return lhs * lhs <= 4 * h.radius_sq * other.radius_sq


def power_cell(ring: RingSpec, h: Hemisphere, competitors: Iterable[Hemisphere]) -> Cell | None:
    """The part of the plane where h is the highest hemisphere (None if degenerate)."""
    m = ring.m
    cx, cy = h.center
    one = Fraction(1)
    poly = [
        ((cx - one, cy - one), "box"),
        ((cx + one, cy - one), "box"),
        ((cx + one, cy + one), "box"),
        ((cx - one, cy + one), "box"),
    ]
    for other in competitors:
        if other.geometry_key() == h.geometry_key():
            continue
        if not _disks_meet(m, h, other):
            continue
        A, B, C = _halfplane(m, h, other)
        poly = _clip(poly, A, B, C, other)
        if len(poly) < 3:
            return None
    pts = [p for p, _ in poly]
    if len(pts) < 3 or _area2(pts) == 0:
        return None
    return Cell(h, pts, [h.height(m, *p) for p in pts], [lab for _, lab in poly])


# ---------------------------------------------------------------------------
# the floor


@dataclass
class Certificate:
    """Evidence that the computed envelope is the true floor over the strip."""

    vertices_checked: int
    singular_checked: int
    max_norm_used: int
    rounds: int


@dataclass
class Floor:
    ring: RingSpec
    hemispheres: list[Hemisphere]  # base set, centres in the half-open strip
    cells: list[Cell]
    strip: Strip
    certificate: Certificate
    lattice: Lattice = field(repr=False, default=None)

    def singular_points(self) -> list[HPoint]:
        seen = {}
        for cell in self.cells:
            for v in cell.vertices():
                if v.t == 0:
                    (x, y), _ = self.lattice.reduce(v.x, v.y)
                    seen[(x, y)] = HPoint(x, y, 0)
        return [seen[k] for k in sorted(seen)]


def _translates_near(ring: RingSpec, lattice: Lattice, base: list[Hemisphere], h: Hemisphere) -> list[Hemisphere]:
    """All lattice translates of base hemispheres whose disks meet the disk of h."""
    m = ring.m
    root_m = math.sqrt(m)
    e2x, height = float(lattice.e2[0]), float(lattice.e2[1])
    hx, hy = float(h.center[0]), float(h.center[1])
    hr = math.sqrt(float(h.radius_sq))
    out = []
    for b in base:
        reach = hr + math.sqrt(float(b.radius_sq)) + 1e-9
        dx, dy = hx - float(b.center[0]), hy - float(b.center[1])
        kmin = math.floor((dy - reach / root_m) / height)
        kmax = math.ceil((dy + reach / root_m) / height)
        for k in range(kmin, kmax + 1):
            base_x = dx - k * e2x
            for j in range(math.floor(base_x - reach), math.ceil(base_x + reach) + 1):
                moved = b.translated(ring, (j, k))
                if _disks_meet(m, h, moved):
                    out.append(moved)
    return out


def covering_search(ring: RingSpec, x, y, t, norm_cap: int):
    """A unimodular (c, d) whose hemisphere is strictly above height t at z = (x, y).

    Searches c by increasing norm up to ``norm_cap``; used where the current
    envelope is not yet positive.
    """
    m = ring.m
    z = (Fraction(x), Fraction(y))
    for n in range(1, norm_cap + 1):
        for c in ring.elements_of_norm(n):
            if c < (0, 0):
                continue
            budget = 1 - t * n
            if budget <= 0:
                continue
            w = fmul(m, ring.to_plane(*c), z)
            for d in elements_near(ring, w, budget):
                dp = ring.to_plane(*d)
                if (w[0] - dp[0]) ** 2 + m * (w[1] - dp[1]) ** 2 < budget and pair_ideal_norm(ring, c, d) == 1:
                    return c, d
    return None


def covering_violation(ring: RingSpec, p: HPoint) -> tuple[tuple[int, int], tuple[int, int]] | None:
    """A unimodular (c, d) with |cz - d|^2 + t|c|^2 < 1 at p, or None.

    Only c with N(c) < 1/t can qualify, so the search is finite.
    """
    m = ring.m
    z = (p.x, p.y)
    best = None
    best_val = Fraction(1)
    for c in ring.elements_up_to_norm(Fraction(1) / p.t):
        if c == (0, 0) or c < (0, 0):
            continue
        nc = ring.norm_ab(*c)
        budget = 1 - p.t * nc
        if budget <= 0:
            continue
        w = fmul(m, ring.to_plane(*c), z)
        for d in elements_near(ring, w, budget):
            dp = ring.to_plane(*d)
            val = (w[0] - dp[0]) ** 2 + m * (w[1] - dp[1]) ** 2 + p.t * nc
            if val < best_val and pair_ideal_norm(ring, c, d) == 1:
                best, best_val = (c, d), val
    return best


def elements_near(ring: RingSpec, w: Point2, radius_sq) -> list[tuple[int, int]]:
    """Ring elements d with |d - w|^2 < radius_sq (plus boundary cases, filtered by callers)."""
    m = ring.m
    r = math.sqrt(float(radius_sq)) + 1e-9
    ry = r / math.sqrt(m)
    out = []
    wx, wy = float(w[0]), float(w[1])
    if ring.half:
        # plane y = b/2, x = a - b/2
        bmin = math.floor(2 * (wy - ry)) - 1
        bmax = math.ceil(2 * (wy + ry)) + 1
        for b in range(bmin, bmax + 1):
            xmin = math.floor(wx - r + b / 2) - 1
            xmax = math.ceil(wx + r + b / 2) + 1
            for a in range(xmin, xmax + 1):
                dp = ring.to_plane(a, b)
                if (dp[0] - w[0]) ** 2 + m * (dp[1] - w[1]) ** 2 <= radius_sq:
                    out.append((a, b))
    else:
        bmin = math.floor(wy - ry) - 1
        bmax = math.ceil(wy + ry) + 1
        for b in range(bmin, bmax + 1):
            for a in range(math.floor(wx - r) - 1, math.ceil(wx + r) + 2):
                if (a - w[0]) ** 2 + m * (b - w[1]) ** 2 <= radius_sq:
                    out.append((a, b))
    return out


def singular_certificate(ring: RingSpec, s: HPoint) -> bool:
    """True iff |c s - d| >= 1 for every unimodular (c, d) with c != 0."""
    cusp = Cusp(s.x, s.y)
    lam, mu = cusp.pair(ring)
    ideal = ideal_from_generators(ring, [lam, mu])
    if ideal.norm == 1:
        return False
    need = ring.norm_ab(*mu)
    # c*lam - d*mu runs through elements of the ideal; short ones would cover s.
    return ideal.shortest_norm() >= need


def compute_floor(ring: RingSpec, norm_ceiling: int = 400, start_bound: int | None = None) -> Floor:
    """Iterate Swan's test until every vertex of the envelope is certified.

    Hemispheres are added only when a vertex is caught below one of them, so
    the working set stays close to the set of hemispheres that carry faces.
    """
    lattice = Lattice(ring)
    bound = start_bound or max(2, ring.omega_norm)
    base = enumerate_hemispheres(ring, bound)
    known = {h.geometry_key() for h in base}
    rounds = 0
    while True:
        rounds += 1
        cells = []
        for h in base:
            cell = power_cell(ring, h, _translates_near(ring, lattice, base, h))
            if cell is not None:
                cells.append(cell)
        base = [c.hemisphere for c in cells]
        additions = []
        checked = singular = 0
        seen = set()
        for cell in cells:
            for (vx, vy), vt in zip(cell.polygon, cell.heights):
                (x, y), _ = lattice.reduce(vx, vy)
                key = (x, y, vt)
                if key in seen:
                    continue
                seen.add(key)
                hit = None
                if vt > 0:
                    checked += 1
                    hit = covering_violation(ring, HPoint(x, y, vt))
                elif vt == 0 and singular_certificate(ring, HPoint(x, y, 0)):
                    singular += 1
                else:
                    lam, mu = Cusp(x, y).pair(ring)
                    if pair_ideal_norm(ring, lam, mu) == 1:
                        hit = (mu, lam)
                    else:
                        hit = covering_search(ring, x, y, vt, norm_ceiling)
                        if hit is None:
                            raise BoundExceeded(f"no hemisphere below norm {norm_ceiling} covers ({x}, {y})")
                if hit is not None:
                    c, d = hit
                    if ring.norm_ab(*c) > norm_ceiling:
                        raise BoundExceeded(f"floor for m={ring.m} needs hemispheres beyond norm {norm_ceiling}")
                    h = Hemisphere.make(ring, d, c)
                    _, shift = lattice.reduce(*h.center)
                    h = h.translated(ring, (-shift[0], -shift[1]))
                    if h.geometry_key() not in known:
                        known.add(h.geometry_key())
                        additions.append(h)
        if not additions:
            max_norm = max(ring.norm_ab(*h.mu) for h in base)
            cert = Certificate(checked, singular, max_norm, rounds)
            return Floor(ring, base, cells, lattice.strip, cert, lattice)
        base = base + additions


def is_strictly_below(ring: RingSpec, h: Hemisphere, candidates: Iterable[Hemisphere]) -> bool:
    """True when the other candidates cover h everywhere, so h carries no face of the floor."""
    return power_cell(ring, h, candidates) is None


def singular_points(ring: RingSpec, max_norm: int = 200) -> list[Cusp]:
    """One singular cusp in the strip for each nontrivial ideal class.

    Cusps lam/mu are scanned by increasing N(mu); a cusp is kept when its ideal
    (lam, mu) is not principal, lies in a class not yet represented, and no
    hemisphere passes over it.
    """
    classes = class_group_order(ring)
    if classes == 1:
        return []
    lattice = Lattice(ring)
    found: list[tuple[OIdeal, Cusp]] = []
    for n in range(2, max_norm + 1):
        for mu in ring.elements_of_norm(n):
            if mu < (0, 0):
                continue
            for lam in _numerators_in_strip(ring, lattice, mu):
                ideal = ideal_from_generators(ring, [lam, mu])
                if ideal_class_is_principal(ideal):
                    continue
                if any(same_ideal_class(ideal, other) for other, _ in found):
                    continue
                x, y = fdiv(ring.m, ring.to_plane(*lam), ring.to_plane(*mu))
                (x, y), _ = lattice.reduce(x, y)
                point = HPoint(x, y, 0)
                if singular_certificate(ring, point):
                    found.append((ideal, Cusp(x, y)))
        if len(found) == classes - 1:
            break
    return sorted((c for _, c in found), key=lambda c: c.key())


@dataclass
class RawCellComplex:
    """Cells of the floor over one translation cell, modulo the translation lattice.

    Vertices are points of half-space (height zero marks a singular cusp);
    edges and faces index into the vertex list, faces in cyclic order.
    """

    m: int
    vertices: list[HPoint]
    edges: list[tuple[int, int]]
    faces: list[list[int]]
    periodic: object = field(default=None, repr=False, compare=False)

    def euler_count(self) -> int:
        return len(self.vertices) - len(self.edges) + len(self.faces)

    def to_json(self) -> dict:
        pt = lambda p: [_frac(p.x), _frac(p.y), _frac(p.t)]
        return {
            "schema": "bianchihom.rawcells/1",
            "m": self.m,
            "vertices": [pt(v) for v in self.vertices],
            "edges": [list(e) for e in self.edges],
            "faces": [list(f) for f in self.faces],
        }

    def to_obj(self) -> str:
        """Wavefront OBJ with coordinates (x, y*sqrt(m), r); r is rounded for display only."""
        rt = math.sqrt(self.m)
        lines = [f"# floor cells for m={self.m}"]
        for v in self.vertices:
            lines.append(f"v {float(v.x):.9f} {float(v.y) * rt:.9f} {math.sqrt(float(v.t)):.9f}")
        for a, b in self.edges:
            lines.append(f"l {a + 1} {b + 1}")
        for f in self.faces:
            lines.append("f " + " ".join(str(i + 1) for i in f))
        return "\n".join(lines) + "\n"


def _frac(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def extract_cells(floor: Floor) -> RawCellComplex:
    """The natural cell structure of the floor as a RawCellComplex."""
    from .orbifold import complex_from_floor, point_key

    cx = complex_from_floor(floor)
    verts = sorted((pts[0] for pts in cx.cells[0].values()), key=point_key)
    index = {point_key(v): i for i, v in enumerate(verts)}

    def idx(p: HPoint) -> int:
        (x, y), _ = floor.lattice.reduce(p.x, p.y)
        return index[point_key(HPoint(x, y, p.t))]

    edges = sorted(tuple(idx(p) for p in pts) for pts in cx.cells[1].values())
    faces = sorted([idx(p) for p in pts] for pts in cx.cells[2].values())
    return RawCellComplex(floor.ring.m, verts, edges, faces, cx)
