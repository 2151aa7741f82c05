"""Orbits, pairings and stabilizers of the cells of the floor complex.

Cells are handled modulo the translation lattice: each is stored in one
canonical placement (its least vertex reduced into the strip).  A cell of the
floor is a geodesic polygon, so it is determined by its vertex set, and a group
element maps one cell onto another exactly when it maps the vertex sets onto
each other.  Candidate elements come from the height constraint: g moves an
interior floor point p to another floor point only if D(g, p) = |cz - d|^2 +
t|c|^2 equals one, which leaves finitely many bottom rows (c, d) with
N(c) <= 1/t, each determined up to a left translation.

Projecting a hemisphere to its base disk is the Klein model, so geodesics inside
one hemisphere are straight segments in projection.  All subdivision below is
therefore done with straight lines and exact rational points.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .halfspace import Cusp, HPoint, PslMatrix, act_cusp, act_interior, fabs2, fdiv, fixed_axis, fmul
from .quadring import RingSpec, complete_pair, ideal_from_generators, pair_ideal_norm
from .swanfloor import Lattice, elements_near


class OrbitInconsistency(RuntimeError):
    """Raised when pairings contradict each other or leave the cell set."""


class UnboundedStabilizer(RuntimeError):
    """Raised when a finite stabilizer fails to close below order twelve."""


class UnknownType(ValueError):
    """Raised for a finite group outside the list of possible cell stabilizers."""


Placed = tuple[HPoint, ...]
CellKey = tuple
Carrier = tuple  # ((centre_x, centre_y), radius_sq) of the carrying hemisphere


# ---------------------------------------------------------------------------
# placements modulo translation


def point_key(p: HPoint):
    return (p.x, p.y, p.t)


def cell_key(points: Iterable[HPoint]) -> CellKey:
    return tuple(sorted(point_key(p) for p in points))


def place(lattice: Lattice, points: Sequence[HPoint]) -> tuple[Placed, tuple[int, int]]:
    """Translate so the least vertex lies in the half-open strip; keep the given order."""
    lead = min(points, key=point_key)
    _, shift = lattice.reduce(lead.x, lead.y)
    return tuple(lattice.shift_point(p, shift, -1) for p in points), shift


def act_on_point(g: PslMatrix, p: HPoint) -> HPoint | None:
    """Image of an interior point or finite cusp; None when a cusp goes to infinity."""
    if p.t > 0:
        return act_interior(g, p)
    image = act_cusp(g, Cusp(p.x, p.y))
    if image.is_infinity:
        return None
    return HPoint(image.x, image.y, 0)


def ring_inverse_unit(ring: RingSpec, u: tuple[int, int]) -> tuple[int, int]:
    for v in ring.units():
        if ring.mul(u, v) == (1, 0):
            return v
    raise ValueError(f"{u} is not a unit")


def shift_matrix(ring: RingSpec, shift: tuple[int, int]) -> PslMatrix:
    """The translation moving a point by minus the lattice vector ``shift``."""
    return PslMatrix.translation(ring, shift)


def height_one_elements(ring: RingSpec, p: HPoint) -> list[PslMatrix]:
    """One element per bottom row (c, d) with D(g, p) = 1, up to the sign of PSL2.

    Every element taking p to a floor point is a left translate of one of these.
    """
    if p.t <= 0:
        raise ValueError("height_one_elements needs an interior point")
    m = ring.m
    out = []
    seen = set()

    def keep(g):
        if g.key() not in seen:
            seen.add(g.key())
            out.append(g)

    for c in ring.elements_up_to_norm(1 / p.t):
        if c == (0, 0):
            for u in ring.units():
                keep(PslMatrix.of(ring, ring_inverse_unit(ring, u), 0, 0, u))
            continue
        rest = 1 - p.t * ring.norm_ab(*c)
        if rest < 0:
            continue
        cz = fmul(m, ring.to_plane(*c), p.z)
        for d in elements_near(ring, cz, rest):
            dp = ring.to_plane(*d)
            if fabs2(m, (cz[0] - dp[0], cz[1] - dp[1])) != rest:
                continue
            if pair_ideal_norm(ring, c, d) != 1:
                continue
            a, b = complete_pair(ring, c, d)
            keep(PslMatrix(a, b, c, d, ring))
    return out


# ---------------------------------------------------------------------------
# the periodic complex


@dataclass
class PeriodicComplex:
    """Cells of the floor modulo translation, each in its canonical placement.

    Vertices are 1-tuples, edges are ordered by vertex key, faces list their
    vertices cyclically.  ``carriers`` holds the hemisphere carrying each edge
    and face, in that cell's placement.
    """

    ring: RingSpec
    lattice: Lattice
    cells: list[dict[CellKey, Placed]] = field(default_factory=lambda: [{}, {}, {}])
    carriers: list[dict[CellKey, Carrier]] = field(default_factory=lambda: [{}, {}, {}])

    def add(self, dim: int, points: Sequence[HPoint], carrier: Carrier | None = None) -> CellKey:
        """Store a cell; ``carrier`` is given in the same placement as ``points``."""
        placed, shift = place(self.lattice, points)
        if carrier is not None and dim > 0:
            v = self.lattice.vector(shift)
            carrier = ((carrier[0][0] - v[0], carrier[0][1] - v[1]), carrier[1])
        if dim == 1:
            placed = tuple(sorted(placed, key=point_key))
        elif dim == 2:
            i = min(range(len(placed)), key=lambda k: point_key(placed[k]))
            placed = placed[i:] + placed[:i]
        key = cell_key(placed)
        if key not in self.cells[dim]:
            self.cells[dim][key] = placed
            if carrier is not None and dim > 0:
                self.carriers[dim][key] = carrier
        return key

    def locate(self, dim: int, points: Sequence[HPoint]) -> tuple[CellKey, tuple[int, int]] | None:
        """The stored cell with this vertex set (up to translation) and the shift used."""
        placed, shift = place(self.lattice, points)
        key = cell_key(placed)
        if key in self.cells[dim]:
            return key, shift
        return None

    def has_vertex(self, p: HPoint) -> bool:
        return self.locate(0, (p,)) is not None

    def counts(self) -> tuple[int, int, int]:
        return tuple(len(c) for c in self.cells)

    def carrier_height(self, dim: int, key: CellKey, x, y) -> Fraction:
        (cx, cy), radius_sq = self.carriers[dim][key]
        return radius_sq - (x - cx) ** 2 - self.ring.m * (y - cy) ** 2

    def anchor(self, dim: int, key: CellKey) -> HPoint:
        """An interior point of the cell: its highest vertex, else a lifted centroid."""
        placed = self.cells[dim][key]
        inner = [v for v in placed if v.t > 0]
        if inner:
            return max(inner, key=lambda v: (v.t, point_key(v)))
        if dim == 0 or key not in self.carriers[dim]:
            raise OrbitInconsistency("cell has no interior anchor")
        x = sum(v.x for v in placed) / len(placed)
        y = sum(v.y for v in placed) / len(placed)
        return HPoint(x, y, self.carrier_height(dim, key, x, y))


def _on_segment(p: HPoint, q: HPoint, w: HPoint) -> Fraction | None:
    """Parameter of w's projection strictly inside the projected side p-q, else None.

    A floor point over the projected side lies on the side itself, since the
    floor is a graph over the plane.
    """
    dx, dy = q.x - p.x, q.y - p.y
    wx, wy = w.x - p.x, w.y - p.y
    if dx * wy - dy * wx != 0:
        return None
    lam = (wx * dx + wy * dy) / (dx * dx + dy * dy)
    return lam if 0 < lam < 1 else None


def complex_from_floor(floor) -> PeriodicComplex:
    """Natural cells of the floor: polygon vertices, polygon sides, polygons.

    Vertices of neighbouring polygons lying inside a side are inserted into it,
    so incidences are face-to-face.
    """
    ring = floor.ring
    lattice = floor.lattice
    cx = PeriodicComplex(ring, lattice)
    reduced = {}
    for cell in floor.cells:
        for v in cell.vertices():
            (x, y), _ = lattice.reduce(v.x, v.y)
            reduced[(x, y, v.t)] = HPoint(x, y, v.t)
    shifts = lattice.nearby_shifts(2.0)
    for cell in floor.cells:
        poly = cell.vertices()
        refined = []
        n = len(poly)
        for i in range(n):
            p, q = poly[i], poly[(i + 1) % n]
            refined.append(p)
            extra = []
            for v in reduced.values():
                for s in shifts:
                    w = lattice.shift_point(v, s)
                    if w == p or w == q:
                        continue
                    lam = _on_segment(p, q, w)
                    if lam is not None:
                        extra.append((lam, w))
            refined.extend(w for _, w in sorted(extra, key=lambda e: e[0]))
        carrier = (cell.hemisphere.center, cell.hemisphere.radius_sq)
        for v in refined:
            cx.add(0, (v,))
        for i in range(len(refined)):
            cx.add(1, (refined[i], refined[(i + 1) % len(refined)]), carrier)
        cx.add(2, refined, carrier)
    return cx


# ---------------------------------------------------------------------------
# orbits


@dataclass
class OrbitData:
    """Orbit decomposition of one dimension of a periodic complex."""

    reps: list[CellKey]
    orbit_of: dict[CellKey, int]
    carrier: dict[CellKey, PslMatrix]  # carrier[k] maps the rep placement onto placement k
    setwise: dict[CellKey, list[PslMatrix]]  # setwise stabilizer of each rep placement

    def members(self, rep: CellKey) -> list[CellKey]:
        idx = self.orbit_of[rep]
        return sorted(k for k, o in self.orbit_of.items() if o == idx)


class OrbitFinder:
    """Pairings between cells of a periodic complex, found from height-one elements.

    ``cache`` maps points to their height-one elements and may be shared
    between complexes over the same ring.
    """

    def __init__(self, cx: PeriodicComplex, cache: dict | None = None):
        self.cx = cx
        self.cache = cache if cache is not None else {}
        self._moves: dict = {}
        self._orbits: dict = {}

    def candidates(self, p: HPoint) -> list[PslMatrix]:
        k = (self.cx.ring.m, point_key(p))
        if k not in self.cache:
            self.cache[k] = height_one_elements(self.cx.ring, p)
        return self.cache[k]

    def moves(self, dim: int, key: CellKey) -> list[tuple[CellKey, PslMatrix]]:
        """All (target, h) with h mapping the stored placement of key onto target's.

        Complete: any such h moves the anchor (an interior point of the cell) to
        a floor point, hence is a left translate of a height-one element there.
        """
        if (dim, key) in self._moves:
            return self._moves[(dim, key)]
        cx = self.cx
        placed = cx.cells[dim][key]
        anchor = cx.anchor(dim, key)
        out = []
        for g in self.candidates(anchor):
            image = []
            for v in placed:
                w = act_on_point(g, v)
                if w is None or (dim > 0 and not cx.has_vertex(w)):
                    break
                image.append(w)
            else:
                hit = cx.locate(dim, image)
                if hit is not None:
                    target, shift = hit
                    out.append((target, shift_matrix(cx.ring, shift) @ g))
        self._moves[(dim, key)] = out
        return out

    def vertex_relations_from_edges(self) -> list[tuple[CellKey, CellKey, PslMatrix]]:
        """Relations between vertices induced by pairings of edges; this reaches the cusps."""
        cx = self.cx
        out = []
        for k in sorted(cx.cells[1]):
            for _, h in self.moves(1, k):
                for v in cx.cells[1][k]:
                    w = act_on_point(h, v)
                    hit = cx.locate(0, (w,))
                    if hit is None:
                        raise OrbitInconsistency("edge pairing does not carry vertices to vertices")
                    vk, shift = hit
                    src, src_shift = cx.locate(0, (v,))
                    move = shift_matrix(cx.ring, shift) @ h @ shift_matrix(cx.ring, src_shift).inverse()
                    out.append((src, vk, move))
        return out

    def orbits(self, dim: int) -> OrbitData:
        if dim in self._orbits:
            return self._orbits[dim]
        cx = self.cx
        keys = sorted(cx.cells[dim])
        adj: dict[CellKey, list] = {k: [] for k in keys}
        for k in keys:
            if dim > 0 or cx.cells[0][k][0].t > 0:
                adj[k].extend(self.moves(dim, k))
        if dim == 0:
            for src, dst, h in self.vertex_relations_from_edges():
                if cx.cells[0][src][0].t == 0:
                    adj[src].append((dst, h))
                    adj[dst].append((src, h.inverse()))
        orbit_of: dict[CellKey, int] = {}
        carrier: dict[CellKey, PslMatrix] = {}
        reps = []
        for k in keys:
            if k in orbit_of:
                continue
            idx = len(reps)
            reps.append(k)
            orbit_of[k] = idx
            carrier[k] = PslMatrix.identity(cx.ring)
            queue = deque([k])
            while queue:
                cur = queue.popleft()
                for target, h in adj[cur]:
                    if target not in orbit_of:
                        orbit_of[target] = idx
                        carrier[target] = h @ carrier[cur]
                        queue.append(target)
        setwise = {}
        for k in reps:
            if dim == 0 and cx.cells[0][k][0].t == 0:
                setwise[k] = []
            else:
                setwise[k] = sorted({h.key(): h for t, h in adj[k] if t == k}.values())
        data = OrbitData(reps, orbit_of, carrier, setwise)
        self._orbits[dim] = data
        return data


def fixes_pointwise(h: PslMatrix, points: Sequence[HPoint]) -> bool:
    return all(act_on_point(h, v) == v for v in points)


def is_rigid(cx: PeriodicComplex, cache: dict | None = None) -> bool:
    """True when every setwise stabilizer of an edge or face fixes it pointwise."""
    finder = OrbitFinder(cx, cache)
    for dim in (1, 2):
        orb = finder.orbits(dim)
        for rep in orb.reps:
            if not all(fixes_pointwise(h, cx.cells[dim][rep]) for h in orb.setwise[rep]):
                return False
    return True


# ---------------------------------------------------------------------------
# fixed-point geometry


def _vertical_fixed_point(ring: RingSpec, h: PslMatrix):
    a, b, d = (ring.to_plane(*e) for e in (h.a, h.b, h.d))
    return fdiv(ring.m, b, (a[0] - d[0], a[1] - d[1]))


def fixed_point_on_segment(ring: RingSpec, h: PslMatrix, p: HPoint, q: HPoint, carrier: Carrier | None) -> HPoint:
    """The point of the geodesic p-q fixed by an elliptic h that swaps p and q."""
    m = ring.m
    if h.c != (0, 0):
        normal, offset, center, radius_sq = fixed_axis(h)
        denom = normal[0] * (q.x - p.x) + normal[1] * (q.y - p.y)
        if denom == 0:
            raise OrbitInconsistency("segment lies in the axis plane")
        s = (offset - normal[0] * p.x - normal[1] * p.y) / denom
        x, y = p.x + s * (q.x - p.x), p.y + s * (q.y - p.y)
        t = radius_sq - (x - center[0]) ** 2 - m * (y - center[1]) ** 2
    else:
        if carrier is None:
            raise OrbitInconsistency("a vertical axis needs the carrier hemisphere")
        x, y = _vertical_fixed_point(ring, h)
        (ccx, ccy), rsq = carrier
        t = rsq - (x - ccx) ** 2 - m * (y - ccy) ** 2
    f = HPoint(x, y, t)
    if act_on_point(h, f) != f:
        raise OrbitInconsistency("computed fixed point is not fixed")
    return f


def rotation_center(ring: RingSpec, h: PslMatrix, carrier: Carrier) -> HPoint:
    """Where the axis of h meets the carrier hemisphere of a face it rotates."""
    m = ring.m
    (ccx, ccy), rsq = carrier
    if h.c != (0, 0):
        normal, offset, center, radius_sq = fixed_axis(h)
        # radical line of the axis sphere and the carrier sphere: A x + B y = C
        A = 2 * (ccx - center[0])
        B = 2 * m * (ccy - center[1])
        C = (ccx ** 2 + m * ccy ** 2 - rsq) - (center[0] ** 2 + m * center[1] ** 2 - radius_sq)
        det = normal[0] * B - normal[1] * A
        if det == 0:
            raise OrbitInconsistency("axis does not cross the face transversally")
        x = (offset * B - normal[1] * C) / det
        y = (normal[0] * C - A * offset) / det
    else:
        x, y = _vertical_fixed_point(ring, h)
    t = rsq - (x - ccx) ** 2 - m * (y - ccy) ** 2
    if t <= 0:
        raise OrbitInconsistency("rotation centre is not above the plane")
    f = HPoint(x, y, t)
    if act_on_point(h, f) != f:
        raise OrbitInconsistency("rotation centre is not fixed")
    return f


# ---------------------------------------------------------------------------
# equivariant subdivision


@dataclass(frozen=True)
class FacePlan:
    """A cut of one face: a chord between two boundary vertices, or a cone from a centre."""

    kind: str  # "chord" or "cone"
    points: tuple[HPoint, ...]


def _param(p: HPoint, q: HPoint, w: HPoint) -> Fraction:
    dx, dy = q.x - p.x, q.y - p.y
    return ((w.x - p.x) * dx + (w.y - p.y) * dy) / (dx * dx + dy * dy)


def _split_cycle(cycle: list[HPoint], a: HPoint, b: HPoint) -> tuple[list[HPoint], list[HPoint]]:
    i, j = sorted((cycle.index(a), cycle.index(b)))
    if j - i < 2 or (i == 0 and j == len(cycle) - 1):
        raise OrbitInconsistency("chord joins adjacent vertices")
    return cycle[i : j + 1], cycle[j:] + cycle[: i + 1]


def _edge_rep_point(cx: PeriodicComplex, orb1: OrbitData, p: HPoint, q: HPoint, w: HPoint):
    """Express a point w inside the side p-q in the placement of that edge's orbit rep."""
    key, shift = cx.locate(1, (p, q))
    w = cx.lattice.shift_point(w, shift, -1)
    rep = orb1.reps[orb1.orbit_of[key]]
    return rep, act_on_point(orb1.carrier[key].inverse(), w)


def subdivide(cx: PeriodicComplex, finder: OrbitFinder, edge_splits: dict, face_plans: dict) -> PeriodicComplex:
    """Apply cuts given on orbit representatives to every member of each orbit.

    ``edge_splits`` maps an edge rep to points inside it (rep placement);
    ``face_plans`` maps a face rep to FacePlans (rep placement) whose chord
    endpoints are vertices once ``edge_splits`` is applied.  All cuts are made
    on the old placements before the cells are re-placed.
    """
    orb1 = finder.orbits(1)
    orb2 = finder.orbits(2)
    lattice = cx.lattice
    edge_points: dict[CellKey, list[HPoint]] = defaultdict(list)
    for rep, pts in edge_splits.items():
        for k in orb1.members(rep):
            for p in pts:
                w = act_on_point(orb1.carrier[k], p)
                if w not in edge_points[k]:
                    edge_points[k].append(w)

    out = PeriodicComplex(cx.ring, lattice)
    for (v,) in cx.cells[0].values():
        out.add(0, (v,))
    for k, (p, q) in cx.cells[1].items():
        chain = [p] + sorted(edge_points.get(k, []), key=lambda w: _param(p, q, w)) + [q]
        for a, b in zip(chain, chain[1:]):
            out.add(0, (b,))
            out.add(1, (a, b), cx.carriers[1].get(k))

    pieces: dict[CellKey, list[list[HPoint]]] = {}
    for k, cycle in cx.cells[2].items():
        new = []
        n = len(cycle)
        for i in range(n):
            p, q = cycle[i], cycle[(i + 1) % n]
            new.append(p)
            ek, shift = cx.locate(1, (p, q))
            inner = [lattice.shift_point(w, shift, 1) for w in edge_points.get(ek, [])]
            new.extend(sorted(inner, key=lambda w: _param(p, q, w)))
        pieces[k] = [new]

    for rep, plans in face_plans.items():
        for k in orb2.members(rep):
            g = orb2.carrier[k]
            carrier = cx.carriers[2].get(k)
            for plan in plans:
                pts = [act_on_point(g, p) for p in plan.points]
                if plan.kind == "chord":
                    a, b = pts
                    for idx, piece in enumerate(pieces[k]):
                        if a in piece and b in piece:
                            pieces[k][idx : idx + 1] = list(_split_cycle(piece, a, b))
                            out.add(1, (a, b), carrier)
                            break
                    else:
                        raise OrbitInconsistency("chord endpoints do not lie on one face piece")
                elif plan.kind == "cone":
                    (centre,) = pts
                    if len(pieces[k]) != 1:
                        raise OrbitInconsistency("cone requested on an already cut face")
                    rim = pieces[k][0]
                    out.add(0, (centre,))
                    for u in rim:
                        out.add(1, (centre, u), carrier)
                    pieces[k] = [[centre, rim[i], rim[(i + 1) % len(rim)]] for i in range(len(rim))]
                else:
                    raise ValueError(f"unknown plan kind {plan.kind!r}")
    for k, plist in pieces.items():
        for piece in plist:
            out.add(2, piece, cx.carriers[2].get(k))
    return out


def _face_plan_for(cx: PeriodicComplex, orb1: OrbitData, rep: CellKey, h: PslMatrix):
    """The cut making the face rep rigid for the symmetry h, with the edge splits it needs."""
    ring = cx.ring
    cycle = list(cx.cells[2][rep])
    carrier = cx.carriers[2][rep]
    n = len(cycle)
    index = {point_key(v): i for i, v in enumerate(cycle)}
    perm = [index[point_key(act_on_point(h, v))] for v in cycle]
    if (perm[1] - perm[0]) % n == 1:
        return FacePlan("cone", (rotation_center(ring, h, carrier),)), {}
    fixed = []
    splits: dict = {}
    for i in range(n):
        j = (i + 1) % n
        if perm[i] == i:
            fixed.append(cycle[i])
        elif perm[i] == j and perm[j] == i:
            p, q = cycle[i], cycle[j]
            ek, _ = cx.locate(1, (p, q))
            f = fixed_point_on_segment(ring, h, p, q, carrier)
            fixed.append(f)
            erep, w = _edge_rep_point(cx, orb1, p, q, f)
            splits.setdefault(erep, []).append(w)
    if len(fixed) != 2:
        raise OrbitInconsistency(f"a reflection of a face fixes {len(fixed)} boundary points")
    return FacePlan("chord", tuple(sorted(fixed, key=point_key))), splits


def rigidify(cx: PeriodicComplex, cache: dict | None = None, max_rounds: int = 20) -> PeriodicComplex:
    """Subdivide until every cell stabilizer fixes its cell pointwise.

    Inverted edges are split at the fixed point of the inverting involution; a
    face reflected across a geodesic is cut along it; a face rotated about an
    interior point is coned from that point.
    """
    cache = {} if cache is None else cache
    for _ in range(max_rounds):
        finder = OrbitFinder(cx, cache)
        orb1 = finder.orbits(1)
        splits = {}
        for rep in orb1.reps:
            p, q = cx.cells[1][rep]
            for h in orb1.setwise[rep]:
                if act_on_point(h, p) == q:
                    splits[rep] = [fixed_point_on_segment(cx.ring, h, p, q, cx.carriers[1].get(rep))]
                    break
        if splits:
            cx = subdivide(cx, finder, splits, {})
            continue
        orb2 = finder.orbits(2)
        chosen = {}
        for rep in orb2.reps:
            movers = [h for h in orb2.setwise[rep] if not fixes_pointwise(h, cx.cells[2][rep])]
            if not movers:
                continue
            options = [_face_plan_for(cx, orb1, rep, h) for h in movers]
            if len(movers) == 1:
                chosen[rep] = options[0]
            else:
                # several symmetries: only the common centre gives an invariant cut
                chosen[rep] = next(o for o in options if o[0].kind == "cone")
        if not chosen:
            return cx
        edge_splits: dict = defaultdict(list)
        for _, extra in chosen.values():
            for erep, pts in extra.items():
                edge_splits[erep].extend(w for w in pts if w not in edge_splits[erep])
        cx = subdivide(cx, finder, dict(edge_splits), {rep: [plan] for rep, (plan, _) in chosen.items()})
    raise OrbitInconsistency("rigidification did not terminate")


@dataclass(frozen=True)
class Wall:
    """The lines normal . (x, y) = offset + normal . tau over all lattice vectors tau."""

    normal: tuple[Fraction, Fraction]
    offset: Fraction

    @staticmethod
    def real_part(value=0) -> "Wall":
        return Wall((Fraction(1), Fraction(0)), Fraction(value))

    @staticmethod
    def imaginary_part(value=0) -> "Wall":
        return Wall((Fraction(0), Fraction(1)), Fraction(value))

    def to_json(self) -> dict:
        return {"normal": [str(v) for v in self.normal], "offset": str(self.offset)}

    @staticmethod
    def from_json(data: dict) -> "Wall":
        nx, ny = (Fraction(v) for v in data["normal"])
        return Wall((nx, ny), Fraction(data["offset"]))


def _wall_offsets(lattice: Lattice, wall: Wall, lo, hi) -> list[Fraction]:
    e2 = lattice.vector((0, 1))
    n = wall.normal
    s1, s2 = n[0], n[0] * e2[0] + n[1] * e2[1]
    values = set()
    for j in range(-6, 7):
        for k in range(-6, 7):
            v = wall.offset + j * s1 + k * s2
            if lo < v < hi:
                values.add(v)
    return sorted(values)


def wall_chords(cx: PeriodicComplex, key: CellKey, walls: Sequence[Wall]) -> list[tuple[HPoint, HPoint]]:
    """Chords along wall lines that cross the interior of a face (in its placement)."""
    cycle = cx.cells[2][key]
    n = len(cycle)
    chords = []
    for wall in walls:
        vals = [wall.normal[0] * v.x + wall.normal[1] * v.y for v in cycle]
        for off in _wall_offsets(cx.lattice, wall, min(vals), max(vals)):
            hits = []
            for i in range(n):
                j = (i + 1) % n
                fi, fj = vals[i] - off, vals[j] - off
                if fi == 0:
                    hits.append(cycle[i])
                elif fi * fj < 0:
                    s = fi / (fi - fj)
                    p, q = cycle[i], cycle[j]
                    x, y = p.x + s * (q.x - p.x), p.y + s * (q.y - p.y)
                    hits.append(HPoint(x, y, cx.carrier_height(2, key, x, y)))
            if len(hits) != 2:
                raise OrbitInconsistency("wall line meets a convex face in more than two points")
            chords.append(tuple(sorted(hits, key=point_key)))
    return chords


def wall_refine(cx: PeriodicComplex, walls: Sequence[Wall], cache: dict | None = None, max_rounds: int = 20) -> PeriodicComplex:
    """Cut faces along the given walls, equivariantly.

    A wall chord found on any member of a face orbit is pulled back to the
    representative and pushed to every member, so the result is still a
    Gamma-complex.  One chord per face orbit is applied in each round.
    """
    cache = {} if cache is None else cache
    for _ in range(max_rounds):
        finder = OrbitFinder(cx, cache)
        orb1 = finder.orbits(1)
        orb2 = finder.orbits(2)
        face_plans = {}
        splits: dict = defaultdict(list)
        for rep in orb2.reps:
            found = set()
            for k in orb2.members(rep):
                back = orb2.carrier[k].inverse()
                for a, b in wall_chords(cx, k, walls):
                    found.add(tuple(sorted((act_on_point(back, a), act_on_point(back, b)), key=point_key)))
            if not found:
                continue
            a, b = min(found, key=lambda c: (point_key(c[0]), point_key(c[1])))
            cycle = cx.cells[2][rep]
            n = len(cycle)
            for w in (a, b):
                if w in cycle:
                    continue
                for i in range(n):
                    p, q = cycle[i], cycle[(i + 1) % n]
                    if _on_segment(p, q, w) is not None:
                        erep, wr = _edge_rep_point(cx, orb1, p, q, w)
                        if wr not in splits[erep]:
                            splits[erep].append(wr)
                        break
                else:
                    raise OrbitInconsistency("wall chord endpoint is not on the face boundary")
            face_plans[rep] = [FacePlan("chord", (a, b))]
        if not face_plans:
            return cx
        cx = subdivide(cx, finder, dict(splits), face_plans)
    raise OrbitInconsistency("wall refinement did not terminate")


# ---------------------------------------------------------------------------
# stabilizers


TYPE_ORDERS = {"Trivial": 1, "C2": 2, "C3": 3, "V4": 4, "S3": 6, "A4": 12}
CUSP_TYPE = "ZxZ"


@dataclass
class StabilizerInfo:
    """A cell stabilizer: isomorphism type, generators, and the element list when finite."""

    type_tag: str
    generators: list[PslMatrix]
    elements: list[PslMatrix] | None = None

    @property
    def order(self) -> int | None:
        return None if self.elements is None else len(self.elements)

    @property
    def is_finite(self) -> bool:
        return self.elements is not None


def close_group(gens: Sequence[PslMatrix], ring: RingSpec, cap: int = 12) -> list[PslMatrix]:
    """All products of the generators; raises if more than ``cap`` elements appear."""
    one = PslMatrix.identity(ring)
    elements = {one.key(): one}
    frontier = [one]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = g @ s
                if h.key() not in elements:
                    elements[h.key()] = h
                    nxt.append(h)
                    if len(elements) > cap:
                        raise UnboundedStabilizer("stabilizer closure exceeds order twelve")
        frontier = nxt
    return sorted(elements.values())


def recognize(elements: Sequence[PslMatrix]) -> str:
    """Isomorphism type of a finite cell stabilizer from its full element list."""
    n = len(elements)
    orders = [g.order(cap=12) for g in elements]
    if any(o is None for o in orders):
        raise UnknownType("element of infinite order in a finite stabilizer")
    abelian = all((g @ h).key() == (h @ g).key() for g in elements for h in elements)
    top = max(orders)
    if n == 1:
        return "Trivial"
    if n == 2:
        return "C2"
    if n == 3:
        return "C3"
    if n == 4 and top == 2:
        return "V4"
    if n == 6 and not abelian:
        return "S3"
    if n == 12 and top == 3:
        return "A4"
    raise UnknownType(f"group of order {n} with element orders {sorted(orders)}")


def minimal_generators(elements: Sequence[PslMatrix], ring: RingSpec) -> list[PslMatrix]:
    """A short generating list, chosen greedily from high-order elements first."""
    target = {g.key() for g in elements}
    gens: list[PslMatrix] = []
    span = {PslMatrix.identity(ring).key()}
    for g in sorted(elements, key=lambda g: (-g.order(), g.key())):
        if span == target:
            break
        if g.key() in span:
            continue
        gens.append(g)
        span = {h.key() for h in close_group(gens, ring)}
    return gens


def finite_stabilizer(elements: Sequence[PslMatrix], ring: RingSpec) -> StabilizerInfo:
    closed = close_group(list(elements), ring)
    if {g.key() for g in closed} != {g.key() for g in elements} | {PslMatrix.identity(ring).key()}:
        raise OrbitInconsistency("stabilizer element list is not closed under products")
    return StabilizerInfo(recognize(closed), minimal_generators(closed, ring), closed)


def cusp_stabilizer(ring: RingSpec, s: HPoint) -> StabilizerInfo:
    """The rank-two parabolic group fixing the cusp s = lam/mu.

    Its elements are (1 - x lam mu, -x lam^2; x mu^2, 1 + x lam mu) with x in the
    inverse square of I = (lam, mu), which is conj(I)^2 / N(I)^2.  The two
    generators come from the Hermite basis of that lattice.
    """
    lam, mu = Cusp(s.x, s.y).pair(ring)
    ideal = ideal_from_generators(ring, [lam, mu])
    square = ideal.conjugate() * ideal.conjugate()
    n2 = ideal.norm ** 2
    mul = ring.mul
    gens = []
    for b in square.basis():
        x = (Fraction(b[0], n2), Fraction(b[1], n2))
        xlm = mul(x, mul(lam, mu))
        xll = mul(x, mul(lam, lam))
        xmm = mul(x, mul(mu, mu))
        entries = ((1 - xlm[0], -xlm[1]), (-xll[0], -xll[1]), xmm, (1 + xlm[0], xlm[1]))
        if any(Fraction(e).denominator != 1 for pair in entries for e in pair):
            raise OrbitInconsistency("cusp stabilizer generator is not integral")
        g = PslMatrix(*[(int(p[0]), int(p[1])) for p in entries], ring)
        if act_on_point(g, s) != s:
            raise OrbitInconsistency("parabolic generator does not fix the cusp")
        gens.append(g)
    if (gens[0] @ gens[1]).key() != (gens[1] @ gens[0]).key():
        raise OrbitInconsistency("cusp stabilizer generators do not commute")
    return StabilizerInfo(CUSP_TYPE, gens, None)


# ---------------------------------------------------------------------------
# the orbit complex


@dataclass
class Incidence:
    """Orbit rep ``face`` (one dimension down) occurs in a boundary with ``sign``.

    ``pairing`` maps the stored face rep onto the actual boundary cell, so the
    boundary cell is pairing . rep with orientation multiplied by ``sign``.
    """

    face: int
    sign: int
    pairing: PslMatrix


@dataclass
class OrbitCell:
    dim: int
    index: int
    points: tuple[HPoint, ...]
    stabilizer: StabilizerInfo
    boundary: list[Incidence]
    carrier: Carrier | None = None

    @property
    def is_singular(self) -> bool:
        return self.dim == 0 and self.points[0].t == 0


@dataclass
class GammaComplex:
    """Orbit representatives of a rigid Gamma-complex, with incidences and stabilizers."""

    m: int
    cells: list[list[OrbitCell]]

    @property
    def ring(self) -> RingSpec:
        return RingSpec(self.m)

    def counts(self) -> tuple[int, int, int]:
        return tuple(len(c) for c in self.cells)

    def type_multiset(self, dim: int) -> dict[str, int]:
        out: dict[str, int] = defaultdict(int)
        for cell in self.cells[dim]:
            out[cell.stabilizer.type_tag] += 1
        return dict(sorted(out.items()))

    def boundary_matrix(self, dim: int) -> list[list[int]]:
        """Integer matrix of the quotient boundary C_dim -> C_{dim-1}; rows index lower cells."""
        rows, cols = len(self.cells[dim - 1]), len(self.cells[dim])
        mat = [[0] * cols for _ in range(rows)]
        for j, cell in enumerate(self.cells[dim]):
            for inc in cell.boundary:
                mat[inc.face][j] += inc.sign
        return mat


def _lift(cx: PeriodicComplex, orb: OrbitData, dim: int, points: Sequence[HPoint]):
    """(orbit index, g) with g mapping the rep placement exactly onto the given cell."""
    hit = cx.locate(dim, points)
    if hit is None:
        raise OrbitInconsistency("boundary cell missing from the complex")
    key, shift = hit
    return orb.orbit_of[key], shift_matrix(cx.ring, shift).inverse() @ orb.carrier[key]


def build_orbits(cx: PeriodicComplex, cache: dict | None = None) -> GammaComplex:
    """Orbit representatives, incidences with pairings, and stabilizers of a rigid complex."""
    finder = OrbitFinder(cx, cache)
    orbs = [finder.orbits(d) for d in range(3)]
    ring = cx.ring
    cells: list[list[OrbitCell]] = [[], [], []]
    for dim in range(3):
        orb = orbs[dim]
        for idx, rep in enumerate(orb.reps):
            pts = cx.cells[dim][rep]
            if dim == 0 and pts[0].t == 0:
                stab = cusp_stabilizer(ring, pts[0])
            else:
                elements = orb.setwise[rep]
                if not all(fixes_pointwise(h, pts) for h in elements):
                    raise OrbitInconsistency("complex is not rigid; subdivide it first")
                stab = finite_stabilizer(elements, ring)
            boundary = []
            if dim == 1:
                for sign, v in ((-1, pts[0]), (1, pts[1])):
                    face, g = _lift(cx, orbs[0], 0, (v,))
                    boundary.append(Incidence(face, sign, g))
            elif dim == 2:
                n = len(pts)
                for i in range(n):
                    p, q = pts[i], pts[(i + 1) % n]
                    face, g = _lift(cx, orbs[1], 1, (p, q))
                    e0, e1 = cx.cells[1][orbs[1].reps[face]]
                    image = (act_on_point(g, e0), act_on_point(g, e1))
                    if image == (p, q):
                        sign = 1
                    elif image == (q, p):
                        sign = -1
                    else:
                        raise OrbitInconsistency("pairing does not match the boundary edge")
                    boundary.append(Incidence(face, sign, g))
            carrier = cx.carriers[dim].get(rep) if dim > 0 else None
            cells[dim].append(OrbitCell(dim, idx, tuple(pts), stab, boundary, carrier))
    return GammaComplex(ring.m, cells)


def equivariant_euler_characteristic(gx: GammaComplex) -> Fraction:
    """Sum of (-1)^dim / |stabilizer| over orbit cells with finite stabilizer."""
    return sum(euler_summands(gx), Fraction(0))


def euler_summands(gx: GammaComplex) -> list[Fraction]:
    """Signed summands (-1)^dim / |stabilizer|, one per finite-stabilizer orbit cell."""
    return [Fraction((-1) ** c.dim, c.stabilizer.order) for d in gx.cells for c in d if c.stabilizer.is_finite]


def find_pairing(cx: PeriodicComplex, dim: int, source: Sequence[HPoint], target: Sequence[HPoint], cache: dict | None = None) -> PslMatrix | None:
    """Some g with g . source = target as vertex sets, or None if the cells are not paired.

    The search is complete: g must take an interior point of the source to a
    floor point, which bounds N(c) by the reciprocal of that point's height.
    """
    finder = OrbitFinder(cx, cache)
    src, dst = cx.locate(dim, source), cx.locate(dim, target)
    if src is None or dst is None:
        raise OrbitInconsistency("cells are not part of the complex")
    (skey, sshift), (tkey, tshift) = src, dst
    for key, h in finder.moves(dim, skey):
        if key == tkey:
            return shift_matrix(cx.ring, tshift).inverse() @ h @ shift_matrix(cx.ring, sshift)
    return None


def build_gamma_complex(m: int, walls: Sequence[Wall] = (), norm_ceiling: int = 400, floor=None) -> GammaComplex:
    """Floor, rigid subdivision, optional wall cuts and orbit data for one m."""
    from .swanfloor import compute_floor

    ring = RingSpec(m)
    if floor is None:
        floor = compute_floor(ring, norm_ceiling=norm_ceiling)
    cx = complex_from_floor(floor)
    cache: dict = {}
    cx = rigidify(cx, cache)
    if walls:
        cx = rigidify(wall_refine(cx, walls, cache), cache)
    return build_orbits(cx, cache)


# ---------------------------------------------------------------------------
# JSON round trip (rationals as "num/den" strings, matrices as four ring pairs)

GAMMA_SCHEMA = "bianchihom.gamma/1"


def _q(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _unq(s: str) -> Fraction:
    return Fraction(s)


def matrix_to_json(g: PslMatrix) -> list[list[int]]:
    return [list(g.a), list(g.b), list(g.c), list(g.d)]


def matrix_from_json(ring: RingSpec, data) -> PslMatrix:
    return PslMatrix(*(tuple(e) for e in data), ring=ring)


def gamma_to_json(gx: GammaComplex) -> dict:
    """A plain dict in canonical order; json.dumps(..., sort_keys=True) gives stable bytes."""
    cells = []
    for dim in range(3):
        for c in gx.cells[dim]:
            stab = c.stabilizer
            cells.append(
                {
                    "dim": dim,
                    "index": c.index,
                    "points": [[_q(p.x), _q(p.y), _q(p.t)] for p in c.points],
                    "stabilizer": {
                        "type": stab.type_tag,
                        "generators": [matrix_to_json(g) for g in stab.generators],
                        "elements": None if stab.elements is None else [matrix_to_json(g) for g in stab.elements],
                    },
                    "boundary": [
                        {"face": inc.face, "sign": inc.sign, "pairing": matrix_to_json(inc.pairing)} for inc in c.boundary
                    ],
                    "carrier": None
                    if c.carrier is None
                    else {"centre": [_q(c.carrier[0][0]), _q(c.carrier[0][1])], "radius_sq": _q(c.carrier[1])},
                }
            )
    return {"schema": GAMMA_SCHEMA, "m": gx.m, "counts": list(gx.counts()), "cells": cells}


def gamma_from_json(data: dict) -> GammaComplex:
    if data.get("schema") != GAMMA_SCHEMA:
        raise ValueError(f"unsupported schema {data.get('schema')!r}")
    ring = RingSpec(data["m"])
    mat = lambda e: matrix_from_json(ring, e)
    cells: list[list[OrbitCell]] = [[], [], []]
    for c in data["cells"]:
        st = c["stabilizer"]
        stab = StabilizerInfo(
            st["type"],
            [mat(g) for g in st["generators"]],
            None if st["elements"] is None else [mat(g) for g in st["elements"]],
        )
        car = c["carrier"]
        carrier = None if car is None else ((_unq(car["centre"][0]), _unq(car["centre"][1])), _unq(car["radius_sq"]))
        cells[c["dim"]].append(
            OrbitCell(
                c["dim"],
                c["index"],
                tuple(HPoint(*(_unq(v) for v in p)) for p in c["points"]),
                stab,
                [Incidence(b["face"], b["sign"], mat(b["pairing"])) for b in c["boundary"]],
                carrier,
            )
        )
    return GammaComplex(data["m"], cells)
