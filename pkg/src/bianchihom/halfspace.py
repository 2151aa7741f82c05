"""Upper half-space, its boundary, and the action of PSL2 over an imaginary quadratic ring.

Points of the boundary plane are written ``z = x + y*sqrt(m)*i`` with rational
``x, y``; an interior point carries ``t = r**2`` as its height coordinate so that
every coordinate stays rational.

The group acts with the sign convention

    (a b; c d) . z = (a z - b) / (-c z + d)

and on interior points

    (z, r) -> ( ((conj(d) - conj(c) conj(z)) (a z - b) - r^2 conj(c) a) / D , r / D ),
    D = |c z - d|^2 + r^2 |c|^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .quadring import QuadInt, RingSpec, ideal_from_generators

Field = tuple[Fraction, Fraction]  # x + y*sqrt(-m)


class NotInterior(ValueError):
    """Raised when an interior-only operation receives a boundary point."""


class NotInvertible(ValueError):
    """Raised when a matrix does not have determinant one."""


# ---------------------------------------------------------------------------
# arithmetic in Q(sqrt(-m)) written in plane coordinates


def fmul(m: int, u: Field, v: Field) -> Field:
    return (u[0] * v[0] - m * u[1] * v[1], u[0] * v[1] + u[1] * v[0])


def fconj(u: Field) -> Field:
    return (u[0], -u[1])


def fabs2(m: int, u: Field):
    return u[0] * u[0] + m * u[1] * u[1]


def fdiv(m: int, u: Field, v: Field) -> Field:
    n = fabs2(m, v)
    if n == 0:
        raise ZeroDivisionError("division by zero in the quadratic field")
    w = fmul(m, u, fconj(v))
    return (Fraction(w[0]) / n, Fraction(w[1]) / n)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HPoint:
    """A point (z, r) of upper half-space with z = x + y*sqrt(m)*i and t = r^2."""

    x: Fraction
    y: Fraction
    t: Fraction

    def __post_init__(self):
        for name in ("x", "y", "t"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        if self.t < 0:
            raise ValueError("height t must be nonnegative")

    @property
    def z(self) -> Field:
        return (self.x, self.y)

    @property
    def is_interior(self) -> bool:
        return self.t > 0

    def key(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.x, self.y, self.t)

    def translated(self, dx, dy) -> "HPoint":
        return HPoint(self.x + dx, self.y + dy, self.t)


@dataclass(frozen=True)
class Cusp:
    """A boundary point: infinity (``x is None``) or the field element x + y*sqrt(-m)."""

    x: Fraction | None
    y: Fraction | None

    @staticmethod
    def infinity() -> "Cusp":
        return Cusp(None, None)

    @staticmethod
    def at(x, y) -> "Cusp":
        return Cusp(Fraction(x), Fraction(y))

    @staticmethod
    def from_pair(ring: RingSpec, lam: tuple[int, int], mu: tuple[int, int]) -> "Cusp":
        if mu == (0, 0):
            if lam == (0, 0):
                raise ValueError("(0, 0) is not a cusp")
            return Cusp.infinity()
        v = fdiv(ring.m, ring.to_plane(*lam), ring.to_plane(*mu))
        return Cusp(v[0], v[1])

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def key(self):
        return (1, 0, 0) if self.is_infinity else (0, self.x, self.y)

    def pair(self, ring: RingSpec) -> tuple[tuple[int, int], tuple[int, int]]:
        """Canonical (lambda, mu): mu the least positive integer with mu*s integral."""
        if self.is_infinity:
            return ((1, 0), (0, 0))
        a, b = ring.from_plane(self.x, self.y)
        n = 1
        while (a * n).denominator != 1 or (b * n).denominator != 1:
            n += 1
        return ((int(a * n), int(b * n)), (n, 0))

    def ideal(self, ring: RingSpec):
        lam, mu = self.pair(ring)
        return ideal_from_generators(ring, [lam, mu])


@dataclass(frozen=True)
class PslMatrix:
    """An element of PSL2(O) with the canonical sign among {M, -M}."""

    a: tuple[int, int]
    b: tuple[int, int]
    c: tuple[int, int]
    d: tuple[int, int]
    ring: RingSpec

    def __post_init__(self):
        r = self.ring
        det = _sub(r.mul(self.a, self.d), r.mul(self.b, self.c))
        if det != (1, 0):
            raise NotInvertible(f"determinant {det} is not one")
        for entry in (self.a, self.b, self.c, self.d):
            if entry != (0, 0):
                if entry < (0, 0):
                    neg = tuple((-e[0], -e[1]) for e in (self.a, self.b, self.c, self.d))
                    object.__setattr__(self, "a", neg[0])
                    object.__setattr__(self, "b", neg[1])
                    object.__setattr__(self, "c", neg[2])
                    object.__setattr__(self, "d", neg[3])
                break

    @staticmethod
    def of(ring: RingSpec, a, b, c, d) -> "PslMatrix":
        def conv(v):
            if isinstance(v, QuadInt):
                return v.pair
            if isinstance(v, int):
                return (v, 0)
            return (int(v[0]), int(v[1]))

        return PslMatrix(conv(a), conv(b), conv(c), conv(d), ring)

    @staticmethod
    def identity(ring: RingSpec) -> "PslMatrix":
        return PslMatrix((1, 0), (0, 0), (0, 0), (1, 0), ring)

    @staticmethod
    def translation(ring: RingSpec, shift: tuple[int, int]) -> "PslMatrix":
        """The element (1 shift; 0 1), which acts as z -> z - shift."""
        return PslMatrix((1, 0), shift, (0, 0), (1, 0), ring)

    def key(self) -> tuple[int, ...]:
        return self.a + self.b + self.c + self.d

    def __lt__(self, other: "PslMatrix") -> bool:
        return self.key() < other.key()

    def __matmul__(self, other: "PslMatrix") -> "PslMatrix":
        r = self.ring
        mul = r.mul
        return PslMatrix(
            _add(mul(self.a, other.a), mul(self.b, other.c)),
            _add(mul(self.a, other.b), mul(self.b, other.d)),
            _add(mul(self.c, other.a), mul(self.d, other.c)),
            _add(mul(self.c, other.b), mul(self.d, other.d)),
            r,
        )

    __mul__ = __matmul__

    def inverse(self) -> "PslMatrix":
        neg = lambda v: (-v[0], -v[1])
        return PslMatrix(self.d, neg(self.b), neg(self.c), self.a, self.ring)

    def __pow__(self, n: int) -> "PslMatrix":
        base = self if n >= 0 else self.inverse()
        out = PslMatrix.identity(self.ring)
        for _ in range(abs(n)):
            out = out @ base
        return out

    def is_identity(self) -> bool:
        return self.key() == (1, 0, 0, 0, 0, 0, 1, 0)

    def trace(self) -> tuple[int, int]:
        return _add(self.a, self.d)

    def order(self, cap: int = 12) -> int | None:
        """Order in PSL2, or None if it exceeds ``cap`` (infinite order in practice)."""
        g = self
        for k in range(1, cap + 1):
            if g.is_identity():
                return k
            g = g @ self
        return None

    def entries(self) -> list[QuadInt]:
        return [QuadInt(v[0], v[1], self.ring) for v in (self.a, self.b, self.c, self.d)]

    def __str__(self):
        a, b, c, d = (str(e) for e in self.entries())
        return f"({a}, {b}; {c}, {d})"


def _add(u, v):
    return (u[0] + v[0], u[1] + v[1])


def _sub(u, v):
    return (u[0] - v[0], u[1] - v[1])


# ---------------------------------------------------------------------------
# actions


def _plane_entries(g: PslMatrix):
    to = g.ring.to_plane
    return to(*g.a), to(*g.b), to(*g.c), to(*g.d)


def height_after(g: PslMatrix, p: HPoint) -> Fraction:
    """D = |cz - d|^2 + t|c|^2; the image height is t / D^2."""
    if not p.is_interior:
        raise NotInterior("height_after needs an interior point")
    m = g.ring.m
    c = g.ring.to_plane(*g.c)
    d = g.ring.to_plane(*g.d)
    w = fmul(m, c, p.z)
    w = (w[0] - d[0], w[1] - d[1])
    return fabs2(m, w) + p.t * fabs2(m, c)


def act_interior(g: PslMatrix, p: HPoint) -> HPoint:
    if not p.is_interior:
        raise NotInterior("act_interior needs an interior point")
    m = g.ring.m
    a, b, c, d = _plane_entries(g)
    z = p.z
    cz_d = fmul(m, c, z)
    cz_d = (cz_d[0] - d[0], cz_d[1] - d[1])
    denom = fabs2(m, cz_d) + p.t * fabs2(m, c)
    left = fconj(cz_d)
    left = (-left[0], -left[1])  # conj(d) - conj(c) conj(z)
    az_b = fmul(m, a, z)
    az_b = (az_b[0] - b[0], az_b[1] - b[1])
    num = fmul(m, left, az_b)
    ca = fmul(m, fconj(c), a)
    num = (num[0] - p.t * ca[0], num[1] - p.t * ca[1])
    return HPoint(num[0] / denom, num[1] / denom, p.t / (denom * denom))


def act_cusp(g: PslMatrix, s: Cusp) -> Cusp:
    """Boundary action z -> (a z - b) / (-c z + d)."""
    m = g.ring.m
    a, b, c, d = _plane_entries(g)
    if s.is_infinity:
        if c == (0, 0):
            return Cusp.infinity()
        v = fdiv(m, a, (-c[0], -c[1]))
        return Cusp(v[0], v[1])
    z = (s.x, s.y)
    num = fmul(m, a, z)
    num = (num[0] - b[0], num[1] - b[1])
    den = fmul(m, c, z)
    den = (d[0] - den[0], d[1] - den[1])
    if den == (0, 0):
        return Cusp.infinity()
    v = fdiv(m, num, den)
    return Cusp(v[0], v[1])


def act_point(g: PslMatrix, p):
    """Dispatch on interior points and cusps."""
    if isinstance(p, Cusp):
        return act_cusp(g, p)
    if p.t == 0:
        c = act_cusp(g, Cusp(p.x, p.y))
        return c
    return act_interior(g, p)


def fixed_axis(g: PslMatrix):
    """The fixed geodesic of an elliptic element with c != 0.

    Returns ``(normal, offset, center, radius_sq)``: the axis is the intersection
    of the vertical plane ``normal . (x, y) = offset`` (Euclidean dot product in
    the metric dx^2 + m dy^2 is *not* used; the plane is given in raw x, y) with
    the sphere ``|z - center|^2 + t = radius_sq``.
    """
    m = g.ring.m
    a, b, c, d = _plane_entries(g)
    tr = (a[0] + d[0], a[1] + d[1])
    if tr[1] != 0:
        raise ValueError("trace is not rational")
    disc = tr[0] * tr[0] - 4
    if disc >= 0:
        raise ValueError("element is not elliptic")
    if c == (0, 0):
        raise ValueError("elliptic element with c = 0 has a vertical axis")
    # Re(c z) = Re(d - a) / 2, with c z = (c0 x - m c1 y) + ...
    normal = (c[0], -m * c[1])
    offset = (d[0] - a[0]) / 2
    center = fdiv(m, ((d[0] - a[0]) / 2, (d[1] - a[1]) / 2), c)
    radius_sq = Fraction(-disc, 4) / fabs2(m, c)
    return normal, Fraction(offset), center, radius_sq
