"""Exact arithmetic in the ring of integers of an imaginary quadratic field.

For a square-free ``m > 0`` the ring is ``O = Z[w]`` with ``w = sqrt(-m)`` when
``m = 1, 2 (mod 4)`` and ``w = (-1 + sqrt(-m)) / 2`` when ``m = 3 (mod 4)``.
Elements are stored as integer pairs ``(a, b)`` meaning ``a + b*w``.

Ideals are kept as a two-by-two Hermite normal form of their Z-basis inside
the basis ``{1, w}``; that is enough to decide equality, norm, unimodularity and
principality for the small norms that occur in fundamental-domain work.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator


class ZeroPair(ValueError):
    """Raised when an ideal is requested from the pair (0, 0)."""


class OmegaKind(enum.Enum):
    SQRT_M = "SqrtM"
    HALF_PLUS_SQRT_M = "HalfPlusSqrtM"


def is_square_free(n: int) -> bool:
    if n < 1:
        return False
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True)
class RingSpec:
    """The ring of integers of Q(sqrt(-m))."""

    m: int

    def __post_init__(self):
        if not isinstance(self.m, int) or not is_square_free(self.m):
            raise ValueError(f"m must be a square-free positive integer, got {self.m!r}")

    @property
    def omega_kind(self) -> OmegaKind:
        return OmegaKind.HALF_PLUS_SQRT_M if self.m % 4 == 3 else OmegaKind.SQRT_M

    @property
    def half(self) -> bool:
        return self.m % 4 == 3

    @property
    def discriminant(self) -> int:
        return -self.m if self.half else -4 * self.m

    @property
    def omega_norm(self) -> int:
        """Norm of w: m, or (1 + m)/4 in the half-integral case."""
        return (1 + self.m) // 4 if self.half else self.m

    # ---- raw tuple arithmetic (hot paths avoid object allocation) ----

    def mul(self, x: tuple[int, int], y: tuple[int, int]) -> tuple[int, int]:
        a, b = x
        c, d = y
        bd = b * d
        if self.half:
            return (a * c - self.omega_norm * bd, a * d + b * c - bd)
        return (a * c - self.m * bd, a * d + b * c)

    def conj(self, x: tuple[int, int]) -> tuple[int, int]:
        a, b = x
        if self.half:
            return (a - b, -b)
        return (a, -b)

    def norm_ab(self, a: int, b: int) -> int:
        if self.half:
            return a * a - a * b + self.omega_norm * b * b
        return a * a + self.m * b * b

    def to_plane(self, a, b) -> tuple[Fraction, Fraction]:
        """Coordinates (x, y) with a + b*w = x + y*sqrt(m)*i."""
        if self.half:
            return (Fraction(a) - Fraction(b, 2), Fraction(b, 2))
        return (Fraction(a), Fraction(b))

    def from_plane(self, x: Fraction, y: Fraction) -> tuple[Fraction, Fraction]:
        """Inverse of :meth:`to_plane`; the result may be non-integral."""
        if self.half:
            return (x + y, 2 * y)
        return (Fraction(x), Fraction(y))

    def units(self) -> list[tuple[int, int]]:
        """All units of the ring."""
        out = []
        bound = 2
        for a in range(-bound, bound + 1):
            for b in range(-bound, bound + 1):
                if self.norm_ab(a, b) == 1:
                    out.append((a, b))
        return sorted(out)

    def elements_of_norm(self, n: int) -> list[tuple[int, int]]:
        """All (a, b) with norm exactly n."""
        return [x for x in self.elements_up_to_norm(n) if self.norm_ab(*x) == n]

    def elements_up_to_norm(self, n) -> list[tuple[int, int]]:
        """All (a, b) with norm at most n (n may be a Fraction)."""
        n = Fraction(n)
        if n < 0:
            return []
        out = []
        if self.half:
            # (2a - b)^2 + m b^2 <= 4n
            bmax = math.isqrt(int(4 * n / self.m)) + 1
            for b in range(-bmax, bmax + 1):
                rest = 4 * n - self.m * b * b
                if rest < 0:
                    continue
                s = math.isqrt(int(rest)) + 1
                for u in range(-s, s + 1):
                    if (u + b) % 2:
                        continue
                    a = (u + b) // 2
                    if self.norm_ab(a, b) <= n:
                        out.append((a, b))
        else:
            bmax = math.isqrt(int(n / self.m)) + 1
            for b in range(-bmax, bmax + 1):
                rest = n - self.m * b * b
                if rest < 0:
                    continue
                s = math.isqrt(int(rest)) + 1
                for a in range(-s, s + 1):
                    if self.norm_ab(a, b) <= n:
                        out.append((a, b))
        return out

    def element(self, a: int, b: int = 0) -> "QuadInt":
        return QuadInt(a, b, self)

    @property
    def omega(self) -> "QuadInt":
        return QuadInt(0, 1, self)


@dataclass(frozen=True, order=True)
class QuadInt:
    """The element a + b*w of the ring described by ``ring``."""

    a: int
    b: int
    ring: RingSpec

    @property
    def pair(self) -> tuple[int, int]:
        return (self.a, self.b)

    def _wrap(self, pair: tuple[int, int]) -> "QuadInt":
        return QuadInt(pair[0], pair[1], self.ring)

    def _coerce(self, other) -> tuple[int, int]:
        if isinstance(other, QuadInt):
            if other.ring != self.ring:
                raise ValueError("elements belong to different rings")
            return other.pair
        if isinstance(other, int):
            return (other, 0)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._wrap((self.a + o[0], self.b + o[1]))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._wrap((self.a - o[0], self.b - o[1]))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._wrap((o[0] - self.a, o[1] - self.b))

    def __neg__(self):
        return self._wrap((-self.a, -self.b))

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self._wrap(self.ring.mul(self.pair, o))

    __rmul__ = __mul__

    def conjugate(self) -> "QuadInt":
        return self._wrap(self.ring.conj(self.pair))

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __bool__(self):
        return not self.is_zero()

    def plane(self) -> tuple[Fraction, Fraction]:
        return self.ring.to_plane(self.a, self.b)

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        w = "w" if self.b in (1, -1) else f"{abs(self.b)}w"
        if self.a == 0:
            return ("-" if self.b < 0 else "") + w
        return f"{self.a}{'-' if self.b < 0 else '+'}{w}"


def norm(x: QuadInt) -> int:
    """Field norm N(a + b*w)."""
    return x.ring.norm_ab(x.a, x.b)


# ---------------------------------------------------------------------------
# ideals


def _hnf_rows(vectors: list[tuple[int, int]]) -> tuple[int, int, int]:
    """Hermite basis (p, q, r) of the Z-span of integer vectors (u, v).

    The lattice equals Z*(p, 0) + Z*(q, r) with p > 0, r > 0 and 0 <= q < p,
    provided it has full rank.  Returns r = 0 when the span is degenerate.
    """
    # Reduce on the second coordinate first.
    pivot = (0, 0)
    rest = []
    for u, v in vectors:
        pu, pv = pivot
        if v == 0:
            rest.append(u)
            continue
        # Extended gcd on (pv, v) to merge the vector into the pivot.
        g, s, t = _xgcd(pv, v)
        new_pivot = (s * pu + t * u, g)
        # The complementary combination kills the second coordinate.
        if g:
            rest.append((v // g) * pu - (pv // g) * u)
        pivot = new_pivot
    p = 0
    for u in rest:
        p = math.gcd(p, u)
    q, r = pivot
    if r < 0:
        q, r = -q, -r
    if p:
        q %= p
    return (p, q, r)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        k = old_r // r
        old_r, r = r, old_r - k * r
        old_s, s = s, old_s - k * s
        old_t, t = t, old_t - k * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


@dataclass(frozen=True)
class OIdeal:
    """A nonzero ideal, stored as the Hermite basis {p, q + r*w} with 0 <= q < p."""

    p: int
    q: int
    r: int
    ring: RingSpec

    @property
    def hnf(self) -> tuple[tuple[int, int], tuple[int, int]]:
        """Columns are the basis vectors in the coordinates (1, w)."""
        return ((self.p, self.q), (0, self.r))

    @property
    def norm(self) -> int:
        return self.p * self.r

    def basis(self) -> list[tuple[int, int]]:
        return [(self.p, 0), (self.q, self.r)]

    def contains(self, x: tuple[int, int]) -> bool:
        u, v = x
        if v % self.r:
            return False
        return (u - (v // self.r) * self.q) % self.p == 0

    def conjugate(self) -> "OIdeal":
        ring = self.ring
        return ideal_from_generators(ring, [ring.conj(v) for v in self.basis()])

    def __mul__(self, other: "OIdeal") -> "OIdeal":
        ring = self.ring
        gens = [ring.mul(x, y) for x in self.basis() for y in other.basis()]
        return ideal_from_generators(ring, gens)

    def elements_of_norm(self, n: int) -> list[tuple[int, int]]:
        return [x for x in self.ring.elements_of_norm(n) if self.contains(x)]

    def shortest_norm(self) -> int:
        """Smallest norm of a nonzero element."""
        n = self.norm
        while True:
            if self.elements_of_norm(n):
                return n
            n += self.norm


def ideal_from_generators(ring: RingSpec, gens: list[tuple[int, int]]) -> OIdeal:
    """Ideal generated over O by the given elements."""
    vectors = []
    w = (0, 1)
    for g in gens:
        vectors.append(g)
        vectors.append(ring.mul(g, w))
    p, q, r = _hnf_rows(vectors)
    if r == 0 or p == 0:
        raise ZeroPair("generators span the zero ideal")
    return OIdeal(p, q, r, ring)


def ideal_from_pair(c: QuadInt, d: QuadInt) -> OIdeal:
    """HNF of cO + dO."""
    if c.is_zero() and d.is_zero():
        raise ZeroPair("ideal of (0, 0) is not defined")
    return ideal_from_generators(c.ring, [c.pair, d.pair])


def pair_ideal_norm(ring: RingSpec, c: tuple[int, int], d: tuple[int, int]) -> int:
    """Norm of cO + dO: the gcd of the maximal minors of its Z-generators."""
    w = (0, 1)
    vs = (c, ring.mul(c, w), d, ring.mul(d, w))
    g = 0
    for i in range(4):
        for j in range(i + 1, 4):
            g = math.gcd(g, vs[i][0] * vs[j][1] - vs[i][1] * vs[j][0])
    return g


def is_unimodular_pair(c: QuadInt, d: QuadInt) -> bool:
    """True iff cO + dO = O."""
    if c.is_zero() and d.is_zero():
        raise ZeroPair("unimodularity of (0, 0) is not defined")
    return pair_ideal_norm(c.ring, c.pair, d.pair) == 1


def principal_ideal(ring: RingSpec, x: tuple[int, int]) -> OIdeal:
    return ideal_from_generators(ring, [x])


def ideal_generator(ideal: OIdeal) -> tuple[int, int] | None:
    """An element generating the ideal, or None if it is not principal."""
    for x in ideal.ring.elements_of_norm(ideal.norm):
        if principal_ideal(ideal.ring, x) == ideal:
            return x
    return None


def ideal_class_is_principal(ideal: OIdeal) -> bool:
    return ideal_generator(ideal) is not None


def same_ideal_class(first: OIdeal, second: OIdeal) -> bool:
    """True iff first and second differ by a principal factor."""
    return ideal_class_is_principal(first * second.conjugate())


@lru_cache(maxsize=None)
def reduced_forms(discriminant: int) -> tuple[tuple[int, int, int], ...]:
    """Reduced primitive positive definite forms (a, b, c) of the discriminant."""
    if discriminant >= 0:
        raise ValueError("discriminant must be negative")
    forms = []
    amax = math.isqrt(-discriminant // 3) + 1
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            num = b * b - discriminant
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if c == a and b < 0:
                continue
            if math.gcd(math.gcd(a, abs(b)), c) != 1:
                continue
            forms.append((a, b, c))
    return tuple(forms)


def class_group_order(ring: RingSpec) -> int:
    """Class number via the count of reduced forms."""
    return len(reduced_forms(ring.discriminant))


def _solve_combination(vectors: list[tuple[int, int]], target: tuple[int, int]) -> list[int] | None:
    """Integer coefficients k with sum k_i * vectors_i = target, or None."""
    n = len(vectors)
    # Each row: (u, v, coefficient vector)
    rows = [(u, v, [int(i == j) for j in range(n)]) for i, (u, v) in enumerate(vectors)]
    pivot = (0, 0, [0] * n)
    flat = []
    for u, v, co in rows:
        if v == 0:
            flat.append((u, co))
            continue
        pu, pv, pco = pivot
        g, s, t = _xgcd(pv, v)
        new = (s * pu + t * u, g, [s * x + t * y for x, y in zip(pco, co)])
        if pv:
            a, b = v // g, pv // g
            flat.append((a * pu - b * u, [a * x - b * y for x, y in zip(pco, co)]))
        pivot = new
    # gcd-combine the flat (second coordinate zero) vectors
    fu, fco = 0, [0] * n
    for u, co in flat:
        g, s, t = _xgcd(fu, u)
        fu, fco = g, [s * x + t * y for x, y in zip(fco, co)]
    tu, tv = target
    pu, pv, pco = pivot
    if pv == 0:
        if tv != 0:
            return None
        beta = 0
    else:
        if tv % pv:
            return None
        beta = tv // pv
    rem = tu - beta * pu
    if fu == 0:
        if rem != 0:
            return None
        alpha = 0
    else:
        if rem % fu:
            return None
        alpha = rem // fu
    return [beta * x + alpha * y for x, y in zip(pco, fco)]


def complete_pair(ring: RingSpec, c: tuple[int, int], d: tuple[int, int]) -> tuple[tuple[int, int], tuple[int, int]]:
    """Some (a, b) with a*d - b*c = 1 for a unimodular pair (c, d)."""
    w = (0, 1)
    negc = (-c[0], -c[1])
    vectors = [d, ring.mul(w, d), negc, ring.mul(w, negc)]
    k = _solve_combination(vectors, (1, 0))
    if k is None:
        raise ValueError(f"pair {c}, {d} is not unimodular")
    return (k[0], k[1]), (k[2], k[3])
