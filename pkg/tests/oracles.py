"""Independent reference implementations used to check the package."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import sympy
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from bianchihom.abelianlin import FgAbelianGroup


def sympy_norm(m: int, a: int, b: int) -> int:
    """N(a + b w) via exact algebraic numbers."""
    root = sympy.sqrt(-m)
    w = root if m % 4 in (1, 2) else (-1 + root) / 2
    x = a + b * w
    return int(sympy.nsimplify(sympy.expand(x * sympy.conjugate(x))))


def invariant_factors(mat: list[list[int]], rows: int, cols: int) -> list[int]:
    """Nonzero diagonal of the Smith form, computed by sympy."""
    if rows == 0 or cols == 0:
        return []
    d = sympy_snf(sympy.Matrix(rows, cols, lambda i, j: mat[i][j]), domain=sympy.ZZ)
    return sorted(abs(int(d[i, i])) for i in range(min(rows, cols)) if d[i, i] != 0)


def cokernel(mat: list[list[int]], rows: int, cols: int) -> FgAbelianGroup:
    facs = invariant_factors(mat, rows, cols)
    return FgAbelianGroup.from_cyclics(rows - len(facs), facs)


def reduced_form_count(disc: int) -> int:
    """Number of reduced positive definite forms (a, b, c) with b^2 - 4ac = disc."""
    count = 0
    a = 1
    while 3 * a * a <= -disc:
        for b in range(-a + 1, a + 1):
            if (b * b - disc) % (4 * a):
                continue
            c = (b * b - disc) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) == 1:
                count += 1
        a += 1
    return count


def cyclic_homology(n: int, q: int) -> FgAbelianGroup:
    if q == 0:
        return FgAbelianGroup(1, ())
    return FgAbelianGroup.from_cyclics(0, [n] if q % 2 else [])


def kunneth(h_a, h_b, q: int) -> FgAbelianGroup:
    """H_q(A x B) from the homology functions of A and B (Kunneth formula)."""
    out = FgAbelianGroup.zero()
    for i in range(q + 1):
        out = out + _tensor(h_a(i), h_b(q - i))
    for i in range(q):
        out = out + _tor(h_a(i), h_b(q - 1 - i))
    return out


def _cyclics(g: FgAbelianGroup) -> list[int]:
    return [0] * g.free_rank + list(g.invariant_factors)


def _tensor(g: FgAbelianGroup, h: FgAbelianGroup) -> FgAbelianGroup:
    orders = [math.gcd(a, b) for a in _cyclics(g) for b in _cyclics(h)]
    return FgAbelianGroup.from_cyclics(0, orders)


def _tor(g: FgAbelianGroup, h: FgAbelianGroup) -> FgAbelianGroup:
    orders = [math.gcd(a, b) for a in g.invariant_factors for b in h.invariant_factors]
    return FgAbelianGroup.from_cyclics(0, orders)


# -- brute-force finite abelian groups


def _elements(orders):
    return list(itertools.product(*(range(n) for n in orders)))


def _span(orders, gens):
    zero = tuple(0 for _ in orders)
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple((a + b) % n for a, b, n in zip(x, g, orders))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen)


def _iso_type(orders, subset) -> FgAbelianGroup:
    """Isomorphism type of a finite abelian group given as a set of tuples, by element orders."""
    counts = {}
    for x in subset:
        k = 1
        while any((k * a) % n for a, n in zip(x, orders)):
            k += 1
        counts[k] = counts.get(k, 0) + 1
    return _type_from_order_counts(counts, len(subset))


def _type_from_order_counts(counts: dict[int, int], size: int) -> FgAbelianGroup:
    # the number of elements of order dividing d determines the group
    for cand in _all_groups_of_order(size):
        if _order_profile(cand) == counts:
            return cand
    raise AssertionError("no matching group")


def _order_profile(g: FgAbelianGroup) -> dict[int, int]:
    orders = list(g.invariant_factors)
    out = {}
    for x in _elements(orders):
        k = 1
        while any((k * a) % n for a, n in zip(x, orders)):
            k += 1
        out[k] = out.get(k, 0) + 1
    return out


def _partitions(n):
    if n == 0:
        yield ()
        return
    def rec(n, largest):
        if n == 0:
            yield ()
            return
        for k in range(min(n, largest), 0, -1):
            for rest in rec(n - k, k):
                yield (k,) + rest
    yield from rec(n, n)


def _all_groups_of_order(size: int) -> list[FgAbelianGroup]:
    fac = sympy.factorint(size)
    choices = []
    for p, e in fac.items():
        choices.append([[int(p) ** k for k in part] for part in _partitions(int(e))])
    out = []
    for combo in itertools.product(*choices):
        out.append(FgAbelianGroup.from_cyclics(0, [x for part in combo for x in part]))
    return out


def brute_extensions(sub: FgAbelianGroup, quot: FgAbelianGroup) -> set[FgAbelianGroup]:
    """All finite abelian E having a subgroup isomorphic to sub with quotient isomorphic to quot."""
    size = sub.order * quot.order
    out = set()
    for e in _all_groups_of_order(size):
        orders = list(e.invariant_factors)
        elems = _elements(orders)
        found = False
        seen_subgroups = set()
        ngen = max(1, len(sub.invariant_factors))
        for gens in itertools.combinations(elems, ngen):
            s = _span(orders, gens)
            if s in seen_subgroups or len(s) != sub.order:
                continue
            seen_subgroups.add(s)
            if _iso_type(orders, s) != sub:
                continue
            if _quotient_type(orders, s) == quot:
                found = True
                break
        if found:
            out.add(e)
    return out


def _quotient_type(orders, s) -> FgAbelianGroup:
    size = 1
    for n in orders:
        size *= n
    size //= len(s)
    counts = {}
    for x in _elements(orders):
        k = 1
        while tuple((k * a) % n for a, n in zip(x, orders)) not in s:
            k += 1
        counts[k] = counts.get(k, 0) + 1
    counts = {k: v // len(s) for k, v in counts.items()}
    return _type_from_order_counts(counts, size)


def chi_from_counts(gx) -> Fraction:
    """Equivariant Euler characteristic straight from the cell list."""
    total = Fraction(0)
    for dim, cells in enumerate(gx.cells):
        for c in cells:
            if c.stabilizer.elements is not None:
                total += Fraction((-1) ** dim, len(c.stabilizer.elements))
    return total


def poincare_action(m: int, entries, x, y, t):
    """Image of (z, r^2) under z -> (a z - b)/(-c z + d) via the textbook quaternion formula.

    entries are (a, b, c, d) as (re, im-coefficient-of-sqrt(m)) plane pairs; the
    result is (x', y', t') with exact sympy rationals.
    """
    s = sympy.sqrt(m) * sympy.I
    a, b, c, d = (sympy.Rational(e[0]) + sympy.Rational(e[1]) * s for e in entries)
    alpha, beta, gamma, delta = a, -b, -c, d
    z = sympy.Rational(x) + sympy.Rational(y) * s
    r2 = sympy.Rational(t)
    den = sympy.expand(abs_sq(gamma * z + delta) + abs_sq(gamma) * r2)
    num = sympy.expand((alpha * z + beta) * sympy.conjugate(gamma * z + delta) + alpha * sympy.conjugate(gamma) * r2)
    re, im = sympy.re(num) / den, sympy.im(num) / den
    return sympy.nsimplify(re), sympy.nsimplify(im / sympy.sqrt(m)), sympy.nsimplify(r2 / den**2)


def abs_sq(w):
    return sympy.expand(w * sympy.conjugate(w))


def is_unimodular_bruteforce(m: int, lam, mu) -> bool:
    """(lam, mu) generate the whole ring: the Z-span of lam, lam*w, mu, mu*w has index one."""
    half = m % 4 == 3
    wn = (1 + m) // 4 if half else m

    def times_w(v):
        a, b = v
        return (-wn * b, a - b) if half else (-m * b, a)

    vecs = [lam, times_w(lam), mu, times_w(mu)]
    facs = invariant_factors([[v[0] for v in vecs], [v[1] for v in vecs]], 2, 4)
    return facs == [1, 1]


def brute_floor_height(m: int, x: Fraction, y: Fraction, max_norm: int) -> Fraction:
    """max over unimodular (lam, mu), N(mu) <= max_norm, of r^2 - |z - lam/mu|^2."""
    half = m % 4 == 3

    def plane(a, b):
        return (Fraction(a) - Fraction(b, 2), Fraction(b, 2)) if half else (Fraction(a), Fraction(b))

    def nrm(a, b):
        return a * a - a * b + (1 + m) // 4 * b * b if half else a * a + m * b * b

    best = None
    span = int(max_norm**0.5) + 2
    mus = [(a, b) for a in range(-span, span + 1) for b in range(-span, span + 1) if 0 < nrm(a, b) <= max_norm]
    for mu in mus:
        n = nrm(*mu)
        mx, my = plane(*mu)
        # lam/mu must be close to z: lam ~ z * mu
        zx, zy = x * mx - m * y * my, x * my + y * mx
        if half:
            la0, lb0 = zx + zy, 2 * zy
        else:
            la0, lb0 = zx, zy
        for a in range(int(la0) - 3, int(la0) + 4):
            for b in range(int(lb0) - 3, int(lb0) + 4):
                if not is_unimodular_bruteforce(m, (a, b), mu):
                    continue
                lx, ly = plane(a, b)
                cx = (lx * mx + m * ly * my) / n
                cy = (ly * mx - lx * my) / n
                h = Fraction(1, n) - (x - cx) ** 2 - m * (y - cy) ** 2
                if best is None or h > best:
                    best = h
    return best
