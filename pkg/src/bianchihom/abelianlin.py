"""Finitely generated abelian groups, Smith normal form and homology of presented chain complexes.

Matrices are plain lists of rows of Python integers; ``IntMatrix`` wraps them
when a typed value is wanted at an API boundary.  Every routine is exact.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import sympy

Matrix = list[list[int]]


class NotAComplex(ValueError):
    """Raised when a composite of differentials is not zero modulo relations."""


class NotInLattice(ValueError):
    """Raised when a vector is not an integral combination of a lattice basis."""


# ---------------------------------------------------------------------------
# plain matrix helpers


def zeros(rows: int, cols: int) -> Matrix:
    return [[0] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix, inner: int | None = None) -> Matrix:
    """Product of an r x k and a k x c matrix; ``inner`` gives k when a has no rows."""
    k = len(b) if inner is None else inner
    cols = len(b[0]) if b else 0
    out = []
    for row in a:
        acc = [0] * cols
        for t, x in enumerate(row):
            if x:
                brow = b[t]
                for j in range(cols):
                    if brow[j]:
                        acc[j] += x * brow[j]
        out.append(acc)
    return out


def matvec(a: Matrix, v: Sequence[int]) -> list[int]:
    return [sum(x * y for x, y in zip(row, v) if x) for row in a]


def transpose(a: Matrix, rows: int | None = None) -> Matrix:
    if not a:
        return []
    return [list(col) for col in zip(*a)]


def columns(a: Matrix, ncols: int | None = None) -> list[list[int]]:
    n = ncols if ncols is not None else (len(a[0]) if a else 0)
    return [[row[j] for row in a] for j in range(n)]


def from_columns(cols: Sequence[Sequence[int]], nrows: int) -> Matrix:
    return [[c[i] for c in cols] for i in range(nrows)]


def hstack(*blocks: Matrix, nrows: int) -> Matrix:
    out = [[] for _ in range(nrows)]
    for blk in blocks:
        for i in range(nrows):
            out[i].extend(blk[i] if blk else [])
    return out


def diagonal(values: Sequence[int]) -> Matrix:
    n = len(values)
    return [[values[i] if i == j else 0 for j in range(n)] for i in range(n)]


def rank_mod_p(a: Matrix, p: int) -> int:
    """Rank over the prime field F_p."""
    rows = [[x % p for x in row] for row in a]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][c], -1, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class IntMatrix:
    """An integer matrix with explicit shape, so empty matrices keep their dimensions."""

    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError("entries do not match the declared shape")

    @staticmethod
    def of(entries: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        rows = len(entries)
        c = cols if cols is not None else (len(entries[0]) if rows else 0)
        return IntMatrix(rows, c, tuple(tuple(int(x) for x in r) for r in entries))

    @staticmethod
    def zero(rows: int, cols: int) -> "IntMatrix":
        return IntMatrix.of(zeros(rows, cols), cols)

    def tolist(self) -> Matrix:
        return [list(r) for r in self.entries]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        return IntMatrix.of(matmul(self.tolist(), other.tolist(), self.cols), other.cols)

    def column(self, j: int) -> list[int]:
        return [r[j] for r in self.entries]

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass
class SmithForm:
    """U * M * V = S with U, V unimodular; ``u_inv`` is the inverse of U."""

    u: Matrix
    s: Matrix
    v: Matrix
    u_inv: Matrix
    rows: int
    cols: int

    @property
    def diagonal(self) -> list[int]:
        return [self.s[i][i] for i in range(min(self.rows, self.cols))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)

    @property
    def elementary_divisors(self) -> list[int]:
        return [d for d in self.diagonal if d]


def smith_normal_form(m: Matrix | IntMatrix, cols: int | None = None) -> SmithForm:
    """Smith normal form with transforms, by smallest-entry pivoting.

    The diagonal is nonnegative and each nonzero entry divides the next.
    """
    if isinstance(m, IntMatrix):
        cols, m = m.cols, m.tolist()
    nr = len(m)
    nc = cols if cols is not None else (len(m[0]) if nr else 0)
    a = [list(r) for r in m]
    u = identity(nr)
    ui = identity(nr)
    v = identity(nc)

    def row_add(dst, src, q):  # row_dst -= q * row_src
        if q == 0:
            return
        ad, as_ = a[dst], a[src]
        for j in range(nc):
            if as_[j]:
                ad[j] -= q * as_[j]
        ud, us = u[dst], u[src]
        for j in range(nr):
            if us[j]:
                ud[j] -= q * us[j]
        for row in ui:  # column_src += q * column_dst
            if row[dst]:
                row[src] += q * row[dst]

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]
        for row in ui:
            row[i], row[j] = row[j], row[i]

    def row_neg(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]
        for row in ui:
            row[i] = -row[i]

    def col_add(dst, src, q):  # col_dst -= q * col_src
        if q == 0:
            return
        for row in a:
            if row[src]:
                row[dst] -= q * row[src]
        for row in v:
            if row[src]:
                row[dst] -= q * row[src]

    def col_swap(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    t = 0
    while t < min(nr, nc):
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                x = a[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        row_swap(t, i)
        col_swap(t, j)
        while True:
            done = True
            p = a[t][t]
            for i in range(t + 1, nr):
                if a[i][t]:
                    row_add(i, t, a[i][t] // p)
                    if a[i][t]:
                        done = False
            for j in range(t + 1, nc):
                if a[t][j]:
                    col_add(j, t, a[t][j] // p)
                    if a[t][j]:
                        done = False
            if done:
                bad = next(
                    ((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc) if a[i][j] % p),
                    None,
                )
                if bad is None:
                    break
                row_add(t, bad[0], -1)
                done = False
            # move the smallest nonzero entry of row/column t to the pivot
            cand = [(abs(a[i][t]), i, t) for i in range(t, nr) if a[i][t]]
            cand += [(abs(a[t][j]), t, j) for j in range(t, nc) if a[t][j]]
            _, i, j = min(cand)
            row_swap(t, i)
            col_swap(t, j)
        if a[t][t] < 0:
            row_neg(t)
        t += 1
    return SmithForm(u, a, v, ui, nr, nc)


def solve_integer(a: Matrix, b: Sequence[int], cols: int, smith: SmithForm | None = None) -> list[int] | None:
    """Some integer x with a x = b, or None."""
    sf = smith or smith_normal_form(a, cols)
    ub = matvec(sf.u, b)
    diag = sf.diagonal
    y = [0] * cols
    for i, val in enumerate(ub):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            if val:
                return None
        else:
            if val % d:
                return None
            y[i] = val // d
    return matvec(sf.v, y)


def integer_kernel(a: Matrix, cols: int) -> list[list[int]]:
    """A basis of {x in Z^cols : a x = 0}."""
    sf = smith_normal_form(a, cols)
    r = sf.rank
    return [[sf.v[i][j] for i in range(cols)] for j in range(r, cols)]


def lattice_basis(vectors: Sequence[Sequence[int]], dim: int) -> list[list[int]]:
    """A basis of the subgroup of Z^dim spanned by ``vectors``."""
    if not vectors:
        return []
    g = from_columns(vectors, dim)
    sf = smith_normal_form(g, len(vectors))
    out = []
    for i, d in enumerate(sf.diagonal):
        if d:
            out.append([sf.u_inv[k][i] * d for k in range(dim)])
    return out


# ---------------------------------------------------------------------------
# finitely generated abelian groups


_TERM = re.compile(r"^\(?(?:Z|ℤ)(?:/(\d+))?\)?(?:\^(\d+))?$")


def _prime_powers(n: int) -> list[tuple[int, int]]:
    return sorted((int(p), int(p) ** int(e)) for p, e in sympy.factorint(n).items())


@dataclass(frozen=True)
class FgAbelianGroup:
    """Z^free_rank plus torsion with invariant factors d1 | d2 | ... (each at least 2)."""

    free_rank: int = 0
    invariant_factors: tuple[int, ...] = ()

    def __post_init__(self):
        inv = tuple(int(d) for d in self.invariant_factors)
        object.__setattr__(self, "invariant_factors", inv)
        if self.free_rank < 0:
            raise ValueError("free rank must be nonnegative")
        if any(d < 2 for d in inv) or any(inv[i + 1] % inv[i] for i in range(len(inv) - 1)):
            raise ValueError(f"invalid invariant factors {inv}")

    @staticmethod
    def from_cyclics(free_rank: int, orders: Iterable[int]) -> "FgAbelianGroup":
        """Canonical form of Z^free_rank + sum of Z/n (orders 0 count as free, 1 vanish)."""
        powers: dict[int, list[int]] = {}
        for n in orders:
            n = int(n)
            if n == 0:
                free_rank += 1
                continue
            if n < 0:
                n = -n
            for p, q in _prime_powers(n) if n > 1 else []:
                powers.setdefault(p, []).append(q)
        for p in powers:
            powers[p].sort(reverse=True)
        length = max((len(v) for v in powers.values()), default=0)
        inv = []
        for i in range(length):
            d = 1
            for v in powers.values():
                if i < len(v):
                    d *= v[i]
            inv.append(d)
        return FgAbelianGroup(free_rank, tuple(reversed(inv)))

    @staticmethod
    def from_primary(free_rank: int, parts: dict[int, Sequence[int]]) -> "FgAbelianGroup":
        """From exponent partitions per prime: {2: [2, 1]} is Z/4 + Z/2."""
        return FgAbelianGroup.from_cyclics(free_rank, [p**e for p, es in parts.items() for e in es if e])

    @staticmethod
    def zero() -> "FgAbelianGroup":
        return FgAbelianGroup(0, ())

    @staticmethod
    def parse(text: str) -> "FgAbelianGroup":
        """Parse strings such as ``Z^2 + Z/4 + (Z/3)^2 + Z/2`` (also with ⊕ and ℤ)."""
        s = text.replace(" ", "").replace("⊕", "+")
        if s in ("0", ""):
            return FgAbelianGroup.zero()
        free, orders = 0, []
        for term in s.split("+"):
            mt = _TERM.match(term)
            if not mt:
                raise ValueError(f"cannot parse group term {term!r}")
            mult = int(mt.group(2) or 1)
            if mt.group(1) is None:
                free += mult
            else:
                orders += [int(mt.group(1))] * mult
        return FgAbelianGroup.from_cyclics(free, orders)

    def primary_parts(self) -> dict[int, tuple[int, ...]]:
        """Exponent partition (descending) of each p-primary part."""
        out: dict[int, list[int]] = {}
        for d in self.invariant_factors:
            for p, e in sympy.factorint(d).items():
                out.setdefault(int(p), []).append(int(e))
        return {p: tuple(sorted(es, reverse=True)) for p, es in sorted(out.items())}

    def primary_cyclics(self) -> list[int]:
        return sorted((p**e for p, es in self.primary_parts().items() for e in es), key=lambda n: (_base(n), -n))

    @property
    def torsion_order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self) -> int | None:
        return self.torsion_order if self.is_finite else None

    @property
    def num_generators(self) -> int:
        return self.free_rank + len(self.invariant_factors)

    def torsion(self) -> "FgAbelianGroup":
        return FgAbelianGroup(0, self.invariant_factors)

    def __add__(self, other: "FgAbelianGroup") -> "FgAbelianGroup":
        return FgAbelianGroup.from_cyclics(self.free_rank + other.free_rank, self.invariant_factors + other.invariant_factors)

    def tensor(self, n: int) -> "FgAbelianGroup":
        """G tensor Z/n (n = 0 means Z)."""
        if n == 0:
            return self
        return FgAbelianGroup.from_cyclics(0, [n] * self.free_rank + [math.gcd(d, n) for d in self.invariant_factors])

    def tor(self, n: int) -> "FgAbelianGroup":
        """Tor(G, Z/n)."""
        if n == 0:
            return FgAbelianGroup.zero()
        return FgAbelianGroup.from_cyclics(0, [math.gcd(d, n) for d in self.invariant_factors])

    def dim_mod_p(self, p: int) -> int:
        """Dimension of G tensor F_p."""
        return self.free_rank + sum(1 for d in self.invariant_factors if d % p == 0)

    def __str__(self) -> str:
        terms = []
        if self.free_rank:
            terms.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        for p, es in self.primary_parts().items():
            for e, grp in itertools.groupby(es):
                k = len(list(grp))
                terms.append(f"Z/{p**e}" if k == 1 else f"(Z/{p**e})^{k}")
        return " + ".join(terms) if terms else "0"

    def __repr__(self) -> str:
        return f"FgAbelianGroup({str(self)!r})"

    def sort_key(self):
        return (self.free_rank, self.invariant_factors)


def _base(n: int) -> int:
    return min(sympy.factorint(n)) if n > 1 else 1


# ---------------------------------------------------------------------------
# presentations


@dataclass
class NormalForm:
    """A cokernel presentation put in Smith form.

    ``orders[i]`` is the order of normal coordinate i (0 for a free summand);
    ``proj`` maps generator coordinates to normal coordinates and ``lift``
    sends normal basis vectors back to generator coordinates.
    """

    group: FgAbelianGroup
    orders: list[int]
    proj: Matrix
    lift: Matrix
    ngens: int

    def coords(self, x: Sequence[int]) -> list[int]:
        y = matvec(self.proj, x)
        return [v % o if o else v for v, o in zip(y, self.orders)]

    def reduce(self, y: Sequence[int]) -> list[int]:
        return [v % o if o else v for v, o in zip(y, self.orders)]

    @property
    def size(self) -> int:
        return len(self.orders)


def normal_form_of(ngens: int, relations: Sequence[Sequence[int]]) -> NormalForm:
    """Normal form of Z^ngens modulo the span of the relation vectors."""
    rel = from_columns(relations, ngens) if relations else zeros(ngens, 0)
    sf = smith_normal_form(rel, len(relations))
    diag = sf.diagonal + [0] * (ngens - len(sf.diagonal))
    keep = [i for i, d in enumerate(diag) if d != 1]
    # torsion coordinates first (in divisibility order), then free ones
    keep.sort(key=lambda i: (diag[i] == 0, i))
    orders = [diag[i] for i in keep]
    proj = [list(sf.u[i]) for i in keep]
    lift = [[sf.u_inv[r][i] for i in keep] for r in range(ngens)]
    group = FgAbelianGroup(sum(1 for o in orders if o == 0), tuple(o for o in orders if o))
    return NormalForm(group, orders, proj, lift, ngens)


@dataclass
class PresentedGroup:
    """The cokernel of an n x r relation matrix, with optional generator labels."""

    generators: int
    relations: IntMatrix
    labels: list[str] | None = None

    def __post_init__(self):
        if self.relations.rows != self.generators:
            raise ValueError("relation matrix must have one row per generator")

    @staticmethod
    def from_relations(n: int, rels: Sequence[Sequence[int]], labels=None) -> "PresentedGroup":
        return PresentedGroup(n, IntMatrix.of(from_columns(rels, n) if rels else zeros(n, 0), len(rels)), labels)

    def presentation_normal_form(self) -> NormalForm:
        return normal_form_of(self.generators, columns(self.relations.tolist(), self.relations.cols))

    def normal_form(self) -> FgAbelianGroup:
        return self.presentation_normal_form().group


# ---------------------------------------------------------------------------
# subquotients and homology


class Subquotient:
    """ker(d_out) / (im(d_in) + relations) inside Z^n / relations.

    ``d_out`` maps into Z^m / target_rel; cycles are the x with d_out x in the
    span of ``target_rel``.  ``gens()`` returns cycle representatives of the
    normal-form basis and ``coords`` sends a cycle to normal coordinates.
    """

    def __init__(
        self,
        n: int,
        d_out: Matrix | None = None,
        d_in_cols: Sequence[Sequence[int]] = (),
        ambient_rel: Sequence[Sequence[int]] = (),
        target_rel: Sequence[Sequence[int]] = (),
        check: bool = True,
    ):
        self.n = n
        self.d_out = d_out
        self.target_rel = [list(c) for c in target_rel]
        m = len(d_out) if d_out is not None else 0
        if d_out is None or m == 0:
            basis = identity(n)
            basis = [list(r) for r in basis]
        else:
            stacked = hstack(d_out, from_columns(self.target_rel, m) if self.target_rel else zeros(m, 0), nrows=m)
            ker = integer_kernel(stacked, n + len(self.target_rel))
            basis = lattice_basis([k[:n] for k in ker], n)
        self.basis = basis  # list of cycle vectors
        self._basis_smith = smith_normal_form(from_columns(basis, n) if basis else zeros(n, 0), len(basis))
        rels = []
        for vec in list(d_in_cols) + [list(c) for c in ambient_rel]:
            if check and d_out is not None and m and not self._in_target_span(matvec(d_out, vec)):
                raise NotAComplex("boundary of an incoming chain is not zero")
            rels.append(self.in_basis(vec))
        self.nf = normal_form_of(len(basis), rels)

    def _in_target_span(self, y: Sequence[int]) -> bool:
        if not any(y):
            return True
        if not self.target_rel:
            return False
        m = len(y)
        return solve_integer(from_columns(self.target_rel, m), y, len(self.target_rel)) is not None

    def in_basis(self, x: Sequence[int]) -> list[int]:
        k = len(self.basis)
        if k == 0:
            if any(x):
                raise NotInLattice("vector is not a cycle")
            return []
        y = solve_integer(from_columns(self.basis, self.n), x, k, self._basis_smith)
        if y is None:
            raise NotInLattice("vector is not a cycle")
        return y

    def is_cycle(self, x: Sequence[int]) -> bool:
        try:
            self.in_basis(x)
            return True
        except NotInLattice:
            return False

    @property
    def group(self) -> FgAbelianGroup:
        return self.nf.group

    @property
    def orders(self) -> list[int]:
        return self.nf.orders

    def coords(self, x: Sequence[int]) -> list[int]:
        return self.nf.coords(self.in_basis(x))

    def gens(self) -> list[list[int]]:
        k = len(self.basis)
        out = []
        for i in range(self.nf.size):
            y = [self.nf.lift[r][i] for r in range(k)]
            out.append([sum(self.basis[r][t] * y[r] for r in range(k)) for t in range(self.n)])
        return out

    def quotient(self, extra_cycles: Sequence[Sequence[int]], d_in_cols: Sequence[Sequence[int]] = (), ambient_rel=()) -> "Subquotient":
        """The same cycles modulo additional cycle vectors."""
        return Subquotient(self.n, self.d_out, list(d_in_cols) + [list(c) for c in extra_cycles], ambient_rel, self.target_rel, check=False)


def chain_homology(
    d_in: Matrix | None,
    d_out: Matrix | None,
    n: int,
    ambient_rel: Sequence[Sequence[int]] = (),
    target_rel: Sequence[Sequence[int]] = (),
) -> Subquotient:
    """Homology ker(d_out)/im(d_in) at a term Z^n / ambient_rel; raises NotAComplex."""
    d_in_cols = columns(d_in) if d_in else []
    if d_in is not None and d_in and len(d_in) != n:
        raise ValueError("d_in must have n rows")
    return Subquotient(n, d_out, d_in_cols, ambient_rel, target_rel)


def relations_from_orders(orders: Sequence[int]) -> list[list[int]]:
    n = len(orders)
    return [[o if i == j else 0 for i in range(n)] for j, o in enumerate(orders) if o]


def induced_matrix(src: Subquotient, dst: Subquotient, f: Matrix) -> Matrix:
    """Matrix in normal coordinates of the map induced by the ambient matrix f."""
    cols = [dst.coords(matvec(f, g)) for g in src.gens()]
    return from_columns(cols, dst.nf.size) if cols else zeros(dst.nf.size, 0)


# ---------------------------------------------------------------------------
# extensions


def _conjugate(part: Sequence[int]) -> tuple[int, ...]:
    if not part:
        return ()
    return tuple(sum(1 for x in part if x > i) for i in range(part[0]))


def _lr_support(mu: tuple[int, ...], nu: tuple[int, ...]) -> set[tuple[int, ...]]:
    """Partitions lambda with a nonzero Littlewood-Richardson coefficient c^lambda_{mu nu}.

    Built by adding the rows of nu one at a time as horizontal strips whose
    entries keep the reverse reading word a lattice word.
    """
    states = {(tuple(mu), ())}  # (shape, filling rows as tuple of per-row label counts)
    # represent a filling as a dict row -> tuple of labels placed in that row (sorted)
    states = {(tuple(mu), tuple())}
    for label, count in enumerate(nu, start=1):
        nxt = set()
        for shape, fill in states:
            for new_shape, new_fill in _add_strip(shape, fill, label, count, len(mu)):
                nxt.add((new_shape, new_fill))
        states = nxt
    return {s for s, _ in states}


def _add_strip(shape, fill, label, count, base_rows):
    """All ways to add ``count`` boxes labelled ``label`` as a horizontal strip, lattice-preserving."""
    shape = list(shape)
    rows = len(shape) + 1
    fill_map = dict(fill)
    results = []

    def rec(r, remaining, cur_shape, added):
        if r == rows:
            if remaining:
                return
            new_fill = dict(fill_map)
            for row, k in added.items():
                if k:
                    new_fill[row] = tuple(sorted(new_fill.get(row, ()) + (label,) * k))
            s = tuple(x for x in cur_shape if x)
            f = tuple(sorted(new_fill.items()))
            if _is_lattice(f, s, label):
                results.append((s, f))
            return
        old = shape[r] if r < len(shape) else 0
        above = shape[r - 1] if r >= 1 else None  # old shape of row above bounds the strip
        limit = remaining if above is None else min(remaining, above - old)
        for k in range(limit + 1):
            cs = list(cur_shape)
            if r < len(cs):
                cs[r] = old + k
            else:
                cs.append(old + k)
            nadd = dict(added)
            nadd[r] = k
            rec(r + 1, remaining - k, cs, nadd)

    rec(0, count, list(shape), {})
    return results


def _is_lattice(fill, shape, label) -> bool:
    rows = dict(fill)
    counts: dict[int, int] = {}
    for r in sorted(rows):
        for x in sorted(rows[r], reverse=True):  # right to left
            counts[x] = counts.get(x, 0) + 1
            if x > 1 and counts[x] > counts.get(x - 1, 0):
                return False
    # columns strictly increase: labels in row r sit right of the skew part; check via
    # the standard condition that each label appears at most once per column, which a
    # horizontal strip already guarantees; equal labels never stack because each
    # label is added as one strip over the previous shape.
    return True


@lru_cache(maxsize=None)
def lr_support(mu: tuple[int, ...], nu: tuple[int, ...]) -> frozenset:
    """Types lambda of abelian p-groups with a subgroup of type mu and quotient of type nu."""
    mu = tuple(x for x in mu if x)
    nu = tuple(x for x in nu if x)
    return frozenset(_lr_support(mu, nu))


def _partitions_within(beta: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Partitions contained in beta (candidate subgroup types of a group of type beta)."""
    out = []

    def rec(i, prev, cur):
        if i == len(beta):
            out.append(tuple(x for x in cur if x))
            return
        for x in range(min(prev, beta[i]), -1, -1):
            rec(i + 1, x, cur + [x])

    rec(0, beta[0] if beta else 0, [])
    return out


def group_extension_candidates(sub: FgAbelianGroup, quot: FgAbelianGroup) -> list[FgAbelianGroup]:
    """All isomorphism types E admitting 0 -> sub -> E -> quot -> 0.

    The torsion of E is an extension of a subgroup C of tors(quot) by tors(sub),
    where tors(quot)/C needs at most free_rank(sub) generators; primes are
    independent, and each step is the Littlewood-Richardson support.
    """
    free = sub.free_rank + quot.free_rank
    a_parts, b_parts = sub.primary_parts(), quot.primary_parts()
    per_prime: dict[int, set[tuple[int, ...]]] = {}
    for p in sorted(set(a_parts) | set(b_parts)):
        alpha = a_parts.get(p, ())
        beta = b_parts.get(p, ())
        types = set()
        for mu in _partitions_within(beta):
            ok = any(len(nu) <= sub.free_rank for nu in _cotypes(mu, beta))
            if ok:
                types |= lr_support(alpha, mu)
        per_prime[p] = types
    primes = sorted(per_prime)
    out = set()
    for combo in itertools.product(*(sorted(per_prime[p]) for p in primes)):
        out.add(FgAbelianGroup.from_primary(free, dict(zip(primes, combo))))
    return sorted(out, key=FgAbelianGroup.sort_key)


def _cotypes(mu: tuple[int, ...], beta: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Types nu of beta/C over subgroups C of type mu."""
    size = sum(beta) - sum(mu)
    return [nu for nu in _partitions_of(size) if tuple(beta) in lr_support(mu, nu)]


@lru_cache(maxsize=None)
def _partitions_of(n: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(p) for p in _gen_partitions(n, n))


def _gen_partitions(n, largest):
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in _gen_partitions(n - k, k):
            yield (k,) + rest
