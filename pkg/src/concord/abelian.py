"""Exact linear algebra over the integers and finitely generated abelian groups.

Everything in this module is pure and exact: matrices hold arbitrary-precision
Python integers, groups are canonical forms (free rank plus a multiset of
prime-power torsion orders), and every subquotient computation reduces to a
Smith or Hermite normal form of an integer matrix.

A group is presented as Z^g modulo the column span of a relation matrix; a
homomorphism between presented groups is an integer matrix on generators that
carries the domain relations into the codomain relation lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import zip_longest
from typing import Iterable, Iterator, Sequence

__all__ = [
    "IntMatrix",
    "FgAbGroup",
    "Presentation",
    "Homomorphism",
    "smith_normal_form",
    "column_hnf",
    "kernel_basis",
    "lattice_contains",
    "solve_in_column_span",
    "inverse_unimodular",
    "canonical_form",
    "direct_sum",
    "hom_kernel",
    "hom_image",
    "hom_cokernel",
    "localize",
    "localize_hom",
    "are_isomorphic",
    "has_element_of_order",
]


def factorint(n: int) -> dict[int, int]:
    """Prime factorization by trial division (desk-scale inputs only)."""
    if n <= 0:
        raise ValueError(f"cannot factor {n}")
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_prime(p: int) -> bool:
    return p >= 2 and factorint(p) == {p: 1}


@lru_cache(maxsize=None)
def _prime_power(q: int) -> tuple[int, int]:
    """Split a prime power q = p**e into (p, e); raises if q is not one."""
    fac = factorint(q)
    if len(fac) != 1:
        raise ValueError(f"{q} is not a prime power")
    [(p, e)] = fac.items()
    return p, e


# ---------------------------------------------------------------------------
# Integer matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix, entries in row-major order."""

    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative matrix dimensions")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match dimensions")

    @staticmethod
    def from_rows(rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        r = len(rows)
        if r == 0:
            return IntMatrix(0, cols or 0, ())
        c = len(rows[0]) if cols is None else cols
        flat: list[int] = []
        for row in rows:
            if len(row) != c:
                raise ValueError("ragged rows")
            flat.extend(int(x) for x in row)
        return IntMatrix(r, c, tuple(flat))

    @staticmethod
    def from_columns(cols: Sequence[Sequence[int]], rows: int) -> IntMatrix:
        c = len(cols)
        flat = [0] * (rows * c)
        for j, col in enumerate(cols):
            if len(col) != rows:
                raise ValueError("ragged columns")
            for i, x in enumerate(col):
                flat[i * c + j] = int(x)
        return IntMatrix(rows, c, tuple(flat))

    @staticmethod
    def identity(n: int) -> IntMatrix:
        return IntMatrix(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @staticmethod
    def zero(rows: int, cols: int) -> IntMatrix:
        return IntMatrix(rows, cols, (0,) * (rows * cols))

    @staticmethod
    def diagonal(values: Sequence[int], rows: int | None = None, cols: int | None = None) -> IntMatrix:
        n = len(values)
        r = n if rows is None else rows
        c = n if cols is None else cols
        flat = [0] * (r * c)
        for i, v in enumerate(values):
            flat[i * c + i] = int(v)
        return IntMatrix(r, c, tuple(flat))

    def at(self, i: int, j: int) -> int:
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[int, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def to_rows(self) -> list[list[int]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def columns(self) -> list[list[int]]:
        return [list(self.column(j)) for j in range(self.cols)]

    def transpose(self) -> IntMatrix:
        return IntMatrix.from_columns([list(self.row(i)) for i in range(self.rows)], self.cols)

    def hstack(self, other: IntMatrix) -> IntMatrix:
        if self.rows != other.rows:
            raise ValueError("row count mismatch in hstack")
        rows = [list(self.row(i)) + list(other.row(i)) for i in range(self.rows)]
        return IntMatrix.from_rows(rows, self.cols + other.cols)

    def vstack(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.cols:
            raise ValueError("column count mismatch in vstack")
        return IntMatrix(self.rows + other.rows, self.cols, self.entries + other.entries)

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matrix product")
        a, b = self, other
        flat = [0] * (a.rows * b.cols)
        for i in range(a.rows):
            arow = a.row(i)
            for k, aik in enumerate(arow):
                if aik == 0:
                    continue
                brow = b.row(k)
                base = i * b.cols
                for j, bkj in enumerate(brow):
                    if bkj:
                        flat[base + j] += aik * bkj
        return IntMatrix(a.rows, b.cols, tuple(flat))

    def apply(self, vector: Sequence[int]) -> tuple[int, ...]:
        if len(vector) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(sum(self.at(i, j) * vector[j] for j in range(self.cols)) for i in range(self.rows))

    def is_zero(self) -> bool:
        return all(e == 0 for e in self.entries)

    def det(self) -> int:
        """Determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = self.to_rows()
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k] != 0:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
                a[i][k] = 0
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def __str__(self) -> str:
        return "[" + "; ".join(" ".join(str(x) for x in self.row(i)) for i in range(self.rows)) + "]"


# ---------------------------------------------------------------------------
# Normal forms
# ---------------------------------------------------------------------------


def smith_normal_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Smith normal form: returns (u, d, v) with u @ m @ v == d.

    u and v are unimodular, d is diagonal with nonnegative entries and
    d1 | d2 | ... along the diagonal.  The pivot is always the entry of
    smallest nonzero absolute value in the remaining submatrix, ties broken
    by lowest row then lowest column, so the reduction is reproducible.
    """
    return _snf_cached(m)


@lru_cache(maxsize=None)
def _snf_cached(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    rows, cols = m.rows, m.cols
    a = m.to_rows()
    u = IntMatrix.identity(rows).to_rows()
    v = IntMatrix.identity(cols).to_rows()

    def swap_rows(i: int, j: int) -> None:
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i: int, j: int) -> None:
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def row_sub(i: int, j: int, q: int) -> None:
        # row i -= q * row j
        ai, aj = a[i], a[j]
        ui, uj = u[i], u[j]
        for k in range(cols):
            ai[k] -= q * aj[k]
        for k in range(rows):
            ui[k] -= q * uj[k]

    def col_sub(i: int, j: int, q: int) -> None:
        # col i -= q * col j
        for r in a:
            r[i] -= q * r[j]
        for r in v:
            r[i] -= q * r[j]

    limit = min(rows, cols)
    for t in range(limit):
        best: tuple[int, int, int] | None = None
        for i in range(t, rows):
            for j in range(t, cols):
                e = a[i][j]
                if e != 0 and (best is None or abs(e) < best[0]):
                    best = (abs(e), i, j)
        if best is None:
            break
        _, pi, pj = best
        if pi != t:
            swap_rows(t, pi)
        if pj != t:
            swap_cols(t, pj)

        while True:
            # Shrink the pivot until it divides its column, then clear it.
            restart = False
            for i in range(t + 1, rows):
                if a[i][t] % a[t][t] != 0:
                    row_sub(i, t, a[i][t] // a[t][t])
                    swap_rows(t, i)
                    restart = True
                    break
            if restart:
                continue
            for i in range(t + 1, rows):
                if a[i][t]:
                    row_sub(i, t, a[i][t] // a[t][t])
            # Same along the pivot row.
            for j in range(t + 1, cols):
                if a[t][j] % a[t][t] != 0:
                    col_sub(j, t, a[t][j] // a[t][t])
                    swap_cols(t, j)
                    restart = True
                    break
            if restart:
                continue
            for j in range(t + 1, cols):
                if a[t][j]:
                    col_sub(j, t, a[t][j] // a[t][t])
            # Pivot must divide the whole remaining submatrix for the chain.
            pivot = a[t][t]
            offender = -1
            for i in range(t + 1, rows):
                if any(x % pivot for x in a[i][t + 1 :]):
                    offender = i
                    break
            if offender < 0:
                break
            row_sub(t, offender, -1)  # add the offending row to row t

    for t in range(limit):
        if a[t][t] < 0:
            for k in range(cols):
                a[t][k] = -a[t][k]
            for k in range(rows):
                u[t][k] = -u[t][k]

    return (
        IntMatrix.from_rows(u, rows),
        IntMatrix.from_rows(a, cols),
        IntMatrix.from_rows(v, cols),
    )


@lru_cache(maxsize=None)
def _hnf_with_pivots(m: IntMatrix) -> tuple[IntMatrix, tuple[int, ...]]:
    """Column Hermite normal form of the column lattice of m.

    Returns (h, pivot_rows): h has full column rank, each column's first
    nonzero entry (its pivot) is positive, pivot rows strictly increase, and
    entries to the left of a pivot are reduced modulo it.  The columns of h
    are a canonical basis of the lattice spanned by the columns of m.
    """
    cols = [list(m.column(j)) for j in range(m.cols)]
    n = m.rows
    r = 0
    pivots: list[int] = []
    for i in range(n):
        while True:
            nz = [j for j in range(r, len(cols)) if cols[j][i] != 0]
            if not nz:
                break
            jmin = min(nz, key=lambda j: (abs(cols[j][i]), j))
            if jmin != r:
                cols[r], cols[jmin] = cols[jmin], cols[r]
            done = True
            for j in range(r + 1, len(cols)):
                if cols[j][i] == 0:
                    continue
                q = cols[j][i] // cols[r][i]
                if q:
                    for k in range(i, n):
                        cols[j][k] -= q * cols[r][k]
                if cols[j][i] != 0:
                    done = False
            if done:
                break
        if r < len(cols) and cols[r][i] != 0:
            if cols[r][i] < 0:
                for k in range(i, n):
                    cols[r][k] = -cols[r][k]
            for j in range(r):
                q = cols[j][i] // cols[r][i]
                if q:
                    for k in range(i, n):
                        cols[j][k] -= q * cols[r][k]
            pivots.append(i)
            r += 1
        if r == len(cols):
            break
    basis = cols[:r]
    return IntMatrix.from_columns(basis, n), tuple(pivots)


def column_hnf(m: IntMatrix) -> IntMatrix:
    """Canonical basis (as columns) of the lattice spanned by m's columns."""
    return _hnf_with_pivots(m)[0]


def kernel_basis(m: IntMatrix) -> IntMatrix:
    """Basis of the integer kernel lattice {x : m @ x = 0}, as columns."""
    stacked = m.vstack(IntMatrix.identity(m.cols))
    h, pivots = _hnf_with_pivots(stacked)
    keep = [j for j, p in enumerate(pivots) if p >= m.rows]
    cols = [[h.at(i, j) for i in range(m.rows, m.rows + m.cols)] for j in keep]
    return IntMatrix.from_columns(cols, m.cols)


def solve_in_column_span(m: IntMatrix, vector: Sequence[int]) -> tuple[int, ...] | None:
    """Coefficients of vector in terms of column_hnf(m)'s basis, or None.

    The returned coefficients are with respect to the canonical HNF basis,
    not the original columns of m.
    """
    h, pivots = _hnf_with_pivots(m)
    if len(vector) != m.rows:
        raise ValueError("vector length mismatch")
    residual = list(vector)
    coeffs = [0] * h.cols
    for j, prow in enumerate(pivots):
        den = h.at(prow, j)
        num = residual[prow]
        if num % den:
            return None
        q = num // den
        coeffs[j] = q
        if q:
            for i in range(prow, m.rows):
                residual[i] -= q * h.at(i, j)
    if any(residual):
        return None
    return tuple(coeffs)


def lattice_contains(m: IntMatrix, vector: Sequence[int]) -> bool:
    """Whether vector lies in the lattice spanned by the columns of m."""
    return solve_in_column_span(m, vector) is not None


def inverse_unimodular(m: IntMatrix) -> IntMatrix:
    """Exact inverse of a unimodular integer matrix."""
    if m.rows != m.cols:
        raise ValueError("not square")
    n = m.rows
    a = [[Fraction(m.at(i, j)) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        a[k], a[piv] = a[piv], a[k]
        inv = 1 / a[k][k]
        a[k] = [x * inv for x in a[k]]
        for i in range(n):
            if i != k and a[i][k] != 0:
                f = a[i][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    flat: list[int] = []
    for i in range(n):
        for j in range(n, 2 * n):
            x = a[i][j]
            if x.denominator != 1:
                raise ValueError("matrix is not unimodular")
            flat.append(int(x))
    return IntMatrix(n, n, tuple(flat))


# ---------------------------------------------------------------------------
# Finitely generated abelian groups in canonical form
# ---------------------------------------------------------------------------


def _torsion_key(q: int) -> tuple[int, int]:
    return _prime_power(q)


@dataclass(frozen=True)
class FgAbGroup:
    """Canonical form: free rank plus prime-power torsion orders.

    The torsion tuple is sorted by (prime, exponent), so two values compare
    equal exactly when the groups are isomorphic.

    >>> FgAbGroup.of(6) == FgAbGroup.of(2, 3)
    True
    >>> str(FgAbGroup.of(0, 4, 2, 3))
    'Z+Z2+Z4+Z3'
    """

    free_rank: int = 0
    torsion: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.free_rank < 0:
            raise ValueError("negative free rank")
        for q in self.torsion:
            p, e = _prime_power(q)  # raises if not a prime power
            if q < 2:
                raise ValueError("torsion orders must exceed 1")
        if tuple(sorted(self.torsion, key=_torsion_key)) != self.torsion:
            raise ValueError("torsion not in canonical (prime, exponent) order")

    @classmethod
    def of(cls, *cyclic_orders: int) -> FgAbGroup:
        """Group from cyclic orders; 0 means an infinite cyclic summand."""
        rank = 0
        torsion: list[int] = []
        for d in cyclic_orders:
            d = abs(int(d))
            if d == 0:
                rank += 1
            elif d > 1:
                for p, e in factorint(d).items():
                    torsion.append(p**e)
        return cls(rank, tuple(sorted(torsion, key=_torsion_key)))

    @classmethod
    def trivial(cls) -> FgAbGroup:
        return cls(0, ())

    @property
    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    def order(self) -> int | None:
        """Group order, or None for infinite groups."""
        if self.free_rank:
            return None
        return math.prod(self.torsion)

    def exponent(self) -> int:
        """Exponent of the torsion part (1 for torsion-free groups)."""
        return math.lcm(*self.torsion) if self.torsion else 1

    def primes(self) -> tuple[int, ...]:
        return tuple(sorted({_prime_power(q)[0] for q in self.torsion}))

    def p_exponents(self, p: int) -> tuple[int, ...]:
        """Descending exponents e with a Z/p**e summand."""
        es = [e for q in self.torsion for (pp, e) in [_prime_power(q)] if pp == p]
        return tuple(sorted(es, reverse=True))

    def p_rank(self, p: int) -> int:
        return len(self.p_exponents(p))

    def localize(self, p: int) -> FgAbGroup:
        """Keep the free part and the p-power torsion only."""
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        kept = tuple(q for q in self.torsion if _prime_power(q)[0] == p)
        return FgAbGroup(self.free_rank, kept)

    def direct_sum(self, *others: FgAbGroup) -> FgAbGroup:
        return direct_sum([self, *others])

    def invariant_factors(self) -> tuple[int, ...]:
        """Invariant-factor form: zeros for free summands, then a descending
        divisibility chain, largest first."""
        per_prime = []
        for p in self.primes():
            per_prime.append([p**e for e in self.p_exponents(p)])
        chain = [math.prod(t) for t in zip_longest(*per_prime, fillvalue=1)]
        return (0,) * self.free_rank + tuple(chain)

    def __str__(self) -> str:
        if self.is_trivial:
            return "0"
        parts: list[str] = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        run: list[int] = []
        for q in self.torsion + (0,):
            if run and q != run[0]:
                parts.append(f"Z{run[0]}" if len(run) == 1 else f"Z{run[0]}^{len(run)}")
                run = []
            if q:
                run.append(q)
        return "+".join(parts)


def direct_sum(groups: Iterable[FgAbGroup]) -> FgAbGroup:
    """Direct sum: free ranks add, torsion multisets union."""
    rank = 0
    torsion: list[int] = []
    for g in groups:
        rank += g.free_rank
        torsion.extend(g.torsion)
    return FgAbGroup(rank, tuple(sorted(torsion, key=_torsion_key)))


def localize(g: FgAbGroup, p: int) -> FgAbGroup:
    return g.localize(p)


def are_isomorphic(g: FgAbGroup, h: FgAbGroup) -> bool:
    return g == h


def has_element_of_order(g: FgAbGroup, n: int) -> bool:
    """Whether g contains an element of exact order n.

    Elements of finite order live in the torsion part, so this holds exactly
    when, for every prime power p**a dividing n exactly, some torsion summand
    has p-exponent at least a.
    """
    if n < 1:
        raise ValueError("order must be positive")
    if n == 1:
        return True
    for p, a in factorint(n).items():
        es = g.p_exponents(p)
        if not es or es[0] < a:
            return False
    return True


# ---------------------------------------------------------------------------
# Presentations and homomorphisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Presentation:
    """Z^generator_count modulo the column span of the relation matrix."""

    generator_count: int
    relations: IntMatrix

    def __post_init__(self) -> None:
        if self.generator_count < 0:
            raise ValueError("negative generator count")
        if self.relations.rows != self.generator_count:
            raise ValueError("relation matrix must have one row per generator")

    @classmethod
    def of_group(cls, g: FgAbGroup) -> Presentation:
        """Canonical diagonal presentation of a group."""
        orders = list(g.torsion)
        n = len(orders) + g.free_rank
        return cls(n, IntMatrix.diagonal(orders, rows=n, cols=len(orders)))


def canonical_form(p: Presentation) -> FgAbGroup:
    """Primary-decomposition canonical form of a presented group."""
    _, d, _ = smith_normal_form(p.relations)
    rank = p.generator_count
    torsion: list[int] = []
    for i in range(min(d.rows, d.cols)):
        di = d.at(i, i)
        if di != 0:
            rank -= 1
            if di > 1:
                for q, e in factorint(di).items():
                    torsion.append(q**e)
    return FgAbGroup(rank, tuple(sorted(torsion, key=_torsion_key)))


@dataclass(frozen=True)
class Homomorphism:
    """Map of presented groups given by an integer matrix on generators.

    Well-definedness (the matrix carries domain relations into the codomain
    relation lattice) is checked at construction.
    """

    domain: Presentation
    codomain: Presentation
    matrix: IntMatrix

    def __post_init__(self) -> None:
        if self.matrix.rows != self.codomain.generator_count or self.matrix.cols != self.domain.generator_count:
            raise ValueError("matrix shape must be codomain generators x domain generators")
        moved = self.matrix @ self.domain.relations
        for j in range(moved.cols):
            if not lattice_contains(self.codomain.relations, moved.column(j)):
                raise ValueError(
                    f"ill-defined homomorphism: image of relation column {j} "
                    "is not in the codomain relation lattice"
                )

    @classmethod
    def zero(cls, domain: Presentation, codomain: Presentation) -> Homomorphism:
        return cls(domain, codomain, IntMatrix.zero(codomain.generator_count, domain.generator_count))


@lru_cache(maxsize=None)
def _preimage_lattice(matrix: IntMatrix, codomain_relations: IntMatrix) -> IntMatrix:
    """Canonical basis of {x : matrix @ x lies in the codomain lattice}."""
    w = matrix.hstack(codomain_relations)
    k = kernel_basis(w)
    top = IntMatrix.from_rows([list(k.row(i)) for i in range(matrix.cols)], k.cols)
    return column_hnf(top)


def hom_kernel(f: Homomorphism) -> tuple[FgAbGroup, Presentation]:
    """Kernel of the induced map, as (isomorphism class, presentation)."""
    bk = _preimage_lattice(f.matrix, f.codomain.relations)
    rel_cols: list[tuple[int, ...]] = []
    for j in range(f.domain.relations.cols):
        coeffs = solve_in_column_span(bk, f.domain.relations.column(j))
        if coeffs is None:  # impossible for a well-defined map
            raise AssertionError("domain relations escape the kernel lattice")
        rel_cols.append(coeffs)
    pres = Presentation(bk.cols, IntMatrix.from_columns(rel_cols, bk.cols))
    return canonical_form(pres), pres


def hom_image(f: Homomorphism) -> tuple[FgAbGroup, Presentation]:
    """Image of the induced map, as (isomorphism class, presentation)."""
    bk = _preimage_lattice(f.matrix, f.codomain.relations)
    pres = Presentation(f.domain.generator_count, bk)
    return canonical_form(pres), pres


def hom_cokernel(f: Homomorphism) -> tuple[FgAbGroup, Presentation]:
    """Cokernel of the induced map, as (isomorphism class, presentation)."""
    pres = Presentation(f.codomain.generator_count, f.codomain.relations.hstack(f.matrix))
    return canonical_form(pres), pres


def _cyclic_coordinates(p: Presentation) -> tuple[tuple[int, ...], IntMatrix]:
    """Diagonalizing change of basis: orders per new coordinate (0 = free)
    and the unimodular u with x -> u @ x mapping onto the cyclic summands."""
    u, d, _ = smith_normal_form(p.relations)
    orders = []
    for i in range(p.generator_count):
        orders.append(d.at(i, i) if i < min(d.rows, d.cols) else 0)
    return tuple(orders), u


def localize_hom(f: Homomorphism, p: int) -> Homomorphism:
    """The induced map on p-primary parts of finite presented groups.

    Only finite domains and codomains are supported: over the p-local
    integers a prime different from p becomes a unit, which no integer
    matrix on a free summand can express.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    dom_orders, u_dom = _cyclic_coordinates(f.domain)
    cod_orders, u_cod = _cyclic_coordinates(f.codomain)
    if 0 in dom_orders or 0 in cod_orders:
        raise ValueError("localize_hom requires finite domain and codomain")
    g = u_cod @ f.matrix @ inverse_unimodular(u_dom)

    def p_part(orders: Sequence[int]) -> list[tuple[int, int, int]]:
        out = []
        for idx, n in enumerate(orders):
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            if e:
                out.append((idx, p**e, n))  # coordinate, p-part order, cofactor
        return out

    dom_p = p_part(dom_orders)
    cod_p = p_part(cod_orders)
    entries: list[list[int]] = []
    for cj, pf, _ in cod_p:
        row = []
        for di, _, cof in dom_p:
            row.append((g.at(cj, di) * cof) % pf)
        entries.append(row)
    dom_pres = Presentation.of_group(FgAbGroup.of(*(q for _, q, _ in dom_p)))
    cod_pres = Presentation.of_group(FgAbGroup.of(*(q for _, q, _ in cod_p)))
    matrix = IntMatrix.from_rows(entries, len(dom_p))
    return Homomorphism(dom_pres, cod_pres, matrix)


def group_sort_key(g: FgAbGroup) -> tuple:
    """Deterministic ordering of canonical forms, for candidate lists."""
    return (g.free_rank, g.torsion)
