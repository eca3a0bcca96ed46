"""Middle groups of short exact sequences of finite abelian groups.

Given finite abelian A and B, the possible middle groups G of an extension
0 -> A -> G -> B -> 0 are exactly the groups of order |A|*|B| containing a
subgroup isomorphic to A with quotient isomorphic to B.  Feasibility is
decided per prime by enumerating the sublattices of the generator lattice
that contain the relation lattice, with Hermite normal forms as canonical
representatives, plus a few classical exact shortcuts so desk-sized queries
stay fast.  Exceeding the configured enumeration bound is an error, never a
silent approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

from .abelian import (
    FgAbGroup,
    IntMatrix,
    Presentation,
    canonical_form,
    column_hnf,
    direct_sum,
    factorint,
    group_sort_key,
    has_element_of_order,
    is_prime,
    lattice_contains,
    solve_in_column_span,
)

__all__ = [
    "DEFAULT_ORACLE_BOUND",
    "OracleBoundExceeded",
    "ContradictoryConstraints",
    "Splits",
    "NoElementOfOrder",
    "QuotientOf",
    "SubgroupOf",
    "LocalSplit",
    "Constraint",
    "ExtensionProblem",
    "CandidateSet",
    "subgroup_quotient_feasible",
    "enumerate_extensions",
    "apply_constraints",
    "resolve",
    "is_quotient_of",
    "is_subgroup_of",
    "partitions",
]

DEFAULT_ORACLE_BOUND = 1024


class OracleBoundExceeded(Exception):
    """A feasibility query exceeded the configured enumeration bound."""


class ContradictoryConstraints(Exception):
    """Constraint filtering emptied the candidate set."""

    def __init__(self, constraint: object):
        self.constraint = constraint
        super().__init__(f"constraints are contradictory; eliminated by {constraint}")


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Splits:
    """Keep only the split extension A + B."""


@dataclass(frozen=True)
class NoElementOfOrder:
    n: int

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("NoElementOfOrder requires n >= 2")


@dataclass(frozen=True)
class QuotientOf:
    """Keep groups that arise as a quotient of `group` (optionally only
    requiring this of the p-primary parts at the given prime)."""

    group: FgAbGroup
    prime: int | None = None


@dataclass(frozen=True)
class SubgroupOf:
    """Keep groups that embed into `group` (optionally at one prime only)."""

    group: FgAbGroup
    prime: int | None = None


@dataclass(frozen=True)
class LocalSplit:
    """Keep groups whose p-primary part is the split one."""

    prime: int


Constraint = Splits | NoElementOfOrder | QuotientOf | SubgroupOf | LocalSplit


@dataclass(frozen=True)
class ExtensionProblem:
    sub: FgAbGroup
    quot: FgAbGroup
    constraints: tuple[Constraint, ...] = ()

    def __post_init__(self) -> None:
        if not self.sub.is_finite or not self.quot.is_finite:
            raise ValueError("extension endpoints must be finite")


@dataclass(frozen=True)
class CandidateSet:
    """Candidate middle groups; resolved exactly when one candidate remains."""

    candidates: tuple[FgAbGroup, ...]
    resolved: bool = field(default=False)

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError("candidate set may not be empty")
        if self.resolved != (len(self.candidates) == 1):
            raise ValueError("resolved flag must mean exactly one candidate")
        if tuple(sorted(self.candidates, key=group_sort_key)) != self.candidates:
            raise ValueError("candidates must be canonically sorted")

    @classmethod
    def of(cls, groups) -> CandidateSet:
        uniq = sorted(set(groups), key=group_sort_key)
        return cls(tuple(uniq), len(uniq) == 1)

    @property
    def single(self) -> FgAbGroup:
        if not self.resolved:
            raise ValueError("candidate set is unresolved")
        return self.candidates[0]


# ---------------------------------------------------------------------------
# Partitions and p-group bookkeeping
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def partitions(n: int) -> tuple[tuple[int, ...], ...]:
    """All partitions of n as descending tuples, deterministic order."""
    if n == 0:
        return ((),)
    out: list[tuple[int, ...]] = []

    def rec(remaining: int, cap: int, prefix: tuple[int, ...]) -> None:
        if remaining == 0:
            out.append(prefix)
            return
        for part in range(min(cap, remaining), 0, -1):
            rec(remaining - part, part, prefix + (part,))

    rec(n, n, ())
    return tuple(out)


def _p_group(p: int, lam: tuple[int, ...]) -> FgAbGroup:
    return FgAbGroup.of(*(p**e for e in lam))


def _lam_of(g: FgAbGroup, p: int) -> tuple[int, ...]:
    return g.p_exponents(p)


def _merge(lam_a: tuple[int, ...], lam_b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sorted(lam_a + lam_b, reverse=True))


# ---------------------------------------------------------------------------
# The per-prime feasibility oracle
# ---------------------------------------------------------------------------


def _box_removals(lam: tuple[int, ...]) -> set[tuple[int, ...]]:
    """Partitions obtained by decreasing one part of lam by one."""
    out = set()
    for i in range(len(lam)):
        parts = list(lam)
        parts[i] -= 1
        out.add(tuple(sorted((x for x in parts if x > 0), reverse=True)))
    return out


@lru_cache(maxsize=None)
def _p_feasible(p: int, lam_g: tuple[int, ...], lam_a: tuple[int, ...], lam_b: tuple[int, ...]) -> bool:
    """Does the p-group of type lam_g contain a subgroup of type lam_a with
    quotient of type lam_b?  Exact; assumes sum(lam_g) = sum(lam_a+lam_b)."""
    if not lam_a:
        return lam_g == lam_b
    if not lam_b:
        return lam_g == lam_a
    if _merge(lam_a, lam_b) == lam_g:
        return True
    # Exact necessary conditions: ranks and exponents of sub and quotient.
    if len(lam_g) > len(lam_a) + len(lam_b):
        return False
    if len(lam_g) < max(len(lam_a), len(lam_b)):
        return False
    if lam_g[0] > lam_a[0] + lam_b[0]:
        return False
    if lam_g[0] < max(lam_a[0], lam_b[0]):
        return False
    # Subgroup and quotient positions are exchangeable (Pontryagin duality),
    # so enumerate whichever side is smaller.
    if sum(lam_a) > sum(lam_b):
        lam_a, lam_b = lam_b, lam_a
    # Order-p side: quotients by an order-p subgroup are exactly the single
    # box removals, and dually for index-p subgroups.
    if lam_a == (1,):
        return lam_b in _box_removals(lam_g)
    # Elementary abelian total group: subgroups and quotients are the
    # elementary ones of complementary ranks.
    if lam_g[0] == 1:
        return lam_a[0] == 1 and lam_b[0] == 1
    return _hnf_sublattice_search(p, lam_g, lam_a, lam_b)


def _hnf_sublattice_search(p: int, lam_g: tuple[int, ...], lam_a: tuple[int, ...], lam_b: tuple[int, ...]) -> bool:
    """Enumerate sublattices K with L <= K <= Z^m via HNF representatives.

    Subgroups of G = Z^m / L correspond to such K; each is tested for
    subgroup class lam_a and quotient class lam_b.  Growth is pruned to
    subgroup orders dividing |A| and element orders dividing exp(A).
    """
    m = len(lam_g)
    mods = [p**e for e in lam_g]
    order_a = p ** sum(lam_a)
    exp_a = p ** lam_a[0]
    a_group = _p_group(p, lam_a)
    b_group = _p_group(p, lam_b)
    relation = IntMatrix.diagonal(mods)

    # Ambient elements of order dividing exp(A), as candidate generators.
    def elem_order(x: tuple[int, ...]) -> int:
        return max((n // math.gcd(xi, n) for xi, n in zip(x, mods)), default=1)

    gens = [x for x in product(*(range(n) for n in mods)) if x != (0,) * m and elem_order(x) <= exp_a]

    start = column_hnf(relation)
    seen = {start}
    frontier = [(start, 1)]  # (lattice HNF, subgroup order |K/L|)
    while frontier:
        k_basis, sub_order = frontier.pop()
        if sub_order == order_a:
            if _subgroup_class(k_basis, relation) == a_group and canonical_form(Presentation(m, k_basis)) == b_group:
                return True
            continue
        for x in gens:
            if lattice_contains(k_basis, x):
                continue
            grown = column_hnf(k_basis.hstack(IntMatrix.from_columns([list(x)], m)))
            new_order = _subgroup_order(grown, mods)
            if order_a % new_order != 0:
                continue
            if grown not in seen:
                seen.add(grown)
                frontier.append((grown, new_order))
    return False


def _subgroup_order(k_basis: IntMatrix, mods: list[int]) -> int:
    index = 1
    for j in range(k_basis.cols):
        index *= k_basis.at(j, j)
    return math.prod(mods) // index


def _subgroup_class(k_basis: IntMatrix, relation: IntMatrix) -> FgAbGroup:
    cols = []
    for j in range(relation.cols):
        coeffs = solve_in_column_span(k_basis, relation.column(j))
        assert coeffs is not None
        cols.append(coeffs)
    return canonical_form(Presentation(k_basis.cols, IntMatrix.from_columns(cols, k_basis.cols)))


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def _require_finite(*groups: FgAbGroup) -> None:
    for g in groups:
        if not g.is_finite:
            raise ValueError(f"{g} is not finite")


def subgroup_quotient_feasible(
    g: FgAbGroup, a: FgAbGroup, b: FgAbGroup, bound: int = DEFAULT_ORACLE_BOUND
) -> bool:
    """Whether g has a subgroup isomorphic to a with quotient isomorphic to b."""
    _require_finite(g, a, b)
    if g.order() != a.order() * b.order():
        raise ValueError(f"order mismatch: |{g}| != |{a}| * |{b}|")
    if g.order() > bound:
        raise OracleBoundExceeded(f"|{g}| = {g.order()} exceeds the oracle bound {bound}")
    for p in g.primes():
        if not _p_feasible(p, _lam_of(g, p), _lam_of(a, p), _lam_of(b, p)):
            return False
    return True


def enumerate_extensions(a: FgAbGroup, b: FgAbGroup, bound: int = DEFAULT_ORACLE_BOUND) -> CandidateSet:
    """All isomorphism classes of middle groups of 0 -> a -> G -> b -> 0.

    Works one prime at a time and takes direct sums of the per-prime
    solutions; the split extension a + b is always present.
    """
    _require_finite(a, b)
    per_prime: list[list[FgAbGroup]] = []
    for p in sorted(set(a.primes()) | set(b.primes())):
        n_p = sum(_lam_of(a, p)) + sum(_lam_of(b, p))
        if p**n_p > bound:
            raise OracleBoundExceeded(
                f"p-part order {p}**{n_p} exceeds the oracle bound {bound} at prime {p}"
            )
        found = [
            _p_group(p, lam)
            for lam in partitions(n_p)
            if _p_feasible(p, lam, _lam_of(a, p), _lam_of(b, p))
        ]
        per_prime.append(found)
    combos = [direct_sum(parts) for parts in product(*per_prime)] if per_prime else [FgAbGroup.trivial()]
    return CandidateSet.of(combos)


def is_quotient_of(g: FgAbGroup, h: FgAbGroup, bound: int = DEFAULT_ORACLE_BOUND, prime: int | None = None) -> bool:
    """Whether g is (isomorphic to) a quotient of h.

    Quantifies existentially over kernels of the right order, per prime:
    rank and exponent necessary conditions first, the sublattice oracle for
    the rest.
    """
    _require_finite(g, h)
    primes = (prime,) if prime is not None else tuple(sorted(set(g.primes()) | set(h.primes())))
    for p in primes:
        lam_g = _lam_of(g, p)
        lam_h = _lam_of(h, p)
        if sum(lam_g) > sum(lam_h):
            return False
        if len(lam_g) > len(lam_h) or (lam_g and lam_g[0] > (lam_h[0] if lam_h else 0)):
            return False
        if p ** sum(lam_h) > bound:
            raise OracleBoundExceeded(f"p-part order exceeds the oracle bound {bound} at prime {p}")
        k = sum(lam_h) - sum(lam_g)
        if not any(_p_feasible(p, lam_h, lam_k, lam_g) for lam_k in partitions(k)):
            return False
    return True


def is_subgroup_of(g: FgAbGroup, h: FgAbGroup, bound: int = DEFAULT_ORACLE_BOUND, prime: int | None = None) -> bool:
    """Whether g embeds into h (existential over quotients, per prime)."""
    _require_finite(g, h)
    primes = (prime,) if prime is not None else tuple(sorted(set(g.primes()) | set(h.primes())))
    for p in primes:
        lam_g = _lam_of(g, p)
        lam_h = _lam_of(h, p)
        if sum(lam_g) > sum(lam_h):
            return False
        if len(lam_g) > len(lam_h) or (lam_g and lam_g[0] > (lam_h[0] if lam_h else 0)):
            return False
        if p ** sum(lam_h) > bound:
            raise OracleBoundExceeded(f"p-part order exceeds the oracle bound {bound} at prime {p}")
        k = sum(lam_h) - sum(lam_g)
        if not any(_p_feasible(p, lam_h, lam_g, lam_q) for lam_q in partitions(k)):
            return False
    return True


def _passes(
    g: FgAbGroup,
    constraint: Constraint,
    sub: FgAbGroup | None,
    quot: FgAbGroup | None,
    bound: int,
) -> bool:
    match constraint:
        case Splits():
            if sub is None or quot is None:
                raise ValueError("Splits needs the extension endpoints")
            return g == direct_sum([sub, quot])
        case NoElementOfOrder(n=n):
            return not has_element_of_order(g, n)
        case QuotientOf(group=h, prime=p):
            return is_quotient_of(g, h, bound=bound, prime=p)
        case SubgroupOf(group=h, prime=p):
            return is_subgroup_of(g, h, bound=bound, prime=p)
        case LocalSplit(prime=p):
            if sub is None or quot is None:
                raise ValueError("LocalSplit needs the extension endpoints")
            return g.localize(p) == direct_sum([sub.localize(p), quot.localize(p)])
    raise TypeError(f"unknown constraint {constraint!r}")


def apply_constraints(
    cs: CandidateSet,
    constraints,
    sub: FgAbGroup | None = None,
    quot: FgAbGroup | None = None,
    bound: int = DEFAULT_ORACLE_BOUND,
) -> CandidateSet:
    """Filter candidates; raises ContradictoryConstraints if nothing is left.

    Each constraint is a pointwise predicate on candidates, so the result is
    independent of the constraint order.
    """
    remaining = list(cs.candidates)
    for c in constraints:
        remaining = [g for g in remaining if _passes(g, c, sub, quot, bound)]
        if not remaining:
            raise ContradictoryConstraints(c)
    return CandidateSet.of(remaining)


def resolve(problem: ExtensionProblem, bound: int = DEFAULT_ORACLE_BOUND) -> CandidateSet:
    """Enumerate middle groups, then filter by the problem's constraints."""
    cs = enumerate_extensions(problem.sub, problem.quot, bound=bound)
    return apply_constraints(cs, problem.constraints, sub=problem.sub, quot=problem.quot, bound=bound)
