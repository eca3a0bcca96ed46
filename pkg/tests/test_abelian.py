"""Tests for exact integer linear algebra and abelian group canonical forms.

Oracles used here are independent of the code under test: Smith diagonals are
cross-checked against gcds of k x k minors (the determinantal-divisor
formula) and against sympy's implementation; isomorphism testing is checked
against elementwise order counting.
"""

from __future__ import annotations

import math
import random
from itertools import combinations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from concord.abelian import (
    FgAbGroup,
    Homomorphism,
    IntMatrix,
    Presentation,
    are_isomorphic,
    canonical_form,
    column_hnf,
    direct_sum,
    has_element_of_order,
    hom_cokernel,
    hom_image,
    hom_kernel,
    inverse_unimodular,
    kernel_basis,
    lattice_contains,
    localize,
    localize_hom,
    smith_normal_form,
)


def snf_diagonal_via_minors(m: IntMatrix) -> list[int]:
    """Independent oracle: d_k = (gcd of k x k minors) / (gcd of (k-1) ones)."""
    limit = min(m.rows, m.cols)
    diag = []
    prev = 1
    for k in range(1, limit + 1):
        g = 0
        for rsel in combinations(range(m.rows), k):
            for csel in combinations(range(m.cols), k):
                sub = IntMatrix.from_rows([[m.at(i, j) for j in csel] for i in rsel], k)
                g = math.gcd(g, sub.det())
        if g == 0:
            diag.extend([0] * (limit - k + 1))
            return diag
        diag.append(g // prev)
        prev = g
    return diag


def assert_snf_contract(m: IntMatrix) -> None:
    u, d, v = smith_normal_form(m)
    assert (u @ m) @ v == d
    assert abs(u.det()) == 1
    assert abs(v.det()) == 1
    diag = [d.at(i, i) for i in range(min(d.rows, d.cols))]
    for i in range(d.rows):
        for j in range(d.cols):
            if i != j:
                assert d.at(i, j) == 0
    assert all(x >= 0 for x in diag)
    for a, b in zip(diag, diag[1:]):
        if a == 0:
            assert b == 0
        else:
            assert b % a == 0


def random_matrix(rng: random.Random, max_dim: int = 8, max_entry: int = 100) -> IntMatrix:
    r = rng.randint(0, max_dim)
    c = rng.randint(0, max_dim)
    return IntMatrix.from_rows([[rng.randint(-max_entry, max_entry) for _ in range(c)] for _ in range(r)], c)


class TestSmithNormalForm:
    def test_diag_2_3(self):
        m = IntMatrix.diagonal([2, 3])
        _, d, _ = smith_normal_form(m)
        assert [d.at(0, 0), d.at(1, 1)] == [1, 6]
        assert snf_diagonal_via_minors(m) == [1, 6]
        assert_snf_contract(m)

    def test_zero_matrix(self):
        m = IntMatrix.zero(2, 2)
        u, d, v = smith_normal_form(m)
        assert d == IntMatrix.zero(2, 2)
        assert u == IntMatrix.identity(2)
        assert v == IntMatrix.identity(2)

    def test_2468(self):
        m = IntMatrix.from_rows([[2, 4], [6, 8]])
        _, d, _ = smith_normal_form(m)
        assert [d.at(0, 0), d.at(1, 1)] == [2, 4]
        assert snf_diagonal_via_minors(m) == [2, 4]
        assert_snf_contract(m)

    def test_empty_and_thin(self):
        for m in [IntMatrix.zero(0, 0), IntMatrix.zero(3, 0), IntMatrix.zero(0, 3)]:
            assert_snf_contract(m)

    def test_against_minor_oracle_small(self):
        rng = random.Random(7)
        for _ in range(60):
            m = random_matrix(rng, max_dim=4, max_entry=9)
            _, d, _ = smith_normal_form(m)
            diag = [d.at(i, i) for i in range(min(d.rows, d.cols))]
            assert diag == snf_diagonal_via_minors(m)

    def test_against_sympy(self):
        sympy = pytest.importorskip("sympy")
        from sympy.matrices.normalforms import smith_normal_form as sympy_snf

        rng = random.Random(11)
        for _ in range(25):
            r = rng.randint(1, 5)
            c = rng.randint(1, 5)
            rows = [[rng.randint(-20, 20) for _ in range(c)] for _ in range(r)]
            m = IntMatrix.from_rows(rows, c)
            _, d, _ = smith_normal_form(m)
            ours = sorted(abs(d.at(i, i)) for i in range(min(r, c)))
            ref = sympy_snf(sympy.Matrix(rows), domain=sympy.ZZ)
            theirs = sorted(abs(int(ref[i, i])) for i in range(min(r, c)))
            assert ours == theirs

    @settings(max_examples=120, deadline=None)
    @given(
        st.integers(1, 6).flatmap(
            lambda r: st.integers(1, 6).flatmap(
                lambda c: st.lists(
                    st.lists(st.integers(-100, 100), min_size=c, max_size=c),
                    min_size=r,
                    max_size=r,
                )
            )
        )
    )
    def test_contract_property(self, rows):
        assert_snf_contract(IntMatrix.from_rows(rows))


class TestHnfAndKernels:
    def test_kernel_basis(self):
        m = IntMatrix.from_rows([[1, 2, 3]])
        k = kernel_basis(m)
        assert k.cols == 2
        assert (m @ k).is_zero()

    def test_kernel_of_injective(self):
        m = IntMatrix.from_rows([[2, 0], [0, 3]])
        assert kernel_basis(m).cols == 0

    def test_lattice_membership(self):
        m = IntMatrix.from_columns([[2, 0], [0, 3]], 2)
        assert lattice_contains(m, (4, 3))
        assert not lattice_contains(m, (1, 0))

    def test_hnf_canonical_under_column_moves(self):
        rng = random.Random(3)
        for _ in range(40):
            m = random_matrix(rng, max_dim=5, max_entry=15)
            cols = m.columns()
            rng.shuffle(cols)
            if cols and m.cols:
                j = rng.randrange(len(cols))
                k = rng.randrange(len(cols))
                if j != k:
                    cols[j] = [a + 2 * b for a, b in zip(cols[j], cols[k])]
            m2 = IntMatrix.from_columns(cols, m.rows)
            assert column_hnf(m) == column_hnf(m2)

    def test_inverse_unimodular(self):
        m = IntMatrix.from_rows([[2, 1], [1, 1]])
        inv = inverse_unimodular(m)
        assert m @ inv == IntMatrix.identity(2)
        with pytest.raises(ValueError):
            inverse_unimodular(IntMatrix.from_rows([[2, 0], [0, 1]]))


class TestCanonicalForm:
    def test_z6_splits(self):
        p = Presentation(1, IntMatrix.from_rows([[6]]))
        assert canonical_form(p) == FgAbGroup.of(2, 3)

    def test_free(self):
        p = Presentation(2, IntMatrix.zero(2, 0))
        assert canonical_form(p) == FgAbGroup(free_rank=2)

    def test_diag_2_4(self):
        p = Presentation(2, IntMatrix.diagonal([2, 4]))
        assert canonical_form(p) == FgAbGroup.of(2, 4)

    def test_invariant_under_column_ops(self):
        rng = random.Random(5)
        for _ in range(40):
            g = rng.randint(1, 5)
            r = rng.randint(0, 5)
            rel = IntMatrix.from_rows([[rng.randint(-6, 6) for _ in range(r)] for _ in range(g)], r)
            base = canonical_form(Presentation(g, rel))
            cols = rel.columns()
            rng.shuffle(cols)
            if len(cols) >= 2:
                cols[0] = [a - 3 * b for a, b in zip(cols[0], cols[1])]
            again = canonical_form(Presentation(g, IntMatrix.from_columns(cols, g)))
            assert base == again


class TestFgAbGroup:
    def test_direct_sum_examples(self):
        assert direct_sum([]) == FgAbGroup.trivial()
        assert direct_sum([FgAbGroup.of(2), FgAbGroup.of(2, 3)]) == FgAbGroup.of(2, 2, 3)
        k = 4
        cp4 = FgAbGroup.of(2)
        assert direct_sum([cp4] * k) == FgAbGroup.of(*([2] * k))

    def test_iso_examples(self):
        assert are_isomorphic(FgAbGroup.of(6), FgAbGroup.of(2, 3))
        assert not are_isomorphic(FgAbGroup.of(4), FgAbGroup.of(2, 2))
        k = 2
        lhs = FgAbGroup.of(*([2] * (2 * k - 1) + [3] * k))
        cp5 = FgAbGroup.of(2, 2, 3)
        ker_h = FgAbGroup.of(2, 3)
        assert are_isomorphic(lhs, direct_sum([cp5] * (k - 1) + [ker_h]))

    def test_invariant_factors(self):
        g = FgAbGroup.of(0, 0, 2, 4, 8, 3, 9, 5)
        assert g.invariant_factors() == (0, 0, 360, 12, 2)
        assert FgAbGroup.of(2, 2, 3).invariant_factors() == (6, 2)

    def test_str(self):
        assert str(FgAbGroup.trivial()) == "0"
        assert str(FgAbGroup.of(2, 2, 2, 3)) == "Z2^3+Z3"
        assert str(FgAbGroup.of(0, 4)) == "Z+Z4"

    def test_localize(self):
        assert localize(FgAbGroup.of(2, 2, 3), 3) == FgAbGroup.of(3)
        k = 3
        big = FgAbGroup.of(*([2] * (k + 1) + [3]))
        assert localize(big, 3) == FgAbGroup.of(3)
        with pytest.raises(ValueError):
            localize(FgAbGroup.of(2), 6)

    def test_has_element_of_order(self):
        assert not has_element_of_order(FgAbGroup.of(2, 2, 2), 4)
        assert has_element_of_order(FgAbGroup.of(4, 2), 4)
        for k in range(1, 4):
            assert has_element_of_order(FgAbGroup.of(*([2] * (k + 1) + [3])), 6)

    def test_has_element_of_order_brute_force_k1(self):
        g = FgAbGroup.of(2, 2, 3)
        orders = {element_order(x, (2, 2, 3)) for x in product(range(2), range(2), range(3))}
        assert 6 in orders
        assert has_element_of_order(g, 6)

    def test_iso_agrees_with_elementwise_counting(self):
        rng = random.Random(13)
        pool = all_abelian_groups_up_to(64)
        for _ in range(200):
            a = rng.choice(pool)
            b = rng.choice(pool)
            assert are_isomorphic(a, b) == (order_multiset(a) == order_multiset(b))


def element_order(x: tuple[int, ...], orders: tuple[int, ...]) -> int:
    return math.lcm(*(n // math.gcd(xi, n) for xi, n in zip(x, orders))) if orders else 1


def order_multiset(g: FgAbGroup) -> tuple[int, ...]:
    orders = g.torsion
    return tuple(sorted(element_order(x, orders) for x in product(*(range(n) for n in orders))))


def all_abelian_groups_up_to(max_order: int) -> list[FgAbGroup]:
    out = []
    for n in range(1, max_order + 1):
        out.extend(abelian_groups_of_order(n))
    return out


def abelian_groups_of_order(n: int) -> list[FgAbGroup]:
    from concord.extension import partitions

    import concord.abelian as ab

    per_prime = []
    for p, e in ab.factorint(n).items():
        per_prime.append([[p**k for k in lam] for lam in partitions(e)])
    out = []
    for combo in product(*per_prime) if per_prime else [()]:
        orders = [q for part in combo for q in part]
        out.append(FgAbGroup.of(*orders))
    return out


class TestHomomorphisms:
    def test_mult_2_on_z4(self):
        z4 = Presentation.of_group(FgAbGroup.of(4))
        f = Homomorphism(z4, z4, IntMatrix.from_rows([[2]]))
        assert hom_kernel(f)[0] == FgAbGroup.of(2)
        assert hom_image(f)[0] == FgAbGroup.of(2)
        assert hom_cokernel(f)[0] == FgAbGroup.of(2)

    def test_zero_map(self):
        dom = Presentation.of_group(FgAbGroup.of(2, 2, 3))
        cod = Presentation.of_group(FgAbGroup.of(3))
        f = Homomorphism.zero(dom, cod)
        assert hom_kernel(f)[0] == FgAbGroup.of(2, 2, 3)
        assert hom_cokernel(f)[0] == FgAbGroup.of(3)

    def test_surjection_kernel(self):
        # kill one Z2 factor and the Z3: (x, y, z) -> x
        dom = Presentation.of_group(FgAbGroup.of(2, 2, 3))
        cod = Presentation.of_group(FgAbGroup.of(2))
        f = Homomorphism(dom, cod, IntMatrix.from_rows([[1, 0, 0]]))
        assert hom_kernel(f)[0] == FgAbGroup.of(2, 3)
        assert hom_image(f)[0] == FgAbGroup.of(2)

    def test_rejects_ill_defined(self):
        z2 = Presentation.of_group(FgAbGroup.of(2))
        z4 = Presentation.of_group(FgAbGroup.of(4))
        with pytest.raises(ValueError):
            Homomorphism(z2, z4, IntMatrix.from_rows([[1]]))

    def test_order_product_invariant(self):
        rng = random.Random(17)
        for _ in range(80):
            f = random_finite_hom(rng)
            dom = canonical_form(f.domain)
            ker = hom_kernel(f)[0]
            img = hom_image(f)[0]
            assert ker.order() * img.order() == dom.order()

    def test_kernel_presentation_is_consistent(self):
        rng = random.Random(19)
        for _ in range(30):
            f = random_finite_hom(rng)
            cls, pres = hom_kernel(f)
            assert canonical_form(pres) == cls


def random_finite_group(rng: random.Random, max_factors: int = 3, max_order: int = 9) -> FgAbGroup:
    k = rng.randint(0, max_factors)
    return FgAbGroup.of(*(rng.randint(2, max_order) for _ in range(k)))


def random_finite_hom(rng: random.Random) -> Homomorphism:
    """A random well-defined map between canonical finite presentations."""
    dom_g = random_finite_group(rng)
    cod_g = random_finite_group(rng)
    dom = Presentation.of_group(dom_g)
    cod = Presentation.of_group(cod_g)
    d = dom_g.torsion
    e = cod_g.torsion
    entries = []
    for i, ei in enumerate(e):
        row = []
        for j, dj in enumerate(d):
            step = ei // math.gcd(ei, dj)
            row.append(step * rng.randint(0, ei // step - 1) if step < ei else 0)
        entries.append(row)
    return Homomorphism(dom, cod, IntMatrix.from_rows(entries, len(d)))


class TestLocalization:
    def test_localize_hom_example(self):
        z6 = Presentation.of_group(FgAbGroup.of(6))
        f = Homomorphism(z6, z6, mult_matrix_for(FgAbGroup.of(6), 3))
        g = localize_hom(f, 2)
        assert canonical_form(g.domain) == FgAbGroup.of(2)
        assert canonical_form(g.codomain) == FgAbGroup.of(2)
        # brute force over the six elements of Z6: x -> 3x fixes {0, 3},
        # the 2-torsion, so the induced map on the 2-part is the identity.
        two_part = [x for x in range(6) if (2 * x) % 6 == 0]
        assert all((3 * x) % 6 == x for x in two_part)
        assert hom_kernel(g)[0] == FgAbGroup.trivial()
        assert hom_image(g)[0] == FgAbGroup.of(2)

    def test_localize_hom_rejects_free(self):
        free = Presentation(1, IntMatrix.zero(1, 0))
        f = Homomorphism(free, free, IntMatrix.from_rows([[3]]))
        with pytest.raises(ValueError):
            localize_hom(f, 2)

    def test_exactness_property(self):
        rng = random.Random(23)
        for _ in range(60):
            f = random_finite_hom(rng)
            for p in (2, 3, 5):
                fp = localize_hom(f, p)
                assert localize(hom_kernel(f)[0], p) == hom_kernel(fp)[0]
                assert localize(hom_cokernel(f)[0], p) == hom_cokernel(fp)[0]
                assert localize(hom_image(f)[0], p) == hom_image(fp)[0]


def mult_matrix_for(g: FgAbGroup, scalar: int) -> IntMatrix:
    n = len(g.torsion)
    return IntMatrix.diagonal([scalar] * n)
