import itertools
import random
from fractions import Fraction

import pytest

from cartan.errors import NonPolynomial, RingMismatch
from cartan.expr import Const, Gen, Prim, differentiate, equal, normalize, to_text
from cartan.ring import (
    IdealPresentation,
    RingHom,
    RingPresentation,
    free_ring,
    groebner_basis,
    hom_apply,
    hom_compose,
    ideal_member,
    quotient_ring,
    reduce_mod_ideal,
)
from cartan.sampling import random_polynomial
from oracles import in_ideal_bruteforce, p_gen, p_mul

x, y, z = Gen(0), Gen(1), Gen(2)


class TestIdealMember:
    def test_generator_itself(self, cross_ideal):
        ok, cofactors = ideal_member(x * y, cross_ideal, 2)
        assert ok and cofactors == [Const(1)]

    def test_nonmember_confirmed_by_bruteforce(self, cross_ideal):
        # oracle: no combination c * (xy) with deg c <= 6 equals x
        assert not in_ideal_bruteforce(
            p_gen(0, 2), [p_mul(p_gen(0, 2), p_gen(1, 2))], 2, 6
        )
        ok, cofactors = ideal_member(x, cross_ideal, 2)
        assert not ok and cofactors is None

    def test_exact_division(self, cross_ideal):
        ok, cofactors = ideal_member(x**2 * y + x * y**2, cross_ideal, 2)
        assert ok
        assert cofactors == [normalize(x + y)]

    def test_zero_is_member_of_anything(self, cross_ideal):
        ok, cofactors = ideal_member(Const(0), cross_ideal, 2)
        assert ok
        ok, cofactors = ideal_member(x - x, IdealPresentation(()), 2)
        assert ok and cofactors == []

    def test_rejects_primitives(self, cross_ideal):
        with pytest.raises(NonPolynomial):
            ideal_member(Prim("beta0", (x,)), cross_ideal, 2)

    def test_certificates_rebuild_the_element(self, rng, cross_ideal):
        three_gen = IdealPresentation((x * y - z, y * z - x))
        for _ in range(25):
            combo = Const(0)
            for g in three_gen.generators:
                combo = combo + random_polynomial(rng, 3, 2) * g
            combo = normalize(combo)
            ok, cofactors = ideal_member(combo, three_gen, 3)
            assert ok
            rebuilt = Const(0)
            for c, g in zip(cofactors, three_gen.generators):
                rebuilt = rebuilt + c * g
            assert equal(rebuilt, combo)


class TestReduce:
    def test_single_division_step(self, cross_ideal):
        assert reduce_mod_ideal(3 * x * y + x, cross_ideal, 2) == x

    def test_untouched_when_no_leading_term_divides(self, cross_ideal):
        assert reduce_mod_ideal(x + y, cross_ideal, 2) == normalize(x + y)

    def test_zero(self, cross_ideal):
        assert reduce_mod_ideal(Const(0), cross_ideal, 2) == Const(0)

    def test_reduction_residual_is_member(self, rng, cross_ideal):
        for _ in range(25):
            p = random_polynomial(rng, 2, 4)
            r = reduce_mod_ideal(p, cross_ideal, 2)
            ok, _ = ideal_member(p - r, cross_ideal, 2)
            assert ok
            assert reduce_mod_ideal(p - r, cross_ideal, 2) == Const(0)

    def test_confluence_under_generator_permutation(self, rng):
        generators = (x**2 - y, y**2 - x, x * y * z - z)
        polys = [random_polynomial(rng, 3, 4) for _ in range(10)]
        baselines = None
        for perm in itertools.permutations(generators):
            ideal = IdealPresentation(perm)
            results = [to_text(reduce_mod_ideal(p, ideal, 3)) for p in polys]
            if baselines is None:
                baselines = results
            else:
                assert results == baselines

    def test_groebner_basis_is_reduced_and_monic(self):
        ideal = IdealPresentation((x * y, x**2 * y))
        assert [to_text(g) for g in groebner_basis(ideal, 2)] == ["x0*x1"]


class TestPresentations:
    def test_ideal_generators_must_be_polynomial(self):
        with pytest.raises(NonPolynomial):
            IdealPresentation((Prim("beta0", (x,)),))

    def test_ideal_generators_must_be_nonzero(self):
        with pytest.raises(ValueError):
            IdealPresentation((x - x,))

    def test_dense_interior_means_zero_ideal(self):
        with pytest.raises(ValueError):
            IdealPresentation((x,), dense_interior=True)
        flag = IdealPresentation((), dense_interior=True)
        assert flag.is_zero

    def test_ring_range_check(self):
        with pytest.raises(ValueError):
            RingPresentation(n=1, ideal=IdealPresentation((x * y,)))

    def test_names_are_display_only(self):
        assert free_ring(2, ["x", "y"]) == free_ring(2, ["u", "v"])


class TestHoms:
    def test_simple_substitution(self):
        line = free_ring(1, ["x"])
        plane = free_ring(1, ["u"])
        f = RingHom(line, plane, (Gen(0) ** 2,))
        assert hom_apply(f, x + 1) == normalize(Gen(0) ** 2 + 1)

    def test_expansion_matches_oracle(self):
        # oracle: (u+v)^2 expanded term by term
        from oracles import p_add, p_pow

        expected = p_pow(p_add(p_gen(0, 2), p_gen(1, 2)), 2, 2)
        assert expected == {(2, 0): 1, (1, 1): 2, (0, 2): 1}
        line = free_ring(1, ["x"])
        plane = free_ring(2, ["u", "v"])
        f = RingHom(line, plane, (Gen(0) + Gen(1),))
        assert hom_apply(f, x**2) == normalize(Gen(0) ** 2 + 2 * Gen(0) * Gen(1) + Gen(1) ** 2)

    def test_identity_normalizes(self, plane):
        ident = RingHom.identity(plane)
        e = (x + y) * (x - y) + y**2
        assert hom_apply(ident, e) == IntPow_x2()

    def test_must_preserve_ideal(self, cross_ring):
        line = free_ring(1, ["t"])
        with pytest.raises(ValueError):
            RingHom(cross_ring, line, (Gen(0), Gen(0)))
        ok = RingHom(cross_ring, line, (Gen(0), Const(0)))
        assert hom_apply(ok, x * y) == Const(0)

    def test_multiplicative(self, rng, plane):
        target = free_ring(2, ["u", "v"])
        f = RingHom(plane, target, (Gen(0) + Gen(1), Gen(0) * Gen(1)))
        for _ in range(20):
            e1 = random_polynomial(rng, 2, 2)
            e2 = random_polynomial(rng, 2, 2)
            assert equal(hom_apply(f, e1 * e2), hom_apply(f, e1) * hom_apply(f, e2))

    def test_respects_differentiation_chain_rule(self, rng):
        # pushing through a one-variable substitution: (f o g)' = (f' o g) * g'
        line = free_ring(1, ["x"])
        f = RingHom(line, line, (Gen(0) ** 2 + Gen(0),))
        g_expr = f.images[0]
        for _ in range(20):
            e = random_polynomial(rng, 1, 3)
            lhs = differentiate(hom_apply(f, e), 0)
            rhs = hom_apply(f, differentiate(e, 0)) * differentiate(g_expr, 0)
            assert equal(lhs, rhs)

    def test_reduces_into_quotient_target(self, cross_ring, plane):
        f = RingHom(plane, cross_ring, (Gen(0), Gen(1)))
        assert hom_apply(f, 3 * x * y + x) == x

    def test_compose(self, plane):
        target = free_ring(1, ["t"])
        t = Gen(0)
        first = RingHom(free_ring(1, ["s"]), plane, (x + y,))
        second = RingHom(plane, target, (t, t**2))
        composed = hom_compose(second, first)
        assert composed.images == (normalize(t**2 + t),)

    def test_out_of_ring_expression_rejected(self, plane):
        ident = RingHom.identity(plane)
        with pytest.raises(RingMismatch):
            hom_apply(ident, z)


def IntPow_x2():
    from cartan.expr import IntPow

    return IntPow(x, 2)
