import random
from fractions import Fraction

import pytest

from cartan.errors import IdealMismatch, NotTangent, WrongIdeal
from cartan.expr import Const, Gen, equal, normalize, substitute, to_text
from cartan.calculus import VectorField, vf_apply, vf_bracket
from cartan.derquot import (
    DerClass,
    canonical_pair_cross,
    class_add,
    class_bracket,
    class_equal,
    in_J,
    in_null_module,
    is_tangent,
    preserves_ideal,
    vanishes_on_dense_interior,
)
from cartan.ring import IdealPresentation, free_ring, reduce_mod_ideal
from cartan.sampling import random_polynomial, random_vector_field

x, y = Gen(0), Gen(1)


class TestTangency:
    def test_axis_scaling_is_tangent(self, plane, cross_ideal):
        tangent = preserves_ideal(VectorField(plane, (x, Const(0))), cross_ideal)
        assert tangent.certificates == ((Const(1),),)
        assert tangent.verify()

    def test_translation_is_not_tangent(self, plane, cross_ideal):
        with pytest.raises(NotTangent) as excinfo:
            preserves_ideal(VectorField(plane, (Const(1), Const(0))), cross_ideal)
        assert equal(excinfo.value.generator, x * y)
        assert excinfo.value.reduction == y

    def test_everything_is_tangent_to_the_zero_ideal(self, plane, rng):
        for _ in range(10):
            v = random_vector_field(rng, plane, degree=3)
            tangent = preserves_ideal(v, IdealPresentation(()))
            assert tangent.certificates == ()

    def test_certificates_verify_exactly(self, plane, cross_ideal, rng):
        for _ in range(20):
            a1 = random_polynomial(rng, 2, 2)
            a2 = random_polynomial(rng, 2, 2)
            v = VectorField(plane, (normalize(x * a1), normalize(y * a2)))
            assert preserves_ideal(v, cross_ideal).verify()


class TestNullModule:
    def test_ideal_multiples_are_null(self, plane, cross_ideal):
        assert in_J(VectorField(plane, (normalize(x * y), Const(0))), cross_ideal)

    def test_nonmember(self, plane, cross_ideal):
        assert not in_J(VectorField(plane, (x, Const(0))), cross_ideal)

    def test_zero_field(self, plane, cross_ideal):
        assert in_J(VectorField.zero(plane), cross_ideal)


class TestClasses:
    def test_null_perturbation_preserves_class(self, plane, cross_ideal):
        a = DerClass.from_field(VectorField(plane, (x, Const(0))), cross_ideal)
        b = DerClass.from_field(
            VectorField(plane, (normalize(x + x * y), Const(0))), cross_ideal
        )
        assert class_equal(a, b)

    def test_distinct_classes(self, plane, cross_ideal):
        a = DerClass.from_field(VectorField(plane, (x, Const(0))), cross_ideal)
        c = DerClass.from_field(VectorField(plane, (Const(0), y)), cross_ideal)
        assert not class_equal(a, c)

    def test_reflexive(self, plane, cross_ideal, rng):
        v = VectorField(plane, (normalize(x * random_polynomial(rng, 2, 2)),
                                normalize(y * random_polynomial(rng, 2, 2))))
        a = DerClass.from_field(v, cross_ideal)
        assert class_equal(a, a)

    def test_ideal_mismatch(self, plane, cross_ideal):
        other = IdealPresentation((x,))
        a = DerClass.from_field(VectorField(plane, (x, Const(0))), cross_ideal)
        b = DerClass.from_field(VectorField(plane, (x, Const(0))), other)
        with pytest.raises(IdealMismatch):
            class_equal(a, b)

    def test_scaling_by_ideal_element_lands_in_zero_class(self, plane, cross_ideal, rng):
        # the module structure of the quotient: b*V is null for b in I
        for _ in range(20):
            v = VectorField(plane, (normalize(x * random_polynomial(rng, 2, 1)),
                                    normalize(y * random_polynomial(rng, 2, 1))))
            scaled = v.scale(normalize(x * y * random_polynomial(rng, 2, 1)))
            assert in_null_module(scaled, cross_ideal)


class TestClassBracket:
    def test_commuting_scalings(self, plane, cross_ideal):
        a = DerClass.from_field(VectorField(plane, (x, Const(0))), cross_ideal)
        b = DerClass.from_field(VectorField(plane, (Const(0), y)), cross_ideal)
        assert class_bracket(a, b).is_zero_class()

    def test_radial_action(self, plane, cross_ideal):
        a = DerClass.from_field(VectorField(plane, (x, Const(0))), cross_ideal)
        d = DerClass.from_field(VectorField(plane, (normalize(x**2), Const(0))), cross_ideal)
        result = class_bracket(a, d)
        expected = DerClass.from_field(VectorField(plane, (normalize(x**2), Const(0))), cross_ideal)
        assert class_equal(result, expected)

    def test_self_bracket(self, plane, cross_ideal, rng):
        v = VectorField(plane, (normalize(x * random_polynomial(rng, 2, 2)),
                                normalize(y * random_polynomial(rng, 2, 2))))
        a = DerClass.from_field(v, cross_ideal)
        assert class_bracket(a, a).is_zero_class()

    def test_jacobi_on_random_classes(self, plane, cross_ideal):
        rng = random.Random(3)
        def random_class():
            return DerClass.from_field(
                VectorField(
                    plane,
                    (normalize(x * random_polynomial(rng, 2, 1)),
                     normalize(y * random_polynomial(rng, 2, 1))),
                ),
                cross_ideal,
            )
        for _ in range(25):
            a, b, c = random_class(), random_class(), random_class()
            total = class_add(
                class_add(class_bracket(a, class_bracket(b, c)),
                          class_bracket(b, class_bracket(c, a))),
                class_bracket(c, class_bracket(a, b)),
            )
            assert total.is_zero_class()

    def test_well_defined_on_cosets(self, plane, cross_ideal, rng):
        # perturb representatives by null fields: the bracket class is fixed
        for _ in range(15):
            v = VectorField(plane, (normalize(x * random_polynomial(rng, 2, 1)),
                                    normalize(y * random_polynomial(rng, 2, 1))))
            w = VectorField(plane, (normalize(x * random_polynomial(rng, 2, 1)),
                                    normalize(y * random_polynomial(rng, 2, 1))))
            null = VectorField(plane, (normalize(x * y * random_polynomial(rng, 2, 1)),
                                       normalize(x * y * random_polynomial(rng, 2, 1))))
            a, b = DerClass.from_field(v, cross_ideal), DerClass.from_field(w, cross_ideal)
            a2 = DerClass.from_field(v + null, cross_ideal)
            assert class_equal(class_bracket(a, b), class_bracket(a2, b))


class TestQuotientAction:
    def test_application_depends_only_on_classes(self, plane, cross_ideal, rng):
        # pi-compatibility: perturb the function by ideal elements and the
        # field by null fields; the reduced value of V(f) is unchanged
        for _ in range(20):
            f = random_polynomial(rng, 2, 3)
            v = VectorField(plane, (normalize(x * random_polynomial(rng, 2, 1)),
                                    normalize(y * random_polynomial(rng, 2, 1))))
            f_pert = normalize(f + x * y * random_polynomial(rng, 2, 1))
            null = VectorField(plane, (normalize(x * y * random_polynomial(rng, 2, 1)),
                                       normalize(x * y * random_polynomial(rng, 2, 1))))
            baseline = reduce_mod_ideal(vf_apply(v, f), cross_ideal, 2)
            assert reduce_mod_ideal(vf_apply(v, f_pert), cross_ideal, 2) == baseline
            assert reduce_mod_ideal(vf_apply(v + null, f), cross_ideal, 2) == baseline


class TestCanonicalPairs:
    def test_axis_scaling(self, plane, cross_ideal):
        a = DerClass.from_field(VectorField(plane, (x, Const(0))), cross_ideal)
        assert canonical_pair_cross(a) == (Const(1), Const(0))

    def test_second_axis_component(self, plane, cross_ideal):
        cls = DerClass.from_field(
            VectorField(plane, (normalize(x * y), normalize(y**2))), cross_ideal
        )
        p, q = canonical_pair_cross(cls)
        assert p == Const(0)
        assert q == Gen(0)

    def test_zero_class(self, plane, cross_ideal):
        z = DerClass.from_field(VectorField.zero(plane), cross_ideal)
        assert canonical_pair_cross(z) == (Const(0), Const(0))

    def test_invariant_under_null_perturbation(self, plane, cross_ideal):
        rng = random.Random(7)
        for _ in range(50):
            v = VectorField(plane, (normalize(x * random_polynomial(rng, 2, 2)),
                                    normalize(y * random_polynomial(rng, 2, 2))))
            null = VectorField(plane, (normalize(x * y * random_polynomial(rng, 2, 2)),
                                       normalize(x * y * random_polynomial(rng, 2, 2))))
            a = DerClass.from_field(v, cross_ideal)
            b = DerClass.from_field(v + null, cross_ideal)
            assert canonical_pair_cross(a) == canonical_pair_cross(b)

    def test_additive_and_kills_null_fields(self, plane, cross_ideal, rng):
        for _ in range(20):
            v = VectorField(plane, (normalize(x * random_polynomial(rng, 2, 1)),
                                    normalize(y * random_polynomial(rng, 2, 1))))
            w = VectorField(plane, (normalize(x * random_polynomial(rng, 2, 1)),
                                    normalize(y * random_polynomial(rng, 2, 1))))
            a, b = DerClass.from_field(v, cross_ideal), DerClass.from_field(w, cross_ideal)
            pa, qa = canonical_pair_cross(a)
            pb, qb = canonical_pair_cross(b)
            ps, qs = canonical_pair_cross(class_add(a, b))
            assert equal(ps, pa + pb) and equal(qs, qa + qb)
        null = DerClass.from_field(
            VectorField(plane, (normalize(x * y), normalize(-x * y * y))), cross_ideal
        )
        assert canonical_pair_cross(null) == (Const(0), Const(0))

    def test_bracket_descends_to_componentwise_bracket(self, plane, cross_ideal):
        # pairs act as vector fields on the two axes
        rng = random.Random(9)
        line = free_ring(1)
        for _ in range(20):
            v = VectorField(plane, (normalize(x * random_polynomial(rng, 2, 1)),
                                    normalize(y * random_polynomial(rng, 2, 1))))
            w = VectorField(plane, (normalize(x * random_polynomial(rng, 2, 1)),
                                    normalize(y * random_polynomial(rng, 2, 1))))
            a, b = DerClass.from_field(v, cross_ideal), DerClass.from_field(w, cross_ideal)
            pa, qa = canonical_pair_cross(a)
            pb, qb = canonical_pair_cross(b)
            pc, qc = canonical_pair_cross(class_bracket(a, b))
            # x-axis: p-components as fields t*p(t) d/dt on the line
            t = Gen(0)
            def axis_field(coeff):
                return VectorField(line, (normalize(t * coeff),))
            bracket_p = vf_bracket(axis_field(pa), axis_field(pb))
            assert equal(normalize(t * pc), bracket_p.coefficients[0])
            bracket_q = vf_bracket(axis_field(qa), axis_field(qb))
            assert equal(normalize(t * qc), bracket_q.coefficients[0])

    def test_wrong_ideal(self, plane):
        other = IdealPresentation((x**2,))
        cls = DerClass.from_field(VectorField(plane, (x, Const(0))), other)
        with pytest.raises(WrongIdeal):
            canonical_pair_cross(cls)

    def test_equivalent_presentation_of_the_cross_is_accepted(self, plane):
        fat = IdealPresentation((normalize(x * y), normalize(x**2 * y)))
        cls = DerClass.from_field(VectorField(plane, (x, Const(0))), fat)
        assert canonical_pair_cross(cls) == (Const(1), Const(0))


class TestDenseInterior:
    def test_zero_field(self, plane):
        assert vanishes_on_dense_interior(VectorField.zero(plane))

    def test_nonzero_field(self, plane):
        assert not vanishes_on_dense_interior(VectorField(plane, (x, Const(0))))

    def test_collapsing_coefficient(self, plane):
        v = VectorField(plane, (Const(0), x - x))
        assert vanishes_on_dense_interior(v)

    def test_flag_must_be_set(self, plane):
        with pytest.raises(ValueError):
            vanishes_on_dense_interior(
                VectorField.zero(plane), IdealPresentation((x,))
            )
        flagged = IdealPresentation((), dense_interior=True)
        assert vanishes_on_dense_interior(VectorField.zero(plane), flagged)
