import random
from fractions import Fraction

import pytest

from cartan.errors import ParseError, UnknownIdentifier
from cartan.expr import Const, Gen, IntPow, Prim, Product, Sum, equal, normalize, to_text
from cartan.forms import DifferentialForm, d_of_expr, form_to_text, wedge
from cartan.parser import parse_expr, parse_expr_in_ring, parse_form, parse_vector_field
from cartan.ring import free_ring
from cartan.sampling import random_inhomogeneous_form, random_polynomial

x, y = Gen(0), Gen(1)


class TestScalarGrammar:
    def test_product_plus_rational(self):
        parsed = parse_expr("x*y + 1/2", ["x", "y"])
        assert parsed == Sum((Product((x, y)), Const(Fraction(1, 2))))

    def test_primitive_call(self):
        parsed = parse_expr("beta0(x^2)", ["x"])
        assert parsed == Prim("beta0", (IntPow(x, 2),))

    def test_dangling_operator_position(self):
        with pytest.raises(ParseError) as excinfo:
            parse_expr("x +", ["x"])
        assert excinfo.value.position == 3

    def test_unknown_variable(self):
        with pytest.raises(UnknownIdentifier):
            parse_expr("q + 1", ["x", "y"])

    def test_unknown_primitive(self):
        with pytest.raises(UnknownIdentifier):
            parse_expr("sin(x)", ["x"])

    def test_default_names(self):
        assert parse_expr("x0*x3") == Product((Gen(0), Gen(3)))

    def test_unary_minus(self):
        assert equal(parse_expr("-x + 2", ["x"]), 2 - x)

    def test_power_requires_integer_literal(self):
        with pytest.raises(ParseError):
            parse_expr("x^y", ["x", "y"])
        with pytest.raises(ParseError):
            parse_expr("x^-1", ["x"])

    def test_wrong_arity(self):
        with pytest.raises(ParseError):
            parse_expr("S(x)", ["x"])

    def test_ring_range_check(self):
        ring = free_ring(1, ["x"])
        parse_expr_in_ring("x^2", ring)
        with pytest.raises(ParseError):
            parse_expr_in_ring("x1", free_ring(1))


class TestFormGrammar:
    def test_wedge_of_differentials(self, plane):
        parsed = parse_form("d(x)^d(y)", plane)
        dx = DifferentialForm.d_generator(plane, 0)
        dy = DifferentialForm.d_generator(plane, 1)
        assert parsed == wedge(dx, dy)

    def test_inhomogeneous_sum(self, plane):
        parsed = parse_form("x*d(y) + d(x)", plane)
        assert parsed.degrees() == [1]
        mixed = parse_form("x + d(x)", plane)
        assert mixed.degrees() == [0, 1]

    def test_leibniz_expansion_at_parse_time(self, plane):
        parsed = parse_form("d(x*y)", plane)
        assert parsed == d_of_expr(plane, x * y)
        assert form_to_text(parsed) == "y d(x) + x d(y)"

    def test_scalar_power_inside_form(self, plane):
        parsed = parse_form("x^2*d(y)", plane)
        assert parsed == DifferentialForm.monomial(plane, IntPow(x, 2), (1,))

    def test_juxtaposition_is_multiplication(self, plane):
        assert parse_form("2*x d(x)^d(y)", plane) == parse_form("2*x*d(x)^d(y)", plane)

    def test_wedge_power_of_one_form_vanishes(self, plane):
        assert parse_form("d(x)^2", plane).is_zero()

    def test_syntax_error(self, plane):
        with pytest.raises(ParseError):
            parse_form("d(x)^", plane)


class TestVectorFieldGrammar:
    def test_comma_separated(self, plane):
        field = parse_vector_field("x*y, 0", plane)
        assert field.coefficients == (normalize(x * y), Const(0))

    def test_commas_inside_calls(self, plane):
        field = parse_vector_field("S(x, y), 1", plane)
        assert field.coefficients[0] == Prim("S", (x, y))

    def test_wrong_count(self, plane):
        with pytest.raises(ParseError):
            parse_vector_field("x", plane)


class TestRoundTrip:
    def test_500_random_expressions(self, space):
        rng = random.Random(100)
        names = ["x", "y", "z"]
        for _ in range(500):
            expr = random_polynomial(rng, 3, 4, terms=5)
            if rng.random() < 0.25:
                expr = normalize(expr + Prim("beta0", (random_polynomial(rng, 3, 2),)))
            text = to_text(expr, names)
            assert equal(parse_expr(text, names), expr)

    def test_500_random_forms(self, space):
        rng = random.Random(101)
        for _ in range(500):
            form = random_inhomogeneous_form(rng, space, pieces=2, coeff_degree=2)
            text = form_to_text(form)
            assert parse_form(text, space) == form
