"""Derivations of a closed zero set, presented as a quotient of tangent fields.

For M = Z(I) in R^m with a polynomial ideal I, derivations of the restricted
function ring are ambient vector fields preserving I, modulo the submodule J
of fields whose coordinate coefficients all lie in I.  Neither side is ever
materialized: tangency is a certificate-backed membership check on the ideal
generators (sufficient by the Leibniz rule, since V(sum h_j g_j) =
sum h_j V(g_j) + sum V(h_j) g_j stays in I), and the quotient exists as coset
arithmetic on representatives.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import IdealMismatch, NonPolynomial, NotTangent, WrongIdeal
from .expr import (
    Const,
    Gen,
    SmoothExpr,
    expr_to_poly,
    hadamard_factor,
    is_polynomial,
    normalize,
    substitute,
)
from .calculus import VectorField, vf_bracket, vf_apply
from .ring import IdealPresentation, groebner_basis, ideal_member, reduce_mod_ideal


def _require_free_polynomial(v: VectorField) -> None:
    if not v.ring.ideal.is_zero:
        raise ValueError("tangent fields live over the ambient free ring")
    for c in v.coefficients:
        if not is_polynomial(c):
            raise NonPolynomial(f"coefficient {c!r} is not polynomial")


@dataclass(frozen=True)
class TangentField:
    """A vector field preserving the ideal, with exact cofactor certificates.

    certificates[k] lists the cofactors (c_j) with V(g_k) = sum c_j g_j for
    the k-th ideal generator g_k.
    """

    field: VectorField
    ideal: IdealPresentation
    certificates: tuple[tuple[SmoothExpr, ...], ...]

    def verify(self) -> bool:
        """Re-check every certificate by plain arithmetic."""
        for g, cofactors in zip(self.ideal.generators, self.certificates):
            image = vf_apply(self.field, g)
            combo: SmoothExpr = Const(0)
            for c, gen in zip(cofactors, self.ideal.generators):
                combo = combo + c * gen
            if not expr_to_poly(image - combo).is_zero():
                return False
        return True


def preserves_ideal(v: VectorField, ideal: IdealPresentation) -> TangentField:
    """Check V(g) in I for every ideal generator; certificates on success,
    NotTangent (with the offending generator and its reduction) otherwise."""
    _require_free_polynomial(v)
    n = v.ring.n
    certificates = []
    for g in ideal.generators:
        image = vf_apply(v, g)
        ok, cofactors = ideal_member(image, ideal, n)
        if not ok:
            raise NotTangent(g, reduce_mod_ideal(image, ideal, n))
        certificates.append(tuple(cofactors))
    return TangentField(field=v, ideal=ideal, certificates=tuple(certificates))


def is_tangent(v: VectorField, ideal: IdealPresentation) -> bool:
    try:
        preserves_ideal(v, ideal)
    except NotTangent:
        return False
    return True


def in_null_module(v: VectorField, ideal: IdealPresentation) -> bool:
    """Membership in J: every coordinate coefficient lies in the ideal."""
    _require_free_polynomial(v)
    n = v.ring.n
    return all(ideal_member(c, ideal, n)[0] for c in v.coefficients)


# short alias matching the usual notation for the null submodule
in_J = in_null_module


@dataclass(frozen=True)
class DerClass:
    """A derivation of the zero set: a tangent field modulo J."""

    representative: TangentField

    @staticmethod
    def from_field(v: VectorField, ideal: IdealPresentation) -> "DerClass":
        return DerClass(preserves_ideal(v, ideal))

    @property
    def ideal(self) -> IdealPresentation:
        return self.representative.ideal

    @property
    def field(self) -> VectorField:
        return self.representative.field

    def is_zero_class(self) -> bool:
        return in_null_module(self.field, self.ideal)


def class_equal(a: DerClass, b: DerClass) -> bool:
    """Equality of cosets: the difference of representatives lies in J."""
    if a.ideal != b.ideal:
        raise IdealMismatch("classes belong to different ideals")
    return in_null_module(a.field - b.field, a.ideal)


def class_add(a: DerClass, b: DerClass) -> DerClass:
    if a.ideal != b.ideal:
        raise IdealMismatch("classes belong to different ideals")
    return DerClass.from_field(a.field + b.field, a.ideal)


def class_bracket(a: DerClass, b: DerClass) -> DerClass:
    """The Lie bracket descends to the quotient; the result is re-certified."""
    if a.ideal != b.ideal:
        raise IdealMismatch("classes belong to different ideals")
    return DerClass.from_field(vf_bracket(a.field, b.field), a.ideal)


_CROSS_GB_CACHE: dict[int, bool] = {}


def _is_cross_ideal(ideal: IdealPresentation, n: int) -> bool:
    """Exactly the ideal generated by x*y in two variables (up to basis)."""
    if n != 2:
        return False
    gb = groebner_basis(ideal, 2)
    return len(gb) == 1 and expr_to_poly(gb[0] - Gen(0) * Gen(1)).is_zero()


def canonical_pair_cross(a: DerClass) -> tuple[SmoothExpr, SmoothExpr]:
    """For the coordinate cross {x*y = 0}: write the representative as
    x*a1*d/dx + y*a2*d/dy and return (a1(x, 0), a2(0, y)), each univariate in
    generator 0.  The pair depends only on the coset."""
    ideal = a.ideal
    if not _is_cross_ideal(ideal, a.field.ring.n):
        raise WrongIdeal("canonical pairs are defined for the ideal <x*y> in two variables")
    b1, b2 = a.field.coefficients
    # tangency forces b1 to vanish on {x = 0} and b2 on {y = 0}
    a1 = hadamard_factor(b1, 0)
    a2 = hadamard_factor(b2, 1)
    p = substitute(a1, [Gen(0), Const(0)])
    q = substitute(a2, [Const(0), Gen(0)])
    return normalize(p), normalize(q)


def vanishes_on_dense_interior(v: VectorField, ideal: IdealPresentation | None = None) -> bool:
    """Over a dense-interior closed set the null module is {0}: a polynomial
    field restricts to zero exactly when it is zero."""
    _require_free_polynomial(v)
    if ideal is not None:
        if not ideal.dense_interior:
            raise ValueError("expected an ideal flagged dense-interior")
        if not ideal.is_zero:
            raise ValueError("a dense-interior ideal must be the zero ideal")
    return v.is_zero()
