"""Derivations, contraction, Lie derivative and graded operators.

A vector field is a derivation written in coordinates: one scalar coefficient
per generator.  The Lie derivative is *defined* by the magic formula
L(v) = d o i(v) + i(v) o d; flows never enter.  Operator identities are
decided by applying both sides to a finite spanning set of test forms, which
is complete for operators of this derivation type (they are determined by
their action on scalars and coordinate differentials).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NotRelated, RingMismatch
from .expr import (
    Const,
    Gen,
    Poly,
    SmoothExpr,
    differentiate,
    expr_to_poly,
    normalize,
    poly_to_expr,
)
from .forms import DifferentialForm, exterior_derivative, form_to_text, pushforward, wedge
from .ring import (
    RingHom,
    RingPresentation,
    hom_apply,
    reduce_in_ring,
    reduce_poly_in_ring,
    same_ring,
)


@dataclass(frozen=True)
class VectorField:
    """A derivation sum(a_i * d/dx_i), coefficients in normal form."""

    ring: RingPresentation
    coefficients: tuple[SmoothExpr, ...]

    def __post_init__(self):
        if len(self.coefficients) != self.ring.n:
            raise ValueError("need one coefficient per generator")
        coeffs = tuple(normalize(c) for c in self.coefficients)
        for c in coeffs:
            if not self.ring.contains_expr(c):
                raise ValueError(f"coefficient {c!r} uses out-of-range generators")
        object.__setattr__(self, "coefficients", coeffs)

    @staticmethod
    def zero(ring: RingPresentation) -> "VectorField":
        return VectorField(ring, tuple(Const(0) for _ in range(ring.n)))

    @staticmethod
    def coordinate(ring: RingPresentation, index: int) -> "VectorField":
        return VectorField(
            ring, tuple(Const(1 if i == index else 0) for i in range(ring.n))
        )

    def is_zero(self) -> bool:
        return all(expr_to_poly(c).is_zero() for c in self.coefficients)

    def __add__(self, other: "VectorField") -> "VectorField":
        same_ring(self.ring, other.ring)
        return VectorField(
            self.ring, tuple(a + b for a, b in zip(self.coefficients, other.coefficients))
        )

    def __sub__(self, other: "VectorField") -> "VectorField":
        same_ring(self.ring, other.ring)
        return VectorField(
            self.ring, tuple(a - b for a, b in zip(self.coefficients, other.coefficients))
        )

    def scale(self, factor: SmoothExpr | int | Fraction) -> "VectorField":
        factor = factor if isinstance(factor, SmoothExpr) else Const(factor)
        return VectorField(self.ring, tuple(factor * c for c in self.coefficients))


def vf_apply(v: VectorField, f: SmoothExpr) -> SmoothExpr:
    """v(f) = sum a_i * d_i f; chain rule runs through primitive calls."""
    if not v.ring.contains_expr(f):
        raise RingMismatch("expression uses generators outside the ring")
    f_poly = expr_to_poly(f)
    total = Poly.zero()
    for i, a in enumerate(v.coefficients):
        partial = f_poly.diff(i)
        if not partial.is_zero():
            total = total + expr_to_poly(a) * partial
    return poly_to_expr(reduce_poly_in_ring(total, v.ring))


def vf_bracket(v: VectorField, w: VectorField) -> VectorField:
    """[v, w], the commutator; coefficients v(w_i) - w(v_i)."""
    same_ring(v.ring, w.ring)
    return VectorField(
        v.ring,
        tuple(
            vf_apply(v, wi) - vf_apply(w, vi)
            for vi, wi in zip(v.coefficients, w.coefficients)
        ),
    )


def contract(v: VectorField, a: DifferentialForm) -> DifferentialForm:
    """Interior product i(v): the degree -1 derivation pairing v with dx_i."""
    same_ring(v.ring, a.ring)
    coeff_polys = [expr_to_poly(c) for c in v.coefficients]
    result: dict[int, dict[tuple[int, ...], Poly]] = {}
    for degree, terms in a._parts.items():
        if degree == 0:
            continue
        bucket = result.setdefault(degree - 1, {})
        for idx, coeff in terms.items():
            for s, i in enumerate(idx):
                v_i = coeff_polys[i]
                if v_i.is_zero():
                    continue
                term = v_i * coeff
                if s % 2:
                    term = -term
                rest = idx[:s] + idx[s + 1 :]
                acc = bucket.get(rest)
                bucket[rest] = term if acc is None else acc + term
    return DifferentialForm._raw(a.ring, result)


def lie_derivative(v: VectorField, a: DifferentialForm) -> DifferentialForm:
    """L(v) = d o i(v) + i(v) o d (the magic formula, by definition)."""
    same_ring(v.ring, a.ring)
    return exterior_derivative(contract(v, a)) + contract(v, exterior_derivative(a))


# ---------------------------------------------------------------------------
# Graded operators


class GradedOperator:
    """A degree-tagged operator on the forms complex, applied symbolically."""

    __slots__ = ()
    degree: int

    def apply(self, form: DifferentialForm) -> DifferentialForm:
        raise NotImplementedError


@dataclass(frozen=True)
class ExteriorD(GradedOperator):
    degree: int = 1

    def apply(self, form: DifferentialForm) -> DifferentialForm:
        return exterior_derivative(form)


@dataclass(frozen=True)
class Contraction(GradedOperator):
    field: VectorField
    degree: int = -1

    def apply(self, form: DifferentialForm) -> DifferentialForm:
        return contract(self.field, form)


@dataclass(frozen=True)
class Lie(GradedOperator):
    field: VectorField
    degree: int = 0

    def apply(self, form: DifferentialForm) -> DifferentialForm:
        return lie_derivative(self.field, form)


@dataclass(frozen=True)
class OpZero(GradedOperator):
    degree: int = 0

    def apply(self, form: DifferentialForm) -> DifferentialForm:
        return DifferentialForm.zero(form.ring)


@dataclass(frozen=True)
class OpSum(GradedOperator):
    operators: tuple[GradedOperator, ...]

    def __post_init__(self):
        degrees = {op.degree for op in self.operators}
        if len(degrees) > 1:
            raise ValueError(f"summands must share a degree, got {sorted(degrees)}")

    @property
    def degree(self) -> int:
        return self.operators[0].degree if self.operators else 0

    def apply(self, form: DifferentialForm) -> DifferentialForm:
        result = DifferentialForm.zero(form.ring)
        for op in self.operators:
            result = result + op.apply(form)
        return result


@dataclass(frozen=True)
class OpCompose(GradedOperator):
    """outer o inner: the right factor is applied first."""

    outer: GradedOperator
    inner: GradedOperator

    @property
    def degree(self) -> int:
        return self.outer.degree + self.inner.degree

    def apply(self, form: DifferentialForm) -> DifferentialForm:
        return self.outer.apply(self.inner.apply(form))


@dataclass(frozen=True)
class OpScale(GradedOperator):
    factor: SmoothExpr
    operator: GradedOperator

    def __post_init__(self):
        factor = self.factor if isinstance(self.factor, SmoothExpr) else Const(self.factor)
        object.__setattr__(self, "factor", factor)

    @property
    def degree(self) -> int:
        return self.operator.degree

    def apply(self, form: DifferentialForm) -> DifferentialForm:
        return self.operator.apply(form).scale(self.factor)


def op_apply(op: GradedOperator, form: DifferentialForm) -> DifferentialForm:
    return op.apply(form)


def graded_commutator(x: GradedOperator, y: GradedOperator) -> GradedOperator:
    """[X, Y] = X o Y - (-1)^{|X||Y|} Y o X."""
    sign = -1 if (x.degree * y.degree) % 2 == 0 else 1
    return OpSum(
        (
            OpCompose(x, y),
            OpScale(Const(sign), OpCompose(y, x)),
        )
    )


def ad_d(x: GradedOperator) -> GradedOperator:
    """Bracketing with the exterior derivative; raises degree by one."""
    return graded_commutator(ExteriorD(), x)


def operators_agree(
    x: GradedOperator, y: GradedOperator, forms: Iterable[DifferentialForm]
) -> tuple[bool, DifferentialForm | None]:
    """Exact agreement on every test form; returns a witness on failure."""
    for form in forms:
        if x.apply(form) != y.apply(form):
            return False, form
    return True, None


def spanning_forms(ring: RingPresentation, coeff_degree: int = 2) -> list[DifferentialForm]:
    """All monomial basis forms f * dx_T with deg f <= coeff_degree and T
    ranging over every strictly increasing index tuple."""
    n = ring.n
    monomials: list[SmoothExpr] = []
    for total in range(coeff_degree + 1):
        for exps in itertools.combinations_with_replacement(range(n), total):
            m: SmoothExpr = Const(1)
            for i in exps:
                m = m * Gen(i)
            monomials.append(normalize(m))
    forms = []
    for k in range(n + 1):
        for idx in itertools.combinations(range(n), k):
            for m in monomials:
                forms.append(DifferentialForm.monomial(ring, m, idx))
    return forms


# ---------------------------------------------------------------------------
# The identity harness


@dataclass(frozen=True)
class IdentityResult:
    identity: str
    passed: bool
    witness: DifferentialForm | None = None

    def to_json(self) -> dict:
        return {
            "identity": self.identity,
            "pass": self.passed,
            "witness": None if self.witness is None else form_to_text(self.witness),
        }


IdentityReport = list[IdentityResult]

_IDENTITY_ORDER = ("i", "ii", "iii", "iv", "v")


def _identity_sides(
    name: str, v: VectorField, w: VectorField
) -> tuple[GradedOperator, GradedOperator]:
    d = ExteriorD()
    if name == "i":
        return OpCompose(Lie(v), d), OpCompose(d, Lie(v))
    if name == "ii":
        return Lie(vf_bracket(v, w)), graded_commutator(Lie(v), Lie(w))
    if name == "iii":
        return graded_commutator(Lie(v), Contraction(w)), Contraction(vf_bracket(v, w))
    if name == "iv":
        return graded_commutator(Contraction(v), Contraction(w)), OpZero(-2)
    if name == "v":
        return Lie(v), graded_commutator(d, Contraction(v))
    raise ValueError(f"unknown identity {name!r}")


def verify_cartan(
    ring: RingPresentation,
    v: VectorField,
    w: VectorField,
    test_forms: Sequence[DifferentialForm],
    identities: Sequence[str] = _IDENTITY_ORDER,
) -> IdentityReport:
    """Check the five calculus identities by exact symbolic equality of both
    sides applied to every test form."""
    same_ring(ring, v.ring)
    same_ring(ring, w.ring)
    for form in test_forms:
        same_ring(ring, form.ring)
    report = []
    for name in identities:
        lhs, rhs = _identity_sides(name, v, w)
        ok, witness = operators_agree(lhs, rhs, test_forms)
        report.append(IdentityResult(identity=name, passed=ok, witness=witness))
    return report


def naturality_check(
    f: RingHom,
    v: VectorField,
    w: VectorField,
    test_forms: Sequence[DifferentialForm],
) -> bool:
    """For f-related fields, the induced map on forms intertwines both the
    contractions and the Lie derivatives; checked exactly on test forms."""
    if v.ring != f.source:
        raise RingMismatch("first field must live over the source ring")
    if w.ring != f.target:
        raise RingMismatch("second field must live over the target ring")
    for i in range(f.source.n):
        lhs = hom_apply(f, vf_apply(v, Gen(i)))
        rhs = vf_apply(w, hom_apply(f, Gen(i)))
        if expr_to_poly(lhs - rhs).is_zero():
            continue
        raise NotRelated(
            f"fields are not related by the map: mismatch on generator {i}"
        )
    for form in test_forms:
        if pushforward(f, contract(v, form)) != contract(w, pushforward(f, form)):
            return False
        if pushforward(f, lie_derivative(v, form)) != lie_derivative(w, pushforward(f, form)):
            return False
    return True
