"""The graded algebra of differential forms over a ring presentation.

A form is stored fully expanded in the coordinate basis: for each degree k a
sparse map from strictly increasing k-tuples of generator indices to scalar
coefficients.  Over a free ring on n generators this is the free exterior
algebra on the n coordinate differentials; over a quotient the coefficients
are kept reduced modulo the ideal (the conormal-quotient model: relations
coming from differentials of ideal generators are present but representatives
are not canonicalized against them).

Coefficients are SmoothExpr at the API boundary and sparse polynomials
internally, so chained operations never rebuild trees.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from .errors import RingMismatch
from .expr import Const, Poly, SmoothExpr, expr_to_poly, poly_to_expr, to_text
from .ring import RingHom, RingPresentation, reduce_poly_in_ring, same_ring

_PolyComponents = dict[int, dict[tuple[int, ...], Poly]]


def _merge_sign(left: tuple[int, ...], right: tuple[int, ...]) -> tuple[int, tuple[int, ...]] | None:
    """Merge two strictly increasing tuples; None if they share an index,
    else (sign of the shuffle, merged tuple)."""
    merged: list[int] = []
    sign = 1
    i = j = 0
    while i < len(left) and j < len(right):
        a, b = left[i], right[j]
        if a == b:
            return None
        if a < b:
            merged.append(a)
            i += 1
        else:
            # b jumps over the remaining entries of left
            if (len(left) - i) % 2:
                sign = -sign
            merged.append(b)
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return sign, tuple(merged)


def _bucket_add(bucket: dict[tuple[int, ...], Poly], idx: tuple[int, ...], value: Poly) -> None:
    acc = bucket.get(idx)
    bucket[idx] = value if acc is None else acc + value


class DifferentialForm:
    """An inhomogeneous differential form in coordinate-basis normal form."""

    __slots__ = ("ring", "_parts")

    def __init__(
        self,
        ring: RingPresentation,
        components: Mapping[int, Mapping[tuple[int, ...], SmoothExpr]] | None = None,
    ):
        self.ring = ring
        parts: _PolyComponents = {}
        if components:
            for degree, terms in components.items():
                for idx, coeff in terms.items():
                    idx = tuple(idx)
                    if len(idx) != degree:
                        raise ValueError(f"index tuple {idx} does not have degree {degree}")
                    self._check_idx(idx)
                    poly = coeff if isinstance(coeff, Poly) else expr_to_poly(coeff)
                    _bucket_add(parts.setdefault(degree, {}), idx, poly)
        self._parts = self._prune(parts)

    @classmethod
    def _raw(cls, ring: RingPresentation, parts: _PolyComponents) -> "DifferentialForm":
        form = object.__new__(cls)
        form.ring = ring
        form._parts = form._prune(parts)
        return form

    def _check_idx(self, idx: tuple[int, ...]) -> None:
        n = self.ring.n
        if any(not (0 <= i < n) for i in idx):
            raise ValueError(f"index tuple {idx} out of range for {n} generators")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError(f"index tuple {idx} is not strictly increasing")

    def _prune(self, parts: _PolyComponents) -> _PolyComponents:
        quotient = not self.ring.ideal.is_zero
        clean: _PolyComponents = {}
        for degree, terms in parts.items():
            kept = {}
            for idx, poly in terms.items():
                if quotient:
                    poly = reduce_poly_in_ring(poly, self.ring)
                if not poly.is_zero():
                    kept[idx] = poly
            if kept:
                clean[degree] = kept
        return clean

    # -- construction helpers

    @staticmethod
    def zero(ring: RingPresentation) -> "DifferentialForm":
        return DifferentialForm._raw(ring, {})

    @staticmethod
    def scalar(ring: RingPresentation, value: SmoothExpr | int | Fraction) -> "DifferentialForm":
        coeff = value if isinstance(value, SmoothExpr) else Const(value)
        return DifferentialForm(ring, {0: {(): coeff}})

    @staticmethod
    def monomial(
        ring: RingPresentation, coeff: SmoothExpr | int | Fraction, idx: Iterable[int]
    ) -> "DifferentialForm":
        idx = tuple(idx)
        coeff = coeff if isinstance(coeff, SmoothExpr) else Const(coeff)
        return DifferentialForm(ring, {len(idx): {idx: coeff}})

    @staticmethod
    def d_generator(ring: RingPresentation, index: int) -> "DifferentialForm":
        return DifferentialForm.monomial(ring, Const(1), (index,))

    # -- inspection

    def degrees(self) -> list[int]:
        return sorted(self._parts)

    def is_zero(self) -> bool:
        return not self._parts

    def is_homogeneous(self) -> bool:
        return len(self._parts) <= 1

    def component(self, degree: int) -> dict[tuple[int, ...], SmoothExpr]:
        return {idx: poly_to_expr(p) for idx, p in self._parts.get(degree, {}).items()}

    def coefficient(self, idx: Iterable[int]) -> SmoothExpr:
        idx = tuple(idx)
        poly = self._parts.get(len(idx), {}).get(idx)
        return Const(0) if poly is None else poly_to_expr(poly)

    def terms(self) -> Iterable[tuple[tuple[int, ...], SmoothExpr]]:
        for degree in sorted(self._parts):
            for idx in sorted(self._parts[degree]):
                yield idx, poly_to_expr(self._parts[degree][idx])

    def homogeneous_part(self, degree: int) -> "DifferentialForm":
        return DifferentialForm._raw(
            self.ring, {degree: dict(self._parts.get(degree, {}))}
        )

    # -- algebra

    def __add__(self, other: "DifferentialForm") -> "DifferentialForm":
        same_ring(self.ring, other.ring)
        combined: _PolyComponents = {}
        for source in (self._parts, other._parts):
            for degree, terms in source.items():
                bucket = combined.setdefault(degree, {})
                for idx, poly in terms.items():
                    _bucket_add(bucket, idx, poly)
        return DifferentialForm._raw(self.ring, combined)

    def __neg__(self) -> "DifferentialForm":
        return self.scale(Const(-1))

    def __sub__(self, other: "DifferentialForm") -> "DifferentialForm":
        return self + (-other)

    def scale(self, factor: SmoothExpr | int | Fraction) -> "DifferentialForm":
        factor_poly = (
            expr_to_poly(factor) if isinstance(factor, SmoothExpr) else Poly.const(Fraction(factor))
        )
        scaled = {
            degree: {idx: factor_poly * poly for idx, poly in terms.items()}
            for degree, terms in self._parts.items()
        }
        return DifferentialForm._raw(self.ring, scaled)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        if self.ring != other.ring:
            return False
        return self._parts == other._parts

    def __hash__(self):
        data = tuple(
            (degree, tuple(sorted(self._parts[degree].items(), key=lambda kv: kv[0])))
            for degree in sorted(self._parts)
        )
        return hash((self.ring, tuple((d, tuple((i, hash(p)) for i, p in t)) for d, t in data)))

    def __repr__(self):
        return f"DifferentialForm({form_to_text(self)!r})"


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    """Exterior product; bilinear, associative, graded-commutative."""
    same_ring(a.ring, b.ring)
    result: _PolyComponents = {}
    for deg_a, terms_a in a._parts.items():
        for deg_b, terms_b in b._parts.items():
            bucket = result.setdefault(deg_a + deg_b, {})
            for idx_a, coeff_a in terms_a.items():
                for idx_b, coeff_b in terms_b.items():
                    merged = _merge_sign(idx_a, idx_b)
                    if merged is None:
                        continue
                    sign, idx = merged
                    term = coeff_a * coeff_b
                    if sign < 0:
                        term = -term
                    _bucket_add(bucket, idx, term)
    return DifferentialForm._raw(a.ring, result)


def exterior_derivative(a: DifferentialForm) -> DifferentialForm:
    """d(f dx_T) = sum_i (d_i f) dx_i ^ dx_T; R-linear and square-zero."""
    result: _PolyComponents = {}
    n = a.ring.n
    for degree, terms in a._parts.items():
        bucket = result.setdefault(degree + 1, {})
        for idx, coeff in terms.items():
            for i in range(n):
                partial = coeff.diff(i)
                if partial.is_zero():
                    continue
                merged = _merge_sign((i,), idx)
                if merged is None:
                    continue
                sign, new_idx = merged
                _bucket_add(bucket, new_idx, partial if sign > 0 else -partial)
    return DifferentialForm._raw(a.ring, result)


def d_of_expr(ring: RingPresentation, e: SmoothExpr) -> DifferentialForm:
    """The differential of a scalar, as a 1-form."""
    return exterior_derivative(DifferentialForm.scalar(ring, e))


def pushforward(f: RingHom, a: DifferentialForm) -> DifferentialForm:
    """The induced map on forms: g dx_{i1}^...^dx_{ik} goes to
    f(g) d(f x_{i1}) ^ ... ^ d(f x_{ik})."""
    from .ring import hom_apply

    if a.ring != f.source:
        raise RingMismatch("form does not live over the source ring of the map")
    target = f.target
    result = DifferentialForm.zero(target)
    image_differentials = [d_of_expr(target, img) for img in f.images]
    for degree, terms in a._parts.items():
        for idx, coeff in terms.items():
            piece = DifferentialForm.scalar(target, hom_apply(f, poly_to_expr(coeff)))
            for i in idx:
                piece = wedge(piece, image_differentials[i])
                if piece.is_zero():
                    break
            result = result + piece
    return result


def form_to_text(a: DifferentialForm, names=None) -> str:
    """Human-readable rendering, parseable by the form grammar."""
    if a.is_zero():
        return "0"
    display_names = names if names is not None else (a.ring.names or None)
    pieces = []
    for idx, coeff in a.terms():
        coeff_text = to_text(coeff, display_names)
        dx = "^".join(
            f"d({a.ring.name_of(i) if display_names is None else display_names[i]})" for i in idx
        )
        if not idx:
            pieces.append(coeff_text)
        elif coeff_text == "1":
            pieces.append(dx)
        elif coeff_text == "-1":
            pieces.append(f"-{dx}")
        else:
            if " " in coeff_text:
                coeff_text = f"({coeff_text})"
            pieces.append(f"{coeff_text} {dx}")
    return " + ".join(pieces)
