"""Finite-poset presheaf layer.

Opens are named regions of R^n (finite unions of open rational boxes, or the
symbol "all"), ordered by an explicitly given inclusion relation.  All opens
share one ambient ring and restriction is the identity on expressions with
domain bookkeeping: on the polynomial fragment restriction to an open box is
injective, so the model is faithful while keeping equality decidable.

Equality of data "on an overlap" is normal-form equality for polynomial
expressions; expressions carrying primitive calls fall back to sampling at
rational points of the overlap, which can only ever report a disagreement
with a concrete numeric witness.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import Incompatible, IncompatibleFamily, RingMismatch
from .expr import (
    Const,
    Poly,
    SmoothExpr,
    eval_numeric,
    expr_to_poly,
    is_polynomial,
    make_bump,
    normalize,
)
from .forms import DifferentialForm, exterior_derivative
from .calculus import (
    IdentityResult,
    VectorField,
    contract,
    lie_derivative,
    spanning_forms,
    verify_cartan,
)
from .ring import RingPresentation, same_ring

Interval = tuple[Fraction, Fraction]
Box = tuple[Interval, ...]
# a region is "all" of R^n or a finite union of open boxes
Region = str | tuple[Box, ...]

MAX_OPENS = 32

_SAMPLE_COUNT = 25
_SAMPLE_TOLERANCE = 1e-9


def _as_box(spec: Sequence[Sequence]) -> Box:
    box = []
    for lo, hi in spec:
        lo, hi = Fraction(lo), Fraction(hi)
        if lo >= hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        box.append((lo, hi))
    return tuple(box)


def region_from_spec(spec) -> Region:
    """Accepts "all" or a list of boxes, each a list of [lo, hi] pairs."""
    if spec == "all":
        return "all"
    return tuple(_as_box(b) for b in spec)


def _box_intersect(b1: Box, b2: Box) -> Box | None:
    out = []
    for (lo1, hi1), (lo2, hi2) in zip(b1, b2):
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if lo >= hi:
            return None
        out.append((lo, hi))
    return tuple(out)


def region_intersection(r1: Region, r2: Region) -> Region:
    if r1 == "all":
        return r2
    if r2 == "all":
        return r1
    boxes = []
    for b1 in r1:
        for b2 in r2:
            cap = _box_intersect(b1, b2)
            if cap is not None:
                boxes.append(cap)
    return tuple(boxes)


def region_is_empty(r: Region) -> bool:
    return r != "all" and len(r) == 0


def _box_contained_in_union(box: Box, union: Sequence[Box]) -> bool:
    """Exact containment of an open box in a finite union of open boxes,
    by slab decomposition: cut the box along every boundary hyperplane of
    the union's boxes, then each open cell lies in the union iff its center
    does."""
    if not union:
        return False
    dims = len(box)
    cuts: list[list[Fraction]] = []
    for d in range(dims):
        lo, hi = box[d]
        points = {lo, hi}
        for other in union:
            for value in other[d]:
                if lo < value < hi:
                    points.add(value)
        cuts.append(sorted(points))
    for cell in itertools.product(*(range(len(c) - 1) for c in cuts)):
        center = tuple(
            (cuts[d][i] + cuts[d][i + 1]) / 2 for d, i in enumerate(cell)
        )
        if not any(
            all(lo < c < hi for c, (lo, hi) in zip(center, other))
            for other in union
        ):
            return False
    return True


def region_contains(outer: Region, inner: Region) -> bool:
    """Whether `outer` contains `inner` (exact on box descriptors)."""
    if outer == "all":
        return True
    if inner == "all":
        return False
    return all(_box_contained_in_union(box, outer) for box in inner)


def region_sample_points(region: Region, dims: int, count: int = _SAMPLE_COUNT) -> list[tuple[Fraction, ...]]:
    """Deterministic rational sample points inside the region."""
    if region == "all":
        boxes: Sequence[Box] = (tuple((Fraction(-2), Fraction(2)) for _ in range(dims)),)
    else:
        boxes = region
    points: list[tuple[Fraction, ...]] = []
    if not boxes:
        return points
    per_box = max(1, count // len(boxes))
    for box in boxes:
        # a low-discrepancy-ish rational walk through the box
        for k in range(per_box):
            point = []
            for d, (lo, hi) in enumerate(box):
                step = Fraction(2 * k + d % 3 + 1, 2 * per_box + 3)
                point.append(lo + (hi - lo) * step)
            points.append(tuple(point))
        if len(points) >= count:
            break
    return points[:count]


def _poly_zero_on_region(poly: Poly, region: Region, dims: int) -> tuple[bool, tuple | None]:
    """A polynomial vanishes on a nonempty open region iff it is zero; when
    nonzero, search an enlarging rational grid for a witness point."""
    if poly.is_zero():
        return True, None
    if region == "all":
        boxes: Sequence[Box] = (tuple((Fraction(-2), Fraction(2)) for _ in range(dims)),)
    else:
        boxes = region
    box = boxes[0]
    degree = poly.degree()
    for m in range(1, degree + 2):
        grid = [
            [lo + (hi - lo) * Fraction(j + 1, m + 1) for j in range(m)]
            for lo, hi in box
        ]
        for point in itertools.product(*grid):
            if poly.eval_exact(point) != 0:
                return False, tuple(point)
    # unreachable for a nonzero polynomial of that degree
    return False, None


def exprs_equal_on_region(
    e1: SmoothExpr, e2: SmoothExpr, region: Region, dims: int
) -> tuple[bool, tuple | None]:
    """Equality of two expressions on a region; exact for polynomials,
    sampled at rational points otherwise (a numeric witness is returned only
    when sampling finds a disagreement)."""
    if region_is_empty(region):
        return True, None
    diff = expr_to_poly(e1) - expr_to_poly(e2)
    if diff.is_polynomial():
        return _poly_zero_on_region(diff, region, dims)
    for point in region_sample_points(region, dims):
        values = [float(c) for c in point]
        if abs(diff.eval(values)) > _SAMPLE_TOLERANCE:
            return False, tuple(point)
    return True, None


def forms_equal_on_region(
    a: DifferentialForm, b: DifferentialForm, region: Region, dims: int
) -> tuple[bool, tuple | None]:
    degrees = set(a.degrees()) | set(b.degrees())
    for k in degrees:
        terms_a, terms_b = a.component(k), b.component(k)
        for idx in set(terms_a) | set(terms_b):
            ok, witness = exprs_equal_on_region(
                terms_a.get(idx, Const(0)), terms_b.get(idx, Const(0)), region, dims
            )
            if not ok:
                return False, witness
    return True, None


# ---------------------------------------------------------------------------
# Posets of opens and presheaves over them


@dataclass(frozen=True)
class OpenPoset:
    """Named opens with an explicit inclusion order.

    The given relation is closed reflexively and transitively; antisymmetry,
    consistency of the order with the region descriptors, and existence of a
    top element are checked at construction.
    """

    opens: tuple[tuple[str, Region], ...]
    order: frozenset[tuple[str, str]]
    top: str

    @staticmethod
    def build(opens: Mapping[str, Region] | Sequence[tuple[str, Region]], leq: Iterable[tuple[str, str]]) -> "OpenPoset":
        if isinstance(opens, Mapping):
            entries = tuple(opens.items())
        else:
            entries = tuple(opens)
        names = [name for name, _ in entries]
        if len(set(names)) != len(names):
            raise ValueError("duplicate open names")
        if len(names) > MAX_OPENS:
            raise ValueError(f"poset exceeds the cap of {MAX_OPENS} opens")
        regions = dict(entries)
        dims = {len(b) for _, r in entries if r != "all" for b in r}
        if len(dims) > 1:
            raise ValueError("boxes of mixed dimensions")

        relation = {(a, b) for a, b in leq}
        for a, b in relation:
            if a not in regions or b not in regions:
                raise ValueError(f"relation mentions unknown open in {(a, b)}")
        for name in names:
            relation.add((name, name))
        # transitive closure
        changed = True
        while changed:
            changed = False
            for (a, b), (c, d) in itertools.product(tuple(relation), repeat=2):
                if b == c and (a, d) not in relation:
                    relation.add((a, d))
                    changed = True
        for a, b in relation:
            if a != b and (b, a) in relation:
                raise ValueError(f"order is not antisymmetric: {a} and {b}")
            if not region_contains(regions[b], regions[a]):
                raise ValueError(f"declared {a} <= {b} but regions disagree")
        tops = [
            name
            for name in names
            if all((other, name) in relation for other in names)
        ]
        if not tops:
            raise ValueError("poset has no top element")
        return OpenPoset(opens=entries, order=frozenset(relation), top=tops[0])

    def names(self) -> list[str]:
        return [name for name, _ in self.opens]

    def region(self, name: str) -> Region:
        for entry, region in self.opens:
            if entry == name:
                return region
        raise KeyError(name)

    def leq(self, a: str, b: str) -> bool:
        return (a, b) in self.order

    def pairs(self) -> list[tuple[str, str]]:
        """All strict order pairs (smaller, larger)."""
        return sorted((a, b) for a, b in self.order if a != b)


@dataclass(frozen=True)
class PresheafCDGA:
    """The forms complex over one shared ambient ring, assigned to every
    open; restriction maps are the identity on expressions with domain
    bookkeeping."""

    poset: OpenPoset
    ring: RingPresentation

    def restrict(self, form: DifferentialForm, source: str, target: str) -> DifferentialForm:
        if not self.poset.leq(target, source):
            raise ValueError(f"{target} is not below {source}")
        same_ring(form.ring, self.ring)
        return form

    def test_forms(self, coeff_degree: int = 1) -> list[DifferentialForm]:
        return spanning_forms(self.ring, coeff_degree)


@dataclass(frozen=True)
class LocalDerivationFamily:
    """One vector field per open, all over the shared ambient ring."""

    presheaf: PresheafCDGA
    fields: tuple[tuple[str, VectorField], ...]

    @staticmethod
    def build(presheaf: PresheafCDGA, assignment: Mapping[str, VectorField]) -> "LocalDerivationFamily":
        for name, field_ in assignment.items():
            same_ring(field_.ring, presheaf.ring)
        return LocalDerivationFamily(
            presheaf=presheaf,
            fields=tuple(sorted(assignment.items())),
        )

    @staticmethod
    def constant(presheaf: PresheafCDGA, field_: VectorField) -> "LocalDerivationFamily":
        return LocalDerivationFamily.build(
            presheaf, {name: field_ for name in presheaf.poset.names()}
        )

    def field(self, name: str) -> VectorField:
        for entry, field_ in self.fields:
            if entry == name:
                return field_
        raise KeyError(f"family has no component for open {name!r}")

    def defined_on_all_opens(self) -> bool:
        have = {name for name, _ in self.fields}
        return have == set(self.presheaf.poset.names())


def check_restriction_squares(
    presheaf: PresheafCDGA,
    family: LocalDerivationFamily,
    test_forms: Sequence[DifferentialForm] | None = None,
) -> bool:
    """For every inclusion V <= U and every test form, applying the U-instance
    of contraction / Lie derivative / d and then restricting must agree with
    restricting first and applying the V-instance, where agreement is decided
    on V's region."""
    if not family.defined_on_all_opens():
        raise ValueError("family must assign a field to every open")
    if test_forms is None:
        test_forms = presheaf.test_forms()
    dims = presheaf.ring.n
    for small, large in presheaf.poset.pairs():
        v_large = family.field(large)
        v_small = family.field(small)
        region = presheaf.poset.region(small)
        for form in test_forms:
            for op_large, op_small in (
                (lambda a: contract(v_large, a), lambda a: contract(v_small, a)),
                (lambda a: lie_derivative(v_large, a), lambda a: lie_derivative(v_small, a)),
                (exterior_derivative, exterior_derivative),
            ):
                upper = presheaf.restrict(op_large(form), large, small)
                lower = op_small(presheaf.restrict(form, large, small))
                ok, _ = forms_equal_on_region(upper, lower, region, dims)
                if not ok:
                    return False
    return True


def presheaf_cartan_verify(
    presheaf: PresheafCDGA,
    v_family: LocalDerivationFamily,
    w_family: LocalDerivationFamily,
    test_forms: Sequence[DifferentialForm] | None = None,
) -> dict[str, list[IdentityResult]]:
    """The five calculus identities, verified open by open; both families
    must first pass the restriction-square check."""
    if test_forms is None:
        test_forms = presheaf.test_forms()
    for family in (v_family, w_family):
        if not check_restriction_squares(presheaf, family, test_forms):
            raise IncompatibleFamily("family fails the restriction squares")
    report: dict[str, list[IdentityResult]] = {}
    for name in presheaf.poset.names():
        report[name] = verify_cartan(
            presheaf.ring, v_family.field(name), w_family.field(name), test_forms
        )
    return report


def restriction_squares_commute(presheaf: PresheafCDGA) -> bool:
    """Functoriality of restriction along every chain in the poset (identity
    maps with domain bookkeeping, so this checks the bookkeeping)."""
    poset = presheaf.poset
    probe = DifferentialForm.scalar(presheaf.ring, Const(1))
    for a, b in poset.pairs():
        for c in poset.names():
            if poset.leq(c, a):
                direct = presheaf.restrict(probe, b, c)
                composed = presheaf.restrict(presheaf.restrict(probe, b, a), a, c)
                if direct != composed:
                    return False
    return True


# ---------------------------------------------------------------------------
# Gluing and locality


def glue_derivations(
    presheaf: PresheafCDGA,
    cover: Sequence[str],
    locals_: Mapping[str, VectorField],
) -> VectorField:
    """Glue pairwise-compatible local fields on a cover of the top open.

    For polynomial coefficients, agreement on a nonempty open overlap forces
    global equality, so after the compatibility check any local
    representative is the unique glued field.
    """
    poset = presheaf.poset
    dims = presheaf.ring.n
    if not cover:
        raise ValueError("empty cover")
    for name in cover:
        if name not in poset.names():
            raise ValueError(f"unknown open {name!r}")
        if name not in locals_:
            raise ValueError(f"no local field for cover element {name!r}")
    top_region = poset.region(poset.top)
    union: list[Box] = []
    covers_all = False
    for name in cover:
        region = poset.region(name)
        if region == "all":
            covers_all = True
        else:
            union.extend(region)
    if not covers_all:
        if top_region == "all":
            raise ValueError("cover does not cover the top open")
        if not all(_box_contained_in_union(box, union) for box in top_region):
            raise ValueError("cover does not cover the top open")

    for a, b in itertools.combinations(cover, 2):
        overlap = region_intersection(poset.region(a), poset.region(b))
        if region_is_empty(overlap):
            continue
        va, vb = locals_[a], locals_[b]
        same_ring(va.ring, presheaf.ring)
        same_ring(vb.ring, presheaf.ring)
        for ca, cb in zip(va.coefficients, vb.coefficients):
            ok, witness = exprs_equal_on_region(ca, cb, overlap, dims)
            if not ok:
                raise Incompatible((a, b), witness)
    return locals_[cover[0]]


def restrict_global_field(
    presheaf: PresheafCDGA, field_: VectorField
) -> LocalDerivationFamily:
    """The family obtained by restricting one global field to every open."""
    return LocalDerivationFamily.constant(presheaf, field_)


def locality_witness(v: VectorField, f: SmoothExpr, box: Sequence[Sequence]) -> bool:
    """If f vanishes identically on the box then so does v(f).

    On the polynomial fragment a polynomial vanishing on an open box is zero,
    so the hypothesis forces f = 0 and the conclusion follows symbolically.
    """
    from .calculus import vf_apply

    _as_box(box)  # validates the box descriptor
    for c in v.coefficients:
        if not is_polynomial(c):
            raise ValueError("locality check expects polynomial coefficients")
    if not is_polynomial(f):
        raise ValueError("locality check expects a polynomial")
    if not expr_to_poly(f).is_zero():
        return True  # antecedent fails; implication holds vacuously
    return expr_to_poly(vf_apply(v, f)).is_zero()


def partition_glue_demo(
    cover: Sequence[Sequence[Sequence]],
    locals_: Sequence[SmoothExpr],
) -> SmoothExpr:
    """Blend two locally given functions on an interval cover of the line.

    With boxes (l1, r1), (l2, r2) overlapping in (l2, r1), returns
    rho * a1 + (1 - rho) * a2 for a bump rho that is 1 left of the overlap
    and 0 right of it, after checking the locals agree on the overlap.
    """
    if len(cover) != 2 or len(locals_) != 2:
        raise ValueError("expected exactly two boxes and two locals")
    box1, box2 = _as_box(cover[0]), _as_box(cover[1])
    if len(box1) != 1 or len(box2) != 1:
        raise ValueError("the demo covers an interval in one dimension")
    (l1, r1), (l2, r2) = box1[0], box2[0]
    if l2 < l1:
        (l1, r1), (l2, r2) = (l2, r2), (l1, r1)
        locals_ = (locals_[1], locals_[0])
    if not (l1 <= l2 < r1 <= r2):
        raise ValueError("boxes must overlap in an interval")
    overlap: Region = (((l2, r1),),)
    a1, a2 = normalize(locals_[0]), normalize(locals_[1])
    ok, witness = exprs_equal_on_region(a1, a2, overlap, 1)
    if not ok:
        raise Incompatible(("left", "right"), witness)
    center = (l1 + l2) / 2
    r_inner = l2 - center
    r_outer = r1 - center
    if r_inner <= 0:
        # boxes share the left endpoint; any positive inner radius short of
        # the overlap's right end works
        r_inner = (r1 - l2) / 4
        r_outer = (r1 - l2) / 2
    rho = make_bump((center,), r_inner, r_outer)
    one_minus = Const(1) - rho
    return normalize(rho * a1 + one_minus * a2)
