"""Finitely presented rings of smooth functions.

A presentation is a generator count plus a (possibly empty) polynomial ideal.
Ideal membership and canonical coset representatives go through a reduced
Groebner basis in graded-lexicographic order, computed once per ideal and
cached behind a lock.  Membership answers carry exact cofactor certificates
over the *original* generators, so every positive answer can be re-checked
by plain arithmetic.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import NonPolynomial, RingMismatch
from .expr import (
    SmoothExpr,
    Const,
    Gen,
    Poly,
    expr_to_poly,
    is_polynomial,
    max_gen_index,
    normalize,
    poly_to_expr,
    substitute,
)
from .expr import _atom_of, _intern_atom  # interned atom table

# Pure polynomials over the generators are handled as exponent-vector dicts.
Vec = dict[tuple[int, ...], Fraction]


def poly_to_vec(poly: Poly, n: int) -> Vec:
    vec: Vec = {}
    for mono, coeff in poly.terms.items():
        exps = [0] * n
        for aid, power in mono:
            atom = _atom_of(aid)
            if not isinstance(atom, Gen):
                raise NonPolynomial(f"{atom!r} is not a generator")
            if atom.index >= n:
                raise ValueError(f"generator {atom.index} out of range for {n} generators")
            exps[atom.index] = power
        vec[tuple(exps)] = coeff
    return vec


def vec_to_poly(vec: Vec) -> Poly:
    terms = {}
    for exps, coeff in vec.items():
        mono = tuple((_intern_atom(Gen(i)), e) for i, e in enumerate(exps) if e)
        terms[tuple(sorted(mono))] = coeff
    return Poly(terms)


def _to_vec(e: SmoothExpr, n: int) -> Vec:
    return poly_to_vec(expr_to_poly(e), n)


def _from_vec(vec: Vec, n: int) -> SmoothExpr:
    return poly_to_expr(vec_to_poly(vec))


def _grlex_key(exps: tuple[int, ...]) -> tuple:
    return (sum(exps), exps)


def _leading(vec: Vec) -> tuple[tuple[int, ...], Fraction]:
    lm = max(vec, key=_grlex_key)
    return lm, vec[lm]


def _divides(m1: tuple[int, ...], m2: tuple[int, ...]) -> bool:
    return all(a <= b for a, b in zip(m1, m2))


def _mono_div(m1: tuple[int, ...], m2: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(a - b for a, b in zip(m1, m2))


def _mono_lcm(m1: tuple[int, ...], m2: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(max(a, b) for a, b in zip(m1, m2))


def _vec_add(v1: Vec, v2: Vec) -> Vec:
    out = dict(v1)
    for m, c in v2.items():
        acc = out.get(m, Fraction(0)) + c
        if acc:
            out[m] = acc
        else:
            out.pop(m, None)
    return out


def _vec_scale_mono(v: Vec, mono: tuple[int, ...], coeff: Fraction) -> Vec:
    if not coeff:
        return {}
    return {tuple(a + b for a, b in zip(m, mono)): c * coeff for m, c in v.items()}


def _vec_mul(v1: Vec, v2: Vec) -> Vec:
    out: Vec = {}
    for m1, c1 in v1.items():
        for m2, c2 in v2.items():
            m = tuple(a + b for a, b in zip(m1, m2))
            acc = out.get(m, Fraction(0)) + c1 * c2
            if acc:
                out[m] = acc
            else:
                out.pop(m, None)
    return out


def _divmod_basis(f: Vec, basis: Sequence[Vec]) -> tuple[list[Vec], Vec]:
    """Multivariate division: f = sum(q_i * basis_i) + r, no term of r
    divisible by any leading monomial of the basis."""
    quotients: list[Vec] = [{} for _ in basis]
    remainder: Vec = {}
    work = dict(f)
    leads = [_leading(b) for b in basis]
    while work:
        mono = max(work, key=_grlex_key)
        coeff = work[mono]
        for i, (lm, lc) in enumerate(leads):
            if _divides(lm, mono):
                shift = _mono_div(mono, lm)
                factor = coeff / lc
                quotients[i] = _vec_add(quotients[i], {shift: factor})
                # cancels the leading term; anything it spawns is lower
                work = _vec_add(work, _vec_scale_mono(basis[i], shift, -factor))
                break
        else:
            del work[mono]
            remainder[mono] = coeff
    return quotients, remainder


@dataclass
class _Groebner:
    """Reduced Groebner basis with cofactor lineage over the input generators."""

    n: int
    basis: list[Vec]
    lineage: list[list[Vec]]  # basis[i] == sum_j lineage[i][j] * input[j]


def _buchberger(inputs: Sequence[Vec], n: int) -> _Groebner:
    basis: list[Vec] = []
    lineage: list[list[Vec]] = []
    for j, f in enumerate(inputs):
        if not f:
            continue
        basis.append(dict(f))
        lineage.append([{(0,) * n: Fraction(1)} if i == j else {} for i in range(len(inputs))])

    pairs = {(i, j) for i in range(len(basis)) for j in range(i + 1, len(basis))}
    while pairs:
        i, j = min(pairs)
        pairs.discard((i, j))
        lm_i, lc_i = _leading(basis[i])
        lm_j, lc_j = _leading(basis[j])
        lcm = _mono_lcm(lm_i, lm_j)
        # product criterion: coprime leading monomials reduce to zero
        if lcm == tuple(a + b for a, b in zip(lm_i, lm_j)):
            continue
        # chain criterion
        skip = False
        for k in range(len(basis)):
            if k in (i, j):
                continue
            lm_k, _ = _leading(basis[k])
            if _divides(lm_k, lcm):
                p1 = (min(i, k), max(i, k))
                p2 = (min(j, k), max(j, k))
                if p1 not in pairs and p2 not in pairs:
                    skip = True
                    break
        if skip:
            continue
        shift_i = _mono_div(lcm, lm_i)
        shift_j = _mono_div(lcm, lm_j)
        s_poly = _vec_add(
            _vec_scale_mono(basis[i], shift_i, Fraction(1) / lc_i),
            _vec_scale_mono(basis[j], shift_j, Fraction(-1) / lc_j),
        )
        s_lineage = [
            _vec_add(
                _vec_scale_mono(lin_i, shift_i, Fraction(1) / lc_i),
                _vec_scale_mono(lin_j, shift_j, Fraction(-1) / lc_j),
            )
            for lin_i, lin_j in zip(lineage[i], lineage[j])
        ]
        quotients, remainder = _divmod_basis(s_poly, basis)
        if not remainder:
            continue
        rem_lineage = list(s_lineage)
        for q, lin in zip(quotients, lineage):
            if not q:
                continue
            for idx in range(len(rem_lineage)):
                rem_lineage[idx] = _vec_add(rem_lineage[idx], _vec_mul({m: -c for m, c in q.items()}, lin[idx]))
        new_index = len(basis)
        basis.append(remainder)
        lineage.append(rem_lineage)
        pairs.update((k, new_index) for k in range(new_index))

    # minimalize: drop elements whose leading monomial another one divides
    keep = []
    for i, g in enumerate(basis):
        lm_i, _ = _leading(g)
        if any(
            _divides(_leading(basis[j])[0], lm_i)
            for j in range(len(basis))
            if j != i and (j in keep or j > i)
        ):
            continue
        keep.append(i)
    basis = [basis[i] for i in keep]
    lineage = [lineage[i] for i in keep]

    # interreduce to the unique reduced basis, keeping lineage in step
    changed = True
    while changed:
        changed = False
        for i in range(len(basis)):
            others = basis[:i] + basis[i + 1 :]
            other_lin = lineage[:i] + lineage[i + 1 :]
            quotients, remainder = _divmod_basis(basis[i], others)
            if remainder != basis[i]:
                changed = True
                new_lin = list(lineage[i])
                for q, lin in zip(quotients, other_lin):
                    if not q:
                        continue
                    for idx in range(len(new_lin)):
                        new_lin[idx] = _vec_add(new_lin[idx], _vec_mul({m: -c for m, c in q.items()}, lin[idx]))
                basis[i] = remainder
                lineage[i] = new_lin

    # monic, deterministic order
    order = sorted(range(len(basis)), key=lambda i: _grlex_key(_leading(basis[i])[0]))
    basis = [basis[i] for i in order]
    lineage = [lineage[i] for i in order]
    for i, g in enumerate(basis):
        _, lc = _leading(g)
        basis[i] = {m: c / lc for m, c in g.items()}
        lineage[i] = [{m: c / lc for m, c in lin.items()} for lin in lineage[i]]
    return _Groebner(n=n, basis=basis, lineage=lineage)


# ---------------------------------------------------------------------------
# Presentations


@dataclass(frozen=True)
class IdealPresentation:
    """A polynomial ideal given by generators (graded-lex order is fixed).

    `dense_interior` marks the zero ideal of a closed set with dense
    interior; it carries no generators and only gates the operations that
    are specific to that situation.
    """

    generators: tuple[SmoothExpr, ...] = ()
    dense_interior: bool = False

    def __post_init__(self):
        normalized = []
        for g in self.generators:
            if not is_polynomial(g):
                raise NonPolynomial(f"ideal generator {g!r} is not polynomial")
            ng = normalize(g)
            if ng == Const(0):
                raise ValueError("ideal generators must be nonzero")
            normalized.append(ng)
        object.__setattr__(self, "generators", tuple(normalized))
        if self.dense_interior and self.generators:
            raise ValueError("a dense-interior ideal is the zero ideal")

    @property
    def is_zero(self) -> bool:
        return not self.generators

    def max_generator_index(self) -> int:
        return max((max_gen_index(g) for g in self.generators), default=-1)


@dataclass(frozen=True)
class RingPresentation:
    """n generators, optional display names, and a polynomial ideal."""

    n: int
    names: tuple[str, ...] | None = field(default=None, compare=False)
    ideal: IdealPresentation = field(default_factory=IdealPresentation)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("generator count must be non-negative")
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))
            if len(self.names) != self.n:
                raise ValueError("need one name per generator")
        if self.ideal.max_generator_index() >= self.n:
            raise ValueError("ideal generators use out-of-range generators")

    @property
    def is_free(self) -> bool:
        return self.ideal.is_zero

    def name_of(self, index: int) -> str:
        if self.names is not None:
            return self.names[index]
        return f"x{index}"

    def contains_expr(self, e: SmoothExpr) -> bool:
        return max_gen_index(e) < self.n


def free_ring(n: int, names: Sequence[str] | None = None) -> RingPresentation:
    return RingPresentation(n=n, names=tuple(names) if names else None)


def quotient_ring(
    n: int,
    ideal_generators: Sequence[SmoothExpr],
    names: Sequence[str] | None = None,
    dense_interior: bool = False,
) -> RingPresentation:
    return RingPresentation(
        n=n,
        names=tuple(names) if names else None,
        ideal=IdealPresentation(tuple(ideal_generators), dense_interior=dense_interior),
    )


def same_ring(a: RingPresentation, b: RingPresentation) -> None:
    if a != b:
        raise RingMismatch(f"operands live over different rings: {a!r} vs {b!r}")


# Groebner bases are computed lazily, once per presentation.
_GB_LOCK = threading.Lock()
_GB_CACHE: dict[tuple[IdealPresentation, int], _Groebner] = {}


def _groebner_for(ideal: IdealPresentation, n: int) -> _Groebner:
    key = (ideal, n)
    cached = _GB_CACHE.get(key)
    if cached is not None:
        return cached
    with _GB_LOCK:
        cached = _GB_CACHE.get(key)
        if cached is None:
            vecs = [_to_vec(g, n) for g in ideal.generators]
            cached = _buchberger(vecs, n)
            _GB_CACHE[key] = cached
    return cached


def groebner_basis(ideal: IdealPresentation, n: int | None = None) -> list[SmoothExpr]:
    """The reduced, monic Groebner basis (graded-lex)."""
    if n is None:
        n = ideal.max_generator_index() + 1
    gb = _groebner_for(ideal, n)
    return [_from_vec(v, n) for v in gb.basis]


def _gen_count(p: SmoothExpr, ideal: IdealPresentation) -> int:
    return max(max_gen_index(p), ideal.max_generator_index()) + 1


def ideal_member(
    p: SmoothExpr, ideal: IdealPresentation, n: int | None = None
) -> tuple[bool, list[SmoothExpr] | None]:
    """Decide p in I; on success return cofactors over the ideal's own
    generators with p = sum(c_j * g_j) exactly."""
    if not is_polynomial(p):
        raise NonPolynomial("ideal membership is defined for polynomials")
    if n is None:
        n = _gen_count(p, ideal)
    if ideal.is_zero:
        if expr_to_poly(p).is_zero():
            return True, []
        return False, None
    gb = _groebner_for(ideal, n)
    quotients, remainder = _divmod_basis(_to_vec(p, n), gb.basis)
    if remainder:
        return False, None
    count = len(ideal.generators)
    cofactors: list[Vec] = [{} for _ in range(count)]
    for q, lin in zip(quotients, gb.lineage):
        if not q:
            continue
        for j in range(count):
            if lin[j]:
                cofactors[j] = _vec_add(cofactors[j], _vec_mul(q, lin[j]))
    return True, [_from_vec(c, n) for c in cofactors]


def reduce_mod_ideal(p: SmoothExpr, ideal: IdealPresentation, n: int | None = None) -> SmoothExpr:
    """The unique normal form of p modulo the ideal's Groebner basis."""
    if not is_polynomial(p):
        raise NonPolynomial("reduction is defined for polynomials")
    if n is None:
        n = _gen_count(p, ideal)
    if ideal.is_zero:
        return normalize(p)
    gb = _groebner_for(ideal, n)
    _, remainder = _divmod_basis(_to_vec(p, n), gb.basis)
    return _from_vec(remainder, n)


def reduce_in_ring(e: SmoothExpr, ring: RingPresentation) -> SmoothExpr:
    """Normalize, and reduce mod the ring ideal when there is one (for
    non-polynomial expressions the polynomial part cannot be split off, so
    they are only normalized)."""
    if ring.ideal.is_zero or not is_polynomial(e):
        return normalize(e)
    return reduce_mod_ideal(e, ring.ideal, ring.n)


def reduce_poly_in_ring(poly: Poly, ring: RingPresentation) -> Poly:
    """Same as reduce_in_ring but staying in polynomial representation."""
    if ring.ideal.is_zero or not poly.is_polynomial():
        return poly
    gb = _groebner_for(ring.ideal, ring.n)
    _, remainder = _divmod_basis(poly_to_vec(poly, ring.n), gb.basis)
    return vec_to_poly(remainder)


# ---------------------------------------------------------------------------
# Ring maps as substitutions


@dataclass(frozen=True)
class RingHom:
    """A map of presented rings: generator images, checked to preserve the ideal."""

    source: RingPresentation
    target: RingPresentation
    images: tuple[SmoothExpr, ...]

    def __post_init__(self):
        if len(self.images) != self.source.n:
            raise ValueError("need one image per source generator")
        images = tuple(normalize(img) for img in self.images)
        object.__setattr__(self, "images", images)
        for img in images:
            if not self.target.contains_expr(img):
                raise ValueError(f"image {img!r} uses generators outside the target ring")
        for g in self.source.ideal.generators:
            pushed = substitute(g, images)
            ok, _ = ideal_member(pushed, self.target.ideal, self.target.n)
            if not ok:
                raise ValueError(
                    "map does not preserve the ideal: "
                    f"an ideal generator lands outside the target ideal ({pushed!r})"
                )

    @staticmethod
    def identity(ring: RingPresentation) -> "RingHom":
        return RingHom(ring, ring, tuple(Gen(i) for i in range(ring.n)))


def hom_apply(f: RingHom, e: SmoothExpr) -> SmoothExpr:
    """Apply the substitution map, renormalizing and reducing in the target."""
    if not f.source.contains_expr(e):
        raise RingMismatch("expression uses generators outside the source ring")
    return reduce_in_ring(substitute(e, f.images), f.target)


def hom_compose(outer: RingHom, inner: RingHom) -> RingHom:
    if inner.target != outer.source:
        raise RingMismatch("maps do not compose")
    return RingHom(inner.source, outer.target, tuple(hom_apply(outer, img) for img in inner.images))
