"""Smooth-expression kernel.

Expressions are trees over ring generators, exact rational constants and
registered smooth primitives.  Every expression has a canonical normal form:
a sparse polynomial over the rationals in *atoms*, where an atom is either a
generator or a primitive call whose arguments are themselves normal forms.
Structural equality of normal forms decides symbolic equality; numeric
evaluation is never used as a semantic fallback.

Values are immutable; all operations are pure and thread-safe.  Two mutable
corners exist, both behind locks: the primitive registry materializes members
of its built-in families on first use, and atoms are interned into a global
table so that polynomial arithmetic runs on plain integer keys.
"""
from __future__ import annotations

import math
import re
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key, lru_cache
from typing import Callable, Iterator, Sequence

from .errors import (
    BadRadii,
    ExponentOverflow,
    NonPolynomial,
    NotDivisible,
    UnknownPrimitive,
)

Rational = int | Fraction


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


# ---------------------------------------------------------------------------
# Expression nodes


class SmoothExpr:
    """Base class for expression tree nodes.

    Arithmetic operators build raw trees; call :func:`normalize` (or any
    operation that normalizes internally) to reach the canonical form.
    Hashes are memoized per node: trees are deep and get hashed constantly
    by the normal-form cache.
    """

    def __hash__(self):
        cached = self.__dict__.get("_hash")
        if cached is None:
            cached = self._compute_hash()
            object.__setattr__(self, "_hash", cached)
        return cached

    def _compute_hash(self) -> int:
        raise NotImplementedError

    def __add__(self, other):
        return Sum((self, _coerce(other)))

    def __radd__(self, other):
        return Sum((_coerce(other), self))

    def __sub__(self, other):
        return Sum((self, Product((Const(-1), _coerce(other)))))

    def __rsub__(self, other):
        return Sum((_coerce(other), Product((Const(-1), self))))

    def __mul__(self, other):
        return Product((self, _coerce(other)))

    def __rmul__(self, other):
        return Product((_coerce(other), self))

    def __pow__(self, exponent):
        return IntPow(self, exponent)

    def __neg__(self):
        return Product((Const(-1), self))


def _coerce(value) -> SmoothExpr:
    if isinstance(value, SmoothExpr):
        return value
    return Const(_as_fraction(value))


@dataclass(frozen=True)
class Const(SmoothExpr):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", _as_fraction(self.value))

    __hash__ = SmoothExpr.__hash__

    def _compute_hash(self):
        return hash((Const, self.value))


@dataclass(frozen=True)
class Gen(SmoothExpr):
    index: int

    def __post_init__(self):
        if not isinstance(self.index, int) or self.index < 0:
            raise ValueError(f"generator index must be a non-negative int, got {self.index!r}")

    __hash__ = SmoothExpr.__hash__

    def _compute_hash(self):
        return hash((Gen, self.index))


@dataclass(frozen=True)
class Sum(SmoothExpr):
    terms: tuple[SmoothExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    __hash__ = SmoothExpr.__hash__

    def _compute_hash(self):
        return hash((Sum, self.terms))


@dataclass(frozen=True)
class Product(SmoothExpr):
    factors: tuple[SmoothExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    __hash__ = SmoothExpr.__hash__

    def _compute_hash(self):
        return hash((Product, self.factors))


@dataclass(frozen=True)
class IntPow(SmoothExpr):
    base: SmoothExpr
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise ValueError(f"exponent must be a non-negative int, got {self.exponent!r}")

    __hash__ = SmoothExpr.__hash__

    def _compute_hash(self):
        return hash((IntPow, self.base, self.exponent))


@dataclass(frozen=True)
class Prim(SmoothExpr):
    name: str
    args: tuple[SmoothExpr, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))

    __hash__ = SmoothExpr.__hash__

    def _compute_hash(self):
        return hash((Prim, self.name, self.args))


ZERO = Const(0)
ONE = Const(1)


def gens(count: int) -> tuple[Gen, ...]:
    """Convenience: the first `count` generators."""
    return tuple(Gen(i) for i in range(count))


# ---------------------------------------------------------------------------
# Primitive registry


@dataclass(frozen=True)
class Primitive:
    """A registered smooth primitive.

    `derivatives[j]` is the partial derivative with respect to argument slot
    j, written as an expression template in which `Gen(k)` stands for the
    k-th argument.  Templates may call other registered primitives only.
    `sample_point` draws points where finite differencing the evaluator is
    numerically safe (used by the test suite).
    """

    name: str
    arity: int
    evaluate: Callable[..., float]
    derivatives: tuple[SmoothExpr, ...]
    sample_point: Callable[..., tuple[float, ...]]


def _beta_coeffs(k: int) -> dict[int, int]:
    # beta_k(t) = p_k(1/t) * exp(-1/t) on t > 0, with p_0 = 1 and
    # p_{k+1}(u) = u^2 * (p_k(u) - p_k'(u)).
    p = {0: 1}
    for _ in range(k):
        nxt: dict[int, int] = {}
        for d, c in p.items():
            nxt[d + 2] = nxt.get(d + 2, 0) + c
            if d > 0:
                nxt[d + 1] = nxt.get(d + 1, 0) - c * d
        p = {d: c for d, c in nxt.items() if c != 0}
    return p


def _beta_evaluator(coeffs: dict[int, int]) -> Callable[[float], float]:
    def evaluate(t: float) -> float:
        if t <= 0.0:
            return 0.0
        inv = 1.0 / t
        if inv > 700.0:
            # exp(-inv) underflows far faster than any p_k(inv) grows
            return 0.0
        return math.exp(-inv) * sum(c * inv**d for d, c in coeffs.items())

    return evaluate


def _beta0_value(t: float) -> float:
    return 0.0 if t <= 0.0 else (0.0 if 1.0 / t > 700.0 else math.exp(-1.0 / t))


def _step_evaluate(u: float, v: float) -> float:
    bu, bv = _beta0_value(u), _beta0_value(v)
    denom = bu + bv
    return bu / denom if denom > 0.0 else 0.0


# The smooth step S(u, v) = beta0(u) / (beta0(u) + beta0(v)) keeps the
# expression language division-free, but its partial derivatives must be
# stored so that repeated symbolic differentiation commutes.  Expanding them
# in ad-hoc quotient primitives breaks that (the normal form cannot see
# relations between quotient powers), so the registry instead names the whole
# jet family Sjet{j}_{k} = d^j/du^j d^k/dv^k S as opaque primitives whose
# chain-rule expansion is symmetric by construction.  Their exact numeric
# evaluators come from a tiny formal calculus in the symbols
# A_r = beta_r(u), B_r = beta_r(v) and R = 1/(beta0(u) + beta0(v)):
#     d/du: A_r -> A_{r+1},  B_r -> 0,  R -> -A_1 R^2
# and symmetrically for d/dv.

_JetMono = tuple[tuple[tuple[str, int], int], ...]
_JetPoly = dict[_JetMono, Fraction]


def _jet_mul_var(poly: _JetPoly, var: tuple[str, int], power: int = 1) -> _JetPoly:
    out: _JetPoly = {}
    for mono, coeff in poly.items():
        entries = dict(mono)
        entries[var] = entries.get(var, 0) + power
        out[tuple(sorted(entries.items()))] = coeff
    return out


def _jet_add(p1: _JetPoly, p2: _JetPoly) -> _JetPoly:
    out = dict(p1)
    for mono, coeff in p2.items():
        acc = out.get(mono, Fraction(0)) + coeff
        if acc:
            out[mono] = acc
        else:
            out.pop(mono, None)
    return out


def _jet_scale(poly: _JetPoly, value: Fraction) -> _JetPoly:
    return {m: c * value for m, c in poly.items()}


def _jet_diff(poly: _JetPoly, side: str) -> _JetPoly:
    result: _JetPoly = {}
    for mono, coeff in poly.items():
        for pos, (var, exp) in enumerate(mono):
            kind, order = var
            rest = list(mono)
            if exp > 1:
                rest[pos] = (var, exp - 1)
            else:
                del rest[pos]
            base: _JetPoly = {tuple(rest): coeff * exp}
            if kind == "R":
                # dR = -X_1 R^2 with X the differentiated side
                step = _jet_mul_var(_jet_mul_var(base, (side, 1)), ("R", 0), 2)
                result = _jet_add(result, _jet_scale(step, Fraction(-1)))
            elif kind == side:
                result = _jet_add(result, _jet_mul_var(base, (side, order + 1)))
    return result


@lru_cache(maxsize=None)
def _sjet_formula(j: int, k: int) -> tuple[tuple[_JetMono, Fraction], ...]:
    if j == 0 and k == 0:
        poly: _JetPoly = {((("A", 0), 1), (("R", 0), 1)): Fraction(1)}
    elif j > 0:
        poly = _jet_diff(dict(_sjet_formula(j - 1, k)), "A")
    else:
        poly = _jet_diff(dict(_sjet_formula(0, k - 1)), "B")
    return tuple(sorted(poly.items()))


@lru_cache(maxsize=None)
def _beta_value_fn(r: int) -> Callable[[float], float]:
    return _beta_evaluator(_beta_coeffs(r))


def _sjet_evaluator(j: int, k: int) -> Callable[[float, float], float]:
    formula = _sjet_formula(j, k)

    def evaluate(u: float, v: float) -> float:
        denom = _beta0_value(u) + _beta0_value(v)
        if denom < 1e-150:
            # at (u <= 0, v <= 0) the step is undefined; extend by 0
            return 0.0
        recip = 1.0 / denom
        total = 0.0
        for mono, coeff in formula:
            value = float(coeff)
            for (kind, order), exp in mono:
                if kind == "A":
                    value *= _beta_value_fn(order)(u) ** exp
                elif kind == "B":
                    value *= _beta_value_fn(order)(v) ** exp
                else:
                    value *= recip**exp
            total += value
        return total

    return evaluate


def _beta_sample(rng) -> tuple[float, ...]:
    # higher family members oscillate steeply just right of 0, where central
    # differences of the evaluators lose absolute accuracy; keep clear
    if rng.random() < 0.4:
        return (rng.uniform(-2.0, -0.05),)
    return (rng.uniform(0.5, 2.0),)


def _pair_sample(rng) -> tuple[float, ...]:
    # keep beta0(u) + beta0(v) bounded away from 0
    while True:
        u, v = rng.uniform(-1.5, 2.0), rng.uniform(-1.5, 2.0)
        if max(u, v) >= 0.3:
            return (u, v)


class PrimitiveRegistry:
    """Name-indexed registry of smooth primitives, closed under differentiation.

    The `beta{k}` and `Sjet{j}_{k}` families are built on demand: asking for
    a family member registers it (and nothing else).  User primitives may be
    added with :meth:`register` provided their derivative templates resolve.
    """

    def __init__(self):
        self._entries: dict[str, Primitive] = {}
        self._lock = threading.Lock()
        self._install_builtins()

    def _install_builtins(self) -> None:
        self._entries["beta0"] = self._make_beta(0)
        self._entries["S"] = Primitive(
            name="S",
            arity=2,
            evaluate=_step_evaluate,
            derivatives=(
                Prim("Sjet1_0", (Gen(0), Gen(1))),
                Prim("Sjet0_1", (Gen(0), Gen(1))),
            ),
            sample_point=_pair_sample,
        )

    @staticmethod
    def _make_beta(k: int) -> Primitive:
        return Primitive(
            name=f"beta{k}",
            arity=1,
            evaluate=_beta_evaluator(_beta_coeffs(k)),
            derivatives=(Prim(f"beta{k + 1}", (Gen(0),)),),
            sample_point=_beta_sample,
        )

    @staticmethod
    def _make_sjet(j: int, k: int) -> Primitive:
        return Primitive(
            name=f"Sjet{j}_{k}",
            arity=2,
            evaluate=_sjet_evaluator(j, k),
            derivatives=(
                Prim(f"Sjet{j + 1}_{k}", (Gen(0), Gen(1))),
                Prim(f"Sjet{j}_{k + 1}", (Gen(0), Gen(1))),
            ),
            sample_point=_pair_sample,
        )

    def register(self, prim: Primitive) -> None:
        with self._lock:
            if prim.name in self._entries:
                raise ValueError(f"primitive {prim.name!r} already registered")
            self._entries[prim.name] = prim

    def get(self, name: str) -> Primitive:
        entry = self._entries.get(name)
        if entry is not None:
            return entry
        with self._lock:
            entry = self._entries.get(name)
            if entry is not None:
                return entry
            match = re.fullmatch(r"beta(\d+)", name)
            if match:
                entry = self._make_beta(int(match.group(1)))
            else:
                match = re.fullmatch(r"Sjet(\d+)_(\d+)", name)
                if match:
                    entry = self._make_sjet(int(match.group(1)), int(match.group(2)))
            if entry is None:
                raise UnknownPrimitive(f"unknown primitive {name!r}")
            self._entries[name] = entry
            return entry

    def __contains__(self, name: str) -> bool:
        try:
            self.get(name)
        except UnknownPrimitive:
            return False
        return True

    def names(self) -> list[str]:
        with self._lock:
            return sorted(self._entries)


REGISTRY = PrimitiveRegistry()


# ---------------------------------------------------------------------------
# Normal form: sparse polynomial in atoms
#
# Atoms (generators and primitive calls in canonical form) are interned into
# a global table; a monomial is a tuple of (atom id, exponent) pairs sorted
# by id, so the inner arithmetic works on plain integer keys.  The semantic
# atom order (generator index, then primitive name, then arguments) is used
# only when a canonical tree is built.

Mono = tuple[tuple[int, int], ...]

_ATOM_LOCK = threading.Lock()
_ATOM_IDS: dict[SmoothExpr, int] = {}
_ATOMS: list[SmoothExpr] = []
_ATOM_IS_GEN: list[bool] = []


def _intern_atom(a: SmoothExpr) -> int:
    aid = _ATOM_IDS.get(a)
    if aid is not None:
        return aid
    with _ATOM_LOCK:
        aid = _ATOM_IDS.get(a)
        if aid is None:
            aid = len(_ATOMS)
            _ATOMS.append(a)
            _ATOM_IS_GEN.append(isinstance(a, Gen))
            _ATOM_IDS[a] = aid
    return aid


def _atom_of(aid: int) -> SmoothExpr:
    return _ATOMS[aid]


_DEGREE_BOUND = 64


def degree_bound() -> int:
    return _DEGREE_BOUND


def set_degree_bound(bound: int) -> None:
    global _DEGREE_BOUND
    if bound < 1:
        raise ValueError("degree bound must be positive")
    _DEGREE_BOUND = bound


@contextmanager
def degree_limit(bound: int) -> Iterator[None]:
    global _DEGREE_BOUND
    previous = _DEGREE_BOUND
    set_degree_bound(bound)
    try:
        yield
    finally:
        _DEGREE_BOUND = previous


@lru_cache(maxsize=None)
def _expr_key(e: SmoothExpr) -> tuple:
    """Total deterministic order key on canonical expressions."""
    if isinstance(e, Const):
        return (0, e.value.numerator, e.value.denominator)
    if isinstance(e, Gen):
        return (1, e.index)
    if isinstance(e, Prim):
        return (2, e.name, tuple(_expr_key(a) for a in e.args))
    if isinstance(e, IntPow):
        return (3, _expr_key(e.base), e.exponent)
    if isinstance(e, Product):
        return (4, tuple(_expr_key(f) for f in e.factors))
    if isinstance(e, Sum):
        return (5, tuple(_expr_key(t) for t in e.terms))
    raise TypeError(f"not a SmoothExpr: {e!r}")


@lru_cache(maxsize=None)
def _atom_sort_key(aid: int) -> tuple:
    return _expr_key(_ATOMS[aid])


def _mono_degree(mono: Mono) -> int:
    return sum(e for _, e in mono)


def _mono_mul(m1: Mono, m2: Mono) -> Mono:
    if not m1:
        return m2
    if not m2:
        return m1
    merged: list[tuple[int, int]] = []
    i = j = 0
    len1, len2 = len(m1), len(m2)
    while i < len1 and j < len2:
        a1, e1 = m1[i]
        a2, e2 = m2[j]
        if a1 == a2:
            merged.append((a1, e1 + e2))
            i += 1
            j += 1
        elif a1 < a2:
            merged.append(m1[i])
            i += 1
        else:
            merged.append(m2[j])
            j += 1
    merged.extend(m1[i:])
    merged.extend(m2[j:])
    return tuple(merged)


def _mono_cmp(m1: Mono, m2: Mono) -> int:
    """Graded lexicographic order on monomials; earlier atoms weigh more."""
    d1, d2 = _mono_degree(m1), _mono_degree(m2)
    if d1 != d2:
        return -1 if d1 < d2 else 1
    s1 = sorted(((_atom_sort_key(a), e) for a, e in m1))
    s2 = sorted(((_atom_sort_key(a), e) for a, e in m2))
    i = 0
    while i < len(s1) and i < len(s2):
        k1, e1 = s1[i]
        k2, e2 = s2[i]
        if k1 != k2:
            # whichever monomial actually contains the earlier atom is larger
            return 1 if k1 < k2 else -1
        if e1 != e2:
            return 1 if e1 > e2 else -1
        i += 1
    if len(s1) != len(s2):
        return 1 if len(s1) > len(s2) else -1
    return 0


_MONO_SORT_KEY = cmp_to_key(_mono_cmp)


class Poly:
    """Sparse polynomial over Q in interned atoms.  Immutable by convention."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict[Mono, Fraction]):
        self.terms = terms

    @staticmethod
    def zero() -> "Poly":
        return Poly({})

    @staticmethod
    def const(value: Fraction) -> "Poly":
        return Poly({(): value}) if value else Poly({})

    @staticmethod
    def atom(a: SmoothExpr) -> "Poly":
        return Poly({((_intern_atom(a), 1),): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __add__(self, other: "Poly") -> "Poly":
        if not self.terms:
            return other
        if not other.terms:
            return self
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            acc = terms.get(mono)
            if acc is None:
                terms[mono] = coeff
            else:
                acc += coeff
                if acc:
                    terms[mono] = acc
                else:
                    del terms[mono]
        return Poly(terms)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, value: Fraction) -> "Poly":
        if not value:
            return Poly({})
        return Poly({m: c * value for m, c in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.terms or not other.terms:
            return Poly({})
        bound = _DEGREE_BOUND
        terms: dict[Mono, Fraction] = {}
        for m1, c1 in self.terms.items():
            d1 = _mono_degree(m1)
            for m2, c2 in other.terms.items():
                if d1 + _mono_degree(m2) > bound:
                    raise ExponentOverflow(
                        f"monomial degree {d1 + _mono_degree(m2)} exceeds bound {bound}"
                    )
                mono = _mono_mul(m1, m2)
                coeff = c1 * c2
                acc = terms.get(mono)
                if acc is None:
                    terms[mono] = coeff
                else:
                    acc += coeff
                    if acc:
                        terms[mono] = acc
                    else:
                        del terms[mono]
        return Poly(terms)

    def __pow__(self, exponent: int) -> "Poly":
        result = Poly.const(Fraction(1))
        for _ in range(exponent):
            result = result * self
        return result

    def diff(self, index: int) -> "Poly":
        result = Poly.zero()
        for mono, coeff in self.terms.items():
            for pos, (aid, e) in enumerate(mono):
                da = _atom_diff(aid, index)
                if da.is_zero():
                    continue
                rest = list(mono)
                if e > 1:
                    rest[pos] = (aid, e - 1)
                else:
                    del rest[pos]
                result = result + da.scale(coeff * e).mul_mono(tuple(rest))
        return result

    def mul_mono(self, mono: Mono) -> "Poly":
        if not mono:
            return self
        bound = _DEGREE_BOUND
        shift = _mono_degree(mono)
        terms: dict[Mono, Fraction] = {}
        for m, c in self.terms.items():
            if _mono_degree(m) + shift > bound:
                raise ExponentOverflow(
                    f"monomial degree {_mono_degree(m) + shift} exceeds bound {bound}"
                )
            key = _mono_mul(m, mono)
            acc = terms.get(key)
            if acc is None:
                terms[key] = c
            else:
                acc += c
                if acc:
                    terms[key] = acc
                else:
                    del terms[key]
        return Poly(terms)

    def subst(self, images: Sequence["Poly"]) -> "Poly":
        result = Poly.zero()
        for mono, coeff in self.terms.items():
            acc = Poly.const(coeff)
            for aid, e in mono:
                acc = acc * _atom_subst(aid, images) ** e
            result = result + acc
        return result

    def eval(self, point: Sequence[float]) -> float:
        total = 0.0
        for mono, coeff in self.terms.items():
            value = float(coeff)
            for aid, e in mono:
                value *= _atom_eval(aid, point) ** e
            total += value
        return total

    def eval_exact(self, point: Sequence[Fraction]) -> Fraction:
        total = Fraction(0)
        for mono, coeff in self.terms.items():
            value = coeff
            for aid, e in mono:
                a = _ATOMS[aid]
                if not isinstance(a, Gen):
                    raise NonPolynomial("exact evaluation requires a polynomial expression")
                if a.index >= len(point):
                    raise ValueError(f"point has no coordinate {a.index}")
                value *= point[a.index] ** e
            total += value
        return total

    def degree(self) -> int:
        return max((_mono_degree(m) for m in self.terms), default=0)

    def atoms(self) -> Iterator[SmoothExpr]:
        seen = set()
        for mono in self.terms:
            for aid, _ in mono:
                if aid not in seen:
                    seen.add(aid)
                    yield _ATOMS[aid]

    def is_polynomial(self) -> bool:
        return all(_ATOM_IS_GEN[aid] for mono in self.terms for aid, _ in mono)

    def max_gen(self) -> int:
        highest = -1
        for a in self.atoms():
            if isinstance(a, Gen):
                highest = max(highest, a.index)
            else:
                for arg in a.args:
                    highest = max(highest, expr_to_poly(arg).max_gen())
        return highest


@lru_cache(maxsize=None)
def _atom_diff(aid: int, index: int) -> Poly:
    a = _ATOMS[aid]
    if isinstance(a, Gen):
        return Poly.const(Fraction(1)) if a.index == index else Poly.zero()
    entry = REGISTRY.get(a.name)
    arg_polys = [expr_to_poly(arg) for arg in a.args]
    total = Poly.zero()
    for slot, rule in enumerate(entry.derivatives):
        inner = arg_polys[slot].diff(index)
        if inner.is_zero():
            continue
        total = total + expr_to_poly(rule).subst(arg_polys) * inner
    return total


def _atom_subst(aid: int, images: Sequence[Poly]) -> Poly:
    a = _ATOMS[aid]
    if isinstance(a, Gen):
        if a.index >= len(images):
            raise ValueError(f"no image for generator {a.index}")
        return images[a.index]
    new_args = tuple(poly_to_expr(expr_to_poly(arg).subst(images)) for arg in a.args)
    return Poly.atom(Prim(a.name, new_args))


def _atom_eval(aid: int, point: Sequence[float]) -> float:
    a = _ATOMS[aid]
    if isinstance(a, Gen):
        if a.index >= len(point):
            raise ValueError(f"point has no coordinate {a.index}")
        return point[a.index]
    entry = REGISTRY.get(a.name)
    return entry.evaluate(*(expr_to_poly(arg).eval(point) for arg in a.args))


# Normal forms are cached per tree; poly_to_expr feeds the cache in reverse
# so that converting a canonical tree back to its polynomial is free.
_POLY_CACHE: dict[SmoothExpr, Poly] = {}


def expr_to_poly(e: SmoothExpr) -> Poly:
    cached = _POLY_CACHE.get(e)
    if cached is None:
        cached = _expr_to_poly_uncached(e)
        _POLY_CACHE[e] = cached
    return cached


def _expr_to_poly_uncached(e: SmoothExpr) -> Poly:
    if isinstance(e, Const):
        return Poly.const(e.value)
    if isinstance(e, Gen):
        return Poly.atom(e)
    if isinstance(e, Sum):
        result = Poly.zero()
        for term in e.terms:
            result = result + expr_to_poly(term)
        return result
    if isinstance(e, Product):
        result = Poly.const(Fraction(1))
        for factor in e.factors:
            result = result * expr_to_poly(factor)
        return result
    if isinstance(e, IntPow):
        return expr_to_poly(e.base) ** e.exponent
    if isinstance(e, Prim):
        entry = REGISTRY.get(e.name)
        if len(e.args) != entry.arity:
            raise ValueError(
                f"primitive {e.name!r} takes {entry.arity} argument(s), got {len(e.args)}"
            )
        args = tuple(poly_to_expr(expr_to_poly(a)) for a in e.args)
        return Poly.atom(Prim(e.name, args))
    raise TypeError(f"not a SmoothExpr: {e!r}")


def poly_to_expr(p: Poly) -> SmoothExpr:
    if not p.terms:
        return ZERO
    parts: list[SmoothExpr] = []
    for mono in sorted(p.terms, key=_MONO_SORT_KEY, reverse=True):
        coeff = p.terms[mono]
        resolved = sorted(((_atom_sort_key(aid), aid, e) for aid, e in mono))
        factors: list[SmoothExpr] = [
            _ATOMS[aid] if e == 1 else IntPow(_ATOMS[aid], e) for _, aid, e in resolved
        ]
        if not factors:
            parts.append(Const(coeff))
        elif coeff == 1:
            parts.append(factors[0] if len(factors) == 1 else Product(tuple(factors)))
        else:
            parts.append(Product((Const(coeff), *factors)))
    expr = parts[0] if len(parts) == 1 else Sum(tuple(parts))
    _POLY_CACHE.setdefault(expr, p)
    return expr


# ---------------------------------------------------------------------------
# Public operations


def normalize(e: SmoothExpr) -> SmoothExpr:
    """The canonical normal form; idempotent, zero iff `e` is zero."""
    return poly_to_expr(expr_to_poly(e))


def is_zero(e: SmoothExpr) -> bool:
    return expr_to_poly(e).is_zero()


def equal(e1: SmoothExpr, e2: SmoothExpr) -> bool:
    """Symbolic equality, decided by normal forms."""
    return (expr_to_poly(e1) - expr_to_poly(e2)).is_zero()


def differentiate(e: SmoothExpr, index: int) -> SmoothExpr:
    """Partial derivative with respect to generator `index`.

    Linear, Leibniz on products, and applies the registered chain rule
    through primitive calls.
    """
    return poly_to_expr(expr_to_poly(e).diff(index))


def eval_numeric(e: SmoothExpr, point: Sequence[float]) -> float:
    """Evaluate at a concrete point, using registry evaluators for primitives."""
    return expr_to_poly(e).eval([float(x) for x in point])


def substitute(e: SmoothExpr, images: Sequence[SmoothExpr]) -> SmoothExpr:
    """Replace generator i by images[i] everywhere, then renormalize."""
    polys = [expr_to_poly(img) for img in images]
    return poly_to_expr(expr_to_poly(e).subst(polys))


def is_polynomial(e: SmoothExpr) -> bool:
    return expr_to_poly(e).is_polynomial()


def max_gen_index(e: SmoothExpr) -> int:
    """Largest generator index used (-1 if constant)."""
    return expr_to_poly(e).max_gen()


def hadamard_factor(p: SmoothExpr, index: int) -> SmoothExpr:
    """Write p = x_index * a exactly and return a.

    Works for polynomials vanishing identically on {x_index = 0}; that is
    exactly when every monomial carries a positive power of the generator.
    """
    poly = expr_to_poly(p)
    if not poly.is_polynomial():
        raise NonPolynomial("hadamard_factor requires a polynomial expression")
    gen_id = _intern_atom(Gen(index))
    quotient: dict[Mono, Fraction] = {}
    for mono, coeff in poly.terms.items():
        reduced: list[tuple[int, int]] = []
        found = False
        for aid, e in mono:
            if aid == gen_id:
                found = True
                if e > 1:
                    reduced.append((aid, e - 1))
            else:
                reduced.append((aid, e))
        if not found:
            raise NotDivisible(f"expression does not vanish on {{x{index} = 0}}")
        quotient[tuple(reduced)] = coeff
    return poly_to_expr(Poly(quotient))


def make_bump(center: Sequence[Rational], r_in: Rational, r_out: Rational) -> SmoothExpr:
    """A smooth [0,1]-valued bump: 1 on the closed ball of radius r_in around
    `center`, 0 outside the open ball of radius r_out.

    Built as S(r_out^2 - |x - c|^2, |x - c|^2 - r_in^2) with the registered
    smooth step S(u, v) = beta0(u) / (beta0(u) + beta0(v)); the two arguments
    always sum to r_out^2 - r_in^2 > 0, so the step's singular corner is
    never reached.
    """
    r_in = _as_fraction(r_in)
    r_out = _as_fraction(r_out)
    if not (0 < r_in < r_out):
        raise BadRadii(f"need 0 < r_in < r_out, got r_in={r_in}, r_out={r_out}")
    sq_dist: SmoothExpr = Const(0)
    for i, c in enumerate(center):
        delta = Gen(i) - Const(_as_fraction(c))
        sq_dist = sq_dist + delta * delta
    u = Const(r_out**2) - sq_dist
    v = sq_dist - Const(r_in**2)
    return normalize(Prim("S", (u, v)))


# ---------------------------------------------------------------------------
# Canonical text rendering (grammar of the parser module)


def _name_of(index: int, names: Sequence[str] | None) -> str:
    if names is not None:
        if index >= len(names):
            raise ValueError(f"no declared name for generator {index}")
        return names[index]
    return f"x{index}"


def _render_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _render_atom(a: SmoothExpr, names: Sequence[str] | None) -> str:
    if isinstance(a, Gen):
        return _name_of(a.index, names)
    inner = ", ".join(to_text(arg, names) for arg in a.args)
    return f"{a.name}({inner})"


def to_text(e: SmoothExpr, names: Sequence[str] | None = None) -> str:
    """Canonical serialization of the normal form (parseable back)."""
    poly = expr_to_poly(e)
    if not poly.terms:
        return "0"
    pieces: list[str] = []
    for mono in sorted(poly.terms, key=_MONO_SORT_KEY, reverse=True):
        coeff = poly.terms[mono]
        magnitude = abs(coeff)
        resolved = sorted(((_atom_sort_key(aid), aid, e) for aid, e in mono))
        factors = [
            _render_atom(_ATOMS[aid], names) if e == 1 else f"{_render_atom(_ATOMS[aid], names)}^{e}"
            for _, aid, e in resolved
        ]
        if not factors:
            body = _render_rational(magnitude)
        elif magnitude == 1:
            body = "*".join(factors)
        else:
            body = "*".join([_render_rational(magnitude), *factors])
        if not pieces:
            pieces.append(body if coeff > 0 else f"-{body}")
        else:
            pieces.append(f"+ {body}" if coeff > 0 else f"- {body}")
    return " ".join(pieces)
