"""Seeded random generators for polynomials, fields and forms.

Shared by the randomized verification commands and the test suite; all
sampling is driven by an explicit random.Random so a seed pins runs
bit-for-bit.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .expr import Const, Gen, SmoothExpr, normalize
from .forms import DifferentialForm
from .calculus import VectorField
from .ring import RingPresentation


def random_polynomial(
    rng: random.Random,
    n: int,
    degree: int = 2,
    terms: int = 4,
    coeff_range: int = 4,
) -> SmoothExpr:
    total: SmoothExpr = Const(0)
    for _ in range(terms):
        coeff = rng.randint(-coeff_range, coeff_range)
        if coeff == 0:
            continue
        term: SmoothExpr = Const(Fraction(coeff))
        for _ in range(rng.randint(0, degree)):
            term = term * Gen(rng.randrange(n))
        total = total + term
    return normalize(total)


def random_vector_field(
    rng: random.Random, ring: RingPresentation, degree: int = 2
) -> VectorField:
    return VectorField(
        ring, tuple(random_polynomial(rng, ring.n, degree) for _ in range(ring.n))
    )


def random_form(
    rng: random.Random,
    ring: RingPresentation,
    max_form_degree: int | None = None,
    coeff_degree: int = 3,
) -> DifferentialForm:
    n = ring.n
    if max_form_degree is None:
        max_form_degree = n
    k = rng.randint(0, min(max_form_degree, n))
    indices = sorted(rng.sample(range(n), k))
    return DifferentialForm.monomial(
        ring, random_polynomial(rng, n, coeff_degree), tuple(indices)
    )


def random_inhomogeneous_form(
    rng: random.Random, ring: RingPresentation, pieces: int = 3, coeff_degree: int = 3
) -> DifferentialForm:
    total = DifferentialForm.zero(ring)
    for _ in range(pieces):
        total = total + random_form(rng, ring, coeff_degree=coeff_degree)
    return total
