"""Symbolic exterior calculus for finitely presented smooth function rings.

The package computes exterior derivatives, contractions, Lie derivatives and
graded commutators on a coordinate-basis forms complex; decides ideal
membership with exact certificates; presents derivations of polynomial zero
sets as tangent fields modulo a null submodule; and verifies the calculus
identities pointwise and over finite posets of opens.
"""

from .errors import (
    BadRadii,
    CartanError,
    ExponentOverflow,
    IdealMismatch,
    Incompatible,
    IncompatibleFamily,
    NonPolynomial,
    NotDivisible,
    NotRelated,
    NotTangent,
    ParseError,
    RingMismatch,
    UnknownIdentifier,
    UnknownPrimitive,
    WrongIdeal,
)
from .expr import (
    Const,
    Gen,
    IntPow,
    Prim,
    Primitive,
    PrimitiveRegistry,
    Product,
    REGISTRY,
    SmoothExpr,
    Sum,
    degree_limit,
    differentiate,
    equal,
    eval_numeric,
    gens,
    hadamard_factor,
    is_polynomial,
    make_bump,
    normalize,
    substitute,
    to_text,
)
from .ring import (
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
from .forms import (
    DifferentialForm,
    d_of_expr,
    exterior_derivative,
    form_to_text,
    pushforward,
    wedge,
)
from .calculus import (
    Contraction,
    ExteriorD,
    GradedOperator,
    IdentityResult,
    Lie,
    OpCompose,
    OpScale,
    OpSum,
    OpZero,
    VectorField,
    ad_d,
    contract,
    graded_commutator,
    lie_derivative,
    naturality_check,
    op_apply,
    operators_agree,
    spanning_forms,
    verify_cartan,
    vf_apply,
    vf_bracket,
)
from .derquot import (
    DerClass,
    TangentField,
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
from .site import (
    LocalDerivationFamily,
    OpenPoset,
    PresheafCDGA,
    check_restriction_squares,
    glue_derivations,
    locality_witness,
    partition_glue_demo,
    presheaf_cartan_verify,
    region_from_spec,
    restrict_global_field,
    restriction_squares_commute,
)
from .parser import parse_expr, parse_expr_in_ring, parse_form, parse_vector_field

__version__ = "0.1.0"
