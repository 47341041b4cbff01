"""Service-layer functions: wire models in, wire models out.

The FastAPI app routes to these directly; the CLI calls them in-process (or
POSTs the same payloads to a remote server).  Domain errors propagate as the
package's exception types and are translated to HTTP or exit codes by the
respective front end.
"""
from __future__ import annotations

import random

from ..errors import NotTangent
from ..expr import normalize, to_text
from ..forms import DifferentialForm, exterior_derivative, form_to_text, wedge
from ..calculus import (
    VectorField,
    contract,
    lie_derivative,
    spanning_forms,
    verify_cartan,
    vf_bracket,
)
from ..derquot import (
    DerClass,
    canonical_pair_cross,
    class_equal,
    in_null_module,
    preserves_ideal,
    vanishes_on_dense_interior,
)
from ..parser import parse_expr_in_ring, parse_form, parse_vector_field
from ..ring import IdealPresentation, RingPresentation, reduce_mod_ideal
from ..sampling import random_vector_field
from ..site import (
    LocalDerivationFamily,
    OpenPoset,
    PresheafCDGA,
    check_restriction_squares,
    glue_derivations,
    presheaf_cartan_verify,
    region_from_spec,
    restriction_squares_commute,
)
from . import schemas as S


def _ring(vars_: list[str], ideal: list[str] | None = None, dense_interior: bool = False) -> RingPresentation:
    names = tuple(vars_)
    base = RingPresentation(n=len(names), names=names)
    if not ideal and not dense_interior:
        return base
    generators = tuple(parse_expr_in_ring(g, base) for g in (ideal or []))
    return RingPresentation(
        n=len(names),
        names=names,
        ideal=IdealPresentation(generators, dense_interior=dense_interior),
    )


def _form_model(form: DifferentialForm) -> S.FormModel:
    names = form.ring.names
    components = []
    for degree in form.degrees():
        terms = [
            S.FormTermModel(idx=list(idx), coef=to_text(coeff, names))
            for idx, coeff in sorted(form.component(degree).items())
        ]
        components.append(S.FormComponentModel(degree=degree, terms=terms))
    return S.FormModel(components=components)


def _form_response(form: DifferentialForm) -> S.FormResponse:
    return S.FormResponse(text=form_to_text(form), form=_form_model(form))


def _field_model(field: VectorField) -> S.VectorFieldModel:
    names = field.ring.names
    return S.VectorFieldModel(coefficients=[to_text(c, names) for c in field.coefficients])


def _field_text(field: VectorField) -> str:
    names = field.ring.names
    return ", ".join(to_text(c, names) for c in field.coefficients)


def _identity_models(report) -> list[S.IdentityResultModel]:
    return [
        S.IdentityResultModel(
            identity=r.identity,
            passed=r.passed,
            witness=None if r.witness is None else form_to_text(r.witness),
        )
        for r in report
    ]


def handle_parse(req: S.ParseRequest) -> S.ParseResponse:
    ring = _ring(req.vars)
    if req.kind == "expr":
        expr = parse_expr_in_ring(req.text, ring)
        return S.ParseResponse(kind="expr", text=to_text(normalize(expr), ring.names))
    form = parse_form(req.text, ring)
    return S.ParseResponse(kind="form", text=form_to_text(form), form=_form_model(form))


def handle_d(req: S.FormOpRequest) -> S.FormResponse:
    ring = _ring(req.vars, req.ideal)
    form = parse_form(req.form, ring)
    return _form_response(exterior_derivative(form))


def handle_wedge(req: S.WedgeRequest) -> S.FormResponse:
    ring = _ring(req.vars, req.ideal)
    left = parse_form(req.left, ring)
    right = parse_form(req.right, ring)
    return _form_response(wedge(left, right))


def handle_contract(req: S.FieldFormRequest) -> S.FormResponse:
    ring = _ring(req.vars, req.ideal)
    field = parse_vector_field(req.field, ring)
    form = parse_form(req.form, ring)
    return _form_response(contract(field, form))


def handle_lie(req: S.FieldFormRequest) -> S.FormResponse:
    ring = _ring(req.vars, req.ideal)
    field = parse_vector_field(req.field, ring)
    form = parse_form(req.form, ring)
    return _form_response(lie_derivative(field, form))


def handle_bracket(req: S.BracketRequest) -> S.VectorFieldResponse:
    ring = _ring(req.vars, req.ideal)
    left = parse_vector_field(req.left, ring)
    right = parse_vector_field(req.right, ring)
    result = vf_bracket(left, right)
    return S.VectorFieldResponse(text=_field_text(result), field=_field_model(result))


def handle_verify_cartan(req: S.VerifyCartanRequest) -> S.VerifyCartanResponse:
    ring = _ring(req.vars)
    rng = random.Random(req.seed)
    pool = spanning_forms(ring, 2)
    fixed_v = parse_vector_field(req.field, ring) if req.field else None
    fixed_w = parse_vector_field(req.cofield, ring) if req.cofield else None
    worst: dict[str, S.IdentityResultModel] = {}
    for trial in range(req.trials):
        v = fixed_v or random_vector_field(rng, ring, req.coefficient_degree)
        w = fixed_w or random_vector_field(rng, ring, req.coefficient_degree)
        form = pool[trial % len(pool)]
        report = verify_cartan(ring, v, w, [form])
        for result in _identity_models(report):
            if result.identity not in worst or (worst[result.identity].passed and not result.passed):
                worst[result.identity] = result
    identities = [worst[name] for name in ("i", "ii", "iii", "iv", "v")]
    return S.VerifyCartanResponse(
        passed=all(r.passed for r in identities),
        trials=req.trials,
        identities=identities,
    )


def handle_tangent(req: S.TangentRequest) -> S.TangentResponse:
    ring = _ring(req.vars)
    ideal = IdealPresentation(
        tuple(parse_expr_in_ring(g, ring) for g in req.ideal)
    )
    field = parse_vector_field(req.field, ring)
    try:
        tangent = preserves_ideal(field, ideal)
    except NotTangent as exc:
        return S.TangentResponse(
            tangent=False,
            generator=to_text(exc.generator, ring.names),
            reduction=to_text(exc.reduction, ring.names),
        )
    certificates = [
        [to_text(c, ring.names) for c in cert] for cert in tangent.certificates
    ]
    derivation_class = S.DerClassModel(
        ideal=[to_text(g, ring.names) for g in ideal.generators],
        coefficients=[to_text(c, ring.names) for c in field.coefficients],
        certificates=certificates,
    )
    return S.TangentResponse(
        tangent=True, certificates=certificates, derivation_class=derivation_class
    )


def handle_in_j(req: S.InJRequest) -> S.BoolResponse:
    ring = _ring(req.vars)
    field = parse_vector_field(req.field, ring)
    if req.dense_interior and not req.ideal:
        ideal = IdealPresentation((), dense_interior=True)
        return S.BoolResponse(result=vanishes_on_dense_interior(field, ideal))
    ideal = IdealPresentation(tuple(parse_expr_in_ring(g, ring) for g in req.ideal))
    return S.BoolResponse(result=in_null_module(field, ideal))


def handle_class_equal(req: S.ClassEqualRequest) -> S.BoolResponse:
    ring = _ring(req.vars)
    ideal = IdealPresentation(tuple(parse_expr_in_ring(g, ring) for g in req.ideal))
    left = DerClass.from_field(parse_vector_field(req.left, ring), ideal)
    right = DerClass.from_field(parse_vector_field(req.right, ring), ideal)
    return S.BoolResponse(result=class_equal(left, right))


def handle_cross_pair(req: S.CrossPairRequest) -> S.CrossPairResponse:
    ring = _ring(req.vars)
    ideal = IdealPresentation(tuple(parse_expr_in_ring(g, ring) for g in req.ideal))
    cls = DerClass.from_field(parse_vector_field(req.field, ring), ideal)
    p, q = canonical_pair_cross(cls)
    axis_x = (ring.names or ("x", "y"))[0]
    axis_y = (ring.names or ("x", "y"))[1]
    return S.CrossPairResponse(pair=(to_text(p, [axis_x]), to_text(q, [axis_y])))


def _poset(model: S.PosetModel) -> OpenPoset:
    opens = {entry.name: region_from_spec(entry.boxes) for entry in model.opens}
    return OpenPoset.build(opens, model.leq)


def _family(
    model: S.FamilyModel, presheaf: PresheafCDGA
) -> LocalDerivationFamily:
    assignment = {
        name: parse_vector_field(vf.coefficients, presheaf.ring)
        for name, vf in model.fields.items()
    }
    return LocalDerivationFamily.build(presheaf, assignment)


def _ring_from_model(model: S.RingModel) -> RingPresentation:
    return _ring(model.generators, model.ideal, model.dense_interior)


def handle_pushforward(req: S.PushforwardRequest) -> S.FormResponse:
    from ..forms import pushforward
    from ..ring import RingHom

    source = _ring_from_model(req.source)
    target = _ring_from_model(req.target)
    hom = RingHom(
        source, target, tuple(parse_expr_in_ring(img, target) for img in req.hom.images)
    )
    form = parse_form(req.form, source)
    return _form_response(pushforward(hom, form))


def handle_glue(req: S.GlueRequest) -> S.GlueResponse:
    ring = _ring(req.vars)
    poset = _poset(req.poset)
    presheaf = PresheafCDGA(poset, ring)
    locals_ = {
        name: parse_vector_field(vf.coefficients, ring)
        for name, vf in req.locals.fields.items()
    }
    glued = glue_derivations(presheaf, req.cover, locals_)
    return S.GlueResponse(field=_field_model(glued), text=_field_text(glued))


def handle_presheaf_verify(req: S.PresheafVerifyRequest) -> S.PresheafVerifyResponse:
    ring = _ring(req.vars)
    poset = _poset(req.poset)
    presheaf = PresheafCDGA(poset, ring)
    squares = restriction_squares_commute(presheaf)
    test_forms = presheaf.test_forms()

    def run_pair(v_family, w_family):
        report = presheaf_cartan_verify(presheaf, v_family, w_family, test_forms)
        return [
            S.OpenReportModel(open=name, identities=_identity_models(results))
            for name, results in sorted(report.items())
        ]

    if req.family is not None and req.cofamily is not None:
        opens = run_pair(_family(req.family, presheaf), _family(req.cofamily, presheaf))
        passed = squares and all(r.passed for o in opens for r in o.identities)
        return S.PresheafVerifyResponse(
            passed=passed, restriction_squares=squares, opens=opens
        )

    rng = random.Random(req.seed)
    trials = max(1, req.random_trials)
    last_opens: list[S.OpenReportModel] = []
    passed = squares
    for _ in range(trials):
        v_family = LocalDerivationFamily.constant(
            presheaf, random_vector_field(rng, ring, req.coefficient_degree)
        )
        w_family = LocalDerivationFamily.constant(
            presheaf, random_vector_field(rng, ring, req.coefficient_degree)
        )
        last_opens = run_pair(v_family, w_family)
        if not all(r.passed for o in last_opens for r in o.identities):
            passed = False
            break
    return S.PresheafVerifyResponse(
        passed=passed,
        restriction_squares=squares,
        opens=last_opens,
        trials=trials,
    )
