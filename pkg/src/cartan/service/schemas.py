"""Pydantic models for the service wire formats.

These mirror the file formats used by the CLI: ring presentations as
{"generators": [names], "ideal": [exprs]}, vector fields as
{"coefficients": [exprs]}, forms as {"degree": k, "terms": [{"idx", "coef"}]}
(or a list of such components when inhomogeneous), posets as named boxed
opens with an explicit "leq" relation, and identity reports as
{"identity", "pass", "witness"}.
"""
from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field, model_validator


class RingModel(BaseModel):
    generators: list[str]
    ideal: list[str] = Field(default_factory=list)
    dense_interior: bool = False


class HomModel(BaseModel):
    images: list[str]


class VectorFieldModel(BaseModel):
    coefficients: list[str]


class FormTermModel(BaseModel):
    idx: list[int]
    coef: str


class FormComponentModel(BaseModel):
    degree: int
    terms: list[FormTermModel]


class FormModel(BaseModel):
    components: list[FormComponentModel]

    @model_validator(mode="before")
    @classmethod
    def _accept_single_component(cls, data):
        if isinstance(data, dict) and "components" not in data and "degree" in data:
            return {"components": [data]}
        return data


class IdentityResultModel(BaseModel):
    identity: str
    passed: bool = Field(alias="pass")
    witness: str | None = None

    model_config = {"populate_by_name": True}


class DerClassModel(BaseModel):
    """A derivation class: ideal, representative coefficients, certificates."""

    ideal: list[str]
    coefficients: list[str]
    certificates: list[list[str]]


class OpenModel(BaseModel):
    name: str
    boxes: Literal["all"] | list[list[list[str | int | float]]]


class PosetModel(BaseModel):
    opens: list[OpenModel]
    leq: list[tuple[str, str]] = Field(default_factory=list)


class FamilyModel(BaseModel):
    """Open name -> vector field."""

    fields: dict[str, VectorFieldModel]

    @model_validator(mode="before")
    @classmethod
    def _accept_bare_mapping(cls, data):
        if isinstance(data, dict) and "fields" not in data:
            return {"fields": data}
        return data


# -- requests


class ParseRequest(BaseModel):
    text: str
    vars: list[str]
    kind: Literal["expr", "form"] = "expr"


class FormOpRequest(BaseModel):
    form: str
    vars: list[str]
    ideal: list[str] = Field(default_factory=list)


class WedgeRequest(BaseModel):
    left: str
    right: str
    vars: list[str]
    ideal: list[str] = Field(default_factory=list)


class FieldFormRequest(BaseModel):
    field: str
    form: str
    vars: list[str]
    ideal: list[str] = Field(default_factory=list)


class BracketRequest(BaseModel):
    left: str
    right: str
    vars: list[str]
    ideal: list[str] = Field(default_factory=list)


class VerifyCartanRequest(BaseModel):
    vars: list[str]
    seed: int = 0
    trials: int = 200
    coefficient_degree: int = 2
    field: str | None = None
    cofield: str | None = None


class TangentRequest(BaseModel):
    vars: list[str]
    ideal: list[str]
    field: str


class InJRequest(BaseModel):
    vars: list[str]
    ideal: list[str]
    field: str
    dense_interior: bool = False


class ClassEqualRequest(BaseModel):
    vars: list[str]
    ideal: list[str]
    left: str
    right: str


class CrossPairRequest(BaseModel):
    vars: list[str] = Field(default_factory=lambda: ["x", "y"])
    ideal: list[str] = Field(default_factory=lambda: ["x*y"])
    field: str


class PushforwardRequest(BaseModel):
    source: RingModel
    target: RingModel
    hom: HomModel
    form: str


class GlueRequest(BaseModel):
    poset: PosetModel
    vars: list[str]
    cover: list[str]
    locals: FamilyModel


class PresheafVerifyRequest(BaseModel):
    poset: PosetModel
    vars: list[str]
    family: FamilyModel | None = None
    cofamily: FamilyModel | None = None
    random_trials: int = 0
    seed: int = 0
    coefficient_degree: int = 2


# -- responses


class ExprResponse(BaseModel):
    text: str


class FormResponse(BaseModel):
    text: str
    form: FormModel


class VectorFieldResponse(BaseModel):
    text: str
    field: VectorFieldModel


class ParseResponse(BaseModel):
    kind: Literal["expr", "form"]
    text: str
    form: FormModel | None = None


class VerifyCartanResponse(BaseModel):
    passed: bool
    trials: int
    identities: list[IdentityResultModel]


class TangentResponse(BaseModel):
    tangent: bool
    certificates: list[list[str]] | None = None
    derivation_class: DerClassModel | None = None
    generator: str | None = None
    reduction: str | None = None


class BoolResponse(BaseModel):
    result: bool


class CrossPairResponse(BaseModel):
    pair: tuple[str, str]


class GlueResponse(BaseModel):
    field: VectorFieldModel
    text: str


class OpenReportModel(BaseModel):
    open: str
    identities: list[IdentityResultModel]


class PresheafVerifyResponse(BaseModel):
    passed: bool
    restriction_squares: bool
    opens: list[OpenReportModel]
    trials: int = 0


class ErrorResponse(BaseModel):
    error: str
    detail: str
    witness: str | None = None
    position: int | None = None
