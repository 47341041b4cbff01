"""FastAPI application exposing the calculus as a small compute service.

Groebner bases and primitive-family entries are cached in-process, so a
long-running server amortizes them across requests.  Syntax problems map to
400, domain errors (mismatched rings, incompatible gluing data, overflow) to
422, both with a structured body.
"""
from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import CartanError, Incompatible, ParseError
from . import handlers
from . import schemas as S

app = FastAPI(
    title="cartan-calculus",
    description="Exterior calculus over finitely presented smooth function rings",
)


@app.exception_handler(ParseError)
async def _parse_error(request: Request, exc: ParseError):
    body = S.ErrorResponse(
        error=type(exc).__name__, detail=str(exc), position=exc.position
    )
    return JSONResponse(status_code=400, content=body.model_dump())


@app.exception_handler(CartanError)
async def _domain_error(request: Request, exc: CartanError):
    witness = None
    if isinstance(exc, Incompatible) and exc.witness is not None:
        witness = str(tuple(str(c) for c in exc.witness))
    body = S.ErrorResponse(error=type(exc).__name__, detail=str(exc), witness=witness)
    return JSONResponse(status_code=422, content=body.model_dump())


@app.exception_handler(ValueError)
async def _value_error(request: Request, exc: ValueError):
    body = S.ErrorResponse(error="ValueError", detail=str(exc))
    return JSONResponse(status_code=422, content=body.model_dump())


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/parse", response_model=S.ParseResponse)
def parse(req: S.ParseRequest):
    return handlers.handle_parse(req)


@app.post("/d", response_model=S.FormResponse)
def exterior_derivative(req: S.FormOpRequest):
    return handlers.handle_d(req)


@app.post("/wedge", response_model=S.FormResponse)
def wedge(req: S.WedgeRequest):
    return handlers.handle_wedge(req)


@app.post("/contract", response_model=S.FormResponse)
def contract(req: S.FieldFormRequest):
    return handlers.handle_contract(req)


@app.post("/lie", response_model=S.FormResponse)
def lie(req: S.FieldFormRequest):
    return handlers.handle_lie(req)


@app.post("/bracket", response_model=S.VectorFieldResponse)
def bracket(req: S.BracketRequest):
    return handlers.handle_bracket(req)


@app.post("/verify-cartan", response_model=S.VerifyCartanResponse)
def verify_cartan(req: S.VerifyCartanRequest):
    return handlers.handle_verify_cartan(req)


@app.post("/tangent", response_model=S.TangentResponse)
def tangent(req: S.TangentRequest):
    return handlers.handle_tangent(req)


@app.post("/in-j", response_model=S.BoolResponse)
def in_j(req: S.InJRequest):
    return handlers.handle_in_j(req)


@app.post("/class-equal", response_model=S.BoolResponse)
def class_equal(req: S.ClassEqualRequest):
    return handlers.handle_class_equal(req)


@app.post("/cross-pair", response_model=S.CrossPairResponse)
def cross_pair(req: S.CrossPairRequest):
    return handlers.handle_cross_pair(req)


@app.post("/pushforward", response_model=S.FormResponse)
def pushforward(req: S.PushforwardRequest):
    return handlers.handle_pushforward(req)


@app.post("/glue", response_model=S.GlueResponse)
def glue(req: S.GlueRequest):
    return handlers.handle_glue(req)


@app.post("/presheaf-verify", response_model=S.PresheafVerifyResponse)
def presheaf_verify(req: S.PresheafVerifyRequest):
    return handlers.handle_presheaf_verify(req)
