"""Command-line front end.

Each verb builds the same request model the HTTP service accepts and either
runs it in-process or, with --server, POSTs it to a running instance.  Exit
codes: 0 success, 1 domain errors (non-tangent fields, incompatible gluing
data, identity failures) with JSON diagnostics on stderr, 2 syntax or I/O
errors.
"""
from __future__ import annotations

import json
import sys
from typing import Callable

import click

from .errors import CartanError, Incompatible, ParseError
from .service import handlers
from .service import schemas as S

EXIT_DOMAIN = 1
EXIT_SYNTAX = 2


def _fail(payload: dict, code: int) -> None:
    click.echo(json.dumps(payload), err=True)
    sys.exit(code)


def _dispatch(path: str, handler: Callable, request, server: str | None) -> dict:
    """Run locally or against a remote server; returns the response dict."""
    if server:
        import httpx

        url = server.rstrip("/") + path
        try:
            response = httpx.post(url, json=request.model_dump(by_alias=True), timeout=300.0)
        except httpx.HTTPError as exc:
            _fail({"error": "ConnectionError", "detail": str(exc)}, EXIT_SYNTAX)
        if response.status_code == 400:
            _fail(response.json(), EXIT_SYNTAX)
        if response.status_code in (409, 422):
            _fail(response.json(), EXIT_DOMAIN)
        response.raise_for_status()
        return response.json()
    try:
        result = handler(request)
    except ParseError as exc:
        _fail({"error": type(exc).__name__, "detail": str(exc), "position": exc.position}, EXIT_SYNTAX)
    except Incompatible as exc:
        witness = None if exc.witness is None else [str(c) for c in exc.witness]
        _fail({"error": "Incompatible", "detail": str(exc), "witness": witness}, EXIT_DOMAIN)
    except (CartanError, ValueError) as exc:
        _fail({"error": type(exc).__name__, "detail": str(exc)}, EXIT_DOMAIN)
    return result.model_dump(by_alias=True)


def _emit(data: dict, as_json: bool, text: str) -> None:
    if as_json:
        click.echo(json.dumps(data, indent=2))
    else:
        click.echo(text)


def _vars_option(f):
    return click.option("--vars", "vars_", required=True, help="comma-separated generator names")(f)


def _common(f):
    f = click.option("--json", "as_json", is_flag=True, help="emit the full JSON response")(f)
    f = click.option("--server", default=None, help="URL of a running service to call instead")(f)
    return f


def _split(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def _load_json(path: str) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        _fail({"error": "IOError", "detail": f"{path}: {exc}"}, EXIT_SYNTAX)


@click.group()
def main() -> None:
    """Exterior calculus over finitely presented smooth function rings."""


@main.command()
@click.argument("text")
@_vars_option
@click.option("--form", "is_form", is_flag=True, help="parse with the form grammar")
@_common
def parse(text: str, vars_: str, is_form: bool, as_json: bool, server: str | None) -> None:
    """Parse and reprint in canonical form."""
    request = S.ParseRequest(text=text, vars=_split(vars_), kind="form" if is_form else "expr")
    data = _dispatch("/parse", handlers.handle_parse, request, server)
    _emit(data, as_json, data["text"])


@main.command()
@click.argument("form")
@_vars_option
@click.option("--ideal", default="", help="comma-separated ideal generators")
@_common
def d(form: str, vars_: str, ideal: str, as_json: bool, server: str | None) -> None:
    """Exterior derivative of a form."""
    request = S.FormOpRequest(form=form, vars=_split(vars_), ideal=_split(ideal))
    data = _dispatch("/d", handlers.handle_d, request, server)
    _emit(data, as_json, data["text"])


@main.command()
@click.argument("left")
@click.argument("right")
@_vars_option
@click.option("--ideal", default="")
@_common
def wedge(left: str, right: str, vars_: str, ideal: str, as_json: bool, server: str | None) -> None:
    """Exterior product of two forms."""
    request = S.WedgeRequest(left=left, right=right, vars=_split(vars_), ideal=_split(ideal))
    data = _dispatch("/wedge", handlers.handle_wedge, request, server)
    _emit(data, as_json, data["text"])


@main.command()
@click.argument("form")
@click.option("--vf", "field", required=True, help="vector-field coefficients, comma separated")
@_vars_option
@click.option("--ideal", default="")
@_common
def contract(form: str, field: str, vars_: str, ideal: str, as_json: bool, server: str | None) -> None:
    """Contraction of a form with a vector field."""
    request = S.FieldFormRequest(field=field, form=form, vars=_split(vars_), ideal=_split(ideal))
    data = _dispatch("/contract", handlers.handle_contract, request, server)
    _emit(data, as_json, data["text"])


@main.command()
@click.argument("form")
@click.option("--vf", "field", required=True)
@_vars_option
@click.option("--ideal", default="")
@_common
def lie(form: str, field: str, vars_: str, ideal: str, as_json: bool, server: str | None) -> None:
    """Lie derivative of a form along a vector field."""
    request = S.FieldFormRequest(field=field, form=form, vars=_split(vars_), ideal=_split(ideal))
    data = _dispatch("/lie", handlers.handle_lie, request, server)
    _emit(data, as_json, data["text"])


@main.command()
@click.option("--vf", "left", required=True)
@click.option("--wf", "right", required=True)
@_vars_option
@click.option("--ideal", default="")
@_common
def bracket(left: str, right: str, vars_: str, ideal: str, as_json: bool, server: str | None) -> None:
    """Commutator of two vector fields."""
    request = S.BracketRequest(left=left, right=right, vars=_split(vars_), ideal=_split(ideal))
    data = _dispatch("/bracket", handlers.handle_bracket, request, server)
    _emit(data, as_json, data["text"])


@main.command(name="verify-cartan")
@_vars_option
@click.option("--seed", default=0, show_default=True)
@click.option("--trials", default=200, show_default=True)
@click.option("--degree", "coefficient_degree", default=2, show_default=True,
              help="degree bound for random field coefficients")
@click.option("--vf", "field", default=None, help="fix the first field instead of sampling")
@click.option("--wf", "cofield", default=None, help="fix the second field instead of sampling")
@_common
def verify_cartan_cmd(vars_: str, seed: int, trials: int, coefficient_degree: int,
                      field: str | None, cofield: str | None,
                      as_json: bool, server: str | None) -> None:
    """Randomized check of the five calculus identities."""
    request = S.VerifyCartanRequest(
        vars=_split(vars_), seed=seed, trials=trials,
        coefficient_degree=coefficient_degree, field=field, cofield=cofield,
    )
    data = _dispatch("/verify-cartan", handlers.handle_verify_cartan, request, server)
    lines = [
        f"identity ({r['identity']}): {'pass' if r['pass'] else 'FAIL'}"
        for r in data["identities"]
    ]
    _emit(data, as_json, "\n".join(lines))
    if not data["passed"]:
        _fail({"error": "IdentityFailure", "detail": "some identities failed", "report": data}, EXIT_DOMAIN)


@main.command()
@click.option("--vf", "field", required=True)
@click.option("--ideal", required=True)
@_vars_option
@_common
def tangent(field: str, ideal: str, vars_: str, as_json: bool, server: str | None) -> None:
    """Tangency to the zero set of the ideal, with certificates."""
    request = S.TangentRequest(vars=_split(vars_), ideal=_split(ideal), field=field)
    data = _dispatch("/tangent", handlers.handle_tangent, request, server)
    if data["tangent"]:
        _emit(data, as_json, f"tangent; certificates: {data['certificates']}")
    else:
        _fail({"error": "NotTangent", "generator": data["generator"], "reduction": data["reduction"]}, EXIT_DOMAIN)


@main.command(name="in-j")
@click.option("--vf", "field", required=True)
@click.option("--ideal", default="")
@click.option("--dense-interior", is_flag=True, help="use the zero ideal of a dense-interior set")
@_vars_option
@_common
def in_j(field: str, ideal: str, dense_interior: bool, vars_: str, as_json: bool, server: str | None) -> None:
    """Membership in the null submodule J."""
    request = S.InJRequest(vars=_split(vars_), ideal=_split(ideal), field=field,
                           dense_interior=dense_interior)
    data = _dispatch("/in-j", handlers.handle_in_j, request, server)
    _emit(data, as_json, str(data["result"]).lower())


@main.command(name="class-equal")
@click.option("--vf", "left", required=True)
@click.option("--wf", "right", required=True)
@click.option("--ideal", required=True)
@_vars_option
@_common
def class_equal_cmd(left: str, right: str, ideal: str, vars_: str, as_json: bool, server: str | None) -> None:
    """Equality of derivation classes modulo J."""
    request = S.ClassEqualRequest(vars=_split(vars_), ideal=_split(ideal), left=left, right=right)
    data = _dispatch("/class-equal", handlers.handle_class_equal, request, server)
    _emit(data, as_json, str(data["result"]).lower())


@main.command(name="cross-pair")
@click.option("--vf", "field", required=True)
@click.option("--ideal", default="x*y", show_default=True)
@click.option("--vars", "vars_", default="x,y", show_default=True)
@_common
def cross_pair(field: str, ideal: str, vars_: str, as_json: bool, server: str | None) -> None:
    """Canonical pair of axis components for the coordinate cross."""
    request = S.CrossPairRequest(vars=_split(vars_), ideal=_split(ideal), field=field)
    data = _dispatch("/cross-pair", handlers.handle_cross_pair, request, server)
    pair = data["pair"]
    _emit(data, as_json, f'("{pair[0]}", "{pair[1]}")')


@main.command()
@click.option("--poset", "poset_path", required=True, type=click.Path())
@click.option("--family", "family_path", required=True, type=click.Path(),
              help="JSON file mapping open names to vector fields")
@click.option("--cover", default="", help="comma-separated cover opens (default: all in family)")
@_vars_option
@_common
def glue(poset_path: str, family_path: str, cover: str, vars_: str, as_json: bool, server: str | None) -> None:
    """Glue compatible local fields into a global one."""
    poset_data = _load_json(poset_path)
    family_data = _load_json(family_path)
    cover_names = _split(cover) or sorted(family_data)
    request = S.GlueRequest(
        poset=S.PosetModel(**poset_data),
        vars=_split(vars_),
        cover=cover_names,
        locals=S.FamilyModel(fields=family_data),
    )
    data = _dispatch("/glue", handlers.handle_glue, request, server)
    _emit(data, as_json, data["text"])


@main.command(name="presheaf-verify")
@click.option("--poset", "poset_path", required=True, type=click.Path())
@click.option("--family", "family_path", default=None, type=click.Path())
@click.option("--family2", "cofamily_path", default=None, type=click.Path())
@click.option("--random", "random_trials", default=0, show_default=True,
              help="verify this many random restriction-generated family pairs instead")
@click.option("--seed", default=0, show_default=True)
@_vars_option
@_common
def presheaf_verify_cmd(poset_path: str, family_path: str | None, cofamily_path: str | None,
                        random_trials: int, seed: int, vars_: str,
                        as_json: bool, server: str | None) -> None:
    """The five identities, open by open over a finite poset."""
    poset_data = _load_json(poset_path)
    if (family_path is None) != (cofamily_path is None):
        _fail({"error": "Usage", "detail": "--family and --family2 go together"}, EXIT_SYNTAX)
    if family_path is None and random_trials <= 0:
        random_trials = 10
    request = S.PresheafVerifyRequest(
        poset=S.PosetModel(**poset_data),
        vars=_split(vars_),
        family=None if family_path is None else S.FamilyModel(fields=_load_json(family_path)),
        cofamily=None if cofamily_path is None else S.FamilyModel(fields=_load_json(cofamily_path)),
        random_trials=random_trials,
        seed=seed,
    )
    data = _dispatch("/presheaf-verify", handlers.handle_presheaf_verify, request, server)
    lines = [f"restriction squares: {'pass' if data['restriction_squares'] else 'FAIL'}"]
    for report in data["opens"]:
        status = "pass" if all(r["pass"] for r in report["identities"]) else "FAIL"
        lines.append(f"open {report['open']}: {status}")
    _emit(data, as_json, "\n".join(lines))
    if not data["passed"]:
        _fail({"error": "IdentityFailure", "detail": "presheaf verification failed", "report": data}, EXIT_DOMAIN)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
