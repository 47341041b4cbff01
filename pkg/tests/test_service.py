import pytest
from fastapi.testclient import TestClient

from cartan.service import schemas as S
from cartan.service.app import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


POSET = {
    "opens": [
        {"name": "M", "boxes": [[[-2, 2]]]},
        {"name": "L", "boxes": [[[-2, 1]]]},
        {"name": "R", "boxes": [[[-1, 2]]]},
    ],
    "leq": [["L", "M"], ["R", "M"]],
}


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_parse_expr(client):
    response = client.post("/parse", json={"text": "y + x*x", "vars": ["x", "y"]})
    assert response.status_code == 200
    body = S.ParseResponse(**response.json())
    assert body.text == "x^2 + y"


def test_parse_form(client):
    response = client.post(
        "/parse", json={"text": "d(x*y)", "vars": ["x", "y"], "kind": "form"}
    )
    body = S.ParseResponse(**response.json())
    assert body.text == "y d(x) + x d(y)"
    assert body.form.components[0].degree == 1
    assert {tuple(t.idx): t.coef for t in body.form.components[0].terms} == {
        (0,): "y",
        (1,): "x",
    }


def test_parse_syntax_error_is_400(client):
    response = client.post("/parse", json={"text": "x +", "vars": ["x"]})
    assert response.status_code == 400
    body = S.ErrorResponse(**response.json())
    assert body.error == "ParseError"
    assert body.position == 3


def test_d_endpoint(client):
    response = client.post("/d", json={"form": "x^2*d(y)", "vars": ["x", "y"]})
    body = S.FormResponse(**response.json())
    assert body.text == "2*x d(x)^d(y)"


def test_wedge_endpoint(client):
    response = client.post(
        "/wedge", json={"left": "x*d(y)", "right": "y*d(x)", "vars": ["x", "y"]}
    )
    body = S.FormResponse(**response.json())
    assert body.text == "-x*y d(x)^d(y)"


def test_contract_endpoint(client):
    response = client.post(
        "/contract",
        json={"field": "1, 0", "form": "d(x)^d(y)", "vars": ["x", "y"]},
    )
    assert S.FormResponse(**response.json()).text == "d(y)"


def test_lie_endpoint(client):
    response = client.post(
        "/lie", json={"field": "1, 0", "form": "x*d(y)", "vars": ["x", "y"]}
    )
    assert S.FormResponse(**response.json()).text == "d(y)"


def test_bracket_endpoint(client):
    response = client.post(
        "/bracket", json={"left": "0, x", "right": "y, 0", "vars": ["x", "y"]}
    )
    body = S.VectorFieldResponse(**response.json())
    assert body.field.coefficients == ["x", "-y"]


def test_verify_cartan_endpoint(client):
    response = client.post(
        "/verify-cartan", json={"vars": ["x", "y"], "seed": 7, "trials": 25}
    )
    body = S.VerifyCartanResponse(**response.json())
    assert body.passed and body.trials == 25
    # wire format of a single identity entry
    entry = response.json()["identities"][0]
    assert set(entry) == {"identity", "pass", "witness"}


def test_tangent_endpoint(client):
    good = client.post(
        "/tangent", json={"vars": ["x", "y"], "ideal": ["x*y"], "field": "x, 0"}
    )
    body = S.TangentResponse(**good.json())
    assert body.tangent and body.certificates == [["1"]]

    bad = client.post(
        "/tangent", json={"vars": ["x", "y"], "ideal": ["x*y"], "field": "1, 0"}
    )
    body = S.TangentResponse(**bad.json())
    assert not body.tangent
    assert body.generator == "x*y" and body.reduction == "y"


def test_in_j_endpoint(client):
    inside = client.post(
        "/in-j", json={"vars": ["x", "y"], "ideal": ["x*y"], "field": "x*y, 0"}
    )
    assert inside.json() == {"result": True}
    outside = client.post(
        "/in-j", json={"vars": ["x", "y"], "ideal": ["x*y"], "field": "x, 0"}
    )
    assert outside.json() == {"result": False}
    dense = client.post(
        "/in-j",
        json={"vars": ["x", "y"], "ideal": [], "field": "0, 0", "dense_interior": True},
    )
    assert dense.json() == {"result": True}


def test_class_equal_endpoint(client):
    response = client.post(
        "/class-equal",
        json={
            "vars": ["x", "y"],
            "ideal": ["x*y"],
            "left": "x, 0",
            "right": "x + x*y, 0",
        },
    )
    assert response.json() == {"result": True}


def test_cross_pair_endpoint(client):
    response = client.post("/cross-pair", json={"field": "x, 0"})
    assert S.CrossPairResponse(**response.json()).pair == ("1", "0")
    response = client.post("/cross-pair", json={"field": "x*y, y^2"})
    assert S.CrossPairResponse(**response.json()).pair == ("0", "y")


def test_tangent_response_carries_the_class_format(client):
    response = client.post(
        "/tangent", json={"vars": ["x", "y"], "ideal": ["x*y"], "field": "x, 0"}
    )
    blob = response.json()["derivation_class"]
    assert blob == {
        "ideal": ["x*y"],
        "coefficients": ["x", "0"],
        "certificates": [["1"]],
    }


def test_pushforward_endpoint_uses_ring_and_hom_formats(client):
    payload = {
        "source": {"generators": ["x"]},
        "target": {"generators": ["u", "v"]},
        "hom": {"images": ["u^2"]},
        "form": "d(x)",
    }
    response = client.post("/pushforward", json=payload)
    assert S.FormResponse(**response.json()).text == "2*u d(u)"

    quotient = {
        "source": {"generators": ["x", "y"], "ideal": ["x*y"]},
        "target": {"generators": ["t"]},
        "hom": {"images": ["t", "0"]},
        "form": "x*d(x)",
    }
    response = client.post("/pushforward", json=quotient)
    assert S.FormResponse(**response.json()).text == "t d(t)"

    broken = dict(quotient, hom={"images": ["t", "t"]})
    response = client.post("/pushforward", json=broken)
    assert response.status_code == 422


def test_glue_endpoint(client):
    payload = {
        "poset": POSET,
        "vars": ["x"],
        "cover": ["L", "R"],
        "locals": {"L": {"coefficients": ["x^2"]}, "R": {"coefficients": ["x^2"]}},
    }
    response = client.post("/glue", json=payload)
    assert S.GlueResponse(**response.json()).field.coefficients == ["x^2"]

    payload["locals"]["R"] = {"coefficients": ["x^2 + 1"]}
    conflict = client.post("/glue", json=payload)
    assert conflict.status_code == 422
    body = S.ErrorResponse(**conflict.json())
    assert body.error == "Incompatible"
    assert body.witness is not None


def test_presheaf_verify_endpoint_with_families(client):
    family = {name: {"coefficients": ["x^2"]} for name in ("M", "L", "R")}
    cofamily = {name: {"coefficients": ["x + 1"]} for name in ("M", "L", "R")}
    response = client.post(
        "/presheaf-verify",
        json={"poset": POSET, "vars": ["x"], "family": family, "cofamily": cofamily},
    )
    body = S.PresheafVerifyResponse(**response.json())
    assert body.passed and body.restriction_squares
    assert {o.open for o in body.opens} == {"M", "L", "R"}
    assert all(r.passed for o in body.opens for r in o.identities)


def test_presheaf_verify_endpoint_randomized(client):
    response = client.post(
        "/presheaf-verify",
        json={"poset": POSET, "vars": ["x"], "random_trials": 3, "seed": 5},
    )
    body = S.PresheafVerifyResponse(**response.json())
    assert body.passed and body.trials == 3


def test_incompatible_family_is_422(client):
    family = {
        "M": {"coefficients": ["x"]},
        "L": {"coefficients": ["x"]},
        "R": {"coefficients": ["x + 1"]},
    }
    response = client.post(
        "/presheaf-verify",
        json={"poset": POSET, "vars": ["x"], "family": family, "cofamily": family},
    )
    assert response.status_code == 422
    assert S.ErrorResponse(**response.json()).error == "IncompatibleFamily"


def test_domain_error_is_422(client):
    response = client.post(
        "/d", json={"form": "x^70", "vars": ["x"]}
    )
    assert response.status_code == 422
    assert S.ErrorResponse(**response.json()).error == "ExponentOverflow"
