import json

import pytest
from click.testing import CliRunner

from cartan.cli import main


@pytest.fixture
def runner():
    return CliRunner()


POSET = {
    "opens": [
        {"name": "M", "boxes": [[[-2, 2]]]},
        {"name": "L", "boxes": [[[-2, 1]]]},
        {"name": "R", "boxes": [[[-1, 2]]]},
    ],
    "leq": [["L", "M"], ["R", "M"]],
}


def test_d_verb(runner):
    result = runner.invoke(main, ["d", "x^2*d(y)", "--vars", "x,y"])
    assert result.exit_code == 0
    assert result.output.strip() == "2*x d(x)^d(y)"


def test_parse_verb_roundtrip(runner):
    result = runner.invoke(main, ["parse", "y + x*x", "--vars", "x,y"])
    assert result.exit_code == 0
    assert result.output.strip() == "x^2 + y"


def test_parse_syntax_error_exits_2(runner):
    result = runner.invoke(main, ["parse", "x +", "--vars", "x"])
    assert result.exit_code == 2
    diagnostic = json.loads(result.stderr)
    assert diagnostic["error"] == "ParseError"
    assert diagnostic["position"] == 3


def test_wedge_verb(runner):
    result = runner.invoke(main, ["wedge", "x*d(y)", "y*d(x)", "--vars", "x,y"])
    assert result.output.strip() == "-x*y d(x)^d(y)"


def test_contract_and_lie(runner):
    result = runner.invoke(main, ["contract", "d(x)^d(y)", "--vf", "1,0", "--vars", "x,y"])
    assert result.output.strip() == "d(y)"
    result = runner.invoke(main, ["lie", "x*d(y)", "--vf", "1,0", "--vars", "x,y"])
    assert result.output.strip() == "d(y)"


def test_bracket_verb(runner):
    result = runner.invoke(main, ["bracket", "--vf", "0,x", "--wf", "y,0", "--vars", "x,y"])
    assert result.output.strip() == "x, -y"


def test_verify_cartan_passes(runner):
    result = runner.invoke(
        main, ["verify-cartan", "--vars", "x,y,z", "--seed", "7", "--trials", "20"]
    )
    assert result.exit_code == 0
    assert result.output.count("pass") == 5


def test_verify_cartan_seed_determinism(runner):
    args = ["verify-cartan", "--vars", "x,y", "--seed", "3", "--trials", "10", "--json"]
    first = runner.invoke(main, args)
    second = runner.invoke(main, args)
    assert first.output == second.output


def test_tangent_verb_exit_codes(runner):
    good = runner.invoke(main, ["tangent", "--vf", "x,0", "--ideal", "x*y", "--vars", "x,y"])
    assert good.exit_code == 0
    bad = runner.invoke(main, ["tangent", "--vf", "1,0", "--ideal", "x*y", "--vars", "x,y"])
    assert bad.exit_code == 1
    diagnostic = json.loads(bad.stderr)
    assert diagnostic["error"] == "NotTangent"
    assert diagnostic["reduction"] == "y"


def test_in_j_verb(runner):
    result = runner.invoke(main, ["in-j", "--vf", "x*y,0", "--ideal", "x*y", "--vars", "x,y"])
    assert result.output.strip() == "true"
    result = runner.invoke(main, ["in-j", "--vf", "x,0", "--ideal", "x*y", "--vars", "x,y"])
    assert result.output.strip() == "false"


def test_class_equal_verb(runner):
    result = runner.invoke(
        main,
        ["class-equal", "--vf", "x,0", "--wf", "x + x*y,0", "--ideal", "x*y", "--vars", "x,y"],
    )
    assert result.output.strip() == "true"


def test_cross_pair_verb(runner):
    result = runner.invoke(main, ["cross-pair", "--ideal", "x*y", "--vf", "x,0"])
    assert result.exit_code == 0
    assert result.output.strip() == '("1", "0")'


def test_glue_verb(runner, tmp_path):
    poset_file = tmp_path / "poset.json"
    poset_file.write_text(json.dumps(POSET))
    family_file = tmp_path / "family.json"
    family_file.write_text(
        json.dumps({"L": {"coefficients": ["x^2"]}, "R": {"coefficients": ["x^2"]}})
    )
    result = runner.invoke(
        main,
        ["glue", "--poset", str(poset_file), "--family", str(family_file), "--vars", "x"],
    )
    assert result.exit_code == 0
    assert result.output.strip() == "x^2"

    family_file.write_text(
        json.dumps({"L": {"coefficients": ["x^2"]}, "R": {"coefficients": ["x^2 + 1"]}})
    )
    conflict = runner.invoke(
        main,
        ["glue", "--poset", str(poset_file), "--family", str(family_file), "--vars", "x"],
    )
    assert conflict.exit_code == 1
    assert json.loads(conflict.stderr)["error"] == "Incompatible"


def test_presheaf_verify_verb(runner, tmp_path):
    poset_file = tmp_path / "poset.json"
    poset_file.write_text(json.dumps(POSET))
    result = runner.invoke(
        main,
        [
            "presheaf-verify",
            "--poset", str(poset_file),
            "--vars", "x",
            "--random", "3",
            "--seed", "11",
        ],
    )
    assert result.exit_code == 0
    assert "restriction squares: pass" in result.output

    family_file = tmp_path / "family.json"
    family_file.write_text(
        json.dumps({name: {"coefficients": ["x^2"]} for name in ("M", "L", "R")})
    )
    explicit = runner.invoke(
        main,
        [
            "presheaf-verify",
            "--poset", str(poset_file),
            "--family", str(family_file),
            "--family2", str(family_file),
            "--vars", "x",
        ],
    )
    assert explicit.exit_code == 0


def test_missing_file_exits_2(runner):
    result = runner.invoke(main, ["glue", "--poset", "missing.json", "--family", "also-missing.json", "--vars", "x"])
    assert result.exit_code == 2
    assert json.loads(result.stderr)["error"] == "IOError"


def test_json_output_validates(runner):
    from cartan.service import schemas as S

    result = runner.invoke(main, ["d", "x^2*d(y)", "--vars", "x,y", "--json"])
    payload = json.loads(result.output)
    model = S.FormResponse(**payload)
    assert model.text == "2*x d(x)^d(y)"
    assert model.form.components[0].terms[0].idx == [0, 1]
