import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from classext.cli import main

DATA = Path(__file__).parent / "data"


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def body(result):
    return json.loads(result.stdout)


def test_classgroup_quadratic():
    r = run("classgroup", "-D", -20)
    assert r.exit_code == 0
    doc = body(r)
    assert doc["order"] == "2" and doc["factors"] == ["2"]
    r = run("-v", 0, "classgroup", "-D", -4)
    assert body(r) == {"factors": [], "order": "1"}


def test_classgroup_tower_leg():
    r = run("classgroup", "--ext", DATA / "z3i_tower.json", "--leg", "AB")
    assert r.exit_code == 0 and body(r)["order"] == "2"
    r = run("classgroup", "--ext", DATA / "z3i_tower.json", "--leg", "BC")
    assert body(r)["order"] == "1"
    assert run("classgroup", "--ext", DATA / "z3i_tower.json").exit_code == 2


def test_classgroup_input_errors():
    assert run("classgroup").exit_code == 2
    assert run("classgroup", "-D", -21).exit_code == 2
    r = run("classgroup", "--ext", "{not json")
    assert r.exit_code == 2
    assert "error" in json.loads(r.stderr)


def test_verify_single_instances():
    r = run("verify", "tower", "--file", DATA / "z3i_tower.json")
    assert r.exit_code == 0 and body(r)["status"] == "pass"
    r = run("verify", "pic-seq", "--A", -36, "--B", -4)
    assert r.exit_code == 0
    assert any(w.get("kernel_order") == "2" for w in body(r)["witnesses"])
    ext = '{"B": {"kind": "product", "factors": [{"kind": "zmod", "n": "2"}, {"kind": "zmod", "n": "2"}]}, "A": "prime"}'
    for sel in ("units-seq", "tensor-square", "avoidance"):
        assert run("verify", sel, "--file", ext).exit_code == 0, sel


def test_verify_batteries():
    r = run("verify", "avoidance", "--exhaustive", "--max-size", 64, "--count", 5)
    assert r.exit_code == 0
    r = run("verify", "semilocal", "--count", 5, "--max-size", 128)
    assert r.exit_code == 0


def test_verify_rejects_oversized_and_unknown_input():
    big = '{"B": {"kind": "zmod", "n": "1000"}, "A": "prime"}'
    assert run("verify", "units-seq", "--file", big, "--max-size", 64).exit_code == 2
    assert run("verify", "nonsense").exit_code == 2
    assert run("verify", "pic-seq", "--file", '{"B": {"kind": "quad_order"}}').exit_code == 2


def test_principalize_quadratic():
    r = run("principalize", '{"ext": {"A": {"kind": "quad_order", "D": "-20"}, "B": {"kind": "quad_field", "D": "-20"}}, "gens": [["2"]]}')
    assert r.exit_code == 0
    assert body(r)["verdict"] == "principal: generator 2"
    r = run("principalize", DATA / "z5_two.json")
    assert r.exit_code == 0
    assert body(r)["verdict"] == "non-principal: reduced form (2,2,3)"


def test_principalize_finite_and_not_invertible():
    r = run("-v", 2, "principalize", DATA / "finite_ideal.json")
    assert r.exit_code == 0
    doc = body(r)
    assert doc["principal"] is True and "certificate" in doc
    conductor = '{"ext": {"A": {"kind": "quad_order", "D": "-12"}, "B": {"kind": "quad_field", "D": "-12"}}, "gens": [["2"], ["1", "1"]]}'
    r = run("principalize", conductor)
    assert r.exit_code == 1 and body(r)["invertible"] is False


def test_output_file_and_determinism(tmp_path):
    out = tmp_path / "r.json"
    args = ("--seed", 7, "verify", "semilocal", "--count", 4, "--max-size", 64)
    r1 = run("--output", out, *args)
    text = out.read_text()
    r2 = run(*args)
    assert r1.exit_code == r2.exit_code == 0
    assert r1.stdout == r2.stdout
    assert text.strip() == r1.stdout.strip()


def test_verbosity_levels():
    quiet = body(run("-v", 0, "verify", "pic-seq", "--A", -20))
    loud = body(run("-v", 2, "verify", "pic-seq", "--A", -20))
    assert "witnesses" not in quiet and quiet["status"] == "pass"
    assert "instance" in loud and loud["witnesses"]


@pytest.mark.parametrize("doc", ['{"ext": {"B": {"kind": "galois", "p": "2", "modulus": ["1", "0"]}}, "gens": [["1", "0"]]}',
                                 '{"ext": {"B": {"kind": "mystery"}}, "gens": [["1"]]}',
                                 '{"gens": [["1"]]}'])
def test_principalize_input_errors(doc):
    assert run("principalize", doc).exit_code == 2
