import json
import re
from pathlib import Path

import jsonschema
import pytest

from damc.cli import main

MODELS = Path(__file__).resolve().parent.parent / "models"
SCHEMA = json.loads(
    (Path(__file__).resolve().parent.parent / "src/damc/witness_schema.json").read_text()
)


def run_cli(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_witness_exit_code(capsys):
    code, out, _ = run_cli(capsys, "verify", str(MODELS / "b1.ddsa"), "--prop", "F (y > 5)")
    assert code == 0
    assert "witness found" in out
    assert "strategy: MC" in out


def test_verify_no_witness_exit_code(capsys):
    code, out, _ = run_cli(
        capsys, "verify", str(MODELS / "b1.ddsa"), "--prop", "F (y > 5 & y < 0)"
    )
    assert code == 1
    assert "no witness" in out


def test_verify_inconclusive_exit_code(capsys, tmp_path):
    # integer domain with a general-linear guard: no criterion applies
    src = (MODELS / "b4.ddsa").read_text().replace("domain rat", "domain int")
    p = tmp_path / "b4int.ddsa"
    p.write_text(src)
    code, out, _ = run_cli(capsys, "verify", str(p), "--prop", "F (s > 5)")
    assert code == 2
    assert "inconclusive" in out


def test_verify_usage_error(capsys, tmp_path):
    p = tmp_path / "broken.ddsa"
    p.write_text("domain rat\nvars x\n")
    code, _, err = run_cli(capsys, "verify", str(p), "--prop", "F (x > 0)")
    assert code == 3
    assert "error:" in err


def test_verify_parse_error_in_property(capsys):
    code, _, err = run_cli(capsys, "verify", str(MODELS / "b1.ddsa"), "--prop", "F (y >")
    assert code == 3


def test_json_output_validates_against_schema(capsys):
    code, out, _ = run_cli(
        capsys, "verify", str(MODELS / "b1.ddsa"), "--prop", "F (y > 5)", "--json"
    )
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert doc["verdict"] == "witness"
    assert doc["run"][0]["assign"] == {"x": "0", "y": "0"}
    assert len(doc["word"]) == len(doc["run"])


def test_json_no_witness_validates(capsys):
    code, out, _ = run_cli(
        capsys, "verify", str(MODELS / "b1.ddsa"), "--prop", "F (y > 5 & y < 0)", "--json"
    )
    assert code == 1
    jsonschema.validate(json.loads(out), SCHEMA)


def test_dot_outputs(capsys, tmp_path):
    cg = tmp_path / "cg.dot"
    nfa = tmp_path / "nfa.dot"
    prod = tmp_path / "prod.dot"
    code, _, _ = run_cli(
        capsys,
        "verify",
        str(MODELS / "b1.ddsa"),
        "--prop",
        "F (y > 5)",
        "--dot-cg",
        str(cg),
        "--dot-nfa",
        str(nfa),
        "--dot-product",
        str(prod),
    )
    assert code == 0
    for f, name in ((cg, "constraint_graph"), (nfa, "nfa"), (prod, "product")):
        text = f.read_text()
        assert text.startswith(f"digraph {name} {{")
        assert text.rstrip().endswith("}")
        # crude DOT well-formedness: every edge line is quoted-label arrow syntax
        for line in text.splitlines():
            if "->" in line:
                assert re.match(r'\s*\w+ -> \w+ \[label=".*"\];', line)
    assert prod.read_text().count("->") == 12  # edges of the 9-node product


def test_summary_subcommand(capsys):
    code, out, _ = run_cli(capsys, "summary", str(MODELS / "auction.ddsa"))
    assert code == 0
    assert "var-compose" in out
    code2, out2, _ = run_cli(
        capsys, "summary", str(MODELS / "b3.ddsa"), "--json"
    )
    assert code2 == 0
    assert json.loads(out2)["summary"] == "GC(K=4)"


def test_oracle_subcommand(capsys):
    code, out, _ = run_cli(
        capsys,
        "oracle",
        str(MODELS / "b1.ddsa"),
        "--prop",
        "F (y > 5)",
        "--max-len",
        "4",
        "--grid-max",
        "8",
    )
    assert code == 0
    assert "witness run:" in out
    code2, out2, _ = run_cli(
        capsys,
        "oracle",
        str(MODELS / "b1.ddsa"),
        "--prop",
        "F (y > 5 & y < 0)",
        "--max-len",
        "3",
    )
    assert code2 == 1


def test_domain_override(capsys):
    code, out, _ = run_cli(
        capsys, "summary", str(MODELS / "b1.ddsa"), "--domain", "int", "--json"
    )
    assert code == 0
    assert json.loads(out)["summary"].startswith("GC(")


def test_property_from_file(capsys, tmp_path):
    p = tmp_path / "prop.ltlf"
    p.write_text("F (y > 5)\n")
    code, _, _ = run_cli(capsys, "verify", str(MODELS / "b1.ddsa"), "--prop", str(p))
    assert code == 0
