import json
import subprocess
import sys

import pytest

from hyperce.catalog import catalog_list
from hyperce.cli import (
    EXIT_CHECK,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_PRECONDITION,
    InstanceSpec,
    ParseError,
    main,
    run_pipeline,
)

SKEWED = {
    "blocks": [[0, 4, 5], [1, 2, 3]],
    "weights": [["1/3", "1/3", "1/3"], ["1/2", "1/4", "1/4"]],
}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


# --- pipeline ------------------------------------------------------------------------

def test_pipeline_worked_example():
    spec = InstanceSpec.from_dict({"group": "S3", "expectation": "double_coset",
                                   "params": {"subgroup": ["e", "(12)"]}, "samples": 32})
    code, report = run_pipeline(spec)
    assert code == EXIT_OK and report["status"] == "ok"
    assert report["size"] == 2 and report["is_cp"] is True
    assert report["hypergroup"]["c"][1][1] == ["1/2", "1/2"]


def test_pipeline_group_case():
    code, report = run_pipeline(InstanceSpec.from_dict({"group": "Z4", "samples": 8}))
    assert code == EXIT_OK
    c = report["hypergroup"]["c"]
    assert all(c[s][t][r] == ("1" if (s + t) % 4 == r else "0") for s in range(4) for t in range(4) for r in range(4))


def test_pipeline_skewed_precondition():
    code, report = run_pipeline(InstanceSpec.from_dict({"group": "S3", "expectation": SKEWED}))
    assert code == EXIT_PRECONDITION
    assert report["stage"] == "verify_hypergroup_conditions"
    assert report["detail"]["checks"]["a_comultiplication"]["passed"] is False


def test_spec_parse_errors():
    with pytest.raises(ParseError):
        InstanceSpec.from_dict({"expectation": "id"})
    with pytest.raises(ParseError):
        InstanceSpec.from_dict({"group": "S3", "checks": ["bogus"]})
    code, report = run_pipeline(InstanceSpec.from_dict({"group": "S7"}))
    assert code == EXIT_PARSE and report["status"] == "parse_error"
    code, _ = run_pipeline(InstanceSpec.from_dict({"group": "S3", "expectation": "double_coset"}))
    assert code == EXIT_PARSE


def test_builder_params_validated():
    spec = InstanceSpec.from_dict({"group": "S3", "expectation": "double_coset",
                                   "params": {"subgroup": ["e", "(123)"]}})
    code, report = run_pipeline(spec)
    assert code == EXIT_PRECONDITION and report["stage"] == "build_expectation"


def test_failed_check_exits_one(monkeypatch):
    import hyperce.cli as cli
    from hyperce.fourier import CPCertificate
    monkeypatch.setattr(cli, "takesaki_cp_certificate",
                        lambda h, tol: CPCertificate(False, -1.0, 8, 1.0, True))
    code, report = run_pipeline(InstanceSpec.from_dict({"group": "Z2", "checks": ["cp"]}))
    assert code == EXIT_CHECK and report["status"] == "check_failed"


# --- subcommands ---------------------------------------------------------------------

def test_catalog(capsys):
    code, doc = run(capsys, "catalog")
    assert code == EXIT_OK and doc == json.loads(json.dumps(catalog_list()))
    for name in [f"Z{n}" for n in range(2, 13)] + ["S3", "S4", "D4", "Q8"]:
        assert name in doc["groups"]
    assert set(doc["builders"]) >= {"id", "double_coset", "conjugation", "automorphism_orbit"}


def test_construct_z3(capsys):
    code, doc = run(capsys, "construct", "--group", "Z3")
    assert code == EXIT_OK
    assert doc["c"] == [[["1" if (s + t) % 3 == r else "0" for r in range(3)] for t in range(3)] for s in range(3)]
    assert doc["haar"] == ["1"] * 3 and doc["modular"] == ["1"] * 3


def test_construct_s3_conjugation(capsys):
    code, doc = run(capsys, "construct", "--group", "S3", "--expectation", "conjugation")
    assert code == EXIT_OK
    assert doc["c"][1][1] == ["1/3", "0", "2/3"]
    assert doc["c"][2][2] == ["1/2", "0", "1/2"]
    assert doc["c"][1][2] == ["0", "1", "0"]
    assert doc["haar"] == ["1", "3", "2"]


def test_verify_table_round_trip(capsys, tmp_path):
    _, doc = run(capsys, "construct", "--group", "S3", "--expectation", "conjugation")
    path = tmp_path / "table.json"
    path.write_text(json.dumps(doc))
    code, out = run(capsys, "verify", "--table", str(path))
    assert code == EXIT_OK and out["djs"]["passed"] and out["dual"]["passed"]
    doc["involution"] = [0, 2, 1]
    path.write_text(json.dumps(doc))
    code, out = run(capsys, "verify", "--table", str(path))
    assert code == EXIT_CHECK and not out["dual"]["checks"]["H6_involution"]["passed"]


def test_validate_and_reps(capsys):
    code, doc = run(capsys, "validate", "--group", "S3", "--expectation", "double_coset",
                    "--params", '{"subgroup": ["e", "(12)"]}')
    assert code == EXIT_OK and doc["status"] == "ok"
    code, doc = run(capsys, "reps", "--group", "S3", "--expectation", "double_coset",
                    "--params", '{"subgroup": ["e", "(12)"]}')
    assert code == EXIT_OK
    assert doc["left"][1] == [["0", "1"], ["1/2", "1/2"]]
    assert len(doc["characters"]) == 2


def test_cp_check_and_norms(capsys):
    code, doc = run(capsys, "cp-check", "--group", "Z4", "--seed", "3")
    assert code == EXIT_OK and doc["is_cp"] is True and doc["matrix_dim"] == 64 and doc["seed"] == 3
    code, doc = run(capsys, "norms", "--group", "S3", "--expectation", "conjugation", "--samples", "16")
    assert code == EXIT_OK and doc["passed"] and doc["worst_submult_ratio"] <= 1 + 1e-9


def test_inline_skewed_exits_three(capsys):
    code, doc = run(capsys, "report", "--group", "S3", "--expectation", json.dumps(SKEWED))
    assert code == EXIT_PRECONDITION and doc["stage"] == "verify_hypergroup_conditions"


def test_bad_json_exits_two(capsys):
    code, doc = run(capsys, "report", "--group", "S3", "--params", "{not json")
    assert code == EXIT_PARSE and doc["status"] == "parse_error"
    code, _ = run(capsys, "report")
    assert code == EXIT_PARSE


def test_inline_group(capsys):
    table = json.dumps({"order": 2, "table": [[0, 1], [1, 0]]})
    code, doc = run(capsys, "construct", "--group", table)
    assert code == EXIT_OK and doc["size"] == 2
    code, doc = run(capsys, "validate", "--group", json.dumps({"order": 2, "table": [[0, 1], [1, 1]]}))
    assert code == EXIT_PRECONDITION and doc["stage"] == "validate_group"


def test_output_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    code = main(["cp-check", "--group", "Z3", "--out", str(out)])
    assert code == EXIT_OK and capsys.readouterr().out == ""
    assert json.loads(out.read_text())["is_cp"] is True


def test_report_byte_identical(tmp_path):
    args = [sys.executable, "-m", "hyperce", "report", "--group", "S3", "--expectation", "conjugation",
            "--samples", "16", "--seed", "7"]
    a = subprocess.run(args, capture_output=True, check=True).stdout
    b = subprocess.run(args, capture_output=True, check=True).stdout
    assert a == b
    assert json.loads(a)["seed"] == 7
