"""CLI: exit codes, error objects, report envelope, reproducibility."""

import csv
import hashlib
import io
import json

import numpy as np
import pytest

import abl_engine
from abl_engine import (
    Observable,
    Projector,
    basis_state,
    observable_to_json,
    projector_from_span,
    state_to_json,
    three_box,
)
from abl_engine.cli import main


@pytest.fixture
def box_files(tmp_path):
    bundle = three_box()
    paths = {}
    payloads = {
        "a": state_to_json(bundle.context.pre),
        "b": state_to_json(bundle.context.post),
        "q": observable_to_json(bundle.variant("fullQ")),
        "qa": observable_to_json(bundle.variant("QA")),
        "qb": observable_to_json(bundle.variant("QB")),
    }
    for name, payload in payloads.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(payload))
        paths[name] = str(path)
    return paths


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_scenario_analytic_report(capsys):
    code, out, err = _run(capsys, ["scenario", "three-box", "--variant", "fullQ"])
    assert code == 0 and err == ""
    report = json.loads(out)
    assert report["tool"] == "abl-engine"
    assert report["version"] == abl_engine.__version__
    assert report["seed"] is None and report["trials"] is None
    for label in "ABC":
        assert abs(report["results"]["abl"][label] - 1.0 / 3.0) < 1e-12


def test_scenario_default_variant_is_first(capsys):
    code, out, _ = _run(capsys, ["scenario", "three-box"])
    assert code == 0
    assert json.loads(out)["inputs"]["scenario"]["variant"] == "fullQ"


def test_scenario_mc_report(capsys):
    code, out, _ = _run(
        capsys,
        ["scenario", "three-box", "--variant", "QA", "--mc", "--trials", "20000", "--seed", "7"],
    )
    assert code == 0
    report = json.loads(out)
    assert report["seed"] == 7 and report["trials"] == 20000
    assert report["results"]["frequencies"]["A"] == 1.0
    assert abs(report["results"]["acceptance_rate"] - 1.0 / 9.0) < 0.02


def test_unknown_scenario_is_validation_error(capsys):
    code, out, err = _run(capsys, ["scenario", "quantum-nonsense"])
    assert code == 2 and out == ""
    assert json.loads(err)["code"] == "ValidationError"


def test_unknown_variant_is_validation_error(capsys):
    code, _, err = _run(capsys, ["scenario", "three-box", "--variant", "QC"])
    assert code == 2
    assert json.loads(err)["code"] == "ValidationError"


def test_abl_command_with_files(capsys, box_files):
    code, out, _ = _run(
        capsys,
        ["abl", "--pre", box_files["a"], "--post", box_files["b"], "--observable", box_files["q"]],
    )
    assert code == 0
    report = json.loads(out)
    for label in "ABC":
        assert abs(report["results"]["abl"][label] - 1.0 / 3.0) < 1e-12
    digest = hashlib.sha256(open(box_files["a"], "rb").read()).hexdigest()
    assert report["inputs"]["pre"]["sha256"] == digest


def test_kastner_command(capsys, box_files):
    code, out, _ = _run(
        capsys,
        ["kastner", "--pre", box_files["a"], "--post", box_files["b"], "--observable", box_files["q"]],
    )
    assert code == 0
    results = json.loads(out)["results"]
    assert results["total"] == pytest.approx(3.0, abs=1e-12)
    assert results["weights"]["A"] == pytest.approx(1.0, abs=1e-12)


def test_inequality_command(capsys, box_files):
    code, out, _ = _run(
        capsys,
        ["inequality", "--pre", box_files["a"], "--post", box_files["b"], "--observable", box_files["q"]],
    )
    assert code == 0
    results = json.loads(out)["results"]
    assert results["p_direct"] == pytest.approx(1.0 / 9.0, abs=1e-12)
    assert results["p_with_Q"] == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_product_rule_command(capsys, box_files):
    code, out, _ = _run(
        capsys,
        [
            "product-rule",
            "--pre", box_files["a"],
            "--post", box_files["b"],
            "--observable", box_files["qa"],
            "--observable", box_files["qb"],
        ],
    )
    assert code == 0
    results = json.loads(out)["results"]
    assert results["violation"] is True
    assert results["x_probability"] == 1.0 and results["y_probability"] == 1.0


def test_decomposition_command(capsys, tmp_path, box_files):
    a = basis_state(3, 0)
    pa = projector_from_span([a], "mine")
    rest = Projector(np.eye(3, dtype=complex) - pa.matrix, "other")
    pre_path = tmp_path / "pre.json"
    pre_path.write_text(json.dumps(state_to_json(a)))
    q_path = tmp_path / "qeq.json"
    q_path.write_text(json.dumps(observable_to_json(Observable((pa, rest)))))
    xbasis = Observable(
        (
            projector_from_span([abl_engine.StateVector.normalized([1, 1, 1])], "b0"),
            projector_from_span([abl_engine.StateVector.normalized([1, -1, 0])], "b1"),
            projector_from_span([abl_engine.StateVector.normalized([1, 1, -2])], "b2"),
        )
    )
    b_path = tmp_path / "basis.json"
    b_path.write_text(json.dumps(observable_to_json(xbasis)))
    code, out, _ = _run(
        capsys,
        ["decomposition", "--pre", str(pre_path), "--observable", str(q_path), "--observable", str(b_path)],
    )
    assert code == 0
    results = json.loads(out)["results"]
    assert results["which_condition"] == "Q_equals_A"
    assert results["conditions_hold"] is True
    assert results["max_residual"] < 1e-9


def test_impossible_post_selection_exit_code(capsys, tmp_path):
    pre = basis_state(3, 0)
    post = basis_state(3, 1)
    pa = projector_from_span([pre], "a")
    rest = Projector(np.eye(3, dtype=complex) - pa.matrix, "rest")
    for name, payload in (
        ("pre", state_to_json(pre)),
        ("post", state_to_json(post)),
        ("q", observable_to_json(Observable((pa, rest)))),
    ):
        (tmp_path / f"{name}.json").write_text(json.dumps(payload))
    code, out, err = _run(
        capsys,
        [
            "abl",
            "--pre", str(tmp_path / "pre.json"),
            "--post", str(tmp_path / "post.json"),
            "--observable", str(tmp_path / "q.json"),
        ],
    )
    assert code == 2 and out == ""
    assert json.loads(err)["code"] == "ImpossiblePostSelection"


def test_missing_file_is_parse_error(capsys, box_files):
    code, _, err = _run(
        capsys,
        ["abl", "--pre", "/nonexistent.json", "--post", box_files["b"], "--observable", box_files["q"]],
    )
    assert code == 2
    assert json.loads(err)["code"] == "ParseError"


def test_invalid_json_is_parse_error(capsys, tmp_path, box_files):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = _run(
        capsys,
        ["abl", "--pre", str(bad), "--post", box_files["b"], "--observable", box_files["q"]],
    )
    assert code == 2
    assert json.loads(err)["code"] == "ParseError"


def test_missing_required_inputs(capsys, box_files):
    code, _, err = _run(capsys, ["abl", "--pre", box_files["a"]])
    assert code == 2
    assert json.loads(err)["code"] == "ValidationError"
    code, _, err = _run(
        capsys,
        ["mc", "--pre", box_files["a"], "--post", box_files["b"], "--observable", box_files["q"], "--trials", "0"],
    )
    assert code == 2
    assert json.loads(err)["code"] == "ValidationError"


def test_mc_reports_are_byte_identical(tmp_path, capsys):
    argv = ["scenario", "three-box", "--variant", "fullQ", "--mc", "--trials", "50000", "--seed", "42"]
    first = tmp_path / "r1.json"
    second = tmp_path / "r2.json"
    assert main(argv + ["--out", str(first)]) == 0
    assert main(argv + ["--out", str(second)]) == 0
    capsys.readouterr()
    assert first.read_bytes() == second.read_bytes()


def test_out_flag_writes_file_not_stdout(tmp_path, capsys):
    path = tmp_path / "report.json"
    code, out, _ = _run(capsys, ["scenario", "three-box", "--out", str(path)])
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["command"] == "scenario"


def test_csv_and_json_values_match(capsys):
    argv = ["scenario", "three-box", "--mc", "--trials", "30000", "--seed", "3"]
    code, json_out, _ = _run(capsys, argv)
    assert code == 0
    code, csv_out, _ = _run(capsys, argv + ["--format", "csv"])
    assert code == 0
    results = json.loads(json_out)["results"]
    rows = list(csv.DictReader(io.StringIO(csv_out)))
    assert {row["label"] for row in rows} == {"A", "B", "C"}
    for row in rows:
        label = row["label"]
        assert float(row["frequency"]) == results["frequencies"][label]
        assert float(row["std_error"]) == results["std_errors"][label]
        assert float(row["analytic_abl"]) == results["analytic"][label]
        assert float(row["z_score"]) == results["z_scores"][label]


def test_csv_for_analytic_command(capsys, box_files):
    code, out, _ = _run(
        capsys,
        [
            "abl",
            "--pre", box_files["a"],
            "--post", box_files["b"],
            "--observable", box_files["q"],
            "--format", "csv",
        ],
    )
    assert code == 0
    rows = {row["key"]: row["value"] for row in csv.DictReader(io.StringIO(out))}
    assert float(rows["abl.A"]) == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert "marginal_with_Q" in rows


def test_run_config_direct_use(tmp_path):
    from abl_engine.cli import RunConfig, run

    out = tmp_path / "direct.json"
    config = RunConfig(command="scenario", scenario="three-box", variant="QB", out_path=str(out))
    assert run(config) == 0
    assert json.loads(out.read_text())["results"]["abl"]["B"] == 1.0
