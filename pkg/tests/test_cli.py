import json
import math

import pytest

from services import settings
from services.main import EXIT_CAP, EXIT_OK, EXIT_VALIDATION, dispatch

Z3 = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def run(capsys, *argv):
    code = dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def error_of(err: str) -> dict:
    """The JSON error line; log records may precede it"""
    return json.loads(err.strip().splitlines()[-1])


def test_stability_report(capsys, lattice_file):
    path = lattice_file(Z3, "z3.json")
    code, out, _ = run(capsys, "stability", "--in", path)
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["alpha"] == 1.0
    assert report["stable"]
    assert report["mode"] == "exact"
    meta = report["meta"]
    assert meta["tool"] == settings.TOOL_NAME
    assert meta["config"]["command"] == "stability"
    assert meta["config"]["inputs"] == [path]
    assert meta["theorem"]


def test_named_action_next_to_default(capsys, lattice_file):
    path = lattice_file([[1, 0], [0, 4]], "skew.json")
    code, out, _ = run(capsys, "stability", "alpha-k", "--in", path, "--k", "1")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["alpha_k"] == pytest.approx(1.0)
    assert report["meta"]["config"]["action"] == "alpha-k"


def test_default_command_requires_input(capsys):
    code, _, err = run(capsys, "stability")
    assert code == EXIT_VALIDATION
    assert error_of(err)["kind"] == "validation"


def test_rankin(capsys):
    code, out, _ = run(capsys, "measure", "rankin", "--n", "2", "--k", "1")
    assert code == EXIT_OK
    assert json.loads(out)["B"] == pytest.approx(12 / math.pi)


def test_repeat_runs_are_byte_identical(capsys):
    argv = ["measure", "stable-fraction", "--dim", "2", "--samples", "200", "--seed", "9"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    assert json.loads(first)["meta"]["seed"] == 9


def test_pretty_format_and_out_file(capsys, lattice_file, tmp_path):
    path = lattice_file(Z3, "z3.json")
    target = tmp_path / "report.json"
    code, out, _ = run(capsys, "stability", "--in", path, "--format", "pretty", "--out", str(target))
    assert code == EXIT_OK
    assert out == ""
    text = target.read_text(encoding="utf-8")
    assert text.startswith("{\n  ")
    assert json.loads(text)["alpha"] == 1.0


def test_bad_lattice_file(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"basis": [[1, 0], [0]]}))
    code, out, err = run(capsys, "stability", "--in", str(path))
    assert code == EXIT_VALIDATION
    assert out == ""
    assert error_of(err)["kind"] == "validation"


def test_missing_lattice_file(capsys, tmp_path):
    code, _, err = run(capsys, "covrad", "--in", str(tmp_path / "missing.json"))
    assert code == EXIT_VALIDATION
    assert "not found" in error_of(err)["error"]


def test_non_unimodular_input(capsys, lattice_file):
    path = lattice_file([[2, 0], [0, 1]], "det2.json")
    code, _, err = run(capsys, "stability", "--in", path)
    assert code == EXIT_VALIDATION
    assert error_of(err)["kind"] == "validation"


def test_unknown_flag(capsys):
    code, _, _ = run(capsys, "measure", "rankin", "--n", "2", "--k", "1", "--bogus")
    assert code == EXIT_VALIDATION


def test_dimension_cap(capsys, lattice_file):
    n = settings.GON_ALPHA_DIM_CAP + 1
    identity = [[int(i == j) for j in range(n)] for i in range(n)]
    code, _, err = run(capsys, "stability", "--in", lattice_file(identity, "big.json"))
    assert code == EXIT_CAP
    assert error_of(err)["kind"] == "dimension_cap"


def test_verify_then_check_certificate(capsys, tmp_path):
    cert = tmp_path / "cert.json"
    code, _, _ = run(capsys, "minkowski", "verify", "--dim", "2", "--out", str(cert))
    assert code == EXIT_OK
    written = json.loads(cert.read_text())
    assert written["covered"]
    assert written["meta"]["config"]["options"]["dim"] == 2
    code, out, _ = run(capsys, "minkowski", "check-cert", str(cert), "--samples", "200")
    assert code == EXIT_OK
    report = json.loads(out)
    assert report["valid"]
    assert report["meta"]["config"]["inputs"] == [str(cert)]


@pytest.mark.parametrize("variant", ["lemma52", "literal"])
def test_verify_accepts_both_variants(capsys, tmp_path, variant):
    cert = tmp_path / f"cert-{variant}.json"
    code, _, _ = run(capsys, "minkowski", "verify", "--dim", "2", "--variant", variant, "--out", str(cert))
    assert code == EXIT_OK
    written = json.loads(cert.read_text())
    assert written["variant"] == variant


def test_verify_defaults_to_lemma52(capsys, tmp_path):
    cert = tmp_path / "cert.json"
    run(capsys, "minkowski", "verify", "--dim", "2", "--out", str(cert))
    written = json.loads(cert.read_text())
    assert written["variant"] == "lemma52"
    assert written["covered"]


def test_verify_deadline_emits_partial(capsys):
    code, out, err = run(capsys, "minkowski", "verify", "--dim", "3", "--deadline", "1e-9")
    assert code == EXIT_CAP
    assert error_of(err)["kind"] == "deadline"
    partial = json.loads(out)
    assert not partial["complete"]
    assert not partial["covered"]


def test_bad_global_flag_values(capsys):
    code, _, err = run(capsys, "measure", "thresholds", "--dim", "5", "--c1", "-1")
    assert code == EXIT_VALIDATION
    assert "--c1" in error_of(err)["error"]


def test_version(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == EXIT_OK
    assert settings.TOOL_VERSION in out
