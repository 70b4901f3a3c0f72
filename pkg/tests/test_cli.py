import json
import os
from pathlib import Path

import pytest

from moyaldirac.cli import main
from moyaldirac.report import ConfigError, RunConfig, build_report, comparable, to_json

GOLDEN = Path(__file__).parent / "golden"
CONFIGS = sorted((GOLDEN / "configs").glob("*.json"))
SYMBOLIC = [c for c in CONFIGS if json.loads(c.read_text())["command"] != "wigner"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def report_for(config_path):
    cfg = RunConfig.from_mapping(json.loads(config_path.read_text()))
    report, code = build_report(cfg)
    return report, code


# --- bracket ----------------------------------------------------------------------


@pytest.mark.parametrize(
    "args,value",
    [(["pb", "q", "p"], "1"), (["moyal", "q^3", "p^3"], "9*q^2*p^2 - 3/2*hbar^2"), (["epb", "c0", "cb0"], "-i")],
)
def test_bracket_command(args, value, capsys):
    code, out, _ = run(["bracket", *args], capsys)
    assert code == 0
    assert json.loads(out)["results"]["value"] == value


def test_bracket_numeric_hbar(capsys):
    code, out, _ = run(["bracket", "moyal", "q^3", "p^3", "--hbar", "2"], capsys)
    assert json.loads(out)["results"]["value"] == "9*q^2*p^2 - 6"


def test_bracket_kind_error(capsys):
    code, out, err = run(["bracket", "pb", "l_q", "p"], capsys)
    assert code == 1
    assert json.loads(out)["error"]["type"] == "BracketInputError"
    assert "lambda" in err


def test_parse_error_offset(capsys):
    code, out, err = run(["bracket", "pb", "q^-1", "p"], capsys)
    assert code == 1
    assert json.loads(out)["error"]["offset"] == 3
    assert "offset 3" in err


# --- exit-code contract ---------------------------------------------------------------------


def test_dirac_ho_text(capsys):
    code, out, _ = run(["dirac", "--hamiltonian", "1/2*(p^2+q^2)", "--observables", "q,p", "--format", "text"], capsys)
    assert code == 0
    assert "results.evolutions[0].value: p" in out
    assert "results.evolutions[1].value: -q" in out


def test_dirac_quartic(capsys):
    code, out, _ = run(["dirac", "--hamiltonian", "1/2*p^2+1/4*q^4", "--observables", "q,p"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert [e["value"] for e in rep["results"]["evolutions"]] == ["3/2*p", "-q^3"]


def test_dirac_free_particle(capsys):
    code, out, _ = run(["dirac", "--hamiltonian", "1/2*p^2", "--observables", "q"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["results"]["evolutions"][0]["value"] == "p"
    assert rep["results"]["verdicts"]["first_class_present"] is True


def test_compare_ho_equal(capsys):
    code, out, _ = run(["compare", "--hamiltonian", "1/2*(p^2+q^2)"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["results"]["verdict"] == "equal"
    assert len(rep["results"]["comparisons"]) == 14


def test_compare_quartic_divergence(capsys):
    code, out, _ = run(["compare", "--hamiltonian", "1/2*p^2+1/4*q^4", "--observables", "q"], capsys)
    rep = json.loads(out)
    assert code == 2
    assert rep["results"]["verdict"] == "different"
    assert rep["results"]["comparisons"][0]["difference"] == "1/2*p"


def test_coeffs_exit_codes(capsys):
    code, out, _ = run(["coeffs", "--hamiltonian", "1/2*p^2+1/4*q^4"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["results"]["orders"][0]["kappa"] == "1/24"
    assert rep["results"]["orders"][0]["ratio_to_nominal"] == "1/4"
    code, _, _ = run(["coeffs", "--hamiltonian", "q^5+p^2", "--order", "4"], capsys)
    assert code == 2
    code, _, _ = run(["coeffs", "--hamiltonian", "1/2*p^2+1/4*q^4", "--basis-degree", "2"], capsys)
    assert code == 1


def test_wigner_level0(capsys):
    code, out, _ = run(["wigner", "--level", "0"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert all(c["passed"] for c in rep["results"]["checks"])


def test_wigner_failed_check_exit_1(capsys):
    # coarse q grid: the finite-difference identity misses its tolerance
    code, out, _ = run(["wigner", "--level", "0", "--nq", "129", "--np", "65"], capsys)
    rep = json.loads(out)
    assert code == 1
    assert not next(c for c in rep["results"]["checks"] if c["name"] == "rhs_identity")["passed"]


def test_wigner_csv(tmp_path, capsys):
    out_path = tmp_path / "grid.csv"
    code, _, _ = run(["wigner", "--nq", "129", "--np", "65", "--extent", "9", "--format", "csv",
                      "--out", str(out_path)], capsys)
    lines = out_path.read_text().splitlines()
    assert lines[0] == "q,p,rho" and len(lines) == 1 + 129 * 65
    summary = json.loads((tmp_path / "grid.csv.json").read_text())
    assert summary["command"] == "wigner" and summary["exit_code"] == code


def test_config_errors(tmp_path, capsys):
    assert run(["dirac", "--hamiltonian", "q", "--hbar", "-1"], capsys)[0] == 1
    assert run(["dirac"], capsys)[0] == 1
    assert run(["dirac", "--hamiltonian", "q", "--format", "csv"], capsys)[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text('{"command": "dirac", "hamiltonian": "q", "colour": 1}')
    assert run(["dirac", "--config", str(bad)], capsys)[0] == 1
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"command": "wigner", "nq": 10})
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"command": "coeffs", "hamiltonian": "q", "order": 3})


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "dirac", "hamiltonian": "1/2*(p^2+q^2)", "observables": ["q"]}))
    code, out, _ = run(["dirac", "--config", str(cfg), "--observables", "p"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["config"]["observables"] == ["p"]
    assert rep["results"]["evolutions"][0]["value"] == "-q"


def test_numeric_hbar_dirac(capsys):
    code, out, _ = run(["dirac", "--hamiltonian", "1/2*p^2+1/4*q^4", "--hbar", "1/2", "--observables", "q"], capsys)
    rep = json.loads(out)
    assert rep["results"]["primary_constraints"] == ["p - 1/2*l_q"]
    assert rep["results"]["evolutions"][0]["value"] == "3/2*p"


def test_out_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run(["lift", "--hamiltonian", "1/2*p^2+1/4*q^4", "--out", str(path)], capsys)
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["results"]["corrections"][0]["M"] == "-6*q*l_p^3"


# --- determinism and golden files -------------------------------------------------------------


@pytest.mark.parametrize("config", CONFIGS, ids=lambda p: p.stem)
def test_determinism(config):
    a, code_a = report_for(config)
    b, code_b = report_for(config)
    assert to_json(comparable(a)) == to_json(comparable(b))
    assert code_a == code_b


@pytest.mark.parametrize("config", SYMBOLIC, ids=lambda p: p.stem)
def test_golden(config):
    report, _ = report_for(config)
    text = to_json(comparable(report))
    golden = GOLDEN / f"{config.stem}.json"
    if os.environ.get("UPDATE_GOLDEN"):
        golden.write_text(text)
    assert golden.exists(), f"missing golden file {golden.name}; run with UPDATE_GOLDEN=1"
    assert text == golden.read_text()


def test_report_layout():
    report, _ = report_for(GOLDEN / "configs" / "ho_dirac.json")
    assert list(report) == ["schema", "tool", "version", "command", "config", "results", "exit_code", "timings"]
    assert report["schema"] == 1
    assert "timings" not in comparable(report)
