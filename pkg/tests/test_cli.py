import json
import subprocess
import sys

import pytest

from kagome_mbqc import cli


def _report(capsys, argv):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, json.loads(out.out), out.err


def _checks(report):
    return {c["name"]: c["passed"] for c in report["checks"]}


def test_verify_pulses_reports_misprint(capsys):
    code, rep, err = _report(capsys, ["verify-pulses"])
    checks = _checks(rep)
    assert code == 1 and not rep["passed"]
    assert not checks["pulse1_unitary_entrywise"]
    assert checks["pulse1_effective_observable"]
    assert checks["pulse2_unitary_entrywise"] and checks["pulse2_projected_states"]
    assert "FAIL  pulse1_unitary_entrywise" in err
    assert rep["schema_version"] == cli.SCHEMA_VERSION


def test_verify_gates_passes(capsys):
    code, rep, _ = _report(capsys, ["verify-gates"])
    assert code == 0 and rep["passed"]


def test_verify_peps_passes(capsys):
    code, rep, _ = _report(capsys, ["verify-peps", "--seed", "3"])
    assert code == 0 and rep["passed"]


def test_run_requires_seed(capsys):
    code, rep, _ = _report(capsys, ["run"])
    assert code == 1 and rep["checks"][0]["name"] == "configuration"


def test_run_program_file(tmp_path, capsys):
    prog = {
        "wires": 2,
        "instructions": [
            {"op": "rotate", "wire": 0, "phi": 0.7},
            {"op": "entangle", "wires": [0, 1]},
            {"op": "terminate"},
        ],
    }
    f = tmp_path / "prog.json"
    f.write_text(json.dumps(prog))
    code, rep, _ = _report(capsys, ["run", "--seed", "4", "--samples", "20", "--program", str(f)])
    assert code == 0
    assert rep["data"]["status_counts"] == {"ok": 20}
    assert rep["data"]["transcript"][-1]["final"]


def test_run_rejects_bad_program(tmp_path, capsys):
    f = tmp_path / "prog.json"
    f.write_text(json.dumps({"wires": 9}))
    code, rep, _ = _report(capsys, ["run", "--seed", "1", "--program", str(f)])
    assert code == 1 and "invalid program" in rep["checks"][0]["error"]


def test_missing_file_is_configuration_failure(capsys):
    code, rep, _ = _report(capsys, ["run", "--seed", "1", "--program", "/nonexistent/p.json"])
    assert code == 1 and rep["checks"][0]["name"] == "configuration"


def test_noise_campaign(tmp_path, capsys):
    f = tmp_path / "noise.json"
    f.write_text(json.dumps({"eta": 0.05, "d": 0.1, "samples": 20000, "fidelity_samples": 100}))
    code, rep, _ = _report(capsys, ["noise", "--seed", "7", "--noise", str(f)])
    assert code == 0, rep["checks"]
    assert rep["data"]["run_budget"]["expected_runs"] >= 1


def test_noise_rejects_unknown_keys(tmp_path, capsys):
    f = tmp_path / "noise.json"
    f.write_text(json.dumps({"eta": 0.05, "temperature": 3}))
    code, rep, _ = _report(capsys, ["noise", "--seed", "7", "--noise", str(f)])
    assert code == 1 and "unknown" in rep["checks"][0]["error"]


def test_csv_output(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert cli.main(["verify-gates", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "command,check,passed,value,tolerance"
    assert all(line.startswith("verify-gates,") for line in lines[1:])


def test_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        cli.main(["run", "--seed", "5", "--samples", "10", "--out", str(path)])
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "kagome_mbqc", "run", "--seed", "1"], capture_output=True, text=True, check=False
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)["command"] == "run"


def test_unknown_command_exits():
    with pytest.raises(SystemExit):
        cli.main(["teleport"])
