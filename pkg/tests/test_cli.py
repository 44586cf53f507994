import json

import numpy as np
import pytest

from src.entpower.cli.main import EXIT_BAD_INPUT, EXIT_CAP, EXIT_OK, main
from src.entpower.config import settings

QUICK = ["--restarts", "1", "--max-evals", "200", "--seed", "3"]


@pytest.fixture(autouse=True)
def restore_cap(monkeypatch):
    # --max-qubits writes to the shared settings object
    monkeypatch.setattr(settings, "MAX_QUBITS", settings.MAX_QUBITS)


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


@pytest.mark.parametrize("name, n, expected", [("ghz", 4, 0.5), ("w", 3, 1 / 3), ("product", 3, 0.0)])
def test_ggm_named_states(capsys, name, n, expected):
    code, out = run(capsys, "ggm", "--named", name, "--n", str(n))
    assert code == EXIT_OK
    assert json.loads(out)["value"] == pytest.approx(expected, abs=1e-10)


def test_ggm_from_amplitude_file(capsys, tmp_path):
    path = tmp_path / "bell.txt"
    r = 1 / np.sqrt(2)
    path.write_text(f"{r} 0\n0 0\n\n0 0\n{r} 0\n", encoding="utf-8")
    code, out = run(capsys, "ggm", "--amps-file", str(path))
    assert code == EXIT_OK
    assert json.loads(out)["value"] == pytest.approx(0.5)


def test_ggm_rejects_unnormalized_and_malformed_files(capsys, tmp_path):
    unnormalized = tmp_path / "bad.txt"
    unnormalized.write_text("1 0\n1 0\n", encoding="utf-8")
    assert run(capsys, "ggm", "--amps-file", str(unnormalized))[0] == EXIT_BAD_INPUT

    malformed = tmp_path / "worse.txt"
    malformed.write_text("1 0 0\n", encoding="utf-8")
    assert run(capsys, "ggm", "--amps-file", str(malformed))[0] == EXIT_BAD_INPUT

    assert run(capsys, "ggm", "--amps-file", str(tmp_path / "missing.txt"))[0] == EXIT_BAD_INPUT


def test_power_of_identity(capsys):
    code, out = run(capsys, "power", "--kind", "identity", "--n", "3", *QUICK)
    record = json.loads(out)
    assert code == EXIT_OK
    assert record["E"] <= 1e-9 and record["D"] <= 1e-9
    assert record["unitary_spec"]["kind"] == "identity"


def test_power_from_spec_file(capsys, tmp_path):
    spec = tmp_path / "u.json"
    spec.write_text(json.dumps({"kind": "diag-phase", "n": 3, "phi": 0.0}), encoding="utf-8")
    code, out = run(capsys, "power", "--spec", str(spec), *QUICK)
    assert code == EXIT_OK
    assert json.loads(out)["gap"] <= 1e-9


def test_parity_mismatch_is_bad_input(capsys):
    code, _ = run(capsys, "power", "--kind", "nd-even", "--n", "5", "--lambda", "0.3", *QUICK)
    assert code == EXIT_BAD_INPUT


def test_qubit_cap_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(settings, "MAX_QUBITS", 2)
    code, _ = run(capsys, "power", "--kind", "identity", "--n", "4", *QUICK)
    assert code == EXIT_CAP


def test_max_qubits_flag_lowers_the_cap(capsys):
    code, _ = run(capsys, "--max-qubits", "3", "ggm", "--named", "ghz", "--n", "4")
    assert code == EXIT_CAP


def test_unknown_subcommand_is_bad_input(capsys):
    assert main(["teleport"]) == EXIT_BAD_INPUT
    capsys.readouterr()


def test_verify_single_suite(capsys):
    code, out = run(capsys, "verify", "--suite", "stationarity")
    report = json.loads(out)
    assert code == EXIT_OK
    assert report["passed"]
    assert [s["name"] for s in report["suites"]] == ["stationarity"]


def test_scan_time_to_stdout(capsys):
    code, out = run(capsys, "scan-time", "--kind", "dm", "--n", "4", "--grid", "2", *QUICK)
    lines = out.strip().splitlines()
    assert code == EXIT_OK
    assert lines[0].startswith("sweep_var,value,E,D,gap")
    assert len(lines) == 3


def test_scan_time_out_then_replay(capsys, tmp_path):
    out_path = str(tmp_path / "dmh.csv")
    code, out = run(capsys, "scan-time", "--kind", "dm-h", "--n", "3", "--grid", "3", "--out", out_path, *QUICK)
    assert code == EXIT_OK
    assert json.loads(out) == {"output": out_path, "rows": 3}

    code, out = run(capsys, "replay", out_path + ".manifest.json")
    assert code == EXIT_OK
    assert json.loads(out)["matches"]


def test_circuit_preset(capsys):
    code, out = run(capsys, "circuit", "--mode", "shared", "--n", "3", "--samples", "2", *QUICK)
    assert code == EXIT_OK
    assert len(out.strip().splitlines()) == 3


def test_bare_out_name_goes_to_results_dir(capsys, monkeypatch, tmp_path):
    monkeypatch.setattr(settings, "RESULTS_DIR", str(tmp_path / "results"))
    code, out = run(capsys, "scan-time", "--kind", "dm", "--n", "4", "--grid", "2", "--out", "dm.csv", *QUICK)
    assert code == EXIT_OK
    assert json.loads(out)["output"] == str(tmp_path / "results" / "dm.csv")
    assert (tmp_path / "results" / "dm.csv.manifest.json").exists()


def test_omega_variant_paper_is_the_exact_gate(capsys):
    argv = ["power", "--kind", "nd-odd", "--n", "3", "--lambda", "1.5", *QUICK]
    code, out = run(capsys, *argv, "--omega-variant", "paper")
    assert code == EXIT_OK
    paper = json.loads(out)
    assert paper["unitary_spec"]["omega"] == "paper"

    _, out = run(capsys, *argv, "--omega-variant", "exact")
    exact = json.loads(out)
    assert (paper["E"], paper["D"]) == (exact["E"], exact["D"])


def test_negative_qubit_count_is_bad_input(capsys):
    code, _ = run(capsys, "ggm", "--named", "ghz", "--n", "-1")
    assert code == EXIT_BAD_INPUT
