import math

import pytest
from pydantic import ValidationError

from src.entpower.exceptions import InvalidSpecError
from src.entpower.schemas import (
    CSV_COLUMNS,
    FSPoint,
    GgmResult,
    OptimizerConfig,
    SweepRecord,
    parse_circuit_spec,
    parse_unitary_spec,
    spec_num_qubits,
)


def make_record(**overrides):
    data = {
        "unitary_spec": {"kind": "identity", "n": 2},
        "sweep_var": "lambda",
        "value": 0.25,
        "E": 0.3,
        "D": 0.2,
        "gap": 0.1,
        "argmax_E": {"thetas": [0.1, 0.2], "xis": [0.0, 0.0]},
        "argmax_D": {"thetas": [0.1, 0.2], "xis": [0.0, 0.0]},
        "converged_E": True,
        "converged_D": False,
        "evals_E": 10,
        "evals_D": 12,
        "seed": 1234,
        "wall_ms": 5.0,
    }
    data.update(overrides)
    return SweepRecord.model_validate(data)


def test_ggm_result_value_must_match_eigenvalue():
    GgmResult(value=0.25, argmax_cut=(1,), max_eigenvalue=0.75)
    with pytest.raises(ValidationError):
        GgmResult(value=0.2, argmax_cut=(1,), max_eigenvalue=0.75)
    with pytest.raises(ValidationError):
        GgmResult(value=0.6, argmax_cut=(1,), max_eigenvalue=0.4)


def test_fs_point_ranges():
    p = FSPoint(thetas=[0.0, math.pi], xis=[0.0, 6.0])
    assert p.num_qubits == 2

    with pytest.raises(ValidationError):
        FSPoint(thetas=[0.1], xis=[0.0, 0.0])
    with pytest.raises(ValidationError):
        FSPoint(thetas=[3.5], xis=[0.0])
    with pytest.raises(ValidationError):
        FSPoint(thetas=[0.1], xis=[2 * math.pi])
    with pytest.raises(ValidationError):
        FSPoint(thetas=[], xis=[])


def test_optimizer_config_defaults_and_checks():
    cfg = OptimizerConfig()
    assert cfg.restarts >= 1 and cfg.ansatze is None

    with pytest.raises(ValidationError):
        OptimizerConfig(ansatze=[])
    with pytest.raises(ValidationError):
        OptimizerConfig(ansatze=["diagonal"])
    with pytest.raises(ValidationError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValidationError):
        OptimizerConfig(tolerance=1e-3)


def test_unitary_spec_discriminates_on_kind():
    spec = parse_unitary_spec('{"kind": "nd-even", "n": 4, "lambda": 1.5}')
    assert spec.kind == "nd-even" and spec.lam == 1.5
    assert spec_num_qubits(spec) == 4
    assert spec_num_qubits(parse_unitary_spec({"kind": "haar", "dim": 16, "seed": 1})) == 4

    with pytest.raises(InvalidSpecError):
        parse_unitary_spec({"kind": "toffoli", "n": 3})
    with pytest.raises(InvalidSpecError):
        parse_unitary_spec({"kind": "nd-odd", "n": 3, "lambda": 0.1, "inner": "haar"})
    with pytest.raises(InvalidSpecError):
        parse_unitary_spec({"kind": "identity", "n": 2, "phi": 0.3})


def test_circuit_spec_parsing():
    c = parse_circuit_spec(
        {
            "num_qubits": 4,
            "layers": [
                {"parity": "odd", "gate": {"source": "fixed", "gate": "u_lambda", "lambda": 0.4}},
                {"parity": "even", "gate": {"source": "hamiltonian", "bond": "dm", "t": 1.0}},
            ],
        }
    )
    assert c.layers[0].gate.lam == 0.4
    assert c.layers[1].gate.source == "hamiltonian"

    with pytest.raises(InvalidSpecError):
        parse_circuit_spec({"num_qubits": 4, "layers": [{"parity": "odd", "gate": {"source": "fixed", "gate": "u_lambda"}}]})
    with pytest.raises(InvalidSpecError):
        parse_circuit_spec({"num_qubits": 4, "layers": [{"parity": "diagonal", "gate": {"source": "haar-shared", "seed": 1}}]})


def test_sweep_record_gap_and_csv_row():
    record = make_record()
    row = record.csv_row()
    assert list(row) == CSV_COLUMNS
    assert row["E"] == "0.3"
    assert row["converged_D"] == 0
    assert row["wall_ms"] == "5.000"

    with pytest.raises(ValidationError):
        make_record(gap=0.2)
