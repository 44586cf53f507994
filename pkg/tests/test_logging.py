import json
import logging
import sys

from src.entpower.logging_setup import JsonFormatter, logger


def format_record(**kwargs):
    record = logging.LogRecord(
        name="entpower",
        level=kwargs.pop("level", logging.INFO),
        pathname=__file__,
        lineno=7,
        msg=kwargs.pop("msg", "power_computed"),
        args=(),
        exc_info=kwargs.pop("exc_info", None),
    )
    for key, value in kwargs.items():
        setattr(record, key, value)
    return json.loads(JsonFormatter().format(record))


def test_json_formatter_fields_and_extras():
    out = format_record(num_qubits=3, value=0.25)
    assert out["message"] == "power_computed"
    assert out["level"] == "INFO"
    assert out["timestamp"].endswith("Z")
    assert out["line"] == 7
    assert out["num_qubits"] == 3 and out["value"] == 0.25
    assert "args" not in out and "msg" not in out


def test_json_formatter_includes_exception():
    try:
        raise ValueError("boom")
    except ValueError:
        exc_info = sys.exc_info()
    out = format_record(level=logging.ERROR, msg="command_failed", exc_info=exc_info)
    assert "ValueError: boom" in out["exception"]


def test_non_json_extras_are_stringified():
    out = format_record(cut=(1, 2), spec=object())
    assert out["cut"] == [1, 2]
    assert isinstance(out["spec"], str)


def test_logger_writes_to_stderr_only():
    assert logger.name == "entpower"
    assert not logger.propagate
    assert len(logger.handlers) == 1
    assert isinstance(logger.handlers[0].formatter, JsonFormatter)
