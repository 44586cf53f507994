import logging
import json
import sys
from datetime import datetime, timezone

from src.entpower.config import settings

# attributes every LogRecord carries; anything else came in through extra=
_RESERVED = set(vars(logging.makeLogRecord({}))) | {"message", "asctime"}


class JsonFormatter(logging.Formatter):
    """Custom formatter that outputs logs as JSON instead of plain text."""

    def format(self, record: logging.LogRecord) -> str:
        log_record = {
            "timestamp": datetime.fromtimestamp(record.created, tz=timezone.utc)
            .isoformat()
            .replace("+00:00", "Z"),
            "level": record.levelname,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        for key, value in vars(record).items():
            if key not in _RESERVED and not key.startswith("_"):
                log_record[key] = value

        if record.exc_info:
            log_record["exception"] = self.formatException(record.exc_info)

        return json.dumps(log_record, default=str)


logger = logging.getLogger("entpower")

# stdout carries CLI results, so logs go to stderr
handler = logging.StreamHandler(sys.stderr)

handler.setFormatter(JsonFormatter())

logger.setLevel(settings.LOG_LEVEL.upper())

if not logger.handlers:
    logger.addHandler(handler)

logger.propagate = False
