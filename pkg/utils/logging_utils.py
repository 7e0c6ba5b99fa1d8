import functools
import json
import logging
import os
import sys
import time
from datetime import datetime
from typing import Any, Dict, List, Optional, Union

DEFAULT_CONSOLE_LEVEL = logging.INFO
DEFAULT_FILE_LEVEL = logging.DEBUG

APP_NAME = "rec-misalignment"

CONSOLE_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
FILE_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(filename)s:%(lineno)d | %(message)s"

RESET = "\033[0m"
LEVEL_COLORS = {
    logging.DEBUG: "\033[34m",
    logging.INFO: "\033[32m",
    logging.WARNING: "\033[33m",
    logging.ERROR: "\033[31m",
    logging.CRITICAL: "\033[1m\033[31m",
}

# LogRecord attributes that are not user-supplied extras
_RECORD_ATTRIBUTES = frozenset(vars(logging.LogRecord("", 0, "", 0, "", (), None))) | {"message", "asctime"}


def record_extras(record: logging.LogRecord) -> Dict[str, Any]:
    """Fields attached through extra= or a RunContextFilter."""
    return {
        key: value for key, value in vars(record).items()
        if key not in _RECORD_ATTRIBUTES and not key.startswith("_")
    }


class ColoredFormatter(logging.Formatter):
    """Console formatter with colored level names"""

    def format(self, record):
        plain = record.levelname
        color = LEVEL_COLORS.get(record.levelno)
        if color:
            record.levelname = f"{color}{plain}{RESET}"
        try:
            return super().format(record)
        finally:
            # The file handler sees the same record
            record.levelname = plain


class JSONFormatter(logging.Formatter):
    """One JSON object per line: timestamp, level, logger, message and extras"""

    def format(self, record):
        payload = {
            "timestamp": datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "name": record.name,
            "message": record.getMessage(),
        }
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        for key, value in record_extras(record).items():
            payload.setdefault(key, value)
        return json.dumps(payload, default=str)


class RunContextFilter(logging.Filter):
    """
    Stamp every record with the run it belongs to (command, master seed, ...).

    Fields already set through extra= win over the context.
    """

    def __init__(self, context: Dict[str, Any]):
        super().__init__()
        self.context = dict(context)

    def filter(self, record: logging.LogRecord) -> bool:
        for key, value in self.context.items():
            if not hasattr(record, key):
                setattr(record, key, value)
        return True


def setup_logging(
    app_name: str = APP_NAME,
    console_level: Union[int, str] = DEFAULT_CONSOLE_LEVEL,
    file_level: Union[int, str] = DEFAULT_FILE_LEVEL,
    log_dir: Optional[str] = None,
    enable_json: bool = False,
    enable_colors: bool = True,
    context: Optional[Dict[str, Any]] = None
) -> logging.Logger:
    """
    Configure the root logger for one run.

    Existing root handlers are replaced, so repeated CLI invocations in one
    process do not stack handlers.

    Args:
        app_name: Application logger name and log file prefix
        console_level: Level of the stderr handler
        file_level: Level of the file handler
        log_dir: Directory for a timestamped log file; console only when None
        enable_json: Write the log file as JSON lines
        enable_colors: Color level names when stderr is a terminal
        context: Fields stamped on every record (e.g. command, master_seed)

    Returns:
        The application logger
    """
    root = logging.getLogger()
    root.setLevel(logging.DEBUG)
    for handler in list(root.handlers):
        root.removeHandler(handler)

    handlers: List[logging.Handler] = []

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(console_level)
    use_colors = enable_colors and sys.stderr.isatty()
    console.setFormatter(ColoredFormatter(CONSOLE_FORMAT) if use_colors else logging.Formatter(CONSOLE_FORMAT))
    handlers.append(console)

    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        path = os.path.join(log_dir, f"{app_name}_{datetime.now():%Y%m%d_%H%M%S}.log")
        log_file = logging.FileHandler(path)
        log_file.setLevel(file_level)
        log_file.setFormatter(JSONFormatter() if enable_json else logging.Formatter(FILE_FORMAT))
        handlers.append(log_file)

    for handler in handlers:
        if context:
            handler.addFilter(RunContextFilter(context))
        root.addHandler(handler)

    app_logger = logging.getLogger(app_name)
    app_logger.debug(f"Logging to stderr{f' and {log_dir}' if log_dir else ''}", extra={"log_json": enable_json})
    return app_logger


def get_logger(name: str) -> logging.Logger:
    """Module logger; handlers live on the root logger configured by setup_logging."""
    return logging.getLogger(name)


class LogCapture:
    """Collect the records one logger emits inside a with-block (used by tests)"""

    def __init__(self, logger_name: str, level: int = logging.DEBUG):
        self.logger_name = logger_name
        self.level = level
        self.records: List[logging.LogRecord] = []
        self._handler: Optional[logging.Handler] = None
        self._saved_level = logging.NOTSET

    def __enter__(self):
        logger = logging.getLogger(self.logger_name)
        records = self.records

        class _ListHandler(logging.Handler):
            def emit(self, record):
                records.append(record)

        self._handler = _ListHandler(self.level)
        self._saved_level = logger.level
        if logger.getEffectiveLevel() > self.level:
            logger.setLevel(self.level)
        logger.addHandler(self._handler)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        logger = logging.getLogger(self.logger_name)
        logger.removeHandler(self._handler)
        logger.setLevel(self._saved_level)

    def get_messages(self) -> List[str]:
        return [record.getMessage() for record in self.records]

    def get_records(self) -> List[logging.LogRecord]:
        return list(self.records)


def log_execution_time(logger: Optional[logging.Logger] = None):
    """
    Decorator logging a function's wall time at DEBUG, also as the elapsed_s field.

    Args:
        logger: Logger to use (the function's module logger if None)
    """
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            result = func(*args, **kwargs)
            elapsed = time.perf_counter() - start
            (logger or logging.getLogger(func.__module__)).debug(
                f"Function '{func.__name__}' executed in {elapsed:.4f} seconds",
                extra={"elapsed_s": elapsed},
            )
            return result
        return wrapper
    return decorator
