import os
import sys
import logging
from logging.handlers import RotatingFileHandler

TRACE_LEVEL_NUM = 5
EVENTS_LEVEL_NUM = 38
DEFAULT_LOG_BACKUP_COUNT = 10
DEFAULT_RETENTION_SIZE = 64 * 1024 * 1024
LOG_FORMAT = "%(asctime)s | %(levelname)s | %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"

logging.addLevelName(TRACE_LEVEL_NUM, "TRACE")
logging.addLevelName(EVENTS_LEVEL_NUM, "EVENT")


def _trace(self, message, *args, **kws):
    if self.isEnabledFor(TRACE_LEVEL_NUM):
        self._log(TRACE_LEVEL_NUM, message, args, **kws)


def _event(self, message, *args, **kws):
    if self.isEnabledFor(EVENTS_LEVEL_NUM):
        self._log(EVENTS_LEVEL_NUM, message, args, **kws)


logging.Logger.trace = _trace
logging.Logger.event = _event

logger = logging.getLogger("lmft")


def verbosity_to_level(verbose: int) -> int:
    if verbose <= 0:
        return logging.INFO
    if verbose == 1:
        return logging.DEBUG
    return TRACE_LEVEL_NUM


def setup_logging(verbose: int = 0, log_dir: str | None = None,
                  retention_size: int = DEFAULT_RETENTION_SIZE) -> logging.Logger:
    """
    Configure the package logger for command line use.

    Library modules only ever emit through ``logger``; handlers are attached here so
    that importing the package never changes the host application's logging.
    """
    level = verbosity_to_level(verbose)
    logger.setLevel(level)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    formatter = logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT)

    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(formatter)
    stream_handler.setLevel(level)
    logger.addHandler(stream_handler)

    if log_dir:
        setup_events_logger(log_dir, retention_size)

    logger.propagate = False
    return logger


def setup_events_logger(full_path: str, events_retention_size: int) -> logging.Logger:
    os.makedirs(full_path, exist_ok=True)
    formatter = logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT)

    file_handler = RotatingFileHandler(
        os.path.join(full_path, "events.log"),
        maxBytes=events_retention_size,
        backupCount=DEFAULT_LOG_BACKUP_COUNT,
    )
    file_handler.setFormatter(formatter)
    file_handler.setLevel(logger.level or TRACE_LEVEL_NUM)
    logger.addHandler(file_handler)
    return logger
