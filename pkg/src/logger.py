# src/logger.py

import logging
import sys

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
ROOT_LOGGER_NAME = 'strongdom'


def setup_logger(name=ROOT_LOGGER_NAME, level=logging.INFO, log_file=None):
    """Set up a logger with console output (stderr) and an optional log file."""
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # Reconfiguring must not stack handlers
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(LOG_FORMAT)

    # Reports go to stdout, so the console handler writes to stderr
    ch = logging.StreamHandler(sys.stderr)
    ch.setLevel(level)
    ch.setFormatter(formatter)
    logger.addHandler(ch)

    if log_file:
        fh = logging.FileHandler(log_file)
        fh.setLevel(level)
        fh.setFormatter(formatter)
        logger.addHandler(fh)

    logger.propagate = False
    return logger


def get_logger(module_name):
    """Child logger of the package logger, e.g. strongdom.stochmat."""
    return logging.getLogger(f"{ROOT_LOGGER_NAME}.{module_name}")


def parse_level(level):
    if level is None or level == "":
        return logging.WARNING
    if isinstance(level, int):
        return level
    value = logging.getLevelName(str(level).upper())
    if not isinstance(value, int):
        raise ValueError(f"{level} is not a valid log level.  Please provide DEBUG, INFO, WARNING, or ERROR.")
    return value


# Create a default logger
default_logger = setup_logger(ROOT_LOGGER_NAME, level=logging.WARNING)
