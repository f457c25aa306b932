"""
Logging configuration for coreforge
Rotating file log for every run, terse console log on stderr so stdout carries only results
"""

import logging
import logging.handlers
from config import config

# Third-party loggers that echo solver progress line by line
SOLVER_LOGGERS = ("gurobipy", "scipy")

_console_handler = None


def _level(value):
    if isinstance(value, int):
        return value
    return getattr(logging, str(value).upper(), logging.INFO)


def setup_logging():
    """
    Install the file and console handlers on the root logger.

    The file keeps DEBUG detail (model rows, rationalization attempts, rejected
    certificates); the console starts at LOG_LEVEL and can be moved with
    set_console_level().
    """
    global _console_handler

    root_logger = logging.getLogger()
    root_logger.handlers.clear()
    root_logger.setLevel(logging.DEBUG)

    log_file_path = config.get_abs_path(config.LOG_FILE)
    log_file_path.parent.mkdir(parents=True, exist_ok=True)
    file_handler = logging.handlers.RotatingFileHandler(
        filename=log_file_path,
        maxBytes=config.LOG_MAX_BYTES,
        backupCount=config.LOG_BACKUP_COUNT,
        encoding='utf-8'
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(
        fmt='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    ))

    _console_handler = logging.StreamHandler()
    _console_handler.setLevel(_level(config.LOG_LEVEL))
    _console_handler.setFormatter(logging.Formatter(fmt='%(levelname)s: %(name)s: %(message)s'))

    root_logger.addHandler(file_handler)
    root_logger.addHandler(_console_handler)

    for name in SOLVER_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)

    root_logger.debug(f"{config.APP_NAME} logging to {log_file_path} (console level {config.LOG_LEVEL})")
    return root_logger


def set_console_level(level):
    """
    Change only the console threshold; the file log is unaffected.

    Args:
        level (int | str): logging level or its name ('DEBUG', 'warning', ...)

    Returns:
        int: the level now in effect
    """
    if _console_handler is None:
        setup_logging()
    resolved = _level(level)
    _console_handler.setLevel(resolved)
    return resolved


def get_logger(name):
    """
    Get a logger instance for a specific module

    Args:
        name (str): Usually __name__ of the calling module

    Returns:
        logging.Logger: Configured logger instance
    """
    return logging.getLogger(name)


# Initialize logging when this module is imported
setup_logging()
