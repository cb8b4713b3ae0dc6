"""
Centralized logging configuration for the monodromy toolkit.
Diagnostics go to stderr; stdout is reserved for the JSON document.
"""

import logging
import sys
import time
from functools import wraps

# Toolkit logger used by the decorators; modules log through logging.getLogger(__name__)
logger = logging.getLogger('monodromy')

# Package loggers that share the toolkit handlers
PACKAGE_LOGGERS = ('monodromy_core', 'monodromy_utils')


def setup_logging(level=logging.INFO, log_file=None):
    """
    Configure logging for the toolkit.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional file to write logs to (in addition to stderr)
    """
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    handlers = [console_handler]

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)
        file_handler.setFormatter(formatter)
        handlers.append(file_handler)

    for target in [logger] + [logging.getLogger(name) for name in PACKAGE_LOGGERS]:
        # Clear existing handlers
        for handler in target.handlers:
            if handler not in handlers:
                handler.close()
        target.handlers = list(handlers)
        target.setLevel(level)
        target.propagate = False

    return logger


def log_exceptions(func=None, *, expected=()):
    """
    Decorator to automatically log exceptions from functions.

    Exceptions listed in ``expected`` are re-raised without a log record;
    the caller reports them.

    Usage:
        @log_exceptions
        def my_function():
            ...

        @log_exceptions(expected=(ValueError,))
        def other_function():
            ...
    """
    def decorate(inner):
        @wraps(inner)
        def wrapper(*args, **kwargs):
            try:
                return inner(*args, **kwargs)
            except expected:
                raise
            except Exception as e:
                logger.error(f"Exception in {inner.__name__}: {e}", exc_info=True)
                raise
        return wrapper

    if func is None:
        return decorate
    return decorate(func)


def log_performance(func):
    """
    Decorator to log function execution time.

    Usage:
        @log_performance
        def slow_function():
            ...
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        try:
            result = func(*args, **kwargs)
            elapsed = time.perf_counter() - start_time
            logger.info(f"{func.__name__} completed in {elapsed:.3f}s")
            return result
        except Exception as e:
            elapsed = time.perf_counter() - start_time
            logger.error(f"{func.__name__} failed after {elapsed:.3f}s: {e}")
            raise
    return wrapper


# Initialize with default settings
setup_logging(level=logging.INFO)
