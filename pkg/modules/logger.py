#!/usr/bin/env python3
"""
Logger module for the BoATS toolkit.
Provides logging setup plus operation/timing helpers shared by all modules.
"""

import logging
import time
from functools import wraps
from typing import Any, Callable, Dict, Optional, TypeVar, cast

from . import shared

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

F = TypeVar('F', bound=Callable[..., Any])

logging.getLogger('modules').addHandler(logging.NullHandler())


def configure_logging(log_file: Optional[str] = shared.LOG_FILE, level: str = 'DEBUG') -> None:
    """
    Attach a file handler to the package logger.

    Args:
        log_file: Path of the log file, or None to log to stderr
        level: Logging level name
    """
    root = logging.getLogger('modules')
    for handler in list(root.handlers):
        if not isinstance(handler, logging.NullHandler):
            root.removeHandler(handler)
            handler.close()

    handler = logging.FileHandler(log_file, encoding='utf-8') if log_file else logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(getattr(logging, level.upper(), logging.DEBUG))


def get_logger(name: str = __name__) -> logging.Logger:
    """Get a logger instance."""
    return logging.getLogger(name)


def _tagged(operation: Optional[str], text: str, context: Dict[str, Any]) -> str:
    """'[operation] text | key=value | ...' with the tag and context optional."""
    parts = [f"[{operation}] {text}" if operation else text]
    parts.extend(f"{key}={value}" for key, value in context.items())
    return " | ".join(parts)


def log_operation(logger: logging.Logger, operation: str, success: bool = True, **kwargs) -> None:
    """INFO line for a finished operation, WARNING when it did not succeed."""
    level = logging.INFO if success else logging.WARNING
    logger.log(level, _tagged(operation, "SUCCESS" if success else "FAILED", kwargs))


def log_error(logger: logging.Logger, error: BaseException, context: Optional[str] = None, **kwargs) -> None:
    """ERROR line naming the exception type, with the active traceback attached."""
    logger.error(_tagged(context, f"ERROR: {type(error).__name__}: {error}", kwargs), exc_info=True)


class OperationTimer:
    """
    Context manager timing a block of work.

    Completion is logged at DEBUG and failure at ERROR with the exception
    type; exceptions always propagate. After exit, `elapsed` holds the
    wall time in seconds and `failed` tells whether the block raised.
    """

    def __init__(self, logger: logging.Logger, operation: str, **kwargs):
        self.logger = logger
        self.operation = operation
        self.context = kwargs
        self.elapsed = 0.0
        self.failed = False
        self._started: Optional[float] = None

    def __enter__(self) -> 'OperationTimer':
        self._started = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> bool:
        self.elapsed = time.perf_counter() - self._started
        self.failed = exc_type is not None
        if self.failed:
            text = f"failed after {self.elapsed:.2f}s ({exc_type.__name__}: {exc_val})"
            self.logger.error(_tagged(self.operation, text, self.context))
        else:
            self.logger.debug(_tagged(self.operation, f"completed in {self.elapsed:.2f}s", self.context))
        return False


def timed(logger: Optional[logging.Logger] = None) -> Callable[[F], F]:
    """Decorator running each call of a function inside an OperationTimer."""
    def decorator(func: F) -> F:
        @wraps(func)
        def wrapper(*args, **kwargs):
            with OperationTimer(logger or get_logger(func.__module__), func.__qualname__):
                return func(*args, **kwargs)
        return cast(F, wrapper)
    return decorator
