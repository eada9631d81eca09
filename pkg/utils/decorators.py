"""
Decorators Module
Timing and call-logging decorators for the bound engine and CLI commands.
"""

import functools
import logging
import time
from typing import Callable, Optional

logger = logging.getLogger(__name__)


def timer(func: Optional[Callable] = None, *, level: int = logging.DEBUG) -> Callable:
    """
    Log how long a call took.

    Usable bare (``@timer``) or with a level (``@timer(level=logging.INFO)``).
    """
    def decorator(inner: Callable) -> Callable:
        @functools.wraps(inner)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            try:
                return inner(*args, **kwargs)
            finally:
                elapsed = time.perf_counter() - start_time
                logger.log(level, f"{inner.__qualname__} finished in {elapsed:.4f}s")
        return wrapper

    if func is not None:
        return decorator(func)
    return decorator


def async_timer(func: Callable) -> Callable:
    """Coroutine version of ``timer``; always logs at INFO."""
    @functools.wraps(func)
    async def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        try:
            return await func(*args, **kwargs)
        finally:
            elapsed = time.perf_counter() - start_time
            logger.info(f"{func.__qualname__} finished in {elapsed:.4f}s")

    return wrapper


def _describe_call(func: Callable, args: tuple, kwargs: dict) -> str:
    rendered = [repr(arg) for arg in args]
    rendered.extend(f"{key}={value!r}" for key, value in kwargs.items())
    return f"{func.__name__}({', '.join(rendered)})"


def log_calls(level: int = logging.DEBUG, include_args: bool = True, include_result: bool = False):
    """
    Log entry into a function and, optionally, what it returned.
    Exceptions are logged with their type and re-raised unchanged.

    Args:
        level: Logging level for the call and result lines
        include_args: Render positional and keyword arguments
        include_result: Log the return value as well
    """
    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            call = _describe_call(func, args, kwargs) if include_args else func.__name__
            logger.log(level, f"Calling {call}")
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.log(level, f"{func.__name__} raised {type(e).__name__}: {e}")
                raise
            if include_result:
                logger.log(level, f"{func.__name__} returned {result!r}")
            return result

        return wrapper
    return decorator
