"""
Context Managers Module
Run bookkeeping for CLI commands and timing for sweeps and verification checks.
"""

import logging
import time
from contextlib import contextmanager
from datetime import datetime, timezone
from typing import Any, Dict, Generator, List

logger = logging.getLogger(__name__)


class AnalysisRun:
    """
    Context for one CLI command: records status, wall time, errors and any
    data attached along the way (e.g. the effective configuration).
    """

    def __init__(self, run_name: str, log_summary: bool = True):
        self.run_name = run_name
        self.log_summary = log_summary
        self.start_time = None
        self.end_time = None
        self.run_data: Dict[str, Any] = {}
        self.errors: List[Dict[str, str]] = []

    def __enter__(self):
        self.start_time = time.perf_counter()
        self.run_data = {
            'run_name': self.run_name,
            'started_at': datetime.now(timezone.utc).isoformat(timespec='seconds'),
            'status': 'running'
        }
        logger.info(f"Starting run: {self.run_name}")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.end_time = time.perf_counter()
        duration = self.end_time - self.start_time
        self.run_data.update({
            'duration': duration,
            'status': 'completed' if exc_type is None else 'failed'
        })

        if exc_type is not None:
            self.errors.append({'type': exc_type.__name__, 'message': str(exc_val)})
            self.run_data['errors'] = self.errors
            logger.warning(f"Run {self.run_name} failed after {duration:.3f}s: {exc_val}")
        elif self.log_summary:
            logger.info(f"Run {self.run_name} completed in {duration:.3f}s")

        return False

    def attach(self, key: str, value: Any) -> None:
        self.run_data[key] = value

    def get(self, key: str, default=None):
        return self.run_data.get(key, default)

    @property
    def succeeded(self) -> bool:
        return self.run_data.get('status') == 'completed'


@contextmanager
def analysis_run(run_name: str, log_summary: bool = True) -> Generator[AnalysisRun, None, None]:
    run = AnalysisRun(run_name, log_summary)
    try:
        yield run.__enter__()
    except Exception as e:
        run.__exit__(type(e), e, e.__traceback__)
        raise
    else:
        run.__exit__(None, None, None)


class PerformanceMonitor:
    """
    Times an operation and, when ``items`` is bumped, the throughput
    (dimensions per second in a sweep, trials per second in a check).
    """

    def __init__(self, operation_name: str, log_results: bool = True):
        self.operation_name = operation_name
        self.log_results = log_results
        self.start_time = None
        self.end_time = None
        self.items = 0
        self.metrics: Dict[str, Any] = {}

    def __enter__(self):
        self.start_time = time.perf_counter()
        logger.debug(f"Started monitoring: {self.operation_name}")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.end_time = time.perf_counter()
        duration = self.end_time - self.start_time
        self.metrics = {
            'operation': self.operation_name,
            'duration': duration,
            'items': self.items,
            'rate': self.items / duration if duration > 0 and self.items else None,
            'success': exc_type is None
        }
        if exc_type is not None:
            self.metrics['error'] = {'type': exc_type.__name__, 'message': str(exc_val)}

        if self.log_results:
            rate = f" ({self.metrics['rate']:.1f} items/s)" if self.metrics['rate'] else ""
            if exc_type is None:
                logger.info(f"{self.operation_name} took {duration:.4f}s{rate}")
            else:
                logger.error(f"{self.operation_name} failed after {duration:.4f}s: {exc_val}")

        return False

    def count(self, n: int = 1) -> None:
        self.items += n

    def get_metrics(self) -> dict:
        return self.metrics.copy()


@contextmanager
def performance_monitor(operation_name: str, log_results: bool = True) -> Generator[PerformanceMonitor, None, None]:
    monitor = PerformanceMonitor(operation_name, log_results)
    try:
        yield monitor.__enter__()
    except Exception as e:
        monitor.__exit__(type(e), e, e.__traceback__)
        raise
    else:
        monitor.__exit__(None, None, None)
