"""
Utils package initialization.

``file_io`` depends on the domain modules, so it is imported explicitly
(``from utils.file_io import ...``) rather than re-exported here.
"""

from .decorators import timer, async_timer, log_calls
from .context import analysis_run, performance_monitor

__all__ = [
    'timer', 'async_timer', 'log_calls',
    'analysis_run', 'performance_monitor'
]
