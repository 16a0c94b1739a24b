import os
import logging
from concurrent.futures import ThreadPoolExecutor

from .config import DWELL_LOG_LEVEL, DWELL_THREADS


def setup_logging(level: str = None):
    """Simple logging setup"""
    logging.basicConfig(
        level=getattr(logging, (level or DWELL_LOG_LEVEL).upper(), logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s'
    )
    return logging.getLogger(__name__)


def worker_count(jobs: int, cap: int = None) -> int:
    """Scan parallelism: DWELL_THREADS caps it, 0 means one worker per CPU"""
    cap = DWELL_THREADS if cap is None else cap
    if cap <= 0:
        cap = os.cpu_count() or 1
    return max(1, min(cap, jobs))


def create_executor(jobs: int, cap: int = None) -> ThreadPoolExecutor:
    """Create the scan worker pool"""
    return ThreadPoolExecutor(max_workers=worker_count(jobs, cap), thread_name_prefix="dwell")
