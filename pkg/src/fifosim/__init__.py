"""Exact single-pass simulation of many FIFO cache configurations at once."""

from .config import CacheGrid, GridError, config_id, parse_size_list, table_grid, validate_grid
from .engine import AccessOutcome, ConfigStats, Engine, Outcome, SimReport, p1_threshold, run, simulate
from .fifo import FifoWayList, fifo_distance
from .lut import LookupTable
from .oracle import AuditReport, RefCacheState, audit_run, diff_reports, simulate_reference
from .trace import TraceError, generate_trace, read_accesses, to_block, write_accesses

__all__ = [
    "AccessOutcome", "AuditReport", "CacheGrid", "ConfigStats", "Engine", "FifoWayList",
    "GridError", "LookupTable", "Outcome", "RefCacheState", "SimReport", "TraceError",
    "audit_run", "config_id", "diff_reports", "fifo_distance", "generate_trace",
    "p1_threshold", "parse_size_list", "read_accesses", "run", "simulate",
    "simulate_reference", "table_grid", "to_block", "validate_grid", "write_accesses",
]

__version__ = "0.1.0"
