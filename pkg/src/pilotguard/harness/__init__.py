"""Scenario harness: multi-rate simulation loop, logging, metrics, replay."""

from .config import ConfigError, ScenarioConfig, load_scenario, parse_scenario
from .metrics import CLEARANCE_SENTINEL, Metrics, min_clearance, timing_stats
from .runner import (
    LOG_VERSION,
    ReplayError,
    RunLog,
    SimSession,
    fires,
    recompute_min_clearance,
    replay,
    run_scenario,
)
from .scenarios import BENCH_SUITES, BUILTINS, get_scenario
from .sources import Mailbox, build_source

__all__ = [
    "BENCH_SUITES",
    "BUILTINS",
    "CLEARANCE_SENTINEL",
    "ConfigError",
    "LOG_VERSION",
    "Mailbox",
    "Metrics",
    "ReplayError",
    "RunLog",
    "ScenarioConfig",
    "SimSession",
    "build_source",
    "fires",
    "get_scenario",
    "load_scenario",
    "min_clearance",
    "parse_scenario",
    "recompute_min_clearance",
    "replay",
    "run_scenario",
    "timing_stats",
]
