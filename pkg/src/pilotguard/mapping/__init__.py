"""Sliding-window probabilistic occupancy mapping with incremental layers."""

from .core import (
    CellState,
    GridConfig,
    InflationState,
    cell_of,
    center_of,
    logodds_to_prob,
    precompute_offsets,
    prob_to_logodds,
    update_cell,
)
from .grid import LocalMap

__all__ = [
    "CellState",
    "GridConfig",
    "InflationState",
    "LocalMap",
    "cell_of",
    "center_of",
    "logodds_to_prob",
    "precompute_offsets",
    "prob_to_logodds",
    "update_cell",
]
