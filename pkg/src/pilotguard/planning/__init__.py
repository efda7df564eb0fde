"""Joystick goal resolution, reference-path search and corridor generation."""

from .frontend import (
    NoCorridor,
    ReferencePath,
    Unreachable,
    bfs_escape,
    find_farthest_grid,
    joystick_to_goal,
    search_reference_path,
)
from .sfc import Polytope, generate_sfc

__all__ = [
    "NoCorridor",
    "Polytope",
    "ReferencePath",
    "Unreachable",
    "bfs_escape",
    "find_farthest_grid",
    "generate_sfc",
    "joystick_to_goal",
    "search_reference_path",
]
