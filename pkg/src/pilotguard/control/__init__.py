from .flatness import GRAVITY, FreeFall, flat_frame, flatness_transform
from .mpc import (
    MpcConfig,
    MpcController,
    MpcSolution,
    MpcState,
    brake_command,
    build_qp,
    eligible_stages,
    predict,
    sample_references,
    solve_mpc,
)

__all__ = [
    "GRAVITY",
    "FreeFall",
    "flat_frame",
    "flatness_transform",
    "MpcConfig",
    "MpcController",
    "MpcSolution",
    "MpcState",
    "brake_command",
    "build_qp",
    "eligible_stages",
    "predict",
    "sample_references",
    "solve_mpc",
]
