"""lanetrade: two-lane traffic CA with negotiated (paid or bargained) lane changes."""

__version__ = "0.1.0"

from .games import (
    BimatrixGame,
    GameError,
    M_DEFAULT,
    NtuOutcome,
    SpeedScenario,
    TuOutcome,
    ZeroSumSolution,
    build_utility_matrix,
    solve_ntu,
    solve_tu,
    solve_zero_sum_2x2,
    time_difference,
)

__all__ = [
    "BimatrixGame",
    "GameError",
    "M_DEFAULT",
    "NtuOutcome",
    "SpeedScenario",
    "TuOutcome",
    "ZeroSumSolution",
    "build_utility_matrix",
    "solve_ntu",
    "solve_tu",
    "solve_zero_sum_2x2",
    "time_difference",
    "__version__",
]
