"""Task-graph scheduled in-place Householder factorization."""

from ._core import (
    Factorization,
    SchedulerStalled,
    SingularMatrixError,
    factorize,
    gen_matrix,
    schedulers,
    sequential_factorize,
    solve,
    task_graph,
)

__all__ = [
    "Factorization",
    "SchedulerStalled",
    "SingularMatrixError",
    "factorize",
    "gen_matrix",
    "schedulers",
    "sequential_factorize",
    "solve",
    "task_graph",
]
