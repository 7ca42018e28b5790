"""Shared worker pool settings for replicate-style computations."""

from collections.abc import Callable
from typing import Optional, TypeVar

from joblib import Parallel, delayed

T = TypeVar("T")

_default_threads: int = 1


def set_default_threads(limit: int) -> None:
    """Set the default number of worker threads.

    This affects every operation that fans out independent replicates
    (bootstrap, sensitivity reps, heterogeneity dimensions) when no explicit
    ``threads`` argument is given. Results never depend on this value.

    Args:
        limit: Maximum number of worker threads (must be >= 1)

    Example:
        ```
        from aiwashing import set_default_threads

        set_default_threads(4)
        ```
    """
    global _default_threads
    if limit < 1:
        raise ValueError("Thread limit must be at least 1")
    _default_threads = limit


def get_default_threads() -> int:
    return _default_threads


def run_indexed(
    fn: Callable[[int], T], count: int, threads: Optional[int] = None
) -> list[T]:
    """Evaluate ``fn(i)`` for ``i in range(count)`` and return results by index."""
    n_jobs = threads if threads is not None else _default_threads
    if n_jobs < 1:
        raise ValueError("Thread limit must be at least 1")
    if n_jobs == 1 or count <= 1:
        return [fn(i) for i in range(count)]
    results = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(fn)(i) for i in range(count)
    )
    return list(results)
