from typing import Callable, Iterable, List, Optional, TypeVar

from joblib import Parallel, delayed, cpu_count

from phtlab.core.config import settings

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(function: Callable[[T], R], inputs: Iterable[T], n_jobs: Optional[int] = None) -> List[R]:
    """Evaluate `function` over `inputs`, preserving order"""
    inputs = list(inputs)
    n_jobs = settings.JOBS if n_jobs is None else n_jobs
    if n_jobs <= 1 or len(inputs) < 2:
        return [function(item) for item in inputs]
    n_jobs = min(cpu_count(), n_jobs, len(inputs))
    verbose = 11 if settings.DEBUG else 0
    return Parallel(n_jobs=n_jobs, verbose=verbose)(delayed(function)(item) for item in inputs)
