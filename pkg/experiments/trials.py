"""
Trial Runner Module
Runs independent trials on a joblib worker pool

Every trial owns the random stream trial_rng(master_seed, index), so results
do not depend on the worker count or on scheduling order.
"""
import logging
from typing import Any, Callable, List

from joblib import Parallel, delayed, cpu_count

logger = logging.getLogger(__name__)


def default_workers() -> int:
    """Available parallelism"""
    return max(1, cpu_count())


def run_trials(trial_fn: Callable[..., Any], trials: int, master_seed: int,
               workers: int = 1, **kwargs) -> List[Any]:
    """
    Evaluate trial_fn(master_seed=..., index=i, **kwargs) for i in range(trials)

    Args:
        trial_fn: Module-level function (it is pickled for worker processes)
        trials: Number of trials (>= 1)
        master_seed: Experiment master seed
        workers: Worker processes; 1 runs in-process

    Returns:
        Trial results in trial-index order
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1 (got {trials})")
    if workers < 1:
        raise ValueError(f"workers must be >= 1 (got {workers})")

    logger.debug(f"Running {trials} trials of {trial_fn.__name__} on {workers} worker(s)")
    if workers == 1:
        return [trial_fn(master_seed=master_seed, index=i, **kwargs) for i in range(trials)]

    return Parallel(n_jobs=workers)(
        delayed(trial_fn)(master_seed=master_seed, index=i, **kwargs) for i in range(trials)
    )
