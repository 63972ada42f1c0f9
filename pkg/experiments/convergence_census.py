"""
EXPERIMENT: Convergence census
==============================

Purpose: Frequencies of fixed points, 2-cycles and step-cap hits of the
dynamics from several kinds of start states

Input: ModelParams, start mode, trial count
Output: Dictionary with:
  - counts: outcome -> number of trajectories
  - mean_steps: average number of updates until termination

Start modes:
  - stored: psi(m^1)
  - corrupted: psi(v) for v at distance `radius` from m^1
  - uniform-random: every unit on with probability 1/2
  - all-zero: the empty state
"""
import logging
from enum import Enum
from typing import Any, Dict, Tuple, Union

import numpy as np

from config import settings
from experiments.trials import run_trials
from src.dynamics import DynamicsMode, Outcome, run
from src.model import (
    STATE_DTYPE,
    BallSpec,
    ModelParams,
    corrupt,
    encode,
    sample_messages,
    trial_rng,
)
from src.network import build_binary, build_weights

logger = logging.getLogger(__name__)


class StartMode(str, Enum):
    STORED = 'stored'
    CORRUPTED = 'corrupted'
    UNIFORM_RANDOM = 'uniform-random'
    ALL_ZERO = 'all-zero'


class ConvergenceCapError(RuntimeError):
    """A trajectory hit the default step cap"""


def census_trial(master_seed: int, index: int, params: ModelParams, start: StartMode,
                 mode: DynamicsMode, radius: int, step_cap: int) -> Tuple[str, int]:
    """One trajectory; returns (outcome, steps)"""
    rng = trial_rng(master_seed, index)
    msgs = sample_messages(params, rng)

    if start is StartMode.STORED:
        state = encode(msgs[0], params)
    elif start is StartMode.CORRUPTED:
        state = encode(corrupt(BallSpec(msgs[0], radius), params, rng), params)
    elif start is StartMode.UNIFORM_RANDOM:
        state = rng.integers(0, 2, size=params.N, dtype=STATE_DTYPE)
    else:
        state = np.zeros(params.N, dtype=STATE_DTYPE)

    matrix = build_binary(msgs, params) if mode is DynamicsMode.GB else build_weights(msgs, params)
    report = run(matrix, state, params, mode, step_cap=step_cap)
    return report.outcome.value, report.steps


class ConvergenceCensus:
    """Runs the dynamics to termination from many random starts"""

    name = 'census'

    def __init__(
        self,
        params: ModelParams,
        start: Union[StartMode, str] = StartMode.STORED,
        mode: Union[DynamicsMode, str] = DynamicsMode.PARALLEL,
        radius: int = 1,
        step_cap: int = settings.DEFAULT_STEP_CAP,
    ):
        """
        Initialize the census

        Args:
            params: Instance parameters
            start: stored, corrupted, uniform-random or all-zero
            mode: Dynamics to run (parallel by default)
            radius: Corruption radius for corrupted starts
            step_cap: Maximum updates per trajectory
        """
        self.params = params
        self.start = StartMode(start)
        self.mode = DynamicsMode(mode)
        if self.start is StartMode.CORRUPTED and not 0 <= radius <= params.c:
            raise ValueError(f"radius must lie in [0, {params.c}] (got {radius})")
        if step_cap < 1:
            raise ValueError(f"step_cap must be >= 1 (got {step_cap})")
        self.radius = radius
        self.step_cap = step_cap

    def tally(self, trials: int, seed: int, workers: int = 1) -> Dict[str, Any]:
        """
        Counts per outcome and mean steps

        Raises:
            ConvergenceCapError: if a trajectory reached the default cap
        """
        results = run_trials(
            census_trial, trials, seed, workers,
            params=self.params, start=self.start, mode=self.mode,
            radius=self.radius, step_cap=self.step_cap,
        )
        counts = {outcome.value: 0 for outcome in Outcome}
        for outcome, _ in results:
            counts[outcome] += 1
        mean_steps = float(np.mean([steps for _, steps in results]))

        capped = counts[Outcome.STEP_CAP_REACHED.value]
        if capped and self.step_cap == settings.DEFAULT_STEP_CAP:
            raise ConvergenceCapError(
                f"{capped} of {trials} trajectories reached the default step cap "
                f"({settings.DEFAULT_STEP_CAP})"
            )
        return {'counts': counts, 'mean_steps': mean_steps}

    def execute(self, trials: int, seed: int, workers: int = 1) -> Dict[str, Any]:
        """
        Run the census

        Returns:
            Dictionary with counts, mean_steps, success and error
        """
        result: Dict[str, Any] = {
            'experiment': self.name,
            'start': self.start.value,
            'mode': self.mode.value,
            'trials': trials,
            'counts': {},
            'mean_steps': None,
            'success': False,
            'error': None
        }

        try:
            p = self.params
            logger.info(
                f"Census ({self.start.value}, {self.mode.value}): l={p.l} c={p.c} M={p.M} "
                f"kappa={p.kappa}, {trials} trials"
            )
            result.update(self.tally(trials, seed, workers))
            result['success'] = True
            logger.info(f"Outcomes {result['counts']}, mean steps {result['mean_steps']:.2f}")
            return result

        except Exception as e:
            logger.error(f"Error in convergence census: {e}", exc_info=True)
            result['error'] = str(e)
            return result

    def validate_output(self, output: Dict[str, Any]) -> bool:
        if not output.get('success'):
            return False

        if sum(output['counts'].values()) != output['trials']:
            logger.error("Validation failed: census totals do not equal the trial count")
            return False

        if self.mode is DynamicsMode.SEQUENTIAL and output['counts'].get(Outcome.TWO_CYCLE.value):
            logger.error("Validation failed: sequential dynamics reported a 2-cycle")
            return False

        return True


def convergence_census(params: ModelParams, start: Union[StartMode, str], trials: int,
                       seed: int = 0, workers: int = 1, radius: int = 1,
                       step_cap: int = settings.DEFAULT_STEP_CAP) -> Dict[str, Any]:
    """Convenience function: outcome counts and mean steps under T"""
    return ConvergenceCensus(params, start, DynamicsMode.PARALLEL, radius, step_cap).tally(trials, seed, workers)
