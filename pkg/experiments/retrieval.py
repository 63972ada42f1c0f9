"""
EXPERIMENT: One-step retrieval from corrupted inputs
=====================================================

Purpose: Estimate how often T(v) = psi(m^1) for v drawn at distance r from m^1

Input: ModelParams, gamma, radius r, trial count
Output: Dictionary with:
  - estimate: TrialEstimate of exact retrieval
  - adversarial: TrialEstimate for half-and-half inputs (optional)
  - theory: closed-form companions

With kappa_from_gamma set, kappa is replaced by min(1 - gamma, 1 - 1/c) and
the radius must satisfy r <= gamma * c - 1.
"""
import logging
from fractions import Fraction
from typing import Any, Dict, Optional

import numpy as np

from config import settings
from experiments.estimators import TrialEstimate, wilson_estimate
from experiments.trials import run_trials
from src.dynamics import DynamicsMode, Outcome, monitored_step, run
from src.model import (
    BallSpec,
    CorruptionMode,
    KappaLike,
    ModelParams,
    as_fraction,
    corrupt,
    encode,
    kappa_for_gamma,
    mixed_message,
    sample_messages,
    trial_rng,
)
from src.network import build_weights
from src import theory

logger = logging.getLogger(__name__)


def max_radius(gamma: KappaLike, c: int) -> Fraction:
    """Largest radius covered by one-step retrieval: gamma * c - 1"""
    return as_fraction(gamma) * c - 1


def retrieval_trial(master_seed: int, index: int, params: ModelParams, r: int,
                    multi_step: bool = False, step_cap: int = settings.DEFAULT_STEP_CAP,
                    adversarial: bool = False) -> bool:
    """One trial; True when the dynamics returns exactly psi(m^1)"""
    rng = trial_rng(master_seed, index)
    msgs = sample_messages(params, rng)
    weights = build_weights(msgs, params)
    target = encode(msgs[0], params)

    if adversarial:
        cue = mixed_message(msgs[0], msgs[1], params.c // 2)
    else:
        cue = corrupt(BallSpec(msgs[0], r, CorruptionMode.EXACT_ERRORS), params, rng)
    state = encode(cue, params)

    if not multi_step:
        return bool(np.array_equal(monitored_step(weights, state, params, DynamicsMode.PARALLEL), target))

    report = run(weights, state, params, DynamicsMode.PARALLEL, step_cap=step_cap)
    return report.outcome is Outcome.FIXED_POINT and bool(np.array_equal(report.final_state, target))


class RetrievalExperiment:
    """Monte Carlo estimate of exact retrieval of m^1 from a random corruption"""

    name = 'retrieval'

    def __init__(
        self,
        params: ModelParams,
        gamma: KappaLike = settings.DEFAULT_GAMMA,
        r: int = 1,
        kappa_from_gamma: bool = True,
        multi_step: bool = False,
        step_cap: int = settings.DEFAULT_STEP_CAP,
    ):
        """
        Initialize the experiment

        Args:
            params: Instance parameters
            gamma: Fraction of blocks that must stay intact, in (0, 1)
            r: Number of corrupted blocks
            kappa_from_gamma: Replace kappa by min(1 - gamma, 1 - 1/c)
            multi_step: Run T to termination instead of a single step
            step_cap: Step cap of the multi-step variant

        Raises:
            ValueError: if gamma or r is out of range
        """
        g = as_fraction(gamma)
        if not 0 < g < 1:
            raise ValueError(f"gamma must lie in (0, 1) (got {g})")
        if r < 0:
            raise ValueError(f"r must be nonnegative (got {r})")
        if r > max_radius(g, params.c):
            raise ValueError(
                f"r exceeds gamma*c - 1: r = {r}, gamma = {g}, c = {params.c} "
                f"(largest radius {float(max_radius(g, params.c)):g})"
            )

        if kappa_from_gamma:
            params = ModelParams(l=params.l, c=params.c, M=params.M, kappa=kappa_for_gamma(g, params.c))
        self.params = params
        self.gamma = g
        self.r = r
        self.multi_step = multi_step
        self.step_cap = step_cap

    def _estimate(self, trials: int, seed: int, workers: int, adversarial: bool) -> TrialEstimate:
        outcomes = run_trials(
            retrieval_trial, trials, seed, workers,
            params=self.params, r=self.r, multi_step=self.multi_step,
            step_cap=self.step_cap, adversarial=adversarial,
        )
        return wilson_estimate(sum(bool(x) for x in outcomes), trials)

    def estimate(self, trials: int, seed: int, workers: int = 1) -> TrialEstimate:
        """Estimate of the exact retrieval probability"""
        return self._estimate(trials, seed, workers, adversarial=False)

    def adversarial_estimate(self, trials: int, seed: int, workers: int = 1) -> TrialEstimate:
        """
        Retrieval rate for half-and-half inputs (first c // 2 blocks of m^1,
        the rest of m^2); no guarantee covers these
        """
        if self.params.M < 2:
            raise ValueError("Adversarial inputs need at least two stored messages")
        return self._estimate(trials, seed, workers, adversarial=True)

    def theory_values(self) -> Dict[str, float]:
        p = self.params
        return {
            'thm2': theory.thresholds(p.c, p.kappa).thm2,
            'union_bound_retrieval': theory.union_bound_retrieval(p.kappa, p.l, p.c, p.M),
            'max_radius': float(max_radius(self.gamma, p.c)),
        }

    def execute(self, trials: int, seed: int, workers: int = 1,
                include_adversarial: bool = False) -> Dict[str, Any]:
        """
        Run the experiment

        Returns:
            Dictionary with:
                - estimate: TrialEstimate of exact retrieval
                - adversarial: TrialEstimate for mixed inputs, or None
                - theory: closed-form companion values
                - success: Boolean indicating success
                - error: Error message if failed
        """
        result: Dict[str, Any] = {
            'experiment': self.name,
            'estimate': None,
            'adversarial': None,
            'theory': {},
            'success': False,
            'error': None
        }

        try:
            p = self.params
            logger.info(
                f"Retrieval: l={p.l} c={p.c} M={p.M} alpha={p.alpha:.4f} kappa={p.kappa} "
                f"gamma={self.gamma} r={self.r} multi_step={self.multi_step}, {trials} trials"
            )
            result['estimate'] = self.estimate(trials, seed, workers)
            if include_adversarial:
                result['adversarial'] = self.adversarial_estimate(trials, seed, workers)
            result['theory'] = self.theory_values()
            result['success'] = True

            logger.info(f"Retrieval rate {result['estimate'].p_hat:.4f}")
            return result

        except Exception as e:
            logger.error(f"Error in retrieval experiment: {e}", exc_info=True)
            result['error'] = str(e)
            return result

    def validate_output(self, output: Dict[str, Any]) -> bool:
        """
        Validate the experiment output

        Returns:
            True if valid, False otherwise
        """
        if not output.get('success'):
            return False

        estimate: Optional[TrialEstimate] = output.get('estimate')
        if estimate is None:
            logger.error("Validation failed: no estimate")
            return False

        if not 0 <= estimate.successes <= estimate.trials:
            logger.error("Validation failed: success count out of range")
            return False

        return True


def retrieval_experiment(params: ModelParams, gamma: KappaLike, r: int, trials: int,
                         seed: int = 0, workers: int = 1, kappa_from_gamma: bool = True,
                         multi_step: bool = False) -> TrialEstimate:
    """Convenience function: exact retrieval estimate for one configuration"""
    experiment = RetrievalExperiment(params, gamma, r, kappa_from_gamma, multi_step)
    return experiment.estimate(trials, seed, workers)


if __name__ == '__main__':
    from src.model import params_for_load

    logging.basicConfig(level=logging.INFO)

    print("=" * 80)
    print("TESTING EXPERIMENT: Retrieval")
    print("=" * 80)

    experiment = RetrievalExperiment(params_for_load(128, 6, 0.02, '1/2'), gamma='1/2', r=2)
    result = experiment.execute(trials=100, seed=42, include_adversarial=True)

    if result['success']:
        print(f"Retrieval rate:   {result['estimate'].p_hat:.4f}")
        print(f"Adversarial rate: {result['adversarial'].p_hat:.4f}")
    else:
        print(f"Error: {result['error']}")
