"""
EXPERIMENT: Stability of stored messages
=========================================

Purpose: Estimate how often stored messages fail to be fixed points

Input: ModelParams, a scope and a trial count
Output: Dictionary with:
  - estimate: TrialEstimate of the NON-violation rate
  - violation: TrialEstimate of the violation rate
  - theory: closed-form companions (exponent, bounds)

Every trial draws a fresh message set, builds W and checks:
  - single-unit: one fixed inactive unit of m^1 stays 0
  - single-message: m^1 is a fixed point of the dynamics
  - all-messages: every stored message is a fixed point of T
"""
import logging
from enum import Enum
from typing import Any, Dict, Union

import numpy as np

from experiments.estimators import TrialEstimate, wilson_estimate
from experiments.trials import run_trials
from src.dynamics import DynamicsMode, local_field, monitored_step, stable_mask
from src.model import ModelParams, encode, kappa_max, sample_messages, trial_rng
from src.network import build_weights
from src import theory

logger = logging.getLogger(__name__)


class StabilityScope(str, Enum):
    SINGLE_UNIT = 'single-unit'
    SINGLE_MESSAGE = 'single-message'
    ALL_MESSAGES = 'all-messages'


def stability_trial(master_seed: int, index: int, params: ModelParams,
                    scope: StabilityScope, dynamics: DynamicsMode) -> bool:
    """One trial; True when no violation occurred"""
    rng = trial_rng(master_seed, index)
    msgs = sample_messages(params, rng)
    weights = build_weights(msgs, params)
    first = msgs[0]

    if scope is StabilityScope.SINGLE_UNIT:
        unit = (0, int(first[0] + 1) % params.l)
        field = local_field(weights, encode(first, params), params, unit)
        return field < params.firing_threshold

    if scope is StabilityScope.SINGLE_MESSAGE:
        state = encode(first, params)
        return bool(np.array_equal(monitored_step(weights, state, params, dynamics), state))

    return bool(stable_mask(weights, msgs, params).all())


class StabilityExperiment:
    """Monte Carlo estimate of the fixed-point property of stored messages"""

    name = 'stability'

    def __init__(
        self,
        params: ModelParams,
        scope: Union[StabilityScope, str] = StabilityScope.SINGLE_MESSAGE,
        dynamics: Union[DynamicsMode, str] = DynamicsMode.PARALLEL,
        enforce_regime: bool = True,
    ):
        """
        Initialize the experiment

        Args:
            params: Instance parameters
            scope: single-unit, single-message or all-messages
            dynamics: parallel (T) or sequential (S); fixed points coincide
            enforce_regime: Reject kappa > 1 - 1/c
        """
        self.params = params
        self.scope = StabilityScope(scope)
        self.dynamics = DynamicsMode(dynamics)
        if self.dynamics is DynamicsMode.GB:
            raise ValueError("Stability is measured under the threshold dynamics S or T")
        if enforce_regime and params.kappa > kappa_max(params.c):
            raise ValueError(
                f"kappa = {params.kappa} exceeds 1 - 1/c = {kappa_max(params.c)}; "
                f"pass enforce_regime=False to run outside the stable regime"
            )

    def estimate(self, trials: int, seed: int, workers: int = 1) -> TrialEstimate:
        """Estimate of the non-violation probability"""
        outcomes = run_trials(
            stability_trial, trials, seed, workers,
            params=self.params, scope=self.scope, dynamics=self.dynamics,
        )
        return wilson_estimate(sum(bool(x) for x in outcomes), trials)

    def theory_values(self) -> Dict[str, float]:
        p = self.params
        limits = theory.thresholds(p.c, p.kappa)
        return {
            'stability_exponent': theory.stability_exponent(p.kappa, p.alpha),
            'chernoff_bound': theory.chernoff_bound(p.kappa, p.l, p.c, p.M),
            'union_bound_retrieval': theory.union_bound_retrieval(p.kappa, p.l, p.c, p.M),
            'union_bound_all_messages': theory.union_bound_all_messages(p.kappa, p.l, p.c, p.M),
            'instability_lower_bound': theory.instability_lower_bound(p.c, p.l, p.alpha),
            **limits.to_dict(),
        }

    def execute(self, trials: int, seed: int, workers: int = 1) -> Dict[str, Any]:
        """
        Run the experiment

        Returns:
            Dictionary with:
                - estimate: TrialEstimate of non-violation
                - violation: TrialEstimate of violation
                - theory: closed-form companion values
                - success: Boolean indicating success
                - error: Error message if failed
        """
        result = {
            'experiment': self.name,
            'scope': self.scope.value,
            'estimate': None,
            'violation': None,
            'theory': {},
            'success': False,
            'error': None
        }

        try:
            p = self.params
            logger.info(
                f"Stability ({self.scope.value}, {self.dynamics.value}): l={p.l} c={p.c} "
                f"M={p.M} alpha={p.alpha:.4f} kappa={p.kappa}, {trials} trials"
            )
            estimate = self.estimate(trials, seed, workers)
            result['estimate'] = estimate
            result['violation'] = estimate.complement()
            result['theory'] = self.theory_values()
            result['success'] = True

            logger.info(
                f"Violation rate {result['violation'].p_hat:.4f} "
                f"[{result['violation'].ci_low:.4f}, {result['violation'].ci_high:.4f}]"
            )
            return result

        except Exception as e:
            logger.error(f"Error in stability experiment: {e}", exc_info=True)
            result['error'] = str(e)
            return result

    def validate_output(self, output: Dict[str, Any]) -> bool:
        """
        Validate the experiment output

        Args:
            output: Output dictionary from execute()

        Returns:
            True if valid, False otherwise
        """
        if not output.get('success'):
            return False

        estimate = output.get('estimate')
        violation = output.get('violation')
        if estimate is None or violation is None:
            logger.error("Validation failed: missing estimates")
            return False

        if estimate.successes + violation.successes != estimate.trials:
            logger.error("Validation failed: successes and violations do not partition the trials")
            return False

        if not estimate.ci_low <= estimate.p_hat <= estimate.ci_high:
            logger.error("Validation failed: estimate outside its interval")
            return False

        return True


def stability_experiment(params: ModelParams, trials: int,
                         scope: Union[StabilityScope, str] = StabilityScope.SINGLE_MESSAGE,
                         seed: int = 0, workers: int = 1,
                         dynamics: Union[DynamicsMode, str] = DynamicsMode.PARALLEL,
                         enforce_regime: bool = True) -> TrialEstimate:
    """
    Convenience function: non-violation estimate for one configuration

    Raises on any failure instead of returning an error dictionary.
    """
    experiment = StabilityExperiment(params, scope, dynamics, enforce_regime)
    return experiment.estimate(trials, seed, workers)


if __name__ == '__main__':
    from src.model import default_c, params_for_load

    logging.basicConfig(level=logging.INFO)

    print("=" * 80)
    print("TESTING EXPERIMENT: Stability")
    print("=" * 80)

    c = default_c(64)
    experiment = StabilityExperiment(params_for_load(64, c, 0.05, kappa_max(c)))
    result = experiment.execute(trials=200, seed=42)

    print(f"\nSuccess: {result['success']}")
    if result['success']:
        print(f"Violation rate: {result['violation'].p_hat:.4f}")
        print(f"\nValidation: {'PASSED' if experiment.validate_output(result) else 'FAILED'}")
    else:
        print(f"Error: {result['error']}")
