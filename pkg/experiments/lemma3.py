"""
EXPERIMENT: Connection count of a non-message unit
===================================================

Purpose: Empirical law of Y, the number of blocks b != a whose m^1 unit is
connected to a fixed unit (a, i) outside m^1

Input: ModelParams, trial count, target unit
Output: Dictionary with:
  - table: DataFrame with columns y, empirical, theory, exact
  - tv_theory / tv_exact: total-variation distances to the limit law and
    to the finite-size law
  - p_all_empirical / p_all_theory: P(Y = c - 1)

m^1 is forced to (0, ..., 0); the default target is (block 0, letter 1).
"""
import logging
from typing import Any, Dict, Tuple

import numpy as np
import pandas as pd

from experiments.trials import run_trials
from src.model import ModelParams, sample_messages, trial_rng
from src.network import build_weights
from src import theory

logger = logging.getLogger(__name__)

DEFAULT_UNIT = (0, 1)


def connection_count(master_seed: int, index: int, params: ModelParams,
                     unit: Tuple[int, int] = DEFAULT_UNIT) -> int:
    """Y for one fresh message set with m^1 = (0, ..., 0)"""
    rng = trial_rng(master_seed, index)
    msgs = sample_messages(params, rng)
    msgs[0] = 0
    weights = build_weights(msgs, params)

    block, letter = unit
    row = weights.counts[params.index(block, letter)]
    others = [b for b in range(params.c) if b != block]
    return int(sum(row[params.index(b, 0)] >= 1 for b in others))


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


class Lemma3Experiment:
    """Histogram of Y against the Binomial(c - 1, 1 - e^-alpha) limit"""

    name = 'lemma3'

    def __init__(self, params: ModelParams, unit: Tuple[int, int] = DEFAULT_UNIT):
        block, letter = unit
        if not 0 <= block < params.c or not 0 < letter < params.l:
            raise ValueError(
                f"Target unit {unit} must lie in block [0, {params.c}) with a letter "
                f"in [1, {params.l}) so that it is outside m^1 = (0, ..., 0)"
            )
        self.params = params
        self.unit = (block, letter)

    def counts(self, trials: int, seed: int, workers: int = 1) -> np.ndarray:
        """Y values, one per trial"""
        values = run_trials(connection_count, trials, seed, workers, params=self.params, unit=self.unit)
        return np.asarray(values, dtype=np.int64)

    def table(self, values: np.ndarray) -> pd.DataFrame:
        p = self.params
        support = np.arange(p.c)
        empirical = np.bincount(values, minlength=p.c)[:p.c] / values.size
        return pd.DataFrame({
            'y': support,
            'empirical': empirical,
            'theory': [theory.lemma3_pmf(p.c, p.alpha, int(i)) for i in support],
            'exact': [theory.lemma3_pmf_exact(p.c, p.l, p.M, int(i)) for i in support],
        })

    def execute(self, trials: int, seed: int, workers: int = 1) -> Dict[str, Any]:
        """
        Run the experiment

        Returns:
            Dictionary with table, distances, P(Y = c - 1), success and error
        """
        result: Dict[str, Any] = {
            'experiment': self.name,
            'trials': trials,
            'table': None,
            'tv_theory': None,
            'tv_exact': None,
            'p_all_empirical': None,
            'p_all_theory': None,
            'success': False,
            'error': None
        }

        try:
            p = self.params
            logger.info(f"Connection count: l={p.l} c={p.c} M={p.M} alpha={p.alpha:.4f}, unit {self.unit}, {trials} trials")

            table = self.table(self.counts(trials, seed, workers))
            result['table'] = table
            result['tv_theory'] = total_variation(table['empirical'], table['theory'])
            result['tv_exact'] = total_variation(table['empirical'], table['exact'])
            result['p_all_empirical'] = float(table['empirical'].iloc[-1])
            result['p_all_theory'] = float(table['theory'].iloc[-1])
            result['success'] = True

            logger.info(f"TV to the limit law {result['tv_theory']:.4f}, to the exact law {result['tv_exact']:.4f}")
            return result

        except Exception as e:
            logger.error(f"Error in connection count experiment: {e}", exc_info=True)
            result['error'] = str(e)
            return result

    def validate_output(self, output: Dict[str, Any]) -> bool:
        if not output.get('success'):
            return False

        table = output.get('table')
        if table is None or len(table) != self.params.c:
            logger.error("Validation failed: table must have one row per value of Y")
            return False

        if abs(table['empirical'].sum() - 1.0) > 1e-9:
            logger.error("Validation failed: empirical pmf does not sum to 1")
            return False

        return True


def lemma3_experiment(params: ModelParams, trials: int, seed: int = 0, workers: int = 1) -> Dict[str, Any]:
    """Convenience function; raises instead of returning an error dictionary"""
    result = Lemma3Experiment(params).execute(trials, seed, workers)
    if not result['success']:
        raise RuntimeError(result['error'])
    return result


if __name__ == '__main__':
    from src.model import params_for_load

    logging.basicConfig(level=logging.INFO)

    print("=" * 80)
    print("TESTING EXPERIMENT: Connection count")
    print("=" * 80)

    output = lemma3_experiment(params_for_load(100, 5, 0.5, '4/5'), trials=500, seed=42)
    print(output['table'].to_string(index=False))
