"""
EXPERIMENT: Capacity sweep
==========================

Purpose: Single-message stability over a grid of sizes and loads, with the
theory thresholds attached to every row

Input: l values, alpha grid, c rule, kappa rule, trials per cell
Output: List of SweepRow (and a DataFrame view for CSV)

Cell k of the grid (row-major over l, then alpha) runs with the seed
derive_seed(master_seed, k).
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd

from experiments.estimators import TrialEstimate
from experiments.stability import StabilityExperiment, StabilityScope
from src.model import KappaLike, ModelParams, derive_seed, params_for_load, resolve_c, resolve_kappa
from src import theory

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    'experiment', 'l', 'c', 'M', 'kappa', 'alpha', 'seed',
    'successes', 'trials', 'p_hat', 'ci_low', 'ci_high',
    'theory_value', 'stability_exponent',
    'thm1_pointwise', 'thm1_global', 'thm2', 'thm3', 'alpha_star',
]


@dataclass(frozen=True)
class SweepRow:
    """
    One result row

    The estimate counts the event named by `experiment` (violations for
    stability rows, exact recoveries for retrieval rows).
    """

    l: int
    c: int
    M: int
    kappa: Fraction
    alpha: float
    experiment: str
    estimate: TrialEstimate
    seed: int
    theory_value: Optional[float] = None
    theory_columns: Optional[Dict[str, float]] = None

    def to_record(self) -> Dict[str, Any]:
        record = {
            'experiment': self.experiment,
            'l': self.l,
            'c': self.c,
            'M': self.M,
            'kappa': float(self.kappa),
            'alpha': self.alpha,
            'seed': self.seed,
            **self.estimate.to_dict(),
            'theory_value': self.theory_value,
        }
        record.update(self.theory_columns or {})
        return record

    @classmethod
    def for_params(cls, params: ModelParams, experiment: str, estimate: TrialEstimate,
                   seed: int, theory_value: Optional[float] = None) -> 'SweepRow':
        """Row for one instance with the stability exponent and thresholds attached"""
        return cls(
            l=params.l, c=params.c, M=params.M, kappa=params.kappa, alpha=params.alpha,
            experiment=experiment,
            estimate=estimate,
            seed=seed,
            theory_value=theory_value,
            theory_columns={
                'stability_exponent': theory.stability_exponent(params.kappa, params.alpha),
                **theory.thresholds(params.c, params.kappa).to_dict(),
            },
        )


def capacity_sweep(
    l_list: Sequence[int],
    alpha_grid: Sequence[float],
    c_rule: Union[str, int],
    kappa_rule: KappaLike,
    trials: int,
    seed: int,
    workers: int = 1,
    gamma: Optional[KappaLike] = None,
) -> List[SweepRow]:
    """
    Run single-message stability on every (l, alpha) cell

    Args:
        l_list: Block sizes
        alpha_grid: Requested loads (M = round(alpha * l^2))
        c_rule: 'ln' or an integer
        kappa_rule: 'max', 'gamma' or an exact value
        trials: Trials per cell
        seed: Master seed
        workers: Worker processes per cell
        gamma: Needed for the 'gamma' kappa rule

    Returns:
        Rows in grid order
    """
    if not l_list or not alpha_grid:
        raise ValueError("The l list and the alpha grid must both be non-empty")

    rows = []
    cell = 0
    for l in l_list:
        c = resolve_c(c_rule, l)
        kappa = resolve_kappa(kappa_rule, c, gamma)
        for alpha in alpha_grid:
            params = params_for_load(l, c, alpha, kappa)
            cell_seed = derive_seed(seed, cell)
            cell += 1

            experiment = StabilityExperiment(params, StabilityScope.SINGLE_MESSAGE, enforce_regime=False)
            violation = experiment.estimate(trials, cell_seed, workers).complement()
            logger.info(
                f"Cell l={l} c={c} M={params.M} alpha={params.alpha:.4f}: "
                f"violation {violation.p_hat:.4f}"
            )

            rows.append(SweepRow.for_params(
                params, 'stability-violation-single-message', violation, cell_seed,
                theory_value=theory.union_bound_retrieval(params.kappa, l, c, params.M),
            ))
    return rows


def sweep_frame(rows: Sequence[SweepRow]) -> pd.DataFrame:
    """Rows as a DataFrame with a fixed column order"""
    return pd.DataFrame([row.to_record() for row in rows], columns=SWEEP_COLUMNS)


class CapacitySweep:
    """Stage wrapper around capacity_sweep"""

    name = 'sweep'

    def __init__(self, l_list: Sequence[int], alpha_grid: Sequence[float],
                 c_rule: Union[str, int] = 'ln', kappa_rule: KappaLike = 'max',
                 gamma: Optional[KappaLike] = None):
        self.l_list = list(l_list)
        self.alpha_grid = list(alpha_grid)
        self.c_rule = c_rule
        self.kappa_rule = kappa_rule
        self.gamma = gamma

    def execute(self, trials: int, seed: int, workers: int = 1) -> Dict[str, Any]:
        """
        Run the sweep

        Returns:
            Dictionary with rows, table (DataFrame), success and error
        """
        result: Dict[str, Any] = {
            'experiment': self.name,
            'rows': [],
            'table': None,
            'success': False,
            'error': None
        }

        try:
            logger.info("=" * 80)
            logger.info(f"Capacity sweep: l in {self.l_list}, alpha in {self.alpha_grid}")
            logger.info("=" * 80)

            rows = capacity_sweep(self.l_list, self.alpha_grid, self.c_rule, self.kappa_rule,
                                  trials, seed, workers, self.gamma)
            result['rows'] = rows
            result['table'] = sweep_frame(rows)
            result['success'] = True
            return result

        except Exception as e:
            logger.error(f"Error in capacity sweep: {e}", exc_info=True)
            result['error'] = str(e)
            return result

    def validate_output(self, output: Dict[str, Any]) -> bool:
        if not output.get('success'):
            return False

        expected = len(self.l_list) * len(self.alpha_grid)
        if len(output['rows']) != expected:
            logger.error(f"Validation failed: {len(output['rows'])} rows, expected {expected}")
            return False

        for row in output['rows']:
            if abs(row.alpha - row.M / row.l ** 2) > 1e-12:
                logger.error(f"Validation failed: alpha of cell l={row.l} is not M / l^2")
                return False

        return True
