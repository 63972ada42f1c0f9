"""
Estimators Module
Binomial success-rate estimates with 95% Wilson score intervals
"""
from dataclasses import dataclass, asdict

from scipy import stats

CONFIDENCE = 0.95


@dataclass(frozen=True)
class TrialEstimate:
    """Success count over i.i.d. trials with a Wilson interval"""

    successes: int
    trials: int
    p_hat: float
    ci_low: float
    ci_high: float

    @property
    def failures(self) -> int:
        return self.trials - self.successes

    def complement(self) -> 'TrialEstimate':
        """The same trials counted from the failure side"""
        return wilson_estimate(self.failures, self.trials)

    def to_dict(self) -> dict:
        return asdict(self)


def wilson_interval(successes: int, trials: int, confidence: float = CONFIDENCE):
    """
    Wilson score interval for a binomial proportion

    Returns:
        (low, high), clipped to [0, 1]
    """
    if trials <= 0:
        raise ValueError(f"trials must be positive (got {trials})")
    if not 0 <= successes <= trials:
        raise ValueError(f"successes must lie in [0, {trials}] (got {successes})")

    ci = stats.binomtest(int(successes), int(trials)).proportion_ci(confidence_level=confidence, method='wilson')
    p_hat = successes / trials
    low = max(0.0, min(p_hat, float(ci.low)))
    high = min(1.0, max(p_hat, float(ci.high)))
    return low, high


def wilson_estimate(successes: int, trials: int, confidence: float = CONFIDENCE) -> TrialEstimate:
    low, high = wilson_interval(successes, trials, confidence)
    return TrialEstimate(
        successes=int(successes),
        trials=int(trials),
        p_hat=successes / trials,
        ci_low=low,
        ci_high=high,
    )
