"""
Theory Module
Closed-form calculators: Poisson entropy, informational efficiency, the
capacity thresholds, the exponential stability bound and the law of the
connection count Y of a non-message unit

Entropies are computed in nats and converted to bits explicitly. The
efficiency is 2 * alpha / h_nats(alpha) (equivalently
2 * alpha / (ln 2 * h_bits(alpha))), which crosses 1 near alpha = 0.423.
"""
import logging
import math
from dataclasses import dataclass, asdict
from numbers import Integral
from typing import Iterable, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import optimize, special, stats

from config import settings
from src.model import KappaLike, as_fraction

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


def _require_positive(**values):
    bad = [f"{name} must be > 0 (got {value})" for name, value in values.items() if not value > 0]
    if bad:
        raise ValueError("; ".join(bad))


# ===== ENTROPY AND EFFICIENCY =====

def poisson_entropy(alpha: float, tol: float = settings.ENTROPY_TOL) -> float:
    """
    Entropy of Pois(alpha) in nats

    Evaluates alpha (1 - ln alpha) + e^-alpha sum_k alpha^k ln(k!) / k!,
    stopping once k > alpha and the term drops below tol / 10. The series
    is summed in log space, so large means do not overflow.

    Args:
        alpha: Poisson mean, > 0
        tol: Truncation tolerance, > 0

    Returns:
        Entropy in nats
    """
    _require_positive(alpha=alpha, tol=tol)

    log_alpha = math.log(alpha)
    log_cutoff = math.log(tol) - math.log(10)
    log_terms = []
    k = 2  # ln(0!) = ln(1!) = 0
    while True:
        log_factorial = float(special.gammaln(k + 1))
        log_term = k * log_alpha - log_factorial - alpha + math.log(log_factorial)
        log_terms.append(log_term)
        if k > alpha and log_term < log_cutoff:
            break
        k += 1

    series = float(np.exp(special.logsumexp(log_terms)))
    return alpha * (1 - log_alpha) + series


def poisson_entropy_bits(alpha: float, tol: float = settings.ENTROPY_TOL) -> float:
    return poisson_entropy(alpha, tol) / LN2


@dataclass(frozen=True)
class EfficiencyReport:
    alpha: float
    entropy_bits: float
    eta: float


def efficiency(alpha: float, tol: float = settings.ENTROPY_TOL) -> EfficiencyReport:
    """
    Informational efficiency at load alpha

    Returns:
        EfficiencyReport with h(Pois(alpha)) in bits and eta = 2 alpha / h_nats
    """
    _require_positive(alpha=alpha)
    nats = poisson_entropy(alpha, tol)
    return EfficiencyReport(alpha=alpha, entropy_bits=nats / LN2, eta=2 * alpha / nats)


def efficiency_unity_root(bracket: Tuple[float, float] = settings.ROOT_BRACKET,
                          tol: float = settings.ROOT_TOL) -> float:
    """
    Load at which eta crosses 1, by bisection

    Raises:
        ValueError: if eta - 1 does not change sign on the bracket
    """
    lo, hi = bracket
    _require_positive(lo=lo, hi=hi, tol=tol)
    eta_lo = efficiency(lo).eta
    eta_hi = efficiency(hi).eta
    if not eta_lo < 1 < eta_hi:
        raise ValueError(
            f"Bracket ({lo}, {hi}) does not straddle eta = 1 "
            f"(eta = {eta_lo:.4f} .. {eta_hi:.4f})"
        )
    root = optimize.bisect(lambda a: efficiency(a).eta - 1.0, lo, hi, xtol=tol)
    logger.debug(f"eta = 1 at alpha = {root:.6f}")
    return float(root)


def message_set_entropy_bits(l: int, c: int, M: int) -> float:
    """log2 binom(l^c, M): entropy of a uniformly drawn set of M distinct words"""
    words = float(l) ** c
    if M > words:
        raise ValueError(f"M = {M} exceeds the number of words l^c = {words:.0f}")
    log_binom = special.gammaln(words + 1) - special.gammaln(M + 1) - special.gammaln(words - M + 1)
    return float(log_binom / LN2)


def network_entropy_bits(l: int, c: int, alpha: float) -> float:
    """binom(c, 2) l^2 h_bits(alpha): bond-by-bond description length of W"""
    return math.comb(c, 2) * l * l * poisson_entropy_bits(alpha)


def finite_efficiency(l: int, c: int, M: int) -> float:
    """H(message set) / H(W) at a finite size"""
    return message_set_entropy_bits(l, c, M) / network_entropy_bits(l, c, M / (l * l))


# ===== CAPACITY THRESHOLDS =====

def stability_exponent(kappa: KappaLike, alpha: float) -> float:
    """
    Exponent of l in the single-unit violation bound: kappa - alpha - kappa ln(kappa/alpha)

    Negative iff alpha < kappa (and zero at alpha = kappa).
    """
    k = float(as_fraction(kappa))
    _require_positive(kappa=k, alpha=alpha)
    return k - alpha - k * math.log(k / alpha)


@dataclass(frozen=True)
class Thresholds:
    thm1_pointwise: float
    thm1_global: float
    thm2: float
    thm3: float
    alpha_star: float

    def to_dict(self) -> dict:
        return asdict(self)


def thresholds(c: int, kappa: KappaLike) -> Thresholds:
    """
    Load thresholds of the capacity results

    Args:
        c: Number of blocks (>= 2)
        kappa: Threshold coefficient in (0, 1]

    Returns:
        Thresholds with
            thm1_pointwise = kappa,
            thm1_global = kappa e^{-(3+kappa)/kappa},
            thm2 = kappa e^{-(1+kappa)/kappa},
            thm3 = -ln(1 - e^-1),
            alpha_star = (1 - 1/c) e^{-1 - c/(c-1)}
    """
    k = float(as_fraction(kappa))
    if c < 2:
        raise ValueError(f"c must be >= 2 (got {c})")
    if not 0 < k <= 1:
        raise ValueError(f"kappa must lie in (0, 1] (got {k})")

    return Thresholds(
        thm1_pointwise=k,
        thm1_global=k * math.exp(-(3 + k) / k),
        thm2=k * math.exp(-(1 + k) / k),
        thm3=-math.log(1 - math.exp(-1)),
        alpha_star=(1 - 1 / c) * math.exp(-1 - c / (c - 1)),
    )


def chernoff_bound(kappa: KappaLike, l: int, c: int, M: int, t: Optional[float] = None) -> float:
    """
    Finite-size exponential bound on one inactive unit of a stored message firing

    e^{-t kappa c} exp((M/l)(e^{c (e^t - 1)/l} - 1)), capped at 1, with the
    asymptotically optimal t = ln(kappa / alpha) by default.
    """
    k = float(as_fraction(kappa))
    alpha = M / (l * l)
    _require_positive(kappa=k, alpha=alpha)
    if t is None:
        t = math.log(k / alpha)
    if t <= 0:
        return 1.0
    log_bound = -t * k * c + (M / l) * math.expm1(c * math.expm1(t) / l)
    return min(1.0, math.exp(min(log_bound, 0.0)))


def union_bound_all_messages(kappa: KappaLike, l: int, c: int, M: int) -> float:
    """min(1, M l c * single-unit bound): some unit of some message misbehaves"""
    return min(1.0, M * l * c * chernoff_bound(kappa, l, c, M))


def union_bound_retrieval(kappa: KappaLike, l: int, c: int, M: int) -> float:
    """min(1, c l * single-unit bound): one-step retrieval of a corrupted input fails"""
    return min(1.0, c * l * chernoff_bound(kappa, l, c, M))


# ===== CONNECTION COUNT Y =====

def _check_index(i) -> int:
    if isinstance(i, bool) or not isinstance(i, Integral):
        raise ValueError(f"Index must be an integer (got {i!r})")
    return int(i)


def lemma3_pmf(c: int, alpha: float, i: int) -> float:
    """
    Leading-order law of Y: Binomial(c - 1, 1 - e^-alpha) at i

    Returns 0 outside {0, ..., c - 1}.
    """
    i = _check_index(i)
    _require_positive(alpha=alpha)
    if not 0 <= i <= c - 1:
        return 0.0
    return float(stats.binom.pmf(i, c - 1, -math.expm1(-alpha)))


def lemma3_pmf_exact(c: int, l: int, M: int, i: int) -> float:
    """
    Finite-size law of Y for a unit outside m^1, the other M - 1 messages uniform

    binom(c-1, i) sum_k binom(i, k) (-1)^k (1 - (1/l)(1 - (1 - 1/l)^{k+c-1-i}))^{M-1}
    """
    i = _check_index(i)
    if not 0 <= i <= c - 1:
        return 0.0
    log_keep = math.log1p(-1 / l)
    total = 0.0
    for k in range(i + 1):
        exponent = k + c - 1 - i
        # P(a message containing the unit misses all the exponent targets)
        hit = -math.expm1(exponent * log_keep)
        factor = math.exp((M - 1) * math.log1p(-hit / l))
        total += math.comb(i, k) * (-1) ** k * factor
    return max(0.0, math.comb(c - 1, i) * total)


def instability_lower_bound(c: int, l: int, alpha: float) -> float:
    """1 - (1 - (1 - e^-alpha)^{c-1})^l: some unit of block a is tied to all of m^1"""
    _require_positive(alpha=alpha)
    connected = (-math.expm1(-alpha)) ** (c - 1)
    return 1.0 - (1.0 - connected) ** l


# ===== TABLES =====

def theory_table(alpha_grid: Iterable[float], c: int, kappa: KappaLike) -> pd.DataFrame:
    """
    Efficiency and threshold table over a load grid

    Columns: alpha, h_bits, eta, thm1_pointwise, thm1_global, thm2, thm3, alpha_star
    """
    limits = thresholds(c, kappa).to_dict()
    rows = []
    for alpha in alpha_grid:
        report = efficiency(float(alpha))
        rows.append({'alpha': report.alpha, 'h_bits': report.entropy_bits, 'eta': report.eta, **limits})
    return pd.DataFrame(rows, columns=['alpha', 'h_bits', 'eta', *limits.keys()])


if __name__ == '__main__':
    logging.basicConfig(level=logging.INFO)

    print("=" * 80)
    print("THEORY CALCULATORS")
    print("=" * 80)
    print(f"h(Pois(1)) = {poisson_entropy(1.0):.6f} nats")
    print(f"eta(0.423) = {efficiency(0.423).eta:.4f}")
    print(f"eta = 1 at alpha = {efficiency_unity_root():.4f}")
    print(thresholds(10, '9/10'))
    print(np.round([lemma3_pmf(5, 0.5, i) for i in range(5)], 4))
