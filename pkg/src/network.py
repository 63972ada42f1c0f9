"""
Network Store Module
Builds the integer co-occurrence matrix W and the binary GB adjacency from
a message set, and summarizes the distribution of the cross-block entries
"""
import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from src.model import ModelParams, STATE_DTYPE, validate_message, validate_messages

logger = logging.getLogger(__name__)

_COUNT_DTYPES = (np.uint8, np.uint16, np.uint32, np.uint64)


def count_dtype(max_count: int) -> np.dtype:
    """
    Narrowest unsigned integer type holding counts up to max_count

    Raises:
        OverflowError: if no supported width can hold max_count
    """
    for dtype in _COUNT_DTYPES:
        if max_count <= np.iinfo(dtype).max:
            return np.dtype(dtype)
    raise OverflowError(f"Counts up to {max_count} do not fit in 64 bits")


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """
    Symmetric N x N co-occurrence counts

    counts[(a,i),(b,j)] is the number of stored messages using both letters;
    within-block entries (diagonal included) are stored as zeros.
    """

    counts: np.ndarray
    c: int
    l: int
    M: int

    @property
    def n(self) -> int:
        return self.c * self.l

    def blocks(self) -> np.ndarray:
        """View with shape (c, l, c, l)"""
        return self.counts.reshape(self.c, self.l, self.c, self.l)

    def cross_block_entries(self) -> np.ndarray:
        """The binom(c, 2) * l^2 entries of the upper block triangle"""
        blocks = self.blocks()
        upper = [blocks[a, :, b, :].ravel() for a in range(self.c) for b in range(a + 1, self.c)]
        if not upper:
            return np.zeros(0, dtype=self.counts.dtype)
        return np.concatenate(upper)

    def max_entry(self) -> int:
        return int(self.counts.max()) if self.counts.size else 0

    def check_invariants(self) -> bool:
        """Symmetry, zero within-block entries and the M bound"""
        if not np.array_equal(self.counts, self.counts.T):
            logger.error("Weight matrix is not symmetric")
            return False
        blocks = self.blocks()
        for a in range(self.c):
            if np.any(blocks[a, :, a, :]):
                logger.error(f"Within-block entries of block {a} are not zero")
                return False
        if self.max_entry() > self.M:
            logger.error(f"Entry {self.max_entry()} exceeds M = {self.M}")
            return False
        return True


@dataclass(frozen=True, eq=False)
class BinaryAdjacency:
    """
    GB 0/1 matrix: max over messages of psi(m) psi(m)^t

    Off-block bits mark clique edges; the diagonal bit of (a, i) is a self
    loop set iff letter i of block a is used by some message; other
    within-block bits are zero.
    """

    bits: np.ndarray
    c: int
    l: int

    @property
    def n(self) -> int:
        return self.c * self.l


def build_weights(msgs, p: ModelParams) -> WeightMatrix:
    """
    Co-occurrence counts W of a message set

    Args:
        msgs: (count, c) letters; duplicates count twice, an empty set gives 0
        p: Instance parameters (fixes l, c and the count width via M)

    Returns:
        WeightMatrix with exact integer counts
    """
    letters = validate_messages(msgs, p)
    bound = max(p.M, letters.shape[0])
    dtype = count_dtype(bound)

    counts = np.zeros((p.N, p.N), dtype=dtype)
    blocks = counts.reshape(p.c, p.l, p.c, p.l)
    for a in range(p.c):
        for b in range(a + 1, p.c):
            pair = letters[:, a] * p.l + letters[:, b]
            table = np.bincount(pair, minlength=p.l * p.l).reshape(p.l, p.l)
            blocks[a, :, b, :] = table
            blocks[b, :, a, :] = table.T

    logger.debug(f"Built weight matrix N={p.N} from {letters.shape[0]} messages")
    return WeightMatrix(counts=counts, c=p.c, l=p.l, M=bound)


def build_binary(msgs, p: ModelParams) -> BinaryAdjacency:
    """
    GB binary adjacency of a message set

    Off-block bits are 1{W >= 1}; diagonal bits are the self loops of used
    letters.
    """
    letters = validate_messages(msgs, p)
    weights = build_weights(letters, p)

    bits = (weights.counts >= 1).astype(STATE_DTYPE)
    used = np.unique((np.arange(p.c) * p.l + letters).ravel())
    bits[used, used] = 1
    return BinaryAdjacency(bits=bits, c=p.c, l=p.l)


def is_stored(wb: BinaryAdjacency, m: Sequence[int], p: ModelParams) -> bool:
    """
    GB storage criterion: every edge of the message's clique is present
    """
    letters = validate_message(m, p)
    units = np.arange(p.c) * p.l + letters
    clique = wb.bits[np.ix_(units, units)]
    off_diagonal = ~np.eye(p.c, dtype=bool)
    return bool(np.all(clique[off_diagonal] == 1))


@dataclass(frozen=True, eq=False)
class EdgeStats:
    """Summary of the cross-block entries of W"""

    mean: float
    max_count: int
    fraction_nonzero: float
    histogram: np.ndarray
    entries: int

    def empirical_pmf(self) -> np.ndarray:
        if self.entries == 0:
            return np.zeros_like(self.histogram, dtype=float)
        return self.histogram / self.entries

    def poisson_tv(self, alpha: float) -> float:
        """
        Total-variation distance between the entry histogram and Pois(alpha)

        The Poisson tail beyond the largest observed count is included.
        """
        empirical = self.empirical_pmf()
        support = np.arange(empirical.size)
        poisson = stats.poisson.pmf(support, alpha)
        tail = stats.poisson.sf(empirical.size - 1, alpha)
        return float(0.5 * (np.abs(empirical - poisson).sum() + tail))


def edge_stats(w: WeightMatrix) -> EdgeStats:
    """
    Distribution of the binom(c, 2) * l^2 cross-block entries

    Returns:
        EdgeStats with mean, max, nonzero fraction and the per-value histogram
    """
    entries = w.cross_block_entries().astype(np.int64)
    if entries.size == 0:
        return EdgeStats(mean=0.0, max_count=0, fraction_nonzero=0.0,
                         histogram=np.zeros(1, dtype=np.int64), entries=0)

    histogram = np.bincount(entries)
    return EdgeStats(
        mean=float(entries.mean()),
        max_count=int(entries.max()),
        fraction_nonzero=float(np.count_nonzero(entries) / entries.size),
        histogram=histogram,
        entries=int(entries.size),
    )


if __name__ == '__main__':
    from src.model import params_for_load, trial_rng, sample_messages

    logging.basicConfig(level=logging.INFO)

    params = params_for_load(l=100, c=5, alpha=0.5, kappa='4/5')
    messages = sample_messages(params, trial_rng(42, 0))
    summary = edge_stats(build_weights(messages, params))

    print(f"Entries: {summary.entries}")
    print(f"Mean count: {summary.mean:.4f} (alpha = {params.alpha:.4f})")
    print(f"TV distance to Pois(alpha): {summary.poisson_tv(params.alpha):.4f}")
