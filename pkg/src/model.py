"""
Core Model Module
Instance parameters, one-hot message encoding, message sampling and
Hamming-ball corruption for the clique associative memory

Letters are 0-based. A network state is a flat 0/1 vector of length
N = c * l where unit (a, i) (block a, letter i) lives at index a * l + i.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

Message = Tuple[int, ...]
NeuronState = np.ndarray
KappaLike = Union[Fraction, float, int, str]

# Floats such as 1 - 1/6 are snapped to the nearest fraction with a small
# denominator so that kappa * c lands exactly on the integer it denotes.
KAPPA_MAX_DENOMINATOR = 10**6

STATE_DTYPE = np.uint8


class InvalidMessageError(ValueError):
    """A message has the wrong length or a letter outside [0, l)"""


class NotOneHotError(ValueError):
    """A state cannot be decoded because a block is not one-hot"""

    def __init__(self, block: int, active: int):
        self.block = block
        self.active = active
        super().__init__(
            f"Block {block} has {active} active units; expected exactly one"
        )


class DimensionMismatchError(ValueError):
    """A state or message does not match the instance dimensions"""


def as_fraction(kappa: KappaLike) -> Fraction:
    """
    Convert a threshold coefficient to an exact rational

    Args:
        kappa: Fraction, int, decimal string ("0.5", "5/6") or float

    Returns:
        Exact Fraction; floats are snapped to a denominator <= 10**6
    """
    if isinstance(kappa, Rational):
        return Fraction(kappa)
    if isinstance(kappa, str):
        return Fraction(kappa.strip())
    return Fraction(kappa).limit_denominator(KAPPA_MAX_DENOMINATOR)


@dataclass(frozen=True)
class ModelParams:
    """Shape of one instance: l letters per block, c blocks, M messages, kappa"""

    l: int
    c: int
    M: int
    kappa: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'kappa', as_fraction(self.kappa))

        errors = []
        if self.l < 2:
            errors.append(f"l must be >= 2 (got {self.l})")
        if self.c < 2:
            errors.append(f"c must be >= 2 (got {self.c})")
        if self.M < 1:
            errors.append(f"M must be >= 1 (got {self.M})")
        if not 0 < self.kappa <= 1:
            errors.append(f"kappa must lie in (0, 1] (got {self.kappa})")
        if errors:
            raise ValueError("Invalid model parameters: " + "; ".join(errors))

    @property
    def N(self) -> int:
        return self.c * self.l

    @property
    def alpha(self) -> float:
        """Realized load M / l^2"""
        return self.M / self.l ** 2

    @property
    def threshold(self) -> Fraction:
        """Exact firing threshold kappa * c"""
        return self.kappa * self.c

    @property
    def firing_threshold(self) -> int:
        """
        Smallest integer field that fires

        An integer field f satisfies f >= kappa * c iff f >= ceil(kappa * c),
        so comparing against this integer is exact, ties included.
        """
        return math.ceil(self.threshold)

    def index(self, block: int, letter: int) -> int:
        """Flat index of unit (block, letter)"""
        return block * self.l + letter

    def unit(self, index: int) -> Tuple[int, int]:
        """(block, letter) of a flat index"""
        return divmod(index, self.l)


def default_c(l: int) -> int:
    """Default block count ceil(ln l)"""
    return max(2, math.ceil(math.log(l)))


def kappa_max(c: int) -> Fraction:
    """Largest kappa keeping stored active units on: 1 - 1/c"""
    return Fraction(c - 1, c)


def kappa_for_gamma(gamma: KappaLike, c: int) -> Fraction:
    """Retrieval threshold min(1 - gamma, 1 - 1/c)"""
    return min(1 - as_fraction(gamma), kappa_max(c))


def resolve_c(c_rule: Union[str, int], l: int) -> int:
    """Block count from a rule: 'ln' gives ceil(ln l), an integer is used as is"""
    if isinstance(c_rule, str) and c_rule.strip().lower() == 'ln':
        return default_c(l)
    c = int(c_rule)
    if c < 2:
        raise ValueError(f"c must be >= 2 (got {c})")
    return c


def resolve_kappa(kappa_rule: KappaLike, c: int, gamma: Optional[KappaLike] = None) -> Fraction:
    """
    Threshold coefficient from a rule

    'max' gives 1 - 1/c, 'gamma' gives min(1 - gamma, 1 - 1/c); anything else
    is read as an exact value.
    """
    if isinstance(kappa_rule, str):
        rule = kappa_rule.strip().lower()
        if rule == 'max':
            return kappa_max(c)
        if rule == 'gamma':
            if gamma is None:
                raise ValueError("kappa rule 'gamma' needs gamma")
            return kappa_for_gamma(gamma, c)
    return as_fraction(kappa_rule)


def params_for_load(l: int, c: int, alpha: float, kappa: KappaLike) -> ModelParams:
    """
    Build parameters from a requested load

    M is round(alpha * l^2) (at least 1); the realized alpha is M / l^2.
    """
    M = max(1, int(round(alpha * l * l)))
    return ModelParams(l=l, c=c, M=M, kappa=kappa)


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """
    Independent random stream for one trial

    Args:
        master_seed: Experiment master seed
        trial_index: Index of the trial (or cell) within the experiment

    Returns:
        Generator seeded from SeedSequence(master_seed, spawn_key=(trial_index,))
    """
    sequence = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    return np.random.default_rng(sequence)


def derive_seed(master_seed: int, index: int) -> int:
    """Deterministic child seed (used for sweep cells)"""
    sequence = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


# ===== MESSAGES =====

def validate_message(m: Sequence[int], p: ModelParams) -> np.ndarray:
    """
    Check a message against the instance shape

    Returns:
        The letters as an int64 array
    """
    letters = np.asarray(m, dtype=np.int64)
    if letters.shape != (p.c,):
        raise InvalidMessageError(
            f"Message must have exactly {p.c} letters (got shape {letters.shape})"
        )
    bad = np.flatnonzero((letters < 0) | (letters >= p.l))
    if bad.size:
        block = int(bad[0])
        raise InvalidMessageError(
            f"Letter {int(letters[block])} in block {block} is outside [0, {p.l})"
        )
    return letters


def validate_messages(msgs, p: ModelParams) -> np.ndarray:
    """
    Check a message set against the instance shape

    Returns:
        (count, c) int64 array; an empty set gives shape (0, c)
    """
    letters = np.asarray(msgs, dtype=np.int64)
    if letters.size == 0:
        return np.zeros((0, p.c), dtype=np.int64)
    if letters.ndim != 2 or letters.shape[1] != p.c:
        raise InvalidMessageError(
            f"Message set must have shape (count, {p.c}) (got {letters.shape})"
        )
    bad = np.argwhere((letters < 0) | (letters >= p.l))
    if bad.size:
        row, block = (int(x) for x in bad[0])
        raise InvalidMessageError(
            f"Message {row}: letter {int(letters[row, block])} in block {block} "
            f"is outside [0, {p.l})"
        )
    return letters


def encode(m: Sequence[int], p: ModelParams) -> NeuronState:
    """
    One-hot encoding of a message

    Args:
        m: c letters in [0, l)
        p: Instance parameters

    Returns:
        State of length N with bit (a, m[a]) set for every block a
    """
    letters = validate_message(m, p)
    state = np.zeros(p.N, dtype=STATE_DTYPE)
    state[np.arange(p.c) * p.l + letters] = 1
    return state


def encode_many(msgs, p: ModelParams) -> np.ndarray:
    """Encode a message set into a (count, N) 0/1 matrix"""
    letters = validate_messages(msgs, p)
    states = np.zeros((letters.shape[0], p.N), dtype=STATE_DTYPE)
    rows = np.repeat(np.arange(letters.shape[0]), p.c)
    cols = (np.arange(p.c) * p.l + letters).ravel()
    states[rows, cols] = 1
    return states


def decode(v: NeuronState, p: ModelParams) -> Message:
    """
    Inverse of encode

    Raises:
        NotOneHotError: for the first block with zero or several active bits
    """
    state = check_state(v, p)
    blocks = state.reshape(p.c, p.l)
    active_per_block = blocks.sum(axis=1)
    for block, active in enumerate(active_per_block):
        if active != 1:
            raise NotOneHotError(block, int(active))
    return tuple(int(letter) for letter in blocks.argmax(axis=1))


def check_state(v: NeuronState, p: ModelParams) -> NeuronState:
    """Validate a state vector and return it as a uint8 array"""
    state = np.asarray(v)
    if state.shape != (p.N,):
        raise DimensionMismatchError(
            f"State must have length N = {p.N} (got shape {state.shape})"
        )
    if np.any((state != 0) & (state != 1)):
        raise ValueError("State entries must be 0 or 1")
    return state.astype(STATE_DTYPE, copy=False)


def sample_messages(p: ModelParams, rng: np.random.Generator, distinct: bool = False) -> np.ndarray:
    """
    Draw M i.i.d. uniform messages

    Args:
        p: Instance parameters
        rng: Random stream (consumed)
        distinct: Reject duplicates so that the set is pairwise different

    Returns:
        (M, c) int64 array of letters
    """
    if not distinct:
        return rng.integers(0, p.l, size=(p.M, p.c), dtype=np.int64)

    if p.M > p.l ** p.c:
        raise ValueError(
            f"Cannot draw {p.M} distinct messages from an alphabet of {p.l ** p.c} words"
        )

    seen = set()
    rows = []
    while len(rows) < p.M:
        batch = rng.integers(0, p.l, size=(p.M - len(rows), p.c), dtype=np.int64)
        for row in batch:
            key = tuple(int(x) for x in row)
            if key not in seen:
                seen.add(key)
                rows.append(row)
    return np.vstack(rows)


# ===== HAMMING GEOMETRY =====

class CorruptionMode(str, Enum):
    EXACT_ERRORS = 'exact-errors'
    ERASURE_RESAMPLE = 'erasure-resample'


@dataclass(frozen=True)
class BallSpec:
    """Hamming ball around a message from which corrupted inputs are drawn"""

    center: Message
    radius: int
    mode: CorruptionMode = CorruptionMode.EXACT_ERRORS

    def __post_init__(self):
        object.__setattr__(self, 'center', tuple(int(x) for x in self.center))
        object.__setattr__(self, 'mode', CorruptionMode(self.mode))
        if self.radius < 0:
            raise ValueError(f"Radius must be nonnegative (got {self.radius})")
        if self.radius > len(self.center):
            raise ValueError(
                f"Radius {self.radius} exceeds the number of blocks {len(self.center)}"
            )


def hamming(m1: Sequence[int], m2: Sequence[int]) -> int:
    """Number of blocks in which two messages differ"""
    a = np.asarray(m1)
    b = np.asarray(m2)
    if a.shape != b.shape:
        raise InvalidMessageError(
            f"Messages have different lengths ({a.shape[0]} vs {b.shape[0]})"
        )
    return int(np.count_nonzero(a != b))


def corrupt(b: BallSpec, p: ModelParams, rng: np.random.Generator) -> Message:
    """
    Draw a corrupted copy of the ball center

    exact-errors replaces r distinct blocks by a uniformly chosen wrong letter
    (distance exactly r); erasure-resample redraws r distinct blocks from the
    full alphabet (distance at most r).
    """
    center = validate_message(b.center, p)
    if b.radius > p.c:
        raise ValueError(f"Radius {b.radius} exceeds c = {p.c}")

    out = center.copy()
    if b.radius == 0:
        return tuple(int(x) for x in out)

    blocks = rng.choice(p.c, size=b.radius, replace=False)
    if b.mode is CorruptionMode.EXACT_ERRORS:
        # a nonzero shift mod l is a uniform wrong letter
        shifts = rng.integers(1, p.l, size=b.radius)
        out[blocks] = (center[blocks] + shifts) % p.l
    else:
        out[blocks] = rng.integers(0, p.l, size=b.radius)
    return tuple(int(x) for x in out)


def mixed_message(m1: Sequence[int], m2: Sequence[int], split: int) -> Message:
    """
    Adversarial input: blocks [0, split) from m1, the rest from m2

    No one-step retrieval guarantee covers such inputs.
    """
    if len(m1) != len(m2):
        raise InvalidMessageError("Messages have different lengths")
    if not 0 <= split <= len(m1):
        raise ValueError(f"Split {split} outside [0, {len(m1)}]")
    return tuple(int(x) for x in m1[:split]) + tuple(int(x) for x in m2[split:])
