"""
Random instance helpers for the test suite
"""
from fractions import Fraction

import numpy as np

from src.model import ModelParams


def random_instance(rng: np.random.Generator, max_l: int = 6, max_c: int = 4, max_m: int = 10):
    """Small random instance with kappa <= 1 - 1/c"""
    l = int(rng.integers(2, max_l + 1))
    c = int(rng.integers(2, max_c + 1))
    M = int(rng.integers(1, max_m + 1))
    numerator = int(rng.integers(1, c))
    params = ModelParams(l=l, c=c, M=M, kappa=Fraction(numerator, c))
    msgs = rng.integers(0, l, size=(M, c))
    return params, msgs


def random_state(rng: np.random.Generator, params: ModelParams) -> np.ndarray:
    return rng.integers(0, 2, size=params.N).astype(np.uint8)
