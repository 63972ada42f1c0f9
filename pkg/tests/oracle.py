"""
Brute-force reference implementations for the test suite

Everything here is written from the definitions with plain Python loops and
exact arithmetic. Nothing is imported from src for building W or evaluating
local fields, so agreement with the production code is a real check.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from config.settings import MAX_EXHAUSTIVE_NEURONS


def _zeta(message: Sequence[int], block: int, letter: int) -> int:
    """Indicator that the message uses `letter` in `block`"""
    return 1 if message[block] == letter else 0


def naive_weights(msgs, l: int, c: int) -> List[List[int]]:
    """
    W[(a,i),(b,j)] = sum over messages of zeta_(a,i) zeta_(b,j) for a != b

    Returns:
        N x N nested list of ints
    """
    msgs = [tuple(int(x) for x in m) for m in msgs]
    for m in msgs:
        if len(m) != c or any(not 0 <= x < l for x in m):
            raise ValueError(f"Invalid message {m}")

    n = c * l
    w = [[0] * n for _ in range(n)]
    for a in range(c):
        for i in range(l):
            for b in range(c):
                if b == a:
                    continue
                for j in range(l):
                    total = 0
                    for m in msgs:
                        total += _zeta(m, a, i) * _zeta(m, b, j)
                    w[a * l + i][b * l + j] = total
    return w


def naive_binary(msgs, l: int, c: int) -> List[List[int]]:
    """GB adjacency: 1 where some message uses both letters (self loops included)"""
    msgs = [tuple(int(x) for x in m) for m in msgs]
    n = c * l
    bits = [[0] * n for _ in range(n)]
    for m in msgs:
        for a in range(c):
            for b in range(c):
                bits[a * l + m[a]][b * l + m[b]] = 1
    return bits


def _field(w, v, unit: int) -> int:
    return sum(w[unit][k] * v[k] for k in range(len(v)))


def naive_step(w, v, l: int, c: int, kappa: Fraction, mode: str) -> Tuple[int, ...]:
    """
    One literal update of the parallel (T), sequential (S) or GB (D) dynamics

    For gb, w is the binary adjacency and kappa is ignored.
    """
    v = [int(x) for x in v]
    n = c * l
    threshold = Fraction(kappa) * c

    if mode == 'parallel':
        return tuple(1 if _field(w, v, k) >= threshold else 0 for k in range(n))

    if mode == 'sequential':
        state = list(v)
        for k in range(n):
            state[k] = 1 if _field(w, state, k) >= threshold else 0
        return tuple(state)

    if mode == 'gb':
        out = []
        for k in range(n):
            fires = 1
            for b in range(c):
                fires *= 1 if any(w[k][b * l + j] * v[b * l + j] for j in range(l)) else 0
            out.append(fires)
        return tuple(out)

    raise ValueError(f"Unknown mode {mode}")


def naive_energy_sequential(w, v, c: int, kappa: Fraction) -> Fraction:
    """H_S(v) = -1/2 sum v_x W_xy v_y + kappa c sum v"""
    n = len(v)
    quadratic = sum(v[x] * w[x][y] * v[y] for x in range(n) for y in range(n))
    return Fraction(-quadratic, 2) + Fraction(kappa) * c * sum(v)


def naive_energy_parallel(w, v, l: int, c: int, kappa: Fraction) -> Fraction:
    """H_T(v) = -sum v_x W_xy T(v)_y + kappa c (sum v + sum T(v))"""
    y = naive_step(w, v, l, c, kappa, 'parallel')
    n = len(v)
    bilinear = sum(v[a] * w[a][b] * y[b] for a in range(n) for b in range(n))
    return -bilinear + Fraction(kappa) * c * (sum(v) + sum(y))


def to_bits(state: int, n: int) -> Tuple[int, ...]:
    """Bit k of the integer is unit k"""
    return tuple((state >> k) & 1 for k in range(n))


def from_bits(bits: Sequence[int]) -> int:
    return sum(int(b) << k for k, b in enumerate(bits))


@dataclass
class OrbitTable:
    """Attractor and transient length of every state in {0,1}^N"""

    n: int
    successor: List[int]
    attractor: List[Tuple[int, ...]]
    transient: List[int]

    def periods(self) -> set:
        return {len(cycle) for cycle in self.attractor}

    def attractors(self) -> set:
        return set(self.attractor)


def exhaustive_orbits(w, l: int, c: int, kappa: Fraction, mode: str = 'parallel',
                      check: bool = True) -> OrbitTable:
    """
    Classify every state by following the successor map to its cycle

    Args:
        check: Raise AssertionError on any attractor of period > 2 (and on
            any non-fixed attractor for the sequential dynamics)

    Raises:
        ValueError: if N exceeds the exhaustive bound
    """
    n = c * l
    if n > MAX_EXHAUSTIVE_NEURONS:
        raise ValueError(f"N = {n} exceeds the exhaustive bound {MAX_EXHAUSTIVE_NEURONS}")

    size = 1 << n
    successor = [from_bits(naive_step(w, to_bits(s, n), l, c, kappa, mode)) for s in range(size)]
    attractor: List = [None] * size
    transient = [-1] * size

    for s in range(size):
        path = []
        position = {}
        x = s
        while attractor[x] is None and x not in position:
            position[x] = len(path)
            path.append(x)
            x = successor[x]
        if attractor[x] is None:
            cycle = path[position[x]:]
            key = tuple(sorted(cycle))
            for y in cycle:
                attractor[y] = key
                transient[y] = 0
            path = path[:position[x]]
        for y in reversed(path):
            attractor[y] = attractor[successor[y]]
            transient[y] = transient[successor[y]] + 1

    table = OrbitTable(n=n, successor=successor, attractor=attractor, transient=transient)
    if check:
        longest = max(table.periods())
        assert longest <= 2, f"attractor of period {longest} under {mode}"
        if mode == 'sequential':
            assert longest == 1, "sequential dynamics has a non-fixed attractor"
    return table
