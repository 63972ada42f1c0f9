"""
Dynamics Engine Module
Threshold update rule, sequential sweep S, parallel step T, GB dynamics D,
the Hamiltonians H_S and H_T, and trajectory execution with fixed-point and
2-cycle detection

A unit (a, i) fires iff its integer local field reaches kappa * c; equality
fires. Energies are evaluated exactly (Fractions) and exposed as floats.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import numpy as np

from config import settings
from src.model import (
    DimensionMismatchError,
    ModelParams,
    STATE_DTYPE,
    check_state,
    validate_messages,
)
from src.network import BinaryAdjacency, WeightMatrix

logger = logging.getLogger(__name__)


class DynamicsMode(str, Enum):
    SEQUENTIAL = 'sequential'
    PARALLEL = 'parallel'
    GB = 'gb'


class Outcome(str, Enum):
    FIXED_POINT = 'fixed-point'
    TWO_CYCLE = 'two-cycle'
    STEP_CAP_REACHED = 'step-cap-reached'


class EnergyIncreaseError(RuntimeError):
    """A Hamiltonian increased along a trajectory"""


class DynamicsContradictionError(RuntimeError):
    """The sequential dynamics produced a 2-cycle"""


@dataclass(eq=False)
class ConvergenceReport:
    """Outcome of one trajectory"""

    outcome: Outcome
    steps: int
    final_state: np.ndarray
    cycle_partner: Optional[np.ndarray] = None
    energy_trace: List[float] = field(default_factory=list)
    active_trace: List[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'outcome': self.outcome.value,
            'steps': self.steps,
            'final_active': int(self.final_state.sum()),
            'energy_trace': list(self.energy_trace),
            'active_trace': list(self.active_trace),
        }


class EnergyMonitor:
    """Asserts that recorded energies never increase"""

    def __init__(self, name: str):
        self.name = name
        self.previous: Optional[Fraction] = None
        self.step = 0

    def record(self, value: Fraction) -> None:
        if self.previous is not None and value > self.previous:
            raise EnergyIncreaseError(
                f"{self.name} increased at step {self.step}: "
                f"{float(self.previous)} -> {float(value)}"
            )
        self.previous = value
        self.step += 1


def _check_dimensions(w: Union[WeightMatrix, BinaryAdjacency], p: ModelParams) -> None:
    if (w.c, w.l) != (p.c, p.l):
        raise DimensionMismatchError(
            f"Matrix has (c, l) = ({w.c}, {w.l}) but parameters have ({p.c}, {p.l})"
        )


def _fields(w: WeightMatrix, state: np.ndarray) -> np.ndarray:
    """Local fields of all units; W is symmetric so rows of active units add up"""
    active = np.flatnonzero(state)
    if active.size == 0:
        return np.zeros(w.n, dtype=np.int64)
    return w.counts[active].sum(axis=0, dtype=np.int64)


def local_fields(w: WeightMatrix, v, p: ModelParams) -> np.ndarray:
    """Integer local field of every unit for state v"""
    _check_dimensions(w, p)
    return _fields(w, check_state(v, p))


def local_field(w: WeightMatrix, v, p: ModelParams, unit: Tuple[int, int]) -> int:
    """
    Local field sum_(b,j) W[(a,i),(b,j)] v[(b,j)] of one unit

    Args:
        unit: (block, letter)
    """
    _check_dimensions(w, p)
    state = check_state(v, p)
    block, letter = unit
    if not (0 <= block < p.c and 0 <= letter < p.l):
        raise DimensionMismatchError(f"Unit {unit} outside a ({p.c}, {p.l}) network")
    row = w.counts[p.index(block, letter)]
    return int(row[state.astype(bool)].sum(dtype=np.int64))


def phi(w: WeightMatrix, v, p: ModelParams) -> np.ndarray:
    """Threshold rule applied to every unit against the same state v"""
    fields = local_fields(w, v, p)
    return (fields >= p.firing_threshold).astype(STATE_DTYPE)


def step_parallel(w: WeightMatrix, v, p: ModelParams) -> np.ndarray:
    """Parallel dynamics T: the simultaneous application of phi"""
    return phi(w, v, p)


def _energy_sequential_exact(fields: np.ndarray, state: np.ndarray, p: ModelParams) -> Fraction:
    active = state.astype(bool)
    quadratic = int(fields[active].sum())
    return Fraction(-quadratic, 2) + p.threshold * int(active.sum())


def _energy_parallel_exact(fields: np.ndarray, state: np.ndarray,
                           successor: np.ndarray, p: ModelParams) -> Fraction:
    bilinear = int(fields[successor.astype(bool)].sum())
    return -bilinear + p.threshold * (int(state.sum()) + int(successor.sum()))


def sweep_sequential(w: WeightMatrix, v, p: ModelParams, check_flips: bool = False) -> np.ndarray:
    """
    Sequential dynamics S: one in-place raster sweep

    Units are updated from (0, 0) to (c-1, l-1); each update sees the flips
    made earlier in the same sweep.

    Args:
        check_flips: Recompute H_S around every flip and raise
            EnergyIncreaseError unless 0->1 flips do not raise it and 1->0
            flips strictly lower it
    """
    _check_dimensions(w, p)
    state = check_state(v, p).copy()
    fields = _fields(w, state)
    threshold = p.firing_threshold

    for k in range(p.N):
        new_bit = 1 if fields[k] >= threshold else 0
        if new_bit == state[k]:
            continue

        before = _energy_sequential_exact(fields, state, p) if check_flips else None
        state[k] = new_bit
        row = w.counts[k].astype(np.int64)
        if new_bit:
            fields += row
        else:
            fields -= row

        if check_flips:
            after = _energy_sequential_exact(fields, state, p)
            if new_bit and after > before:
                raise EnergyIncreaseError(
                    f"H_S increased on 0->1 flip of unit {p.unit(k)}: {float(before)} -> {float(after)}"
                )
            if not new_bit and after >= before:
                raise EnergyIncreaseError(
                    f"H_S did not decrease on 1->0 flip of unit {p.unit(k)}: {float(before)} -> {float(after)}"
                )
    return state


def gb_step(wb: BinaryAdjacency, v, p: ModelParams) -> np.ndarray:
    """
    Original GB dynamics D

    A unit fires iff every block (its own through the self loop) sends it at
    least one active input.
    """
    _check_dimensions(wb, p)
    state = check_state(v, p)
    active = np.flatnonzero(state)
    active_blocks = active // p.l

    covered = np.zeros((p.N, p.c), dtype=bool)
    for b in range(p.c):
        columns = active[active_blocks == b]
        if columns.size:
            covered[:, b] = wb.bits[:, columns].any(axis=1)
    return covered.all(axis=1).astype(STATE_DTYPE)


def energy_sequential(w: WeightMatrix, v, p: ModelParams) -> float:
    """H_S(v) = -1/2 v^t W v + kappa c sum(v)"""
    _check_dimensions(w, p)
    state = check_state(v, p)
    return float(_energy_sequential_exact(_fields(w, state), state, p))


def energy_parallel(w: WeightMatrix, v, p: ModelParams) -> float:
    """H_T(v) = -v^t W y + kappa c (sum(v) + sum(y)) with y = T(v)"""
    _check_dimensions(w, p)
    state = check_state(v, p)
    fields = _fields(w, state)
    successor = (fields >= p.firing_threshold).astype(STATE_DTYPE)
    return float(_energy_parallel_exact(fields, state, successor, p))


def monitored_step(w: WeightMatrix, v, p: ModelParams,
                   mode: Union[DynamicsMode, str] = DynamicsMode.PARALLEL) -> np.ndarray:
    """
    One update of S or T with its Hamiltonian checked across the step

    Raises:
        EnergyIncreaseError: if H(next) > H(v)
    """
    mode = DynamicsMode(mode)
    _check_dimensions(w, p)
    state = check_state(v, p)
    threshold = p.firing_threshold

    if mode is DynamicsMode.PARALLEL:
        fields = _fields(w, state)
        nxt = (fields >= threshold).astype(STATE_DTYPE)
        next_fields = _fields(w, nxt)
        after_next = (next_fields >= threshold).astype(STATE_DTYPE)
        before = _energy_parallel_exact(fields, state, nxt, p)
        after = _energy_parallel_exact(next_fields, nxt, after_next, p)
        name = 'H_T'
    elif mode is DynamicsMode.SEQUENTIAL:
        nxt = sweep_sequential(w, state, p)
        before = _energy_sequential_exact(_fields(w, state), state, p)
        after = _energy_sequential_exact(_fields(w, nxt), nxt, p)
        name = 'H_S'
    else:
        raise ValueError("The GB dynamics has no monitored energy")

    if after > before:
        raise EnergyIncreaseError(f"{name} increased across one step: {float(before)} -> {float(after)}")
    return nxt


def stable_mask(w: WeightMatrix, msgs, p: ModelParams, chunk_size: int = 256) -> np.ndarray:
    """
    For every message, whether its encoding is a fixed point of T

    Fields are evaluated for chunks of messages at once.

    Returns:
        Boolean array, one entry per message
    """
    _check_dimensions(w, p)
    letters = validate_messages(msgs, p)
    offsets = np.arange(p.c) * p.l
    threshold = p.firing_threshold
    stable = np.zeros(letters.shape[0], dtype=bool)

    for start in range(0, letters.shape[0], chunk_size):
        units = letters[start:start + chunk_size] + offsets
        fields = w.counts[units].sum(axis=1, dtype=np.int64)
        fires = fields >= threshold
        expected = np.zeros_like(fires)
        np.put_along_axis(expected, units, True, axis=1)
        stable[start:start + units.shape[0]] = np.all(fires == expected, axis=1)
    return stable


def run(
    w: Union[WeightMatrix, BinaryAdjacency],
    v0,
    p: ModelParams,
    mode: Union[DynamicsMode, str] = DynamicsMode.PARALLEL,
    step_cap: int = settings.DEFAULT_STEP_CAP,
    check_flips: bool = False,
) -> ConvergenceReport:
    """
    Iterate a dynamics until a fixed point, a 2-cycle or the step cap

    Args:
        w: WeightMatrix for sequential/parallel, BinaryAdjacency for gb
        v0: Start state
        p: Instance parameters
        mode: sequential (S, monitored by H_S), parallel (T, monitored by
            H_T) or gb (D, no energy)
        step_cap: Maximum number of updates (>= 1)
        check_flips: Forwarded to sweep_sequential

    Returns:
        ConvergenceReport; every recorded energy is monitored and an increase
        raises EnergyIncreaseError
    """
    mode = DynamicsMode(mode)
    if step_cap < 1:
        raise ValueError(f"step_cap must be >= 1 (got {step_cap})")
    expected_type = BinaryAdjacency if mode is DynamicsMode.GB else WeightMatrix
    if not isinstance(w, expected_type):
        raise TypeError(f"Mode {mode.value} needs a {expected_type.__name__}")
    _check_dimensions(w, p)

    current = check_state(v0, p).copy()
    previous = None
    energies: List[float] = []
    actives = [int(current.sum())]
    monitor = EnergyMonitor('H_S' if mode is DynamicsMode.SEQUENTIAL else 'H_T')
    threshold = p.firing_threshold

    if mode is DynamicsMode.SEQUENTIAL:
        energy = _energy_sequential_exact(_fields(w, current), current, p)
        monitor.record(energy)
        energies.append(float(energy))

    for step in range(1, step_cap + 1):
        if mode is DynamicsMode.PARALLEL:
            fields = _fields(w, current)
            nxt = (fields >= threshold).astype(STATE_DTYPE)
            energy = _energy_parallel_exact(fields, current, nxt, p)
            monitor.record(energy)
            energies.append(float(energy))
        elif mode is DynamicsMode.SEQUENTIAL:
            nxt = sweep_sequential(w, current, p, check_flips=check_flips)
            energy = _energy_sequential_exact(_fields(w, nxt), nxt, p)
            monitor.record(energy)
            energies.append(float(energy))
        else:
            nxt = gb_step(w, current, p)
        actives.append(int(nxt.sum()))

        if np.array_equal(nxt, current):
            return ConvergenceReport(Outcome.FIXED_POINT, step, current,
                                     energy_trace=energies, active_trace=actives)

        if previous is not None and np.array_equal(nxt, previous):
            if mode is DynamicsMode.SEQUENTIAL:
                raise DynamicsContradictionError(
                    f"Sequential dynamics entered a 2-cycle at step {step}"
                )
            return ConvergenceReport(Outcome.TWO_CYCLE, step, current, cycle_partner=nxt,
                                     energy_trace=energies, active_trace=actives)

        previous, current = current, nxt

    logger.debug(f"Trajectory reached the step cap ({step_cap}) in {mode.value} mode")
    return ConvergenceReport(Outcome.STEP_CAP_REACHED, step_cap, current,
                             energy_trace=energies, active_trace=actives)
