"""
Equivalence of the production code with the brute-force oracle

The oracle builds its own W from the definition, so every comparison here
checks two independent computations.
"""
import numpy as np
import pytest

from src.dynamics import energy_parallel, energy_sequential, gb_step, step_parallel, sweep_sequential
from src.network import build_binary, build_weights
from tests.helpers import random_instance
from tests.oracle import (
    exhaustive_orbits,
    from_bits,
    naive_binary,
    naive_energy_parallel,
    naive_energy_sequential,
    naive_step,
    naive_weights,
    to_bits,
)


def _all_states(n):
    for s in range(1 << n):
        yield np.array(to_bits(s, n), dtype=np.uint8)


class TestWeights:
    """build_weights against the literal triple loop"""

    def test_random_instances(self):
        """Entrywise agreement on 500 random instances"""
        rng = np.random.default_rng(2024)
        for _ in range(500):
            params, msgs = random_instance(rng, max_l=6, max_c=4, max_m=10)
            expected = np.array(naive_weights(msgs, params.l, params.c))
            assert np.array_equal(build_weights(msgs, params).counts, expected)

    def test_empty_and_duplicate(self, two_message_params):
        """Empty set and a doubled message agree with the oracle"""
        assert not np.array(naive_weights([], 2, 2)).any()
        doubled = np.array(naive_weights([[0, 1], [0, 1]], 2, 2))
        assert doubled[0, 3] == 2
        assert np.array_equal(build_weights([[0, 1], [0, 1]], two_message_params).counts, doubled)

    def test_binary(self):
        """Binary adjacency agrees with the oracle on 100 instances"""
        rng = np.random.default_rng(7)
        for _ in range(100):
            params, msgs = random_instance(rng)
            expected = np.array(naive_binary(msgs, params.l, params.c))
            assert np.array_equal(build_binary(msgs, params).bits, expected)


class TestSteps:
    """Dynamics against naive_step on every state of tiny instances"""

    def test_exhaustive_agreement(self):
        """20 tiny instances, all 2^N states, all three dynamics"""
        rng = np.random.default_rng(11)
        for _ in range(20):
            params, msgs = random_instance(rng, max_l=3, max_c=3, max_m=4)
            w = build_weights(msgs, params)
            wb = build_binary(msgs, params)
            w_oracle = naive_weights(msgs, params.l, params.c)
            wb_oracle = naive_binary(msgs, params.l, params.c)

            for state in _all_states(params.N):
                args = (params.l, params.c, params.kappa)
                assert tuple(step_parallel(w, state, params)) == naive_step(w_oracle, state, *args, 'parallel')
                assert tuple(sweep_sequential(w, state, params)) == naive_step(w_oracle, state, *args, 'sequential')
                assert tuple(gb_step(wb, state, params)) == naive_step(wb_oracle, state, *args, 'gb')

    def test_energies(self):
        """Float energies equal the exact definitional values"""
        rng = np.random.default_rng(5)
        for _ in range(30):
            params, msgs = random_instance(rng, max_l=3, max_c=3, max_m=5)
            w = build_weights(msgs, params)
            w_oracle = naive_weights(msgs, params.l, params.c)
            for state in _all_states(params.N):
                bits = [int(x) for x in state]
                assert energy_sequential(w, state, params) == float(
                    naive_energy_sequential(w_oracle, bits, params.c, params.kappa))
                assert energy_parallel(w, state, params) == float(
                    naive_energy_parallel(w_oracle, bits, params.l, params.c, params.kappa))

    def test_all_zero(self):
        """The oracle keeps the empty state empty"""
        w_oracle = naive_weights([[0, 1]], 2, 2)
        assert naive_step(w_oracle, (0, 0, 0, 0), 2, 2, 0.5, 'parallel') == (0, 0, 0, 0)


class TestOrbits:
    """Exhaustive orbit structure"""

    def test_l3_c2_instance(self):
        """Only fixed points and 2-cycles under T, fixed points under S"""
        rng = np.random.default_rng(3)
        msgs = rng.integers(0, 3, size=(2, 2))
        w_oracle = naive_weights(msgs, 3, 2)
        table = exhaustive_orbits(w_oracle, 3, 2, 0.5, 'parallel')
        assert len(table.successor) == 2 ** 6
        assert table.periods() <= {1, 2}

        zero = from_bits((0,) * 6)
        assert table.attractor[zero] == (zero,)
        assert table.transient[zero] == 0

        for m in msgs:
            stored = from_bits([1 if k in (m[0], 3 + m[1]) else 0 for k in range(6)])
            if table.successor[stored] == stored:
                assert table.attractor[stored] == (stored,)
            else:
                assert table.attractor[stored] is not None

        sequential = exhaustive_orbits(w_oracle, 3, 2, 0.5, 'sequential')
        assert sequential.periods() == {1}

    def test_attractors_are_self_consistent(self):
        """Each attractor maps into itself under one definitional step"""
        rng = np.random.default_rng(17)
        for _ in range(10):
            params, msgs = random_instance(rng, max_l=3, max_c=3, max_m=4)
            w_oracle = naive_weights(msgs, params.l, params.c)
            table = exhaustive_orbits(w_oracle, params.l, params.c, params.kappa)
            for cycle in table.attractors():
                for state in cycle:
                    assert table.successor[state] in cycle

    def test_size_bound(self):
        """Exhaustive enumeration refuses large N"""
        with pytest.raises(ValueError):
            exhaustive_orbits([[0]], 7, 3, 0.5)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
