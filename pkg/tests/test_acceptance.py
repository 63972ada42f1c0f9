"""
End-to-end checks at realistic sizes

Marked slow; run with `pytest -m slow`. Monte Carlo thresholds are set
from finite-size predictions (see DESIGN.md) rather than the l -> infinity
limits.
"""
from fractions import Fraction

import numpy as np
import pytest
from click.testing import CliRunner

import main
from experiments.lemma3 import lemma3_experiment
from experiments.retrieval import retrieval_experiment
from experiments.stability import stability_experiment
from experiments.trials import default_workers
from src.dynamics import DynamicsMode, Outcome, gb_step, local_field, run
from src.model import ModelParams, default_c, encode, kappa_max, params_for_load
from src.network import build_binary, build_weights
from src import theory
from tests.oracle import exhaustive_orbits, naive_weights

pytestmark = pytest.mark.slow

WORKERS = default_workers()
SIZES = (64, 128, 256)


def _instance(rng, max_l=32, max_c=6):
    """Random instance with alpha <= 1 and kappa <= 1 - 1/c"""
    l = int(rng.integers(2, max_l + 1))
    c = int(rng.integers(2, max_c + 1))
    M = int(rng.integers(1, l * l + 1))
    kappa = Fraction(int(rng.integers(1, c)), c)
    params = ModelParams(l=l, c=c, M=M, kappa=kappa)
    return params, rng.integers(0, l, size=(M, c))


def _violation_rates(alpha):
    rates = {}
    for l in SIZES:
        c = default_c(l)
        params = params_for_load(l, c, alpha, kappa_max(c))
        rates[l] = stability_experiment(params, 1000, 'single-message', seed=l, workers=WORKERS).complement().p_hat
    return rates


class TestExactInvariants:
    """Properties that hold on every instance"""

    def test_energy_descent(self):
        """1000 instances, random starts, both dynamics monitored at every step"""
        rng = np.random.default_rng(100)
        for k in range(1000):
            params, msgs = _instance(rng)
            w = build_weights(msgs, params)
            start = rng.integers(0, 2, size=params.N).astype(np.uint8)
            run(w, start, params, DynamicsMode.PARALLEL)
            report = run(w, start, params, DynamicsMode.SEQUENTIAL, check_flips=k % 5 == 0)
            assert report.outcome is Outcome.FIXED_POINT

    def test_orbit_structure(self):
        """Exhaustive enumeration on 50 instances with N <= 12"""
        rng = np.random.default_rng(101)
        done = 0
        while done < 50:
            l = int(rng.integers(2, 7))
            c = int(rng.integers(2, 7))
            if l * c > 12:
                continue
            M = int(rng.integers(1, l * l + 1))
            kappa = Fraction(int(rng.integers(1, c)), c)
            msgs = rng.integers(0, l, size=(M, c))
            w = naive_weights(msgs, l, c)
            assert exhaustive_orbits(w, l, c, kappa, 'parallel').periods() <= {1, 2}
            assert exhaustive_orbits(w, l, c, kappa, 'sequential').periods() == {1}
            done += 1

    def test_active_units_fire(self):
        """10^4 (instance, message, block) triples"""
        rng = np.random.default_rng(102)
        for _ in range(1000):
            params, msgs = _instance(rng)
            w = build_weights(msgs, params)
            for _ in range(10):
                m = msgs[int(rng.integers(params.M))]
                a = int(rng.integers(params.c))
                field = local_field(w, encode(m, params), params, (a, int(m[a])))
                assert field >= params.firing_threshold

    def test_gb_fixed_points(self):
        """Every stored message is a fixed point of D on 1000 instances"""
        rng = np.random.default_rng(103)
        for _ in range(1000):
            params, msgs = _instance(rng)
            wb = build_binary(msgs, params)
            for m in msgs[:20]:
                state = encode(m, params)
                assert np.array_equal(gb_step(wb, state, params), state)


class TestCapacityTrends:
    """Monte Carlo trends around the capacity thresholds"""

    def test_below_threshold(self):
        """
        alpha = 0.05: the violation rate is small at l = 256

        c = ceil(ln l) is 5 at l = 64 and 128 but 6 at l = 256, so the rate is
        only compared against l = 128.
        """
        rates = _violation_rates(0.05)
        assert rates[256] < 0.05
        assert rates[256] < rates[128]

    def test_above_threshold(self):
        """alpha = 0.6 > thm3: stored messages are almost never stable"""
        assert theory.thresholds(6, '5/6').thm3 < 0.6
        rates = _violation_rates(0.6)
        assert rates[256] >= 0.9
        assert rates[256] >= rates[64] - 0.01

    def test_one_step_retrieval(self):
        """
        l = 256, c = 6, kappa = 1/2, r = 2

        About 0.97 recovery at alpha = 0.01 and 0.79 at alpha = 0.02 at this
        size; both tend to 1 as l grows.
        """
        for alpha, floor in ((0.01, 0.9), (0.02, 0.65)):
            params = params_for_load(256, 6, alpha, '1/2')
            estimate = retrieval_experiment(params, gamma='1/2', r=2, trials=1000, seed=8, workers=WORKERS)
            assert estimate.p_hat >= floor

    def test_connection_count_law(self):
        """l = 100, c = 5, alpha = 0.5: empirical Y law close to its limit"""
        params = params_for_load(100, 5, 0.5, '4/5')
        result = lemma3_experiment(params, trials=10_000, seed=9, workers=WORKERS)
        assert result['tv_theory'] <= 0.05
        assert abs(result['p_all_empirical'] - 0.0240) <= 0.02


class TestDeterminism:
    def test_sweep_is_byte_identical(self, tmp_path):
        """Two sweep runs on two workers write identical CSV and summary bytes"""
        out = tmp_path / 'sweep.csv'
        args = ['--log-level', 'WARNING', '--seed', '5', '--workers', '2', '--output', str(out),
                'sweep', '--l-list', '32,64', '--alpha-grid', '0.05:0.15:0.05', '--trials', '100']

        runner = CliRunner()
        assert runner.invoke(main.cli, args).exit_code == 0
        first = (out.read_bytes(), (tmp_path / 'sweep.summary.json').read_bytes())
        assert runner.invoke(main.cli, args).exit_code == 0
        assert (out.read_bytes(), (tmp_path / 'sweep.summary.json').read_bytes()) == first


if __name__ == '__main__':
    pytest.main([__file__, '-v', '-m', 'slow'])
