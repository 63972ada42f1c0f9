"""
Tests for instance parameters, encoding, sampling and corruption
"""
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings as hypothesis_settings, strategies as st

from src.model import (
    BallSpec,
    CorruptionMode,
    DimensionMismatchError,
    InvalidMessageError,
    ModelParams,
    NotOneHotError,
    as_fraction,
    check_state,
    corrupt,
    decode,
    default_c,
    derive_seed,
    encode,
    encode_many,
    hamming,
    kappa_for_gamma,
    kappa_max,
    mixed_message,
    params_for_load,
    resolve_c,
    resolve_kappa,
    sample_messages,
    trial_rng,
)


class TestModelParams:
    """Instance parameters and the exact firing threshold"""

    def test_float_kappa_snaps_to_fraction(self):
        """1 - 1/6 given as a float still gives threshold 5 for c = 6"""
        params = ModelParams(l=256, c=6, M=1, kappa=1 - 1 / 6)
        assert params.kappa == Fraction(5, 6)
        assert params.firing_threshold == 5

    def test_string_kappa(self):
        """Decimal and fraction strings are read exactly"""
        assert as_fraction('0.5') == Fraction(1, 2)
        assert as_fraction('5/6') == Fraction(5, 6)

    def test_threshold_rounds_up(self):
        """kappa * c = 2.5 fires from field 3"""
        params = ModelParams(l=4, c=5, M=1, kappa='1/2')
        assert params.threshold == Fraction(5, 2)
        assert params.firing_threshold == 3

    def test_invalid_parameters_are_collected(self):
        """Every violated constraint is named in one error"""
        with pytest.raises(ValueError) as excinfo:
            ModelParams(l=1, c=1, M=0, kappa=2)
        message = str(excinfo.value)
        for name in ('l must', 'c must', 'M must', 'kappa must'):
            assert name in message

    def test_alpha_and_index(self):
        """alpha = M / l^2 and flat index a * l + i"""
        params = ModelParams(l=4, c=3, M=8, kappa='1/2')
        assert params.N == 12
        assert params.alpha == 0.5
        assert params.index(2, 1) == 9
        assert params.unit(9) == (2, 1)


class TestRules:
    """Presets for c and kappa"""

    def test_default_c(self):
        """c = ceil(ln l), at least 2"""
        assert default_c(256) == 6
        assert default_c(64) == 5
        assert default_c(2) == 2

    def test_kappa_presets(self):
        """1 - 1/c and min(1 - gamma, 1 - 1/c)"""
        assert kappa_max(6) == Fraction(5, 6)
        assert kappa_for_gamma('0.5', 6) == Fraction(1, 2)
        assert kappa_for_gamma(0.1, 6) == Fraction(5, 6)

    def test_resolve_c(self):
        """'ln' or an integer"""
        assert resolve_c('ln', 256) == 6
        assert resolve_c(4, 256) == 4
        assert resolve_c('7', 256) == 7
        with pytest.raises(ValueError):
            resolve_c(1, 256)

    def test_resolve_kappa(self):
        """'max', 'gamma' or a literal value"""
        assert resolve_kappa('max', 5) == Fraction(4, 5)
        assert resolve_kappa('gamma', 6, '0.5') == Fraction(1, 2)
        assert resolve_kappa('2/3', 6) == Fraction(2, 3)
        with pytest.raises(ValueError):
            resolve_kappa('gamma', 6)

    def test_params_for_load(self):
        """M = round(alpha l^2) and the realized alpha is reported"""
        params = params_for_load(64, 5, 0.05, '4/5')
        assert params.M == 205
        assert params.alpha == 205 / 64 ** 2
        assert params_for_load(4, 2, 0.001, '1/2').M == 1


class TestEncoding:
    """One-hot encoding and decoding"""

    def test_encode(self):
        """Bit (a, m[a]) is set for every block"""
        params = ModelParams(l=3, c=3, M=1, kappa='1/2')
        state = encode((1, 0, 2), params)
        assert list(np.flatnonzero(state)) == [1, 3, 8]
        assert decode(state, params) == (1, 0, 2)

    def test_encode_many(self):
        """Rows match single encodings"""
        params = ModelParams(l=3, c=2, M=2, kappa='1/2')
        states = encode_many([[0, 1], [2, 2]], params)
        assert np.array_equal(states[0], encode((0, 1), params))
        assert np.array_equal(states[1], encode((2, 2), params))

    def test_round_trip(self):
        """decode(encode(m)) == m for 1000 random messages"""
        params = ModelParams(l=7, c=5, M=1000, kappa='4/5')
        for row in sample_messages(params, trial_rng(11, 0)):
            m = tuple(int(x) for x in row)
            assert decode(encode(m, params), params) == m

    def test_decode_rejects_crowded_block(self):
        """A block with two active units raises NotOneHotError naming it"""
        params = ModelParams(l=4, c=2, M=1, kappa='1/2')
        state = np.array([1, 0, 0, 0, 1, 1, 0, 0], dtype=np.uint8)
        with pytest.raises(NotOneHotError) as excinfo:
            decode(state, params)
        assert excinfo.value.block == 1
        assert excinfo.value.active == 2

    def test_decode_rejects_empty_block(self):
        """An all-zero block raises NotOneHotError naming it"""
        params = ModelParams(l=4, c=2, M=1, kappa='1/2')
        with pytest.raises(NotOneHotError) as excinfo:
            decode(np.zeros(8, dtype=np.uint8), params)
        assert excinfo.value.block == 0
        assert excinfo.value.active == 0

    def test_decode_reports_first_bad_block(self):
        """An empty block raises NotOneHotError naming it"""
        params = ModelParams(l=3, c=3, M=1, kappa='1/2')
        state = encode((0, 0, 0), params)
        state[params.index(1, 0)] = 0
        with pytest.raises(NotOneHotError) as excinfo:
            decode(state, params)
        assert excinfo.value.block == 1
        assert excinfo.value.active == 0

    def test_invalid_messages(self):
        """Wrong length or out-of-range letters are rejected"""
        params = ModelParams(l=3, c=3, M=1, kappa='1/2')
        with pytest.raises(InvalidMessageError):
            encode((0, 1), params)
        with pytest.raises(InvalidMessageError):
            encode((0, 1, 3), params)

    def test_state_dimension(self):
        """State vectors must have length N"""
        params = ModelParams(l=3, c=3, M=1, kappa='1/2')
        with pytest.raises(DimensionMismatchError):
            check_state(np.zeros(8, dtype=np.uint8), params)


class TestSampling:
    """Message sampling and per-trial random streams"""

    def test_same_stream_same_messages(self):
        """trial_rng(seed, i) reproduces the same message set"""
        params = ModelParams(l=16, c=4, M=20, kappa='3/4')
        first = sample_messages(params, trial_rng(7, 3))
        second = sample_messages(params, trial_rng(7, 3))
        other = sample_messages(params, trial_rng(7, 4))
        assert first.shape == (20, 4)
        assert np.array_equal(first, second)
        assert not np.array_equal(first, other)

    def test_distinct_sampling(self):
        """Drawing every word of a tiny alphabet gives all of them once"""
        params = ModelParams(l=2, c=2, M=4, kappa='1/2')
        msgs = sample_messages(params, trial_rng(0, 0), distinct=True)
        assert {tuple(row) for row in msgs} == {(0, 0), (0, 1), (1, 0), (1, 1)}

    def test_distinct_sampling_impossible(self):
        """More messages than words is an error"""
        params = ModelParams(l=2, c=2, M=5, kappa='1/2')
        with pytest.raises(ValueError):
            sample_messages(params, trial_rng(0, 0), distinct=True)

    def test_letter_frequencies(self):
        """
        Over 10^5 draws each (block, letter) frequency stays near 1/l

        Cell (0, 0) is held to 3 sigma; all 32 cells to 4 sigma.
        """
        params = ModelParams(l=8, c=4, M=100_000, kappa='3/4')
        msgs = sample_messages(params, trial_rng(12, 0))
        p = 1 / params.l
        sigma = np.sqrt(p * (1 - p) / params.M)
        freq = np.stack([np.bincount(msgs[:, a], minlength=params.l) for a in range(params.c)]) / params.M
        assert abs(freq[0, 0] - p) <= 3 * sigma
        assert np.all(np.abs(freq - p) <= 4 * sigma)

    def test_derive_seed_is_deterministic(self):
        """Seeds depend only on the master seed and the index"""
        assert derive_seed(42, 5) == derive_seed(42, 5)
        assert derive_seed(42, 5) != derive_seed(42, 6)


class TestCorruption:
    """Hamming-ball corruption"""

    @given(
        l=st.integers(2, 20),
        c=st.integers(2, 8),
        seed=st.integers(0, 2**32 - 1),
        data=st.data(),
    )
    @hypothesis_settings(max_examples=200, deadline=None)
    def test_exact_errors_distance(self, l, c, seed, data):
        """exact-errors lands at distance exactly r"""
        r = data.draw(st.integers(0, c))
        params = ModelParams(l=l, c=c, M=1, kappa='1/2')
        rng = np.random.default_rng(seed)
        center = tuple(int(x) for x in rng.integers(0, l, size=c))
        cue = corrupt(BallSpec(center, r), params, rng)
        assert hamming(cue, center) == r

    @given(seed=st.integers(0, 2**32 - 1), r=st.integers(0, 5))
    @hypothesis_settings(max_examples=100, deadline=None)
    def test_erasure_resample_within_radius(self, seed, r):
        """erasure-resample lands within distance r"""
        params = ModelParams(l=3, c=5, M=1, kappa='1/2')
        rng = np.random.default_rng(seed)
        cue = corrupt(BallSpec((0, 1, 2, 0, 1), r, CorruptionMode.ERASURE_RESAMPLE), params, rng)
        assert hamming(cue, (0, 1, 2, 0, 1)) <= r

    def test_erasure_resample_mean_distance(self):
        """l = 4, r = 2: each redrawn block keeps its letter with probability 1/4, so the mean is 1.5"""
        params = ModelParams(l=4, c=5, M=1, kappa='1/2')
        rng = np.random.default_rng(13)
        spec = BallSpec((0, 1, 2, 3, 0), 2, CorruptionMode.ERASURE_RESAMPLE)
        distances = [hamming(corrupt(spec, params, rng), spec.center) for _ in range(10_000)]
        # sd of one draw is sqrt(2 * 3/16), so 4 sigma of the mean is about 0.025
        assert np.mean(distances) == pytest.approx(1.5, abs=0.03)

    def test_ball_radius_validation(self):
        """Radius must lie in [0, c]"""
        with pytest.raises(ValueError):
            BallSpec((0, 1), 3)
        with pytest.raises(ValueError):
            BallSpec((0, 1), -1)

    def test_hamming_length_mismatch(self):
        """Messages of different length are rejected"""
        with pytest.raises(InvalidMessageError):
            hamming((0, 1), (0, 1, 2))

    def test_mixed_message(self):
        """Blocks before the split come from the first message"""
        assert mixed_message((0, 1, 2), (3, 4, 5), 1) == (0, 4, 5)
        assert mixed_message((0, 1, 2), (3, 4, 5), 3) == (0, 1, 2)
        with pytest.raises(ValueError):
            mixed_message((0, 1), (2, 3), 3)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
