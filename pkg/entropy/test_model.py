"""
Tests for the per-channel logistic entropy model.
"""
import math

import numpy as np
import pytest

from entropy.model import (
    ChannelEntropyModel,
    UniformSymbolModel,
    entropy_model_sample,
    rate_bits,
    rd_loss,
    symbol_prob,
)
from entropy.tables import TOTAL
from numerics.errors import EntropyModelError, InputError, SymbolRangeError, UnsupportedRateError
from numerics.rng import SeededRng
from quantizer.scaling import quantize_scaled, symbolize


@pytest.fixture
def unit_model():
    return ChannelEntropyModel(np.zeros(1), np.zeros(1))


@pytest.fixture
def two_channel_model():
    return ChannelEntropyModel(np.array([0.3, -1.0]), np.log(np.array([0.8, 0.25])))


class TestSymbolProb:
    """Bin masses of the discretized logistic."""

    def test_centre_bin(self, unit_model):
        """mu = 0, s = 1, q = 1, k = 0 carries sigmoid(0.5) - sigmoid(-0.5)."""
        assert symbol_prob(unit_model, 0, 0, 1.0) == pytest.approx(0.244919, abs=1e-6)

    def test_symmetric_about_zero_mean(self, unit_model):
        for k in range(1, 6):
            assert symbol_prob(unit_model, 0, k, 0.5) == pytest.approx(symbol_prob(unit_model, 0, -k, 0.5), rel=1e-12)

    @pytest.mark.parametrize("q", [0.05, 0.3, 1.0, 2.0])
    def test_pmf_sums_to_one(self, two_channel_model, q):
        """Tails fold into the edge symbols, so the alphabet holds all mass."""
        for c in range(2):
            _, p = two_channel_model.channel_pmf(c, q)
            assert np.sum(p) == pytest.approx(1.0, abs=1e-12)
            assert np.all(p > 0)

    def test_unsupported_rate(self, unit_model):
        with pytest.raises(UnsupportedRateError):
            symbol_prob(unit_model, 0, 0, 2.5)
        with pytest.raises(UnsupportedRateError):
            symbol_prob(unit_model, 0, 0, 0.01)

    def test_outside_alphabet_rejected(self, unit_model):
        """Symbols beyond the folded edges have no probability of their own."""
        k_lo, k_hi = unit_model.alphabet(0.5)
        assert symbol_prob(unit_model, 0, int(k_hi[0]), 0.5) > 0.0
        with pytest.raises(SymbolRangeError):
            symbol_prob(unit_model, 0, int(k_hi[0]) + 1, 0.5)
        with pytest.raises(SymbolRangeError):
            symbol_prob(unit_model, 0, int(k_lo[0]) - 1, 0.5)

    def test_supported_range_inclusive(self, unit_model):
        assert unit_model.supports(0.05)
        assert unit_model.supports(2.0)
        assert not unit_model.supports(2.0000001)


class TestRateBits:
    """Ideal code length of a symbol tensor."""

    def test_uniform_alphabet(self):
        """100 symbols over a flat 256-symbol alphabet cost exactly 800 bits."""
        symbols = SeededRng(1).integers(0, 256, size=100)
        assert rate_bits(UniformSymbolModel(0, 255), symbols, 1.0) == pytest.approx(800.0)

    def test_empty_tensor(self, two_channel_model):
        assert rate_bits(two_channel_model, np.zeros((0, 2), dtype=np.int64), 1.0) == 0.0

    def test_matches_symbol_prob(self, two_channel_model):
        symbols = np.array([[0, -4], [1, -5], [-1, -3]])
        expected = -sum(
            math.log2(symbol_prob(two_channel_model, c, int(symbols[r, c]), 0.25))
            for r in range(3)
            for c in range(2)
        )
        assert rate_bits(two_channel_model, symbols, 0.25) == pytest.approx(expected, rel=1e-12)

    def test_model_draws_cost_their_entropy(self, two_channel_model):
        """10**5 rows drawn from the model cost n * sum(H_c) bits within 1%."""
        q, rows = 0.25, 100_000
        rng = SeededRng(8)
        symbols = np.empty((rows, 2), dtype=np.int64)
        for c in range(2):
            k_lo, p = two_channel_model.channel_pmf(c, q)
            symbols[:, c] = k_lo + rng.choice(len(p), size=rows, p=p / p.sum())
        expected = rows * float(np.sum(two_channel_model.entropy_bits(q)))
        assert rate_bits(two_channel_model, symbols, q) == pytest.approx(expected, rel=0.01)

    def test_channel_mismatch(self, two_channel_model):
        with pytest.raises(InputError):
            rate_bits(two_channel_model, np.zeros((2, 3), dtype=np.int64), 1.0)

    def test_rate_falls_as_scale_grows(self, two_channel_model):
        """Coarser quantization never costs more bits on this source."""
        y = SeededRng(2).logistic(size=(2000, 2)) * np.array([0.8, 0.25]) + np.array([0.3, -1.0])
        rates = [rate_bits(two_channel_model, symbolize(y, q), q) for q in (0.1, 0.5, 1.0, 2.0)]
        assert all(b < a for a, b in zip(rates, rates[1:]))


class TestRdLoss:
    """R + lambda * D."""

    def test_distortion_term_linear_in_lambda(self, two_channel_model):
        y = SeededRng(3).normal((200, 2))
        mse = float(np.mean((quantize_scaled(y, 0.5) - y) ** 2))
        base = rd_loss(two_channel_model, y, 0.5, 0.0)
        assert rd_loss(two_channel_model, y, 0.5, 2.0) == pytest.approx(base + 2.0 * mse, rel=1e-12)

    def test_distortion_scale_multiplies_distortion(self, two_channel_model):
        y = SeededRng(3).normal((200, 2))
        mse = float(np.mean((quantize_scaled(y, 0.5) - y) ** 2))
        base = rd_loss(two_channel_model, y, 0.5, 0.0)
        scaled = rd_loss(two_channel_model, y, 0.5, 2.0, distortion_scale=255.0 ** 2)
        assert scaled == pytest.approx(base + 2.0 * 255.0 ** 2 * mse, rel=1e-12)

    def test_negative_lambda(self, two_channel_model):
        with pytest.raises(InputError):
            rd_loss(two_channel_model, np.zeros((1, 2)), 0.5, -1.0)


class TestFrequencyTables:
    """Integer tables derived from (model, q)."""

    def test_tables_total_and_floor(self, two_channel_model):
        for table in two_channel_model.frequency_tables(0.2):
            assert int(table.freqs.sum()) == TOTAL
            assert int(table.freqs.min()) >= 1

    def test_cached_per_scale(self, two_channel_model):
        assert two_channel_model.frequency_tables(0.4) is two_channel_model.frequency_tables(0.4)

    def test_model_id_tracks_parameters(self, two_channel_model):
        other = ChannelEntropyModel(np.array([0.3, -1.0]), np.log(np.array([0.8, 0.26])))
        assert two_channel_model.model_id != other.model_id
        same = ChannelEntropyModel(np.array([0.3, -1.0]), np.log(np.array([0.8, 0.25])))
        assert two_channel_model.model_id == same.model_id


class TestEntropyModelSample:
    """Standardized noise drawn from the model's own pmf."""

    def test_unit_moments(self, two_channel_model):
        """10**6 draws: mean within 0.01 of 0, variance within 0.02 of 1."""
        noise = entropy_model_sample(two_channel_model, 0.3, (10 ** 6, 2), SeededRng(4))
        assert noise.shape == (10 ** 6, 2)
        np.testing.assert_allclose(noise.mean(axis=0), 0.0, atol=0.01)
        np.testing.assert_allclose(noise.var(axis=0), 1.0, atol=0.02)

    def test_deterministic(self, two_channel_model):
        a = entropy_model_sample(two_channel_model, 0.3, (10, 2), SeededRng(5))
        b = entropy_model_sample(two_channel_model, 0.3, (10, 2), SeededRng(5))
        np.testing.assert_array_equal(a, b)

    def test_zero_variance_channel(self):
        """A single-symbol alphabet cannot be normalized."""
        model = ChannelEntropyModel(np.zeros(1), np.full(1, math.log(1e-6)))
        with pytest.raises(EntropyModelError):
            entropy_model_sample(model, 1.0, (4, 1), SeededRng(6))

    def test_shape_must_end_in_channels(self, two_channel_model):
        with pytest.raises(InputError):
            entropy_model_sample(two_channel_model, 0.3, (4, 3), SeededRng(7))
