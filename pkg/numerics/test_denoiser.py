"""
Tests for the reverse network: forward contract, q-embedding and exact gradients.
"""
import math

import numpy as np
import pytest

from numerics.denoiser import (
    NUM_LAYERS,
    DenoiserParams,
    denoiser_backward,
    denoiser_forward,
    embedding_frequencies,
    q_embed,
)
from numerics.errors import InputError
from numerics.rng import SeededRng


@pytest.fixture
def small_params():
    """A tiny network: 3 latent dims, 4 embedding dims, hidden width 5."""
    return DenoiserParams.initialize(3, SeededRng(7), hidden=5, embed_dims=4, q_min=0.05)


def _rel_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-8)


class TestQEmbed:
    """Sinusoidal embedding of ln(q / q_min)."""

    def test_at_q_min_sin_zero_cos_one(self):
        """At q = q_min every phase is zero."""
        emb = q_embed(0.05, 16, 0.05)
        assert emb.shape == (16,)
        assert np.all(emb[0::2] == 0.0)
        assert np.all(emb[1::2] == 1.0)

    def test_pairs_on_unit_circle(self):
        """sin^2 + cos^2 = 1 for every frequency pair."""
        emb = q_embed(np.array([0.07, 0.4, 1.9]), 16, 0.05)
        assert emb.shape == (3, 16)
        np.testing.assert_allclose(emb[:, 0::2] ** 2 + emb[:, 1::2] ** 2, 1.0, atol=1e-14)

    def test_first_frequency_is_one(self):
        """q = q_min * e gives phase 1 on the first pair."""
        emb = q_embed(0.05 * math.e, 16, 0.05)
        assert emb[0] == pytest.approx(math.sin(1.0), abs=1e-12)
        assert emb[1] == pytest.approx(math.cos(1.0), abs=1e-12)

    def test_frequencies_geometric(self):
        """Frequencies run geometrically from 1 to max_freq."""
        freqs = embedding_frequencies(16, 16.0)
        assert freqs[0] == 1.0
        assert freqs[-1] == pytest.approx(16.0)
        ratios = freqs[1:] / freqs[:-1]
        np.testing.assert_allclose(ratios, ratios[0])

    def test_below_q_min_clamps(self):
        """Scales slightly under q_min embed like q_min."""
        np.testing.assert_array_equal(q_embed(0.05 * (1 - 1e-10), 8, 0.05), q_embed(0.05, 8, 0.05))

    @pytest.mark.parametrize("q", [0.0, -0.1, float("nan")])
    def test_non_positive_q_rejected(self, q):
        """q <= 0 is an input error."""
        with pytest.raises(InputError):
            q_embed(q, 8, 0.05)

    def test_odd_dims_rejected(self):
        with pytest.raises(InputError):
            q_embed(0.5, 7, 0.05)


class TestDenoiserForward:
    """x_hat_0 = D(x, q)."""

    def test_zero_weights_output_final_bias(self, small_params):
        """With all weights zero the output is the last bias."""
        params = small_params.copy()
        for i in range(NUM_LAYERS):
            params.tensors[f"layers.{i}.weight"][:] = 0.0
        params.tensors[f"layers.{NUM_LAYERS - 1}.bias"][:] = [0.5, -1.0, 2.0]

        out = denoiser_forward(params, np.array([[1.0, 2.0, 3.0], [-4.0, 0.0, 9.0]]), 1.0)
        np.testing.assert_array_equal(out, [[0.5, -1.0, 2.0], [0.5, -1.0, 2.0]])

    def test_residual_zero_weights_pass_input_through(self, small_params):
        """With a unit skip and zero weights the output is x plus the last bias."""
        params = DenoiserParams.initialize(3, SeededRng(7), hidden=5, embed_dims=4, residual=True)
        for i in range(NUM_LAYERS):
            params.tensors[f"layers.{i}.weight"][:] = 0.0
        params.tensors[f"layers.{NUM_LAYERS - 1}.bias"][:] = [0.5, -1.0, 2.0]

        out = denoiser_forward(params, np.array([[1.0, 2.0, 3.0], [-4.0, 0.0, 9.0]]), 1.0)
        np.testing.assert_array_equal(out, [[1.5, 1.0, 5.0], [-3.5, -1.0, 11.0]])
        assert small_params.skip_gain == 0.0
        assert params.skip_gain == 1.0

    def test_deterministic(self, small_params):
        """Same inputs give bit-identical outputs."""
        x = SeededRng(1).normal((4, 3))
        np.testing.assert_array_equal(
            denoiser_forward(small_params, x, 0.3), denoiser_forward(small_params, x, 0.3)
        )

    def test_output_shape_follows_input(self, small_params):
        """A single latent maps to a single latent; a batch to a batch."""
        assert denoiser_forward(small_params, np.zeros(3), 0.5).shape == (3,)
        assert denoiser_forward(small_params, np.zeros((6, 3)), np.full(6, 0.5)).shape == (6, 3)

    def test_per_row_scales_match_scalar_calls(self, small_params):
        """Row i with scale q_i equals a single-row call at q_i."""
        x = SeededRng(2).normal((3, 3))
        q = np.array([0.1, 0.7, 1.5])
        batch = denoiser_forward(small_params, x, q)
        for i in range(3):
            np.testing.assert_allclose(batch[i], denoiser_forward(small_params, x[i], q[i]), rtol=1e-12, atol=1e-12)

    def test_shape_mismatch(self, small_params):
        with pytest.raises(InputError):
            denoiser_forward(small_params, np.zeros(4), 0.5)

    def test_non_finite_input(self, small_params):
        with pytest.raises(InputError):
            denoiser_forward(small_params, np.array([0.0, np.nan, 1.0]), 0.5)


class TestDenoiserBackward:
    """Loss and analytic gradients."""

    def test_zero_residual(self, small_params):
        """Target equal to the output gives zero loss and zero final-bias gradient."""
        x = SeededRng(3).normal((5, 3))
        target = denoiser_forward(small_params, x, 0.4)
        loss, grads = denoiser_backward(small_params, x, 0.4, target)
        assert loss == 0.0
        assert np.all(grads.tensors[f"layers.{NUM_LAYERS - 1}.bias"] == 0.0)

    def test_loss_quadratic_in_residual(self, small_params):
        """Doubling the residual quadruples the loss."""
        rng = SeededRng(4)
        x = rng.normal((5, 3))
        out = denoiser_forward(small_params, x, 0.4)
        residual = rng.normal((5, 3))
        loss1, _ = denoiser_backward(small_params, x, 0.4, out - residual)
        loss2, _ = denoiser_backward(small_params, x, 0.4, out - 2.0 * residual)
        assert loss2 == pytest.approx(4.0 * loss1, rel=1e-12)

    def test_embedding_tensors_get_zero_gradient(self, small_params):
        x = SeededRng(5).normal((2, 3))
        _, grads = denoiser_backward(small_params, x, 0.4, np.zeros((2, 3)))
        assert np.all(grads.tensors["embed.freqs"] == 0.0)
        assert np.all(grads.tensors["embed.q_min"] == 0.0)

    def test_skip_gain_not_trained(self):
        params = DenoiserParams.initialize(3, SeededRng(6), hidden=5, embed_dims=4, residual=True)
        assert "skip.gain" not in params.trainable_names()
        _, grads = denoiser_backward(params, SeededRng(5).normal((2, 3)), 0.4, np.zeros((2, 3)))
        assert np.all(grads.tensors["skip.gain"] == 0.0)

    def test_shape_mismatch(self, small_params):
        with pytest.raises(InputError):
            denoiser_backward(small_params, np.zeros((2, 3)), 0.4, np.zeros((3, 3)))

    @pytest.mark.parametrize("residual", [False, True])
    @pytest.mark.parametrize("config", range(10))
    def test_matches_central_differences(self, config, residual):
        """Every trainable parameter agrees with a central difference at step 1e-5."""
        rng = SeededRng(100 + config)
        dims = 2 + config % 3
        params = DenoiserParams.initialize(
            dims, rng.derive(1), hidden=4 + config % 2, embed_dims=4, q_min=0.05, residual=residual
        )
        x = rng.normal((3, dims))
        q = rng.uniform(0.05, 2.0, size=3)
        target = rng.normal((3, dims))
        _, grads = denoiser_backward(params, x, q, target)

        h = 1e-5
        for name in params.trainable_names():
            tensor = params.tensors[name]
            for idx in np.ndindex(tensor.shape):
                saved = tensor[idx]
                tensor[idx] = saved + h
                up, _ = denoiser_backward(params, x, q, target)
                tensor[idx] = saved - h
                down, _ = denoiser_backward(params, x, q, target)
                tensor[idx] = saved
                fd = (up - down) / (2 * h)
                analytic = grads.tensors[name][idx]
                assert _rel_error(analytic, fd) < 1e-4 or abs(analytic - fd) < 1e-9, (name, idx, analytic, fd)


class TestDenoiserParams:
    """Parameter container consistency."""

    def test_validate_rejects_broken_chain(self, small_params):
        params = small_params.copy()
        params.tensors["layers.1.weight"] = np.zeros((6, 5))
        with pytest.raises(InputError):
            params.validate()

    def test_widths(self, small_params):
        assert small_params.widths == [7, 5, 5, 5, 3]
        assert small_params.input_dim == 3
        assert small_params.embed_dims == 4

    def test_validate_rejects_bad_skip(self, small_params):
        params = small_params.copy()
        params.tensors["skip.gain"] = np.ones(2)
        with pytest.raises(InputError):
            params.validate()
