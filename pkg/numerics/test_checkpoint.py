"""
Tests for seeded streams and the RDMC checkpoint container.
"""
import numpy as np
import pytest

from numerics.checkpoint import load_checkpoint, pack_tensors, save_checkpoint, unpack_tensors
from numerics.denoiser import DenoiserParams, denoiser_backward
from numerics.errors import CheckpointError
from numerics.optim import OptimizerState, adamw_step
from numerics.rng import STREAM_NOISE, STREAM_Q, SeededRng


@pytest.fixture
def params():
    return DenoiserParams.initialize(4, SeededRng(11), hidden=6, embed_dims=4)


class TestSeededRng:
    """(seed, stream, counter) addressing."""

    def test_same_triple_same_draws(self):
        a = SeededRng(42, STREAM_Q, 3).normal(100)
        b = SeededRng(42, STREAM_Q, 3).normal(100)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        a = SeededRng(42, STREAM_Q).uniform(size=100)
        b = SeededRng(42, STREAM_NOISE).uniform(size=100)
        assert not np.array_equal(a, b)

    def test_counter_blocks_differ(self):
        base = SeededRng(42, STREAM_Q)
        assert not np.array_equal(base.at(0).normal(50), base.at(1).normal(50))

    def test_at_replays_block(self):
        """at(counter) is a fresh generator, independent of earlier draws."""
        base = SeededRng(9)
        base.normal(1000)
        np.testing.assert_array_equal(base.at(0).normal(5), SeededRng(9).normal(5))

    def test_seed_must_fit_64_bits(self):
        with pytest.raises(ValueError):
            SeededRng(1 << 64)
        SeededRng((1 << 64) - 1).uniform()


class TestCheckpoint:
    """RDMC round trips and corruption handling."""

    def test_params_round_trip_bit_identical(self, params, tmp_path):
        path = tmp_path / "net.rdmc"
        save_checkpoint(path, params)
        loaded, state = load_checkpoint(path)
        assert state is None
        assert list(loaded.tensors) == list(params.tensors)
        for name, tensor in params.items():
            assert loaded.tensors[name].tobytes() == tensor.tobytes()

    def test_bytes_round_trip(self, params):
        data = pack_tensors(params.tensors)
        assert pack_tensors(unpack_tensors(data)) == data

    def test_optimizer_state_round_trip(self, params, tmp_path):
        """AdamW moments and step counter survive a save/load."""
        x = SeededRng(1).normal((3, 4))
        _, grads = denoiser_backward(params, x, 0.5, np.zeros((3, 4)))
        state = OptimizerState(lr=3e-4)
        tensors, state = adamw_step(state, params.tensors, grads.tensors, names=params.trainable_names())
        path = tmp_path / "net.rdmc"
        save_checkpoint(path, DenoiserParams(tensors), state)

        loaded, loaded_state = load_checkpoint(path)
        assert loaded_state.step == 1
        assert loaded_state.lr == 3e-4
        assert loaded_state.betas == state.betas
        assert set(loaded_state.m) == set(params.trainable_names())
        for name in state.m:
            np.testing.assert_array_equal(loaded_state.m[name], state.m[name])
            np.testing.assert_array_equal(loaded_state.v[name], state.v[name])
        assert not any(name.startswith("optim.") for name in loaded.tensors)

    def test_bad_magic(self, params):
        data = b"XXXX" + pack_tensors(params.tensors)[4:]
        with pytest.raises(CheckpointError, match="magic"):
            unpack_tensors(data)

    def test_bad_version(self, params):
        with pytest.raises(CheckpointError, match="version"):
            unpack_tensors(pack_tensors(params.tensors, version=2))

    def test_truncated(self, params):
        data = pack_tensors(params.tensors)
        with pytest.raises(CheckpointError):
            unpack_tensors(data[:-5])

    def test_trailing_bytes(self, params):
        with pytest.raises(CheckpointError, match="trailing"):
            unpack_tensors(pack_tensors(params.tensors) + b"\0")

    def test_inconsistent_layers(self, params, tmp_path):
        tensors = dict(params.tensors)
        tensors["layers.2.weight"] = np.zeros((3, 3))
        path = tmp_path / "broken.rdmc"
        path.write_bytes(pack_tensors(tensors))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)
