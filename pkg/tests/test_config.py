"""
Tests for the YAML configuration layer.
"""
import logging

import pytest

from numerics.errors import InputError
from pipeline.config import CONFIG_PATH, CodecConfig


class TestCodecConfig:
    def test_shipped_file_matches_defaults(self):
        assert CodecConfig.load_from_yaml(CONFIG_PATH) == CodecConfig()

    def test_defaults(self):
        config = CodecConfig()
        assert (config.rates.q_min, config.rates.q_max) == (0.05, 2.0)
        assert (config.sampler.q_0, config.sampler.steps, config.sampler.beta) == (0.7, 2, 0.075)
        assert config.denoiser.hidden == 256
        assert config.denoiser.betas == (0.9, 0.95)
        assert config.denoiser.residual is True
        assert config.denoiser.simulated_fraction == 0.5
        assert config.images.block == 8

    def test_missing_file_uses_defaults(self, tmp_path, caplog):
        with caplog.at_level(logging.WARNING):
            config = CodecConfig.load_from_yaml(tmp_path / "absent.yaml")
        assert config == CodecConfig()
        assert "not found" in caplog.text

    def test_partial_override(self, tmp_path):
        path = tmp_path / "rdm.yaml"
        path.write_text("sampler:\n  beta: 0.1\n  noise: uniform\ndenoiser:\n  betas: [0.8, 0.9]\n")
        config = CodecConfig.load_from_yaml(path)
        assert config.sampler.beta == 0.1
        assert config.sampler.noise == "uniform"
        assert config.sampler.steps == 2
        assert config.denoiser.betas == (0.8, 0.9)
        assert config.rates == CodecConfig().rates

    def test_empty_file(self, tmp_path):
        path = tmp_path / "rdm.yaml"
        path.write_text("")
        assert CodecConfig.load_from_yaml(path) == CodecConfig()

    def test_unknown_keys_ignored(self, tmp_path, caplog):
        path = tmp_path / "rdm.yaml"
        path.write_text("images:\n  size: 32\n  colour: true\n")
        with caplog.at_level(logging.WARNING):
            config = CodecConfig.load_from_yaml(path)
        assert config.images.size == 32
        assert "colour" in caplog.text

    def test_invalid_rates(self, tmp_path):
        path = tmp_path / "rdm.yaml"
        path.write_text("rates:\n  q_min: 2.0\n  q_max: 1.0\n")
        with pytest.raises(InputError):
            CodecConfig.load_from_yaml(path)

    def test_section_must_be_mapping(self, tmp_path):
        path = tmp_path / "rdm.yaml"
        path.write_text("sampler: [1, 2]\n")
        with pytest.raises(InputError):
            CodecConfig.load_from_yaml(path)

    def test_simulated_fraction_range(self, tmp_path):
        path = tmp_path / "rdm.yaml"
        path.write_text("denoiser:\n  simulated_fraction: 1.5\n")
        with pytest.raises(InputError):
            CodecConfig.load_from_yaml(path)
