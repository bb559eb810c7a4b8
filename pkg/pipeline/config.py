"""
Codec configuration: YAML file with dataclass defaults.

Every section and key is optional; anything missing falls back to the
defaults below, and a missing file means all defaults.
"""
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import List, Tuple

import yaml

from numerics.errors import InputError

logger = logging.getLogger(__name__)

# Configuration file path
CONFIG_PATH = Path(__file__).parent / "rdm_config.yaml"


@dataclass
class RateConfig:
    """Supported quantization range and the multi-rate lambda list."""
    q_min: float = 0.05
    q_max: float = 2.0
    # lower edge of the training-scale range; below q_min exercises simulated quantization
    q_train_min: float = 0.05
    lambdas: List[float] = field(default_factory=lambda: [0.05, 0.025, 0.01, 0.005, 0.001, 0.0005, 0.0001])


@dataclass
class DenoiserConfig:
    hidden: int = 256
    embed_dims: int = 16
    max_freq: float = 16.0
    steps: int = 10_000
    batch_size: int = 128
    lr: float = 1e-3
    lr_decay_at: float = 0.5
    weight_decay: float = 0.02
    betas: Tuple[float, float] = (0.9, 0.95)
    log_every: int = 500
    checkpoint_every: int = 1000
    # output = x + network(x, q)
    residual: bool = True
    # share of training rows corrupted with simulated instead of hard quantization
    simulated_fraction: float = 0.5


@dataclass
class EntropyFitConfig:
    epochs: int = 30
    lr: float = 0.02
    batch_size: int = 1024


@dataclass
class SamplerDefaults:
    """Reverse-process defaults: two steps from q_0 = 0.7 with light gaussian injection."""
    q_0: float = 0.7
    steps: int = 2
    beta: float = 0.075
    noise: str = "gaussian"


@dataclass
class ImageConfig:
    block: int = 8
    size: int = 64
    peak: float = 1.0


def _section(cls, data: dict, name: str):
    raw = data.get(name) or {}
    if not isinstance(raw, dict):
        raise InputError(f"config section '{name}' must be a mapping")
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        logger.warning(f"ignoring unknown keys in '{name}': {', '.join(sorted(unknown))}")
    values = {k: v for k, v in raw.items() if k in known}
    if "betas" in values:
        values["betas"] = tuple(values["betas"])
    return cls(**values)


@dataclass
class CodecConfig:
    """All tunables of the toolkit."""
    rates: RateConfig = field(default_factory=RateConfig)
    denoiser: DenoiserConfig = field(default_factory=DenoiserConfig)
    entropy: EntropyFitConfig = field(default_factory=EntropyFitConfig)
    sampler: SamplerDefaults = field(default_factory=SamplerDefaults)
    images: ImageConfig = field(default_factory=ImageConfig)

    def __post_init__(self):
        r = self.rates
        if not 0.0 < r.q_min < r.q_max:
            raise InputError(f"rates need 0 < q_min < q_max, got [{r.q_min}, {r.q_max}]")
        if not 0.0 < r.q_train_min < r.q_max:
            raise InputError(f"q_train_min must lie in (0, q_max), got {r.q_train_min}")
        if not 0.0 <= self.denoiser.simulated_fraction <= 1.0:
            raise InputError(f"simulated_fraction must lie in [0, 1], got {self.denoiser.simulated_fraction}")

    @classmethod
    def load_from_yaml(cls, config_path: Path = CONFIG_PATH) -> "CodecConfig":
        """Load configuration from YAML file."""
        config_path = Path(config_path)
        if not config_path.exists():
            logger.warning(f"config file not found at {config_path}, using defaults")
            return cls()

        with open(config_path) as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, dict):
            raise InputError(f"{config_path}: top level must be a mapping")

        return cls(
            rates=_section(RateConfig, data, "rates"),
            denoiser=_section(DenoiserConfig, data, "denoiser"),
            entropy=_section(EntropyFitConfig, data, "entropy"),
            sampler=_section(SamplerDefaults, data, "sampler"),
            images=_section(ImageConfig, data, "images"),
        )
