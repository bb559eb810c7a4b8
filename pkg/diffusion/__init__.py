"""
Forward compression, denoiser training and the reverse sampler.
"""
from .sampler import (
    Denoiser,
    NetworkDenoiser,
    NoiseForm,
    SamplerConfig,
    Schedule,
    euler_step,
    forward_compress,
    inject_randomness,
    make_schedule,
    reverse_sample,
    score,
)
from .trainer import DenoiserTrainer, TrainerSettings, train_denoiser_step

__all__ = [
    "Denoiser",
    "NetworkDenoiser",
    "NoiseForm",
    "SamplerConfig",
    "Schedule",
    "forward_compress",
    "train_denoiser_step",
    "score",
    "euler_step",
    "inject_randomness",
    "make_schedule",
    "reverse_sample",
    "DenoiserTrainer",
    "TrainerSettings",
]
