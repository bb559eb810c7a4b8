"""
Numeric substrate: latent tensors, seeded streams, the reverse network,
AdamW and the RDMC checkpoint container.
"""
from .denoiser import DenoiserParams, denoiser_backward, denoiser_forward, q_embed
from .errors import InputError, RdmError
from .optim import OptimizerState, adamw_step
from .rng import SeededRng

__all__ = [
    "DenoiserParams",
    "denoiser_forward",
    "denoiser_backward",
    "q_embed",
    "OptimizerState",
    "adamw_step",
    "SeededRng",
    "RdmError",
    "InputError",
]
