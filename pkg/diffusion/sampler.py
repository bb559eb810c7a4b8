"""
Compression as a forward process, and the reverse sampler that undoes it.

Forward: quantization scaling at q (or its uniform-noise simulation when q
lies outside the entropy model's range). Reverse: at each scale q_i the
denoiser predicts x_hat_0, the score (x_hat_0 - y) / q_i drives one Euler
step to q_{i+1}, and alpha * (eps - d) is added with
alpha = beta * sqrt(max(q_{i+1} - q_min, 0)).
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Protocol, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from entropy.model import DEFAULT_Q_MIN, ChannelEntropyModel, entropy_model_sample
from numerics.denoiser import DenoiserParams, denoiser_forward
from numerics.errors import InputError
from numerics.rng import STREAM_NOISE, SeededRng
from numerics.tensor import LatentTensor, as_latent, check_same_shape
from quantizer.scaling import quantize_scaled, simulate_quantize

logger = logging.getLogger(__name__)

Scale = Union[float, np.ndarray]

UNIFORM_STD = math.sqrt(1.0 / 12.0)


class NoiseForm(str, Enum):
    """Distribution of the injected noise eps."""
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"
    ENTROPY_MODEL = "entropy_model"
    NONE = "none"

    @classmethod
    def parse(cls, value: str) -> "NoiseForm":
        if value == "entropy":
            return cls.ENTROPY_MODEL
        return cls(value)


class SamplerConfig(BaseModel):
    """Reverse-process recipe."""
    model_config = ConfigDict(frozen=True)

    q_0: float = Field(0.7, gt=0.0, description="Scale the latent was compressed at")
    steps: int = Field(2, ge=0, description="Reverse steps N; 0 disables the reverse process")
    beta: float = Field(0.075, ge=0.0, description="Randomness injection strength")
    noise_form: NoiseForm = NoiseForm.GAUSSIAN
    seed: int = Field(0, ge=0, le=(1 << 64) - 1)

    @property
    def deterministic(self) -> bool:
        return self.steps == 0 or self.beta == 0.0 or self.noise_form is NoiseForm.NONE

    def summary(self) -> str:
        return f"N={self.steps};beta={self.beta:g};noise={self.noise_form.value}"


@dataclass(frozen=True)
class Schedule:
    """Strictly decreasing scales q_0 > ... > q_N; empty means pass-through."""
    scales: Tuple[float, ...] = ()

    def __post_init__(self):
        s = self.scales
        if not s:
            return
        if len(s) < 2:
            raise InputError("a non-empty schedule needs at least two scales")
        if any(b >= a for a, b in zip(s, s[1:])):
            raise InputError(f"schedule must be strictly decreasing, got {s}")
        if s[-1] < 0.0 or s[-2] <= 0.0:
            raise InputError(f"scales before the last must be positive and the last non-negative, got {s}")

    @property
    def steps(self) -> int:
        return max(len(self.scales) - 1, 0)

    def pairs(self):
        return zip(self.scales[:-1], self.scales[1:])


def make_schedule(q_0: float, steps: int) -> Schedule:
    """Linear schedule q_i = q_0 (N - i) / N; N = 0 gives the pass-through marker."""
    if not q_0 > 0.0 or not math.isfinite(q_0):
        raise InputError(f"q_0 must be positive, got {q_0}")
    if steps < 0:
        raise InputError(f"step count must be >= 0, got {steps}")
    if steps == 0:
        return Schedule()
    return Schedule(tuple(q_0 * (steps - i) / steps for i in range(steps + 1)))


def forward_compress(y0: LatentTensor, q: Scale, model: ChannelEntropyModel, rng: SeededRng) -> LatentTensor:
    """
    Corrupt y0 at scale q.

    Inside [q_min, q_max] (inclusive) this is hard quantization on qZ; outside
    it falls back to simulated quantization. q may be a scalar or one scale
    per row of a (rows, dims) batch.
    """
    y0 = as_latent(y0, "latent")
    q_arr = np.asarray(q, dtype=np.float64)
    if np.any(~np.isfinite(q_arr)) or np.any(q_arr <= 0.0):
        raise InputError(f"q must be positive, got {q}")
    if q_arr.ndim == 0:
        q = float(q_arr)
        if model.supports(q):
            return quantize_scaled(y0, q)
        return simulate_quantize(y0, q, rng)

    if y0.ndim != 2 or q_arr.shape != (y0.shape[0],):
        raise InputError(f"per-row scales need shape ({y0.shape[0]},), got {q_arr.shape}")
    q_col = q_arr[:, None]
    in_range = (q_arr >= model.q_min) & (q_arr <= model.q_max)
    simulated = simulate_quantize(y0, q_col, rng)
    return np.where(in_range[:, None], quantize_scaled(y0, q_col), simulated)


def score(x_hat0: LatentTensor, x_t: LatentTensor, q: float) -> LatentTensor:
    """(x_hat0 - x_t) / q."""
    x_hat0 = as_latent(x_hat0, "prediction")
    x_t = as_latent(x_t, "state")
    check_same_shape(x_hat0, x_t, "score operands")
    if q == 0.0:
        raise InputError("score is undefined at q = 0")
    return (x_hat0 - x_t) / q


def _check_step(q_i: float, q_next: float) -> None:
    if not q_i > 0.0:
        raise InputError(f"q_i must be positive, got {q_i}")
    if not 0.0 <= q_next < q_i:
        raise InputError(f"Euler step needs 0 <= q_next < q_i, got q_i={q_i}, q_next={q_next}")


def euler_step(y_i: LatentTensor, x_hat0: LatentTensor, q_i: float, q_next: float) -> LatentTensor:
    """Interpolate y_i toward x_hat0 by (q_i - q_next) / q_i; q_next = 0 lands on x_hat0."""
    _check_step(q_i, q_next)
    y_i = as_latent(y_i, "state")
    x_hat0 = as_latent(x_hat0, "prediction")
    check_same_shape(y_i, x_hat0, "Euler step operands")
    if q_next == 0.0:
        return x_hat0.copy()
    return y_i + ((q_i - q_next) / q_i) * (x_hat0 - y_i)


def euler_step_from_score(y_i: LatentTensor, d: LatentTensor, q_i: float, q_next: float) -> LatentTensor:
    """The same step written as y_i + (q_i - q_next) * d with d = score."""
    _check_step(q_i, q_next)
    return as_latent(y_i, "state") + (q_i - q_next) * as_latent(d, "score")


def injection_strength(beta: float, q_next: float, q_min: float) -> float:
    return beta * math.sqrt(max(q_next - q_min, 0.0))


def inject_randomness(
    y: LatentTensor,
    d: LatentTensor,
    q_next: float,
    beta: float,
    noise_form: NoiseForm,
    model: Optional[ChannelEntropyModel],
    rng: SeededRng,
    q_min: Optional[float] = None,
) -> LatentTensor:
    """
    y + alpha * (eps - d), alpha evaluated at the destination scale.

    eps is unit-variance: standard normal, uniform / sqrt(1/12), or a draw
    from the entropy model at q_next (which must then be a supported rate).
    """
    if beta < 0.0:
        raise InputError(f"beta must be non-negative, got {beta}")
    noise_form = NoiseForm(noise_form)
    if q_min is None:
        q_min = model.q_min if model is not None else DEFAULT_Q_MIN
    alpha = injection_strength(beta, q_next, q_min)
    if alpha == 0.0 or noise_form is NoiseForm.NONE:
        return y

    y = as_latent(y, "state")
    d = as_latent(d, "score")
    check_same_shape(y, d, "injection operands")
    if noise_form is NoiseForm.GAUSSIAN:
        eps = rng.normal(y.shape)
    elif noise_form is NoiseForm.UNIFORM:
        eps = rng.uniform(-0.5, 0.5, size=y.shape) / UNIFORM_STD
    else:
        if model is None:
            raise InputError("entropy-model noise needs an entropy model")
        eps = entropy_model_sample(model, q_next, y.shape, rng)
    return y + alpha * (eps - d)


class Denoiser(Protocol):
    def __call__(self, x: LatentTensor, q: float) -> LatentTensor:
        ...


@dataclass
class NetworkDenoiser:
    """Adapter from trained reverse-network weights to the Denoiser protocol."""
    params: DenoiserParams

    def __call__(self, x: LatentTensor, q: float) -> LatentTensor:
        return denoiser_forward(self.params, x, q)


def reverse_sample(
    y_compressed: LatentTensor,
    config: SamplerConfig,
    denoiser: Denoiser,
    model: Optional[ChannelEntropyModel],
    q_min: Optional[float] = None,
    quiet: bool = True,
) -> LatentTensor:
    """
    Run N reverse steps from the compressed latent; N = 0 is the identity.

    Step i draws its noise from block i of the seed's noise stream, so a
    given seed reproduces the same trajectory.
    """
    y = as_latent(y_compressed, "compressed latent")
    schedule = make_schedule(config.q_0, config.steps)
    if schedule.steps == 0:
        return y.copy()

    noise = SeededRng(config.seed, STREAM_NOISE)
    pairs = list(schedule.pairs())
    for i, (q_i, q_next) in enumerate(tqdm(pairs, desc="reverse", disable=quiet)):
        x_hat0 = as_latent(denoiser(y, q_i), "denoiser output")
        d = score(x_hat0, y, q_i)
        y = euler_step(y, x_hat0, q_i, q_next)
        y = inject_randomness(y, d, q_next, config.beta, config.noise_form, model, noise.at(i), q_min=q_min)
        logger.debug(f"reverse step {i + 1}/{schedule.steps}: q {q_i:g} -> {q_next:g}")
    return y
