"""
Reverse network D_theta: a 4-layer dense network on (latent, q-embedding).

The flattened latent is concatenated with a sinusoidal embedding of ln(q/q_min)
and mapped back to a latent of the same size. Gradients are written out by
hand (no autodiff) and checked against finite differences in the tests.
"""
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Tuple, Union

import numpy as np
from scipy.special import expit

from .errors import InputError
from .rng import SeededRng
from .tensor import LatentTensor, as_latent

NUM_LAYERS = 4
DEFAULT_HIDDEN = 256
DEFAULT_EMBED_DIMS = 16
DEFAULT_MAX_FREQ = 16.0

Scale = Union[float, np.ndarray]


def embedding_frequencies(dims: int, max_freq: float = DEFAULT_MAX_FREQ) -> np.ndarray:
    """Geometric frequencies 1 = w_0 < ... < w_{K-1} = max_freq, K = dims / 2."""
    if dims <= 0 or dims % 2:
        raise InputError(f"embedding dims must be even and positive, got {dims}")
    half = dims // 2
    if half == 1:
        return np.ones(1)
    return max_freq ** (np.arange(half) / (half - 1))


def q_embed(q: Scale, dims: int, q_min: float, freqs: np.ndarray = None) -> np.ndarray:
    """
    Sinusoidal embedding of a quantization scale.

    Returns interleaved (sin, cos) pairs of w_k * ln(max(q, q_min) / q_min).
    A scalar q gives shape (dims,), a vector of n scales gives (n, dims).
    """
    q_arr = np.asarray(q, dtype=np.float64)
    if np.any(~np.isfinite(q_arr)) or np.any(q_arr <= 0.0):
        raise InputError(f"q must be positive, got {q}")
    if freqs is None:
        freqs = embedding_frequencies(dims)
    if 2 * len(freqs) != dims:
        raise InputError(f"{len(freqs)} frequencies cannot fill {dims} embedding dims")

    c = np.log(np.maximum(q_arr, q_min) / q_min)
    phase = c[..., None] * freqs
    out = np.empty(phase.shape[:-1] + (dims,))
    out[..., 0::2] = np.sin(phase)
    out[..., 1::2] = np.cos(phase)
    return out


def silu(z: np.ndarray) -> np.ndarray:
    return z * expit(z)


def silu_grad(z: np.ndarray) -> np.ndarray:
    s = expit(z)
    return s * (1.0 + z * (1.0 - s))


@dataclass
class DenoiserParams:
    """Named weight tensors of the reverse network.

    Layer i holds `layers.{i}.weight` with shape (fan_in, fan_out) and
    `layers.{i}.bias`; `embed.freqs` and `embed.q_min` configure the
    q-conditioning and are not trained. An optional `skip.gain` adds
    gain * x to the output (a residual network); it is not trained either.
    """
    tensors: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def initialize(
        cls,
        input_dim: int,
        rng: SeededRng,
        hidden: int = DEFAULT_HIDDEN,
        embed_dims: int = DEFAULT_EMBED_DIMS,
        q_min: float = 0.05,
        max_freq: float = DEFAULT_MAX_FREQ,
        residual: bool = False,
    ) -> "DenoiserParams":
        """He-style init for hidden layers, small init for the output layer.

        With residual=True the network starts near the identity map.
        """
        widths = [input_dim + embed_dims] + [hidden] * (NUM_LAYERS - 1) + [input_dim]
        tensors = {}
        for i in range(NUM_LAYERS):
            fan_in, fan_out = widths[i], widths[i + 1]
            std = np.sqrt(2.0 / fan_in) if i < NUM_LAYERS - 1 else 0.1 / np.sqrt(fan_in)
            tensors[f"layers.{i}.weight"] = rng.normal((fan_in, fan_out)) * std
            tensors[f"layers.{i}.bias"] = np.zeros(fan_out)
        tensors["embed.freqs"] = embedding_frequencies(embed_dims, max_freq)
        tensors["embed.q_min"] = np.array([q_min])
        if residual:
            tensors["skip.gain"] = np.ones(1)
        params = cls(tensors)
        params.validate()
        return params

    @property
    def input_dim(self) -> int:
        return self.tensors[f"layers.{NUM_LAYERS - 1}.weight"].shape[1]

    @property
    def embed_dims(self) -> int:
        return 2 * len(self.tensors["embed.freqs"])

    @property
    def q_min(self) -> float:
        return float(self.tensors["embed.q_min"][0])

    @property
    def skip_gain(self) -> float:
        gain = self.tensors.get("skip.gain")
        return 0.0 if gain is None else float(gain[0])

    @property
    def widths(self) -> List[int]:
        shapes = [self.tensors[f"layers.{i}.weight"].shape for i in range(NUM_LAYERS)]
        return [shapes[0][0]] + [s[1] for s in shapes]

    def trainable_names(self) -> List[str]:
        return [name for name in self.tensors if name.startswith("layers.")]

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        return iter(self.tensors.items())

    def copy(self) -> "DenoiserParams":
        return DenoiserParams({k: v.copy() for k, v in self.tensors.items()})

    def zeros_like(self) -> "DenoiserParams":
        return DenoiserParams({k: np.zeros_like(v) for k, v in self.tensors.items()})

    def validate(self) -> None:
        """Check layer chaining, embedding size and finiteness."""
        for i in range(NUM_LAYERS):
            w = self.tensors.get(f"layers.{i}.weight")
            b = self.tensors.get(f"layers.{i}.bias")
            if w is None or b is None:
                raise InputError(f"missing parameters for layer {i}")
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise InputError(f"layer {i} has inconsistent shapes {w.shape}, {b.shape}")
            if i > 0:
                prev = self.tensors[f"layers.{i - 1}.weight"]
                if prev.shape[1] != w.shape[0]:
                    raise InputError(f"layer {i} fan-in {w.shape[0]} != previous fan-out {prev.shape[1]}")
        if self.widths[0] != self.input_dim + self.embed_dims:
            raise InputError("first layer fan-in must equal latent dim + embedding dims")
        gain = self.tensors.get("skip.gain")
        if gain is not None and gain.shape != (1,):
            raise InputError(f"skip.gain must have shape (1,), got {gain.shape}")
        for name, t in self.tensors.items():
            if not np.all(np.isfinite(t)):
                raise InputError(f"parameter {name} contains non-finite values")


def _prepare_inputs(params: DenoiserParams, x: LatentTensor, q: Scale) -> np.ndarray:
    x = as_latent(x, "denoiser input")
    d = params.input_dim
    if x.shape[-1:] != (d,) or x.ndim > 2:
        raise InputError(f"denoiser expects shape ({d},) or (batch, {d}), got {x.shape}")
    batch = np.atleast_2d(x)
    q_arr = np.asarray(q, dtype=np.float64)
    if q_arr.ndim == 0:
        q_arr = np.full(batch.shape[0], float(q_arr))
    elif q_arr.shape != (batch.shape[0],):
        raise InputError(f"q must be a scalar or one scale per row, got shape {q_arr.shape}")
    emb = q_embed(q_arr, params.embed_dims, params.q_min, params.tensors["embed.freqs"])
    return np.concatenate([batch, emb], axis=1)


def _forward_cache(params: DenoiserParams, h0: np.ndarray):
    """Run the layers, keeping pre-activations for the backward pass."""
    t = params.tensors
    gain = params.skip_gain
    activations = [h0]
    pre = []
    h = h0
    for i in range(NUM_LAYERS):
        z = h @ t[f"layers.{i}.weight"] + t[f"layers.{i}.bias"]
        pre.append(z)
        if i < NUM_LAYERS - 1:
            h = silu(z)
        elif gain:
            h = z + gain * h0[:, :params.input_dim]
        else:
            h = z
        activations.append(h)
    return activations, pre


def denoiser_forward(params: DenoiserParams, x: LatentTensor, q: Scale) -> LatentTensor:
    """x_hat_0 = D_theta(x, q); output has the same shape as x."""
    h0 = _prepare_inputs(params, x, q)
    activations, _ = _forward_cache(params, h0)
    return activations[-1].reshape(np.shape(x))


def denoiser_backward(
    params: DenoiserParams, x: LatentTensor, q: Scale, target: LatentTensor
) -> Tuple[float, DenoiserParams]:
    """
    Mean squared error between D_theta(x, q) and target, with exact gradients.

    Returns (loss, grads) where grads mirrors params; the non-trainable
    embedding and skip tensors get zero gradients.
    """
    target = as_latent(target, "target")
    if np.shape(x) != target.shape:
        raise InputError(f"input/target shape mismatch: {np.shape(x)} vs {target.shape}")

    h0 = _prepare_inputs(params, x, q)
    activations, pre = _forward_cache(params, h0)
    out = activations[-1]
    residual = out - target.reshape(out.shape)
    loss = float(np.mean(residual ** 2))

    t = params.tensors
    grads = params.zeros_like()
    delta = 2.0 * residual / residual.size
    for i in reversed(range(NUM_LAYERS)):
        if i < NUM_LAYERS - 1:
            delta = delta * silu_grad(pre[i])
        grads.tensors[f"layers.{i}.weight"] = activations[i].T @ delta
        grads.tensors[f"layers.{i}.bias"] = delta.sum(axis=0)
        if i > 0:
            delta = delta @ t[f"layers.{i}.weight"].T
    return loss, grads
