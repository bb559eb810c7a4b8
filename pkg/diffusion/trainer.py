"""
Reverse-network training: multi-rate L2 between y0 and D(y_t, q_t).
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from entropy.model import ChannelEntropyModel
from numerics.checkpoint import save_checkpoint
from numerics.denoiser import DenoiserParams, denoiser_backward
from numerics.errors import InputError
from numerics.optim import DEFAULT_BETAS, DEFAULT_WEIGHT_DECAY, OptimizerState, adamw_step
from numerics.rng import STREAM_CORRUPTION, STREAM_DATA, SeededRng
from numerics.tensor import LatentTensor, as_latent
from quantizer.scaling import simulate_quantize

from .sampler import forward_compress

logger = logging.getLogger(__name__)

# (rng, count) -> (count, dims) fresh training latents
LatentSource = Callable[[SeededRng, int], np.ndarray]


def train_denoiser_step(
    params: DenoiserParams,
    y0: LatentTensor,
    model: ChannelEntropyModel,
    rng: SeededRng,
    state: OptimizerState,
    q_low: Optional[float] = None,
    lr: Optional[float] = None,
    simulated_fraction: float = 0.0,
) -> Tuple[float, DenoiserParams, OptimizerState]:
    """
    One AdamW step on a batch of clean latents.

    Each row gets q_t ~ U(q_low, q_max), q_low defaulting to the model's
    q_min; y_t = forward_compress(y0, q_t). A `simulated_fraction` share of
    the rows is corrupted with simulated quantization instead. Returns the
    loss before the step.
    """
    y0 = as_latent(y0, "training batch")
    if y0.ndim != 2:
        raise InputError(f"training batch must be (rows, dims), got {y0.shape}")
    if not 0.0 <= simulated_fraction <= 1.0:
        raise InputError(f"simulated_fraction must lie in [0, 1], got {simulated_fraction}")
    q_low = model.q_min if q_low is None else q_low
    q_t = rng.uniform(q_low, model.q_max, size=y0.shape[0])
    y_t = forward_compress(y0, q_t, model, rng)
    if simulated_fraction > 0.0:
        simulated = rng.uniform(size=y0.shape[0]) < simulated_fraction
        y_t = np.where(simulated[:, None], simulate_quantize(y0, q_t[:, None], rng), y_t)
    loss, grads = denoiser_backward(params, y_t, q_t, y0)
    tensors, state = adamw_step(state, params.tensors, grads.tensors, names=params.trainable_names(), lr=lr)
    return loss, DenoiserParams(tensors), state


@dataclass
class TrainerSettings:
    steps: int = 10_000
    batch_size: int = 128
    lr: float = 1e-3
    lr_decay_at: float = 0.5
    weight_decay: float = DEFAULT_WEIGHT_DECAY
    betas: Tuple[float, float] = DEFAULT_BETAS
    q_train_min: Optional[float] = None
    log_every: int = 500
    checkpoint_every: int = 0
    simulated_fraction: float = 0.0


class DenoiserTrainer:
    """Drives train_denoiser_step with per-step seeded streams.

    Step t reads batch rows from block t of the data stream and draws q_t and
    corruption noise from block t of the corruption stream, so resuming from
    a checkpoint at step t replays exactly what an uninterrupted run does.
    """

    def __init__(
        self,
        params: DenoiserParams,
        model: ChannelEntropyModel,
        data: Union[np.ndarray, LatentSource],
        seed: int,
        settings: TrainerSettings = None,
        state: Optional[OptimizerState] = None,
    ):
        self.settings = settings or TrainerSettings()
        self.params = params
        self.model = model
        self.seed = seed
        if callable(data):
            self._source = data
        else:
            rows = as_latent(data, "training corpus")
            if rows.ndim != 2 or rows.shape[0] == 0:
                raise InputError(f"training corpus must be a non-empty (rows, dims) array, got {rows.shape}")
            if rows.shape[1] != params.input_dim:
                raise InputError(f"corpus rows have {rows.shape[1]} dims, network expects {params.input_dim}")
            self._source = lambda rng, n: rows[rng.integers(0, rows.shape[0], size=n)]
        s = self.settings
        self.state = state or OptimizerState(lr=s.lr, weight_decay=s.weight_decay, betas=tuple(s.betas))

    def lr_at(self, step: int) -> float:
        """Base rate, halved from lr_decay_at * steps onward."""
        s = self.settings
        return s.lr if step < s.lr_decay_at * s.steps else 0.5 * s.lr

    def run(
        self,
        checkpoint_path: Optional[Path] = None,
        quiet: bool = True,
        history: Optional[List[float]] = None,
    ) -> Tuple[DenoiserParams, OptimizerState]:
        """Train from the state's step counter up to settings.steps."""
        s = self.settings
        start = self.state.step
        if start >= s.steps:
            logger.info(f"checkpoint already at step {start} of {s.steps}; nothing to do")
            return self.params, self.state
        if start:
            logger.info(f"resuming denoiser training at step {start}")

        window = []
        bar = tqdm(range(start, s.steps), desc="denoiser", disable=quiet, initial=start, total=s.steps)
        for step in bar:
            batch = self._source(SeededRng(self.seed, STREAM_DATA, step), s.batch_size)
            loss, self.params, self.state = train_denoiser_step(
                self.params,
                batch,
                self.model,
                SeededRng(self.seed, STREAM_CORRUPTION, step),
                self.state,
                q_low=s.q_train_min,
                lr=self.lr_at(step),
                simulated_fraction=s.simulated_fraction,
            )
            window.append(loss)
            if history is not None:
                history.append(loss)
            done = step + 1
            if s.log_every and done % s.log_every == 0:
                mean = float(np.mean(window))
                bar.set_postfix(loss=f"{mean:.5f}")
                logger.info(f"step {done}/{s.steps}: loss {mean:.6f} (lr {self.lr_at(step):g})")
                window = []
            if checkpoint_path and s.checkpoint_every and done % s.checkpoint_every == 0:
                save_checkpoint(checkpoint_path, self.params, self.state)
                logger.debug(f"checkpoint written at step {done}")

        if checkpoint_path:
            save_checkpoint(checkpoint_path, self.params, self.state)
            logger.info(f"saved denoiser checkpoint to {checkpoint_path}")
        return self.params, self.state
