"""
Fitting the per-channel entropy model by minimizing expected rate.

Each mini-batch draws one scale per row from U(q_min, q_max), quantizes the
latents at that scale and takes an AdamW step on (mu, log s) against the
discretized logistic negative log-likelihood.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit
from tqdm import tqdm

from numerics.checkpoint import optimizer_from_tensors, optimizer_tensors, pack_tensors, unpack_tensors
from numerics.errors import CheckpointError, InputError
from numerics.optim import OptimizerState, adamw_step
from numerics.rng import STREAM_DATA, STREAM_Q, SeededRng
from quantizer.scaling import round_half_away

from .model import DEFAULT_Q_MAX, DEFAULT_Q_MIN, SCALE_FLOOR, ChannelEntropyModel, interval_mass, rd_loss

logger = logging.getLogger(__name__)

LIKELIHOOD_FLOOR = 1e-12
LOG_SCALE_FLOOR = math.log(SCALE_FLOOR)
# orthonormal transform of [0, 1] pixels: latent MSE * 255**2 is 8-bit pixel MSE
PIXEL_DISTORTION_SCALE = 255.0 ** 2


def _stack(data: Union[np.ndarray, Iterable[np.ndarray]]) -> np.ndarray:
    if isinstance(data, np.ndarray):
        chunks = [data]
    else:
        chunks = list(data)
    if not chunks:
        raise InputError("cannot fit an entropy model to empty data")
    channels = chunks[0].shape[-1]
    rows = np.concatenate([np.asarray(c, dtype=np.float64).reshape(-1, channels) for c in chunks])
    if rows.shape[0] == 0:
        raise InputError("cannot fit an entropy model to empty data")
    if not np.all(np.isfinite(rows)):
        raise InputError("training latents contain non-finite values")
    return rows


def rate_nll_and_grads(
    mu: np.ndarray, log_scale: np.ndarray, y: np.ndarray, q: np.ndarray
) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Mean -ln P(round(y/q)) over all elements and its gradients w.r.t. mu and log s.

    y has shape (rows, channels); q holds one scale per row.
    """
    s = np.exp(log_scale)
    q_col = q[:, None]
    k = round_half_away(y / q_col)
    a = ((k - 0.5) * q_col - mu) / s
    b = ((k + 0.5) * q_col - mu) / s
    mass = np.maximum(interval_mass(a, b), LIKELIHOOD_FLOOR)

    fa = expit(a) * expit(-a)
    fb = expit(b) * expit(-b)
    n = y.size
    # d(-ln P)/d mu = (f(b) - f(a)) / (s P);  d(-ln P)/d log s = (f(b) b - f(a) a) / P
    grad_mu = np.sum((fb - fa) / (s * mass), axis=0) / n
    grad_log_s = np.sum((fb * b - fa * a) / mass, axis=0) / n
    return float(-np.mean(np.log(mass))), grad_mu, grad_log_s


@dataclass
class EntropyFitState:
    """A multi-rate fit after `epoch` completed epochs."""
    mu: np.ndarray
    log_scale: np.ndarray
    optimizer: OptimizerState
    epoch: int = 0
    q_min: float = DEFAULT_Q_MIN
    q_max: float = DEFAULT_Q_MAX

    def model(self) -> ChannelEntropyModel:
        return ChannelEntropyModel(self.mu, self.log_scale, q_min=self.q_min, q_max=self.q_max)


def save_fit_state(path: Path, state: EntropyFitState) -> None:
    """Write a fit state as an RDMC container (`fit.*` plus `optim.*` tensors)."""
    tensors = {
        "fit.mu": state.mu,
        "fit.log_scale": state.log_scale,
        "fit.meta": np.array([state.epoch, state.q_min, state.q_max]),
    }
    tensors.update(optimizer_tensors(state.optimizer))
    Path(path).write_bytes(pack_tensors(tensors))


def load_fit_state(path: Path) -> EntropyFitState:
    tensors = unpack_tensors(Path(path).read_bytes())
    missing = {"fit.mu", "fit.log_scale", "fit.meta"} - set(tensors)
    optimizer = optimizer_from_tensors(tensors)
    if missing or optimizer is None:
        raise CheckpointError(f"{path} is not an entropy fit state")
    epoch, q_min, q_max = tensors["fit.meta"]
    return EntropyFitState(
        mu=tensors["fit.mu"],
        log_scale=tensors["fit.log_scale"],
        optimizer=optimizer,
        epoch=int(epoch),
        q_min=float(q_min),
        q_max=float(q_max),
    )


def fit_entropy_model(
    data: Union[np.ndarray, Iterable[np.ndarray]],
    rng: SeededRng,
    epochs: int = 30,
    q_min: float = DEFAULT_Q_MIN,
    q_max: float = DEFAULT_Q_MAX,
    lr: float = 0.02,
    batch_size: int = 1024,
    quiet: bool = True,
    history: Optional[List[float]] = None,
    resume: Optional[EntropyFitState] = None,
    checkpoint_path: Optional[Path] = None,
) -> ChannelEntropyModel:
    """
    Fit logistic (mu, s) per channel to latents under multi-rate quantization.

    A fresh fit starts from moment estimates; channels with zero spread are
    pinned at the scale floor and reported. Epoch e shuffles and draws its
    scales from counter block e, so a fit resumed after epoch e replays the
    remaining epochs of an uninterrupted run exactly.

    Args:
        data: Latents of shape (..., channels), or an iterable of such chunks.
        rng: Seeded source; only its (seed, stream) address is used.
        epochs: Total epoch count, including epochs already in `resume`.
        q_min: Low end of the supported range and of the training scales.
        q_max: High end of the supported range and of the training scales.
        lr: AdamW learning rate of a fresh fit.
        batch_size: Rows per optimizer step.
        quiet: Hide the progress bar.
        history: Receives the mean rate (bits/element) of each epoch run.
        resume: State to continue from; must match the data's channel count
            and the supported range.
        checkpoint_path: Where the fit state is written after every epoch.

    Returns:
        The fitted ChannelEntropyModel.
    """
    if epochs < 1:
        raise InputError(f"epochs must be >= 1, got {epochs}")
    y = _stack(data)
    rows, channels = y.shape

    spread = y.std(axis=0)
    degenerate = spread <= SCALE_FLOOR
    if resume is None:
        for c in np.flatnonzero(degenerate):
            logger.warning(f"channel {c} is constant; scale floored at {SCALE_FLOOR:g}")
        fit = EntropyFitState(
            mu=y.mean(axis=0),
            log_scale=np.log(np.maximum(spread * math.sqrt(3.0) / math.pi, SCALE_FLOOR)),
            optimizer=OptimizerState(lr=lr, weight_decay=0.0),
            q_min=q_min,
            q_max=q_max,
        )
    else:
        if resume.mu.size != channels:
            raise InputError(f"fit state has {resume.mu.size} channels, data has {channels}")
        if (resume.q_min, resume.q_max) != (q_min, q_max):
            raise InputError(
                f"fit state covers [{resume.q_min}, {resume.q_max}], asked for [{q_min}, {q_max}]"
            )
        fit = resume
        if fit.epoch >= epochs:
            logger.info(f"fit state already at epoch {fit.epoch} of {epochs}; nothing to do")
        else:
            logger.info(f"resuming entropy fit after epoch {fit.epoch}")
    params = {"mu": fit.mu, "log_scale": fit.log_scale}
    state = fit.optimizer

    data_rng = rng.derive(STREAM_DATA)
    q_rng = rng.derive(STREAM_Q)
    for epoch in tqdm(range(fit.epoch, epochs), desc="entropy fit", disable=quiet):
        order = data_rng.at(epoch).generator.permutation(rows)
        batch_q = q_rng.at(epoch)
        epoch_nll = []
        for start in range(0, rows, batch_size):
            batch = y[order[start:start + batch_size]]
            q = batch_q.uniform(q_min, q_max, size=len(batch))
            nll, g_mu, g_log_s = rate_nll_and_grads(params["mu"], params["log_scale"], batch, q)
            g_mu[degenerate] = 0.0
            g_log_s[degenerate] = 0.0
            params, state = adamw_step(state, params, {"mu": g_mu, "log_scale": g_log_s})
            params["log_scale"] = np.maximum(params["log_scale"], LOG_SCALE_FLOOR)
            epoch_nll.append(nll * len(batch))
        bits = sum(epoch_nll) / rows / math.log(2.0)
        if history is not None:
            history.append(bits)
        logger.info(f"entropy fit epoch {epoch + 1}/{epochs}: {bits:.4f} bits/element")
        fit = EntropyFitState(params["mu"], params["log_scale"], state, epoch + 1, q_min, q_max)
        if checkpoint_path:
            save_fit_state(checkpoint_path, fit)

    floored = np.flatnonzero((fit.log_scale <= LOG_SCALE_FLOOR) & ~degenerate)
    for c in floored:
        logger.warning(f"channel {c} collapsed to the scale floor {SCALE_FLOOR:g}")
    return fit.model()


def select_q_for_lambda(
    model: ChannelEntropyModel,
    latents: np.ndarray,
    lam: float,
    grid: Sequence[float],
    distortion_scale: float = PIXEL_DISTORTION_SCALE,
) -> Tuple[float, float]:
    """
    Operating point for a rate-distortion multiplier.

    Args:
        model: Entropy model pricing the symbols.
        latents: Latents of images with pixels in [0, 1].
        lam: Multiplier on the distortion term.
        grid: Candidate scales; those outside the model's range are skipped.
        distortion_scale: Factor on the latent MSE. The default reads it as
            squared 8-bit pixel error, the units the lambda list is quoted in.

    Returns:
        (q, loss) minimizing rd_loss over the grid.
    """
    losses = [(rd_loss(model, latents, q, lam, distortion_scale), q) for q in grid if model.supports(q)]
    if not losses:
        raise InputError("no grid scale lies inside the model's supported range")
    loss, q = min(losses)
    return q, loss
