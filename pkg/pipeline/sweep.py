"""
Evaluation drivers: rate-distortion sweeps over images and the
injection-strength / noise-form ablation of the reverse sampler.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from tqdm import tqdm

from diffusion.sampler import Denoiser, NoiseForm, SamplerConfig, make_schedule, reverse_sample
from entropy.fitting import fit_entropy_model
from entropy.model import ChannelEntropyModel
from numerics.errors import InputError
from numerics.rng import STREAM_CORRUPTION, STREAM_DATA, STREAM_PROJECTIONS, SeededRng
from oracle.distances import sliced_w1
from oracle.mixtures import GaussianMixture, PointMixture
from oracle.posterior import GaussianMixtureDenoiser, PointMixtureDenoiser
from quantizer.scaling import simulate_quantize

from .codec import decode, encode
from .models import RdPoint, SamplerEvalRow
from .transforms import BLOCK, analysis_transform

logger = logging.getLogger(__name__)

Distribution = Union[PointMixture, GaussianMixture]

DISTRIBUTIONS = {
    "two-point": lambda: PointMixture.two_point(),
    "gmm4": lambda: GaussianMixture.four_component_2d(),
}


def psnr(mse: float, peak: float = 1.0) -> float:
    return math.inf if mse == 0.0 else 10.0 * math.log10(peak * peak / mse)


def rd_sweep(
    images: Sequence[Tuple[str, np.ndarray]],
    q_list: Sequence[float],
    model: ChannelEntropyModel,
    denoiser: Optional[Denoiser],
    sampler: SamplerConfig,
    peak: float = 1.0,
    w1_directions: int = 0,
    block: int = BLOCK,
    quiet: bool = True,
) -> List[RdPoint]:
    """
    Encode every image at every q_0 once, then decode at N = 0 and at the
    sampler's N. Both rows of a pair share the file, hence the bpp.
    """
    if not images:
        raise InputError("rd sweep needs at least one image")
    step_counts = [0] if sampler.steps == 0 else [0, sampler.steps]
    points = []
    work = [(name, image, q) for name, image in images for q in q_list]
    for name, image, q in tqdm(work, desc="rd sweep", disable=quiet):
        encoded = encode(image, q, model, block)
        for steps in step_counts:
            config = sampler.model_copy(update={"q_0": q, "steps": steps})
            recon = decode(encoded, model, denoiser, config, block)
            mse = float(np.mean((recon - image) ** 2))
            distance = None
            if w1_directions:
                distance = sliced_w1(
                    analysis_transform(recon, block),
                    analysis_transform(image, block),
                    w1_directions,
                    SeededRng(sampler.seed, STREAM_PROJECTIONS),
                )
            points.append(RdPoint(
                image=name,
                q_0=q,
                steps=steps,
                beta=config.beta,
                noise=config.noise_form.value,
                bits=encoded.bits,
                pixels=encoded.header.pixels,
                bpp=encoded.bpp,
                mse=mse,
                psnr=psnr(mse, peak),
                sliced_w1=distance,
            ))
        logger.debug(f"{name} q={q:g}: {encoded.bpp:.4f} bpp")
    return points


def oracle_denoiser(dist: Distribution) -> Denoiser:
    if isinstance(dist, PointMixture):
        return PointMixtureDenoiser(dist, strict=False)
    return GaussianMixtureDenoiser(dist)


def entropy_noise_supported(model: Optional[ChannelEntropyModel], q_0: float, steps: int) -> bool:
    """Whether every scale that receives entropy-model noise is a supported rate."""
    if model is None:
        return False
    schedule = make_schedule(q_0, steps)
    return all(model.supports(q) for q in schedule.scales[1:] if q > model.q_min)


def eval_sampler(
    dist: Distribution,
    name: str,
    betas: Sequence[float],
    forms: Sequence[NoiseForm],
    steps: int,
    q_0: float,
    seed: int,
    samples: int = 10_000,
    model: Optional[ChannelEntropyModel] = None,
    directions: int = 64,
    quiet: bool = True,
) -> List[SamplerEvalRow]:
    """
    Corrupt `samples` draws at q_0 with simulated quantization, reverse them
    with the oracle denoiser and score each (beta, form) cell against the
    clean draws. Entropy-model cells whose scales the model does not cover
    are reported as unsupported.
    """
    if samples < 1:
        raise InputError(f"need at least one sample, got {samples}")
    clean = dist.sample(SeededRng(seed, STREAM_DATA), samples)
    corrupted = simulate_quantize(clean, q_0, SeededRng(seed, STREAM_CORRUPTION))
    denoiser = oracle_denoiser(dist)
    q_min = model.q_min if model is not None else None

    rows = []
    cells = [(beta, NoiseForm(form)) for beta in betas for form in forms]
    for beta, form in tqdm(cells, desc="eval sampler", disable=quiet):
        base = dict(distribution=name, q_0=q_0, steps=steps, beta=beta, noise=form.value, samples=samples)
        if form is NoiseForm.ENTROPY_MODEL and beta > 0.0 and not entropy_noise_supported(model, q_0, steps):
            logger.warning(f"entropy-model noise unsupported at q_0={q_0:g} with {steps} steps; row flagged")
            rows.append(SamplerEvalRow(supported=False, **base))
            continue
        config = SamplerConfig(q_0=q_0, steps=steps, beta=beta, noise_form=form, seed=seed)
        restored = reverse_sample(corrupted, config, denoiser, model, q_min=q_min)
        distance = sliced_w1(restored, clean, directions, SeededRng(seed, STREAM_PROJECTIONS))
        mse = float(np.mean((restored - clean) ** 2))
        rows.append(SamplerEvalRow(sliced_w1=distance, mse=mse, **base))
        logger.info(f"beta={beta:g} noise={form.value}: sliced W1 {distance:.5f}, mse {mse:.5f}")
    return rows


def fit_distribution_model(
    dist: Distribution, seed: int, q_min: float, q_max: float, samples: int = 10_000, epochs: int = 20
) -> ChannelEntropyModel:
    """Entropy model over a mixture's coordinates, for the entropy-model noise form."""
    data = dist.sample(SeededRng(seed, STREAM_DATA), samples)
    return fit_entropy_model(data, SeededRng(seed), epochs=epochs, q_min=q_min, q_max=q_max)
