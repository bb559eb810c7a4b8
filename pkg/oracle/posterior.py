"""
Posterior-mean oracles under scaled-uniform corruption.

With x_t = x_0 + q * U[-0.5, 0.5)^D the likelihood is flat on the box
|x_t - x_0|_inf <= q/2, so E[x_0 | x_t] is the prior mean restricted to that
window. These are the exact minimizers of the denoiser's L2 objective.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.special import log_ndtr
from scipy.stats import norm

from numerics.errors import EmptySupportError, InputError, NumericUnderflowError
from numerics.tensor import LatentTensor, as_latent

from .mixtures import GaussianMixture, PointMixture

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 1 << 12
DEFAULT_RESOLUTION = MIN_RESOLUTION + 1
SIGMA_SPAN = 6.0
# relative slack on the window edge for points generated as x_0 + u * q
WINDOW_SLACK = 1e-12


def _query_rows(x, dims: int):
    x = as_latent(x, "query point")
    shape = x.shape
    if x.ndim == 0 and dims == 1:
        rows = x.reshape(1, 1)
    elif x.ndim == 1 and x.shape[0] == dims:
        rows = x[None, :]
    elif x.ndim == 2 and x.shape[1] == dims:
        rows = x
    else:
        raise InputError(f"query of shape {shape} does not match a {dims}-dimensional mixture")
    return rows, shape


def _check_q(q: float) -> float:
    q = float(q)
    if not q > 0.0 or not math.isfinite(q):
        raise InputError(f"q must be positive, got {q}")
    return q


def posterior_mean_points(mix: PointMixture, x: LatentTensor, q: float, strict: bool = True) -> np.ndarray:
    """
    E[x_0 | x] for a point mixture: weighted mean of the atoms inside the window.

    x is one point or a (count, dims) batch. With strict=False a query whose
    window holds no atom maps to its nearest atom instead of raising.
    """
    q = _check_q(q)
    rows, shape = _query_rows(x, mix.dims)
    gap = np.max(np.abs(rows[:, None, :] - mix.atoms[None, :, :]), axis=2)
    active = (gap <= 0.5 * q * (1.0 + WINDOW_SLACK)) * mix.weights
    total = active.sum(axis=1)
    empty = total == 0.0
    if np.any(empty) and strict:
        raise EmptySupportError(f"{int(empty.sum())} query points have no atom within q/2 = {q / 2:g}")

    out = np.empty_like(rows)
    hit = ~empty
    out[hit] = (active[hit] @ mix.atoms) / total[hit, None]
    if np.any(empty):
        nearest = np.argmin(np.sum((rows[empty, None, :] - mix.atoms[None, :, :]) ** 2, axis=2), axis=1)
        out[empty] = mix.atoms[nearest]
        logger.debug(f"{int(empty.sum())} points outside every window fell back to the nearest atom")
    return out.reshape(shape)


def _window_moments_quadrature(mix: GaussianMixture, point: np.ndarray, q: float, resolution: int):
    """Per component and dimension: window mass Z and first moment M by Simpson's rule."""
    mu, sigma = mix.means, mix.stds
    lo = np.maximum(point - 0.5 * q, mu - SIGMA_SPAN * sigma)
    hi = np.minimum(point + 0.5 * q, mu + SIGMA_SPAN * sigma)
    hi = np.maximum(hi, lo)
    t = np.linspace(0.0, 1.0, resolution)
    grid = lo[..., None] + (hi - lo)[..., None] * t
    pdf = norm.pdf(grid, loc=mu[..., None], scale=sigma[..., None])
    mass = simpson(pdf, x=grid, axis=-1)
    first = simpson(grid * pdf, x=grid, axis=-1)
    return mass, first


def posterior_mean_gmm(
    mix: GaussianMixture, x: LatentTensor, q: float, resolution: int = DEFAULT_RESOLUTION
) -> np.ndarray:
    """
    E[x_0 | x] for a diagonal Gaussian mixture by per-dimension quadrature.

    Each component factorizes over dimensions, so the window integral is a
    product of 1-D integrals, each taken on `resolution` points over the
    window clipped to +-6 sigma of the component.
    """
    q = _check_q(q)
    if resolution < MIN_RESOLUTION:
        raise InputError(f"resolution must be >= {MIN_RESOLUTION}, got {resolution}")
    rows, shape = _query_rows(x, mix.dims)
    out = np.empty_like(rows)
    for n, point in enumerate(rows):
        mass, first = _window_moments_quadrature(mix, point, q, resolution)
        comp_mass = mix.weights * np.prod(mass, axis=1)
        total = comp_mass.sum()
        if not total > 0.0:
            raise NumericUnderflowError(f"prior mass inside the window around {point} underflowed to zero")
        live = comp_mass > 0.0
        comp_mean = first[live] / mass[live]
        out[n] = comp_mass[live] @ comp_mean / total
    return out.reshape(shape)


def _log_interval(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """log(Phi(beta) - Phi(alpha)), evaluated on the lower tail for accuracy."""
    flip = (alpha + beta) > 0.0
    lo = np.where(flip, -beta, alpha)
    hi = np.where(flip, -alpha, beta)
    log_hi = log_ndtr(hi)
    with np.errstate(divide="ignore"):
        return log_hi + np.log1p(-np.exp(log_ndtr(lo) - log_hi))


def _log_phi(z: np.ndarray) -> np.ndarray:
    return -0.5 * z * z - 0.5 * math.log(2.0 * math.pi)


def posterior_mean_gmm_exact(mix: GaussianMixture, x: LatentTensor, q: float) -> np.ndarray:
    """Closed-form counterpart of posterior_mean_gmm via truncated-normal moments."""
    q = _check_q(q)
    rows, shape = _query_rows(x, mix.dims)
    mu, sigma = mix.means[None], mix.stds[None]
    alpha = (rows[:, None, :] - 0.5 * q - mu) / sigma
    beta = (rows[:, None, :] + 0.5 * q - mu) / sigma
    log_z = _log_interval(alpha, beta)

    log_mass = np.log(mix.weights)[None, :] + log_z.sum(axis=2)
    peak = log_mass.max(axis=1, keepdims=True)
    if np.any(~np.isfinite(peak)):
        raise NumericUnderflowError("prior mass inside a query window underflowed to zero")
    resp = np.exp(log_mass - peak)
    resp /= resp.sum(axis=1, keepdims=True)

    with np.errstate(invalid="ignore", over="ignore"):
        shift = np.exp(_log_phi(alpha) - log_z) - np.exp(_log_phi(beta) - log_z)
    comp_mean = np.where(np.isfinite(log_z), mu + sigma * np.nan_to_num(shift), 0.0)
    out = np.einsum("nk,nkd->nd", resp, comp_mean)
    return out.reshape(shape)


@dataclass
class PointMixtureDenoiser:
    """Oracle denoiser for a point mixture, usable in place of the network."""
    mix: PointMixture
    strict: bool = True

    def __call__(self, x: LatentTensor, q: float) -> LatentTensor:
        return posterior_mean_points(self.mix, x, q, strict=self.strict)


@dataclass
class GaussianMixtureDenoiser:
    """Oracle denoiser for a Gaussian mixture; closed form unless quadrature is asked for."""
    mix: GaussianMixture
    quadrature: bool = False
    resolution: int = DEFAULT_RESOLUTION

    def __call__(self, x: LatentTensor, q: float) -> LatentTensor:
        if self.quadrature:
            return posterior_mean_gmm(self.mix, x, q, self.resolution)
        return posterior_mean_gmm_exact(self.mix, x, q)
