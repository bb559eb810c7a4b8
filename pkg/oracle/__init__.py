"""Ground-truth denoisers and distribution distances for verification."""
from .distances import sliced_w1, w1_distance_1d
from .mixtures import GaussianMixture, PointMixture
from .posterior import (
    GaussianMixtureDenoiser,
    PointMixtureDenoiser,
    posterior_mean_gmm,
    posterior_mean_gmm_exact,
    posterior_mean_points,
)

__all__ = [
    "PointMixture",
    "GaussianMixture",
    "posterior_mean_points",
    "posterior_mean_gmm",
    "posterior_mean_gmm_exact",
    "PointMixtureDenoiser",
    "GaussianMixtureDenoiser",
    "w1_distance_1d",
    "sliced_w1",
]
