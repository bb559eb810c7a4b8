"""
Fixed analysis / synthesis transforms: 8x8 orthonormal block DCT.

Latents are laid out as (blocks, block * block): one row per block in raster
order, coefficients row-major inside the block. Images are padded to block
multiples by edge replication and cropped back on synthesis.
"""
from typing import Tuple

import numpy as np
from scipy.fft import dctn, idctn

from numerics.errors import InputError
from numerics.tensor import LatentTensor, as_latent

BLOCK = 8


def padded_shape(height: int, width: int, block: int = BLOCK) -> Tuple[int, int]:
    if height <= 0 or width <= 0:
        raise InputError(f"image dimensions must be positive, got {height}x{width}")
    return -(-height // block) * block, -(-width // block) * block


def pad_to_blocks(image: np.ndarray, block: int = BLOCK) -> np.ndarray:
    image = as_latent(image, "image")
    if image.ndim != 2:
        raise InputError(f"expected a single-channel 2-D image, got shape {image.shape}")
    ph, pw = padded_shape(*image.shape, block)
    return np.pad(image, ((0, ph - image.shape[0]), (0, pw - image.shape[1])), mode="edge")


def analysis_transform(image: np.ndarray, block: int = BLOCK) -> LatentTensor:
    padded = pad_to_blocks(image, block)
    rows, cols = padded.shape[0] // block, padded.shape[1] // block
    tiles = padded.reshape(rows, block, cols, block).transpose(0, 2, 1, 3)
    coeffs = dctn(tiles, axes=(-2, -1), norm="ortho")
    return coeffs.reshape(rows * cols, block * block)


def synthesis_transform(latent: LatentTensor, shape: Tuple[int, int], block: int = BLOCK) -> np.ndarray:
    """Inverse of analysis_transform for an image of the given (height, width)."""
    latent = as_latent(latent, "latent")
    ph, pw = padded_shape(*shape, block)
    rows, cols = ph // block, pw // block
    if latent.shape != (rows * cols, block * block):
        raise InputError(f"latent shape {latent.shape} does not fit a {shape[0]}x{shape[1]} image")
    tiles = idctn(latent.reshape(rows, cols, block, block), axes=(-2, -1), norm="ortho")
    padded = tiles.transpose(0, 2, 1, 3).reshape(ph, pw)
    return padded[:shape[0], :shape[1]]
