"""
End-to-end image codec: transform, quantize, range code; decode and reverse.

The coded path never simulates quantization: q_0 must be a rate the entropy
model supports. Reported bpp counts every byte of the file, header included.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from diffusion.sampler import Denoiser, SamplerConfig, reverse_sample
from entropy.model import ChannelEntropyModel
from entropy.range_coder import Bitstream, range_decode, range_encode, tile_tables
from numerics.errors import BitstreamError, InputError, ModelMismatchError
from quantizer.scaling import desymbolize, symbolize

from .bitstream import BitstreamHeader
from .transforms import BLOCK, analysis_transform, synthesis_transform

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EncodedImage:
    header: BitstreamHeader
    data: bytes

    @property
    def bits(self) -> int:
        return 8 * len(self.data)

    @property
    def bpp(self) -> float:
        return self.bits / self.header.pixels


def encode(image: np.ndarray, q_0: float, model: ChannelEntropyModel, block: int = BLOCK) -> EncodedImage:
    """
    Compress an image at scale q_0 into a complete RDMB file image.

    Args:
        image: 2-D array of pixels in [0, 1]
        q_0: quantization scale, must be a rate the model supports
        model: entropy model whose tables code the symbols
        block: DCT block size

    Returns:
        EncodedImage holding the header and the full file bytes
    """
    q_0 = model.check_rate(q_0)
    latent = analysis_transform(image, block)
    if latent.shape[-1] != model.channels:
        raise InputError(f"latent has {latent.shape[-1]} channels, entropy model has {model.channels}")

    k_lo, k_hi = model.alphabet(q_0)
    symbols = symbolize(latent, q_0, bounds=(k_lo, k_hi), clamp=True)
    tables = tile_tables(model.frequency_tables(q_0), symbols.size)
    payload = range_encode(symbols.ravel(), tables).payload

    header = BitstreamHeader(
        q_0=q_0,
        height=image.shape[0],
        width=image.shape[1],
        latent_shape=latent.shape,
        model_id=model.model_id,
        payload_length=len(payload),
    )
    encoded = EncodedImage(header, header.to_bytes() + payload)
    logger.debug(f"encoded {image.shape[1]}x{image.shape[0]} at q={q_0:g}: {encoded.bits} bits, {encoded.bpp:.4f} bpp")
    return encoded


def read_latent(data: bytes, model: ChannelEntropyModel):
    """Parse and entropy-decode a file: (header, dequantized latent y_bar_0)."""
    header, offset = BitstreamHeader.from_bytes(data)
    if header.model_id != model.model_id:
        raise ModelMismatchError(
            f"bitstream was coded with model {header.model_id:016x}, loaded model is {model.model_id:016x}"
        )
    available = len(data) - offset
    if available < header.payload_length:
        raise BitstreamError(f"payload truncated: header says {header.payload_length} bytes, file has {available}")
    if available > header.payload_length:
        raise BitstreamError(f"{available - header.payload_length} unexpected bytes after the payload")
    if len(header.latent_shape) != 2 or header.latent_shape[1] != model.channels:
        raise BitstreamError(f"latent shape {header.latent_shape} does not match a {model.channels}-channel model")

    q_0 = model.check_rate(header.q_0)
    tables = tile_tables(model.frequency_tables(q_0), header.symbol_count)
    symbols = range_decode(Bitstream(data[offset:]), tables, header.symbol_count)
    return header, desymbolize(symbols.reshape(header.latent_shape), q_0)


def decode(
    data: Union[bytes, EncodedImage],
    model: ChannelEntropyModel,
    denoiser: Optional[Denoiser],
    sampler: SamplerConfig,
    block: int = BLOCK,
) -> np.ndarray:
    """
    Reconstruct an image from an RDMB file.

    The reverse process starts from the file's q_0 (the sampler's own q_0 is
    ignored); with steps = 0 no denoiser is needed.

    Args:
        data: file bytes or an EncodedImage
        model: entropy model the file was coded with
        denoiser: network for the reverse steps, or None when steps = 0
        sampler: reverse-process settings
        block: DCT block size

    Returns:
        Image of the header's size, clipped to [0, 1]
    """
    if isinstance(data, EncodedImage):
        data = data.data
    header, latent = read_latent(data, model)
    config = sampler.model_copy(update={"q_0": header.q_0})
    if config.steps > 0:
        if denoiser is None:
            raise InputError("reverse sampling needs a denoiser checkpoint")
        latent = reverse_sample(latent, config, denoiser, model)
    image = synthesis_transform(latent, (header.height, header.width), block)
    return np.clip(image, 0.0, 1.0)


def encode_file(path: Path, image: np.ndarray, q_0: float, model: ChannelEntropyModel) -> EncodedImage:
    encoded = encode(image, q_0, model)
    Path(path).write_bytes(encoded.data)
    return encoded
