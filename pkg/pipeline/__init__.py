"""
End-to-end codec: block transforms, RDMB files, encode/decode, evaluation
drivers and the rdm command line.
"""
from .codec import EncodedImage, decode, encode
from .config import CodecConfig
from .transforms import analysis_transform, synthesis_transform

__all__ = [
    "CodecConfig",
    "EncodedImage",
    "encode",
    "decode",
    "analysis_transform",
    "synthesis_transform",
]
