"""
Error types shared by every rdm package.

Library code raises these; only the CLI turns them into exit codes.
"""


class RdmError(Exception):
    """Base class for all codec toolkit errors."""


class InputError(RdmError, ValueError):
    """Bad argument: shape mismatch, non-finite value, out-of-domain scalar."""


class SymbolRangeError(InputError):
    """Symbol falls outside the alphabet of its frequency table."""

    def __init__(self, message: str, position: int = -1):
        super().__init__(message)
        self.position = position


class UnsupportedRateError(RdmError):
    """Quantization scale outside the entropy model's supported range."""


class EntropyModelError(RdmError):
    """Entropy model cannot produce a usable distribution."""


class BitstreamError(RdmError):
    """Malformed, corrupt or truncated bitstream."""

    def __init__(self, message: str, position: int = -1):
        if position >= 0:
            message = f"{message} (at symbol {position})"
        super().__init__(message)
        self.position = position


class ModelMismatchError(BitstreamError):
    """Bitstream was written against a different entropy model."""


class EmptySupportError(RdmError):
    """No prior mass inside the corruption window of a query point."""


class NumericUnderflowError(RdmError):
    """Quadrature mass vanished to zero."""


class CheckpointError(RdmError):
    """Unreadable or inconsistent checkpoint / model file."""
