"""Exception hierarchy shared by every lab module."""

from __future__ import annotations


class LabError(RuntimeError):
    """Base error carrying a short category code used for CLI exit statuses."""

    code = "lab"

    def __init__(self, message: str, code: str | None = None) -> None:
        super().__init__(message)
        if code is not None:
            self.code = code


class ConfigurationError(LabError):
    """Raised when settings, descriptors or experiment configs are invalid."""

    code = "config"


class MediaFormatError(LabError):
    """Raised when raw video does not match its declared geometry or sample range."""

    code = "media"


class BlockRangeError(LabError):
    """Raised when a block lies outside the padded block grid of a plane."""

    code = "media"


class UnsupportedBlockSizeError(LabError):
    """Raised for transform block sizes other than 4, 8, 16 and 32."""

    code = "transform"


class QuantisationError(LabError):
    """Raised when a quantiser leaves the supported dynamic range."""

    code = "quant"


class BitstreamError(LabError):
    """Raised when a bitstream cannot be parsed."""

    code = "bitstream"


class TruncatedStreamError(BitstreamError):
    """Raised when the decoder runs past the end of the available payload."""


class MalformedStreamError(BitstreamError):
    """Raised when decoded syntax elements are inconsistent."""


class CodecIntegrityError(LabError):
    """Raised when the decoder output differs from the encoder's in-loop reconstruction."""

    code = "integrity"


class ReportError(LabError):
    """Raised when a report cannot be emitted."""

    code = "report"


EXIT_CODES: dict[str, int] = {
    "config": 2,
    "media": 3,
    "transform": 3,
    "quant": 3,
    "bitstream": 4,
    "integrity": 5,
    "report": 6,
}


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the process exit status."""

    if isinstance(error, LabError):
        return EXIT_CODES.get(error.code, 1)
    return 1
