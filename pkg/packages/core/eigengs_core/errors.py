"""Exception hierarchy for eigengs_core."""


class EigenGSError(Exception):
    """Base class for all errors raised by eigengs_core."""


class CorpusEmptyError(EigenGSError):
    """Raised when a corpus yields fewer usable images than required."""


class ChannelMismatchError(EigenGSError):
    """Raised when an image has the wrong channel count or color space for an operation."""


class ShapeError(EigenGSError):
    """Raised when image, basis, model or coefficient dimensions disagree."""


class RankError(EigenGSError):
    """Raised when the requested number of components exceeds what the corpus supports."""


class NonFiniteError(EigenGSError):
    """Raised when an image or parameter array contains NaN or Inf."""


class ConfigurationError(EigenGSError, ValueError):
    """Raised when a training configuration cannot be applied to a basis."""


class ModelFormatError(EigenGSError):
    """Raised when an EGS1 model file is malformed (magic, version, length or CRC)."""
