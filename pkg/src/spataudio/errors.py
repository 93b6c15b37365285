"""Exception types shared across the engine.

Domain errors on scalar arguments (values outside their documented range)
raise plain ValueError; everything that touches files, documents or
configuration gets a named type so the CLI can map it to an exit code.
"""


class SpatAudioError(Exception):
    """Base class for all engine errors."""


class ParseError(SpatAudioError):
    """Malformed input document (scene file, manifest, WAV container)."""


class ValidationError(SpatAudioError):
    """Well-formed input that violates an invariant (duplicate ids, bad ranges)."""


class FormatError(SpatAudioError):
    """Unsupported audio codec, channel count or bit depth."""


class ConfigurationError(SpatAudioError):
    """Inconsistent engine configuration (rate mismatch, missing HRIR set)."""


class MeasurementError(SpatAudioError):
    """Loudness cannot be measured (too short or fully gated out)."""


class EvaluationError(SpatAudioError):
    """Metric evaluation cannot proceed (silent or unusable input)."""
