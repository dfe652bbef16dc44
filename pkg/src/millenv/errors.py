"""Exception types shared across the package.

The CLI maps these onto exit codes, so library code should raise the most
specific class that applies rather than bare ValueError.
"""


class AnalysisError(Exception):
    """Base class for every domain error raised by this package."""


class RangeError(AnalysisError, ValueError):
    """A numeric argument is outside its valid interval."""


class SizeError(AnalysisError, ValueError):
    """An input has an unusable length or shape."""


class InputError(AnalysisError, ValueError):
    """Input data is malformed or inconsistent."""


class ParseError(InputError):
    """A data file could not be parsed; message names the offending line."""


class ConfigError(AnalysisError, ValueError):
    """A configuration file or object is invalid."""


class PulseDetectionError(AnalysisError):
    """Tachometer pulse detection found too few pulses."""


class PulseQualityError(PulseDetectionError):
    """Tachometer pulse spacing is inconsistent (missed/double triggers)."""


class CoverageError(AnalysisError):
    """The signal does not span enough complete revolutions."""
