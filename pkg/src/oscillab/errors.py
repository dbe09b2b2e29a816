"""Exception types shared across the library."""


class OscillabError(Exception):
    """Base class for all library errors."""


class ParameterError(OscillabError, ValueError):
    """A parameter is outside its admissible range; the message names it."""


class TruncationError(OscillabError):
    """A truncation tolerance cannot be met by the requested window."""


class ResolutionError(OscillabError):
    """A sampled path is too coarse or too short for the requested scale."""


class CoverageError(OscillabError):
    """A path does not cover the interval an operation needs."""


class ConditioningError(OscillabError):
    """A linear system is too ill-conditioned to trust."""

    def __init__(self, message, condition_number=None):
        super().__init__(message)
        self.condition_number = condition_number


class ConstructionError(OscillabError):
    """A transform construction is degenerate for the supplied inputs."""


class InputDomainError(OscillabError, ValueError):
    """A user-supplied function returned a non-finite value."""
