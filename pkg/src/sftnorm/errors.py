"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Malformed spec, word, matrix, or parameter supplied by the caller."""


class EnumerationCapError(RuntimeError):
    """An enumeration (blocks, words, run width) would exceed the configured cap."""


class ConvergenceError(RuntimeError):
    """Spectral iteration failed to reach the requested tolerance."""


class RunRejectedError(RuntimeError):
    """No complete viable run of the transducer consumes the input."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class AmbiguousRunError(RuntimeError):
    """Distinct complete viable runs emit different outputs."""


class ConstructionError(RuntimeError):
    """A compressor or recoder construction cannot proceed at desk scale."""
