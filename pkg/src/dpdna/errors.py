"""Exception hierarchy."""


class DpDnaError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(DpDnaError, ValueError):
    """Inconsistent or invalid configuration."""


class DecodeError(DpDnaError, ValueError):
    """A nucleotide sequence cannot be decoded."""


class PrimerMismatch(DecodeError):
    pass


class UnknownScheme(DecodeError):
    pass


class ChecksumMismatch(DecodeError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class CapacityError(DpDnaError, ValueError):
    """An assembled strand would exceed the configured length cap."""


class IntegrityError(DpDnaError):
    """One or more strands failed to parse or verify during file decoding."""

    def __init__(self, message: str, indices: list[int]):
        super().__init__(message)
        self.indices = indices


class ManifestMismatch(DpDnaError):
    """Strands and manifest do not describe the same encoding."""
