"""Exception types shared across the package."""


class GbrvqError(Exception):
    pass


class DimensionError(GbrvqError, ValueError):
    pass


class ConfigError(GbrvqError, ValueError):
    pass


class EmptyInputError(GbrvqError, ValueError):
    pass


class DataError(GbrvqError, ValueError):
    """Input data is unusable (non-finite values, too few frames, ...)."""


class InsufficientDataError(DataError):
    pass


class FormatError(GbrvqError):
    """A binary file could not be parsed."""


class TruncationError(FormatError):
    pass


class CorruptionError(FormatError):
    pass


class ChecksumError(CorruptionError):
    pass
