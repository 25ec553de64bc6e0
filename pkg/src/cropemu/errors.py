"""Exception types shared across the pipeline."""


class ConfigurationError(ValueError):
    """A model/stage was assembled with inconsistent settings."""


class InputError(ValueError):
    """Caller-supplied data violates an operation's preconditions."""


class NumericError(FloatingPointError):
    """A computation produced non-finite values."""


class ParseError(ValueError):
    """A file does not match its declared schema."""
