"""Exception hierarchy shared by all brmob modules."""


class BrmobError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(BrmobError):
    """A matrix required to be symmetric positive definite is not."""


class DimensionMismatch(BrmobError):
    """Operands have incompatible shapes."""


class OutOfRange(BrmobError):
    """A scalar argument lies outside its admissible interval."""


class EmptySample(BrmobError):
    """An empirical risk functional received no samples."""


class EmptyDataset(BrmobError):
    """An operation requiring logged records received an empty dataset."""


class InsufficientSamples(BrmobError):
    """Too few samples to resolve the requested quantile."""


class SpecInvalid(BrmobError):
    """A domain or experiment specification violates its invariants."""


class ConfigError(BrmobError):
    """A configuration file or CLI argument could not be interpreted."""
