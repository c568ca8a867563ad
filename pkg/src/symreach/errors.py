"""Exception types shared across the package."""


class SymreachError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(SymreachError):
    """Operand dimensions or shapes are incompatible."""


class AbstractionError(SymreachError):
    """A sound enclosure cannot be built on the requested range."""


class ReductionError(SymreachError):
    """An order-reduction budget cannot honor its constraints."""


class ConfigError(SymreachError):
    """A problem configuration or network file is malformed."""
