"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A numerical routine received or produced unusable data (NaN, inf,
    failed factorization, collapsed separation)."""


class ResourceCapError(RuntimeError):
    """A requested allocation would exceed the configured memory cap."""


class ConfigError(ValueError):
    """A run configuration violates the schema."""
