"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or unreadable input data (detection streams, truth files)."""


class ConfigError(ValueError):
    """Invalid configuration value or combination."""
