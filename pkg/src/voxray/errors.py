"""Exception types shared across the package."""


class VoxrayError(Exception):
    """Base class for all voxray errors."""


class FormatError(VoxrayError):
    """Raised when input bytes or files do not match the declared format."""


class ConfigError(VoxrayError):
    """Raised when a configuration value is invalid or inconsistent."""
