"""Exceptions shared across the package, mapped to CLI exit codes."""


class ConfigError(ValueError):
    """Invalid configuration or CLI arguments (exit code 1)."""


class NumericalError(RuntimeError):
    """A solver produced results outside its validity checks (exit code 2)."""
