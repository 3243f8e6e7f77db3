"""Exception types mapped to CLI exit codes.

ConfigError  -> exit 2 (bad config file, unknown component, bad override)
RuntimeError -> exit 3 (training/inference failures; the builtin is reused)
DataError    -> exit 4 (missing or inconsistent dataset files)
"""


class ConfigError(ValueError):
    """Raised for config parse/resolve/build problems."""


class DataError(RuntimeError):
    """Raised for dataset layout, decoding, or alignment problems."""
