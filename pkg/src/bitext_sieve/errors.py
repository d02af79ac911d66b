"""Error taxonomy shared by the library and the command line front end.

Exit codes: 1 usage/config, 2 data, 3 protocol.
"""


class SieveError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(SieveError):
    """Bad flags, bad parameter values, unusable configuration."""

    exit_code = 1


class DataError(SieveError):
    """Malformed or missing input data."""

    exit_code = 2


class ProtocolError(SieveError):
    """External scorer misbehaved (handshake, framing, ids, ranges)."""

    exit_code = 3


class TransportError(ProtocolError):
    """Retryable transport failure while talking to an external scorer."""
