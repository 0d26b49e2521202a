"""Exception hierarchy for polarbench."""


class PolarBenchError(Exception):
    """Base class for all polarbench errors."""


class InvalidInputError(PolarBenchError, ValueError):
    """Raised when an operation receives malformed input.

    Examples: a block whose length is not a power of two, blocks of unequal
    length, an empty information set, an inconsistent erasure system.
    """


class ConfigError(PolarBenchError, ValueError):
    """Raised for unknown schemes, decoders or presets and for incompatible pairings."""


class OracleRefusedError(PolarBenchError):
    """Raised when exhaustive ML decoding is asked for too many information bits."""

    def __init__(self, k: int, limit: int) -> None:
        super().__init__(f"ML oracle refuses |I| = {k} (limit {limit})")
        self.k = k
        self.limit = limit
