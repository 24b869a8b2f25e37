"""
Error taxonomy for the doubly sparse compressed sensing toolkit.
"""


class DoublySparseError(Exception):
    """Base class for every error raised by the package."""


class InvalidSpecError(DoublySparseError, ValueError):
    """An infeasible matrix spec, code or tolerance."""


class DimensionMismatch(DoublySparseError, ValueError):
    """Vector or matrix shapes do not agree."""


class DecodingFailure(DoublySparseError):
    """A decoding stage rejected its input.

    Attributes:
        stage: name of the failing stage ('outer', 'inner', 'residual', ...)
        diagnostic: human readable reason
    """

    def __init__(self, stage: str, diagnostic: str):
        super().__init__(f"{stage}: {diagnostic}")
        self.stage = stage
        self.diagnostic = diagnostic


class InconsistentSyndromes(DecodingFailure):
    """No locator of admissible degree annihilates the syndromes."""


class RootSeparationFailure(DecodingFailure):
    """Locator roots could not be matched to candidate points."""


class EnumerationCapExceeded(DoublySparseError):
    """An exhaustive oracle would exceed the configured enumeration cap."""

    def __init__(self, required: int, cap: int):
        super().__init__(f"enumeration of {required:,} cases exceeds cap {cap:,}")
        self.required = required
        self.cap = cap
