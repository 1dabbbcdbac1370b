"""Error taxonomy shared by the library and the CLI.

Exit-code mapping used by the CLI: ValidationError -> 1, DeskScaleError -> 2,
GoldenMismatch -> 3.
"""


class ValidationError(ValueError):
    """Malformed or inconsistent input (bad ids, degree mismatch, ...)."""


class DeskScaleError(RuntimeError):
    """An enumeration or search exceeded the configured desk-scale cap."""


class SearchBoundError(DeskScaleError):
    """A bounded lattice search hit its bound before saturating."""

    def __init__(self, what, bound):
        super().__init__(f"{what}: search bound {bound} exceeded")
        self.bound = bound


class GoldenMismatch(RuntimeError):
    """Recomputed output differs from a committed golden file."""
