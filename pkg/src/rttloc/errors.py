"""Exception types raised across the package.

Everything derives from RttlocError so callers can catch package errors
with one clause; plain ValueError is still used for simple bad arguments
(negative distance, non-positive clock, ...).
"""


class RttlocError(Exception):
    """Base class for rttloc-specific errors."""


class InvalidTimestampsError(RttlocError, ValueError):
    """FTM timestamp quadruple violates t4 > t1 or t3 >= t2."""


class InsufficientDataError(RttlocError):
    """Too few samples to attempt a solve for one BSSID."""

    def __init__(self, bssid: str, sample_count: int, required: int):
        self.bssid = bssid
        self.sample_count = sample_count
        self.required = required
        super().__init__(
            f"bssid {bssid!r}: {sample_count} samples, need >= {required}"
        )


class SlopeUnidentifiableError(RttlocError):
    """All sample distances equal; the ranging slope cannot be fit."""

    def __init__(self, bssid: str, message: str = "all distances equal"):
        self.bssid = bssid
        super().__init__(f"bssid {bssid!r}: {message}")


class UnderdeterminedError(RttlocError):
    """Snapshot matches fewer distinct anchors than the multilateration minimum."""

    def __init__(self, matched: int, required: int):
        self.matched = matched
        self.required = required
        super().__init__(
            f"snapshot matches {matched} anchor(s), need >= {required}"
        )


class WorldGenerationError(RttlocError):
    """World constraints (e.g. anchor separation) could not be satisfied."""


class UnknownPresetError(RttlocError, ValueError):
    """Preset name not in the built-in floorplan catalogue."""

    def __init__(self, name: str, valid: tuple):
        self.name = name
        self.valid = tuple(valid)
        super().__init__(
            f"unknown preset {name!r}; valid presets: {', '.join(self.valid)}"
        )


class SampleParseError(RttlocError):
    """A trace line is not valid JSON or misses a required field."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class SchemaError(RttlocError):
    """A field is present under a different unit suffix than the format requires."""


class UnsupportedVersionError(RttlocError):
    """Serialized document carries an unknown format version."""


class DatabaseInvariantError(RttlocError):
    """A loaded anchor record violates its invariants (offset range, slope floor)."""


class MergeError(RttlocError):
    """Anchor databases for different buildings cannot be merged."""
