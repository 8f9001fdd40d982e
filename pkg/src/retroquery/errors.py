"""Exception types shared across the package."""

from __future__ import annotations


class RetroqueryError(Exception):
    """Base class for all package errors."""


class SizeError(RetroqueryError):
    """An input exceeds a documented size cap."""


class FormatError(RetroqueryError):
    """A file or string could not be parsed; carries location context."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        parts = [message]
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field {field!r}")
        super().__init__("; ".join(parts))
        self.line = line
        self.field = field


class ValidationError(RetroqueryError):
    """Structurally parseable data violates a named invariant."""


class UnknownSetting(RetroqueryError):
    """A setting string is not in the problem's setting set."""


class InvalidPair(RetroqueryError):
    """A partition pair does not satisfy the sharing conditions at the setting."""


class EmptySubset(RetroqueryError):
    """An operation received an empty setting subset."""


class DimensionMismatch(RetroqueryError):
    """Register sizes do not match the problem or gate requirements."""


class ZeroProbabilityOutcome(RetroqueryError):
    """A forced measurement outcome has zero probability."""


class UnknownCircuit(RetroqueryError):
    """No builtin circuit with the requested name."""


class NoValidSharing(RetroqueryError):
    """Some setting admits no valid partition pair.

    Carries the offending setting and a histogram of which condition
    rejected each candidate pair there.
    """

    def __init__(self, b: str, failure_counts: dict[str, int]):
        self.b = b
        self.failure_counts = dict(failure_counts)
        detail = ", ".join(f"{k}: {v}" for k, v in sorted(self.failure_counts.items()))
        super().__init__(f"no valid sharing pair at setting {b} ({detail or 'no candidate pairs'})")
