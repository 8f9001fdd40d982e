"""Analysis engine for oracle problems with advance-knowledge query sharing.

The package answers, for small oracle problems, how many oracle queries a
classical agent needs when part of the problem setting is known in advance,
and simulates the corresponding block-diagonal quantum circuits.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    DimensionMismatch,
    EmptySubset,
    FormatError,
    InvalidPair,
    NoValidSharing,
    RetroqueryError,
    SizeError,
    UnknownCircuit,
    UnknownSetting,
    ValidationError,
    ZeroProbabilityOutcome,
)

__all__ = [
    "__version__",
    "RetroqueryError",
    "SizeError",
    "FormatError",
    "ValidationError",
    "UnknownSetting",
    "InvalidPair",
    "EmptySubset",
    "DimensionMismatch",
    "ZeroProbabilityOutcome",
    "UnknownCircuit",
    "NoValidSharing",
]
