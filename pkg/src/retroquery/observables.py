"""Partial observables: partitions of the setting set and their entropies.

A partition of the settings is what an agent can resolve without running
the oracle to the end; a class is one outcome of such a partial
observable. All probabilities are uniform over the settings involved.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import EmptySubset, SizeError, UnknownSetting, ValidationError
from .problems import OracleProblem

# partitions are enumerated over at most this many base items
# (settings for general, label positions for bitmask, arguments for half_table)
MAX_PARTITION_BASE = 10

OutcomeClass = tuple[str, ...]

STRATEGIES = ("general", "bitmask", "half_table")


@dataclass(frozen=True)
class Partition:
    """A partition of the setting labels into outcome classes.

    classes are canonical: members sorted inside each class, classes
    sorted by their smallest member.
    """

    kind: str
    label: str
    classes: tuple[OutcomeClass, ...]


def _canonical(classes: Iterable[Iterable[str]]) -> tuple[OutcomeClass, ...]:
    return tuple(sorted(tuple(sorted(cls)) for cls in classes))


def _auto_label(classes: tuple[OutcomeClass, ...]) -> str:
    return "|".join("{" + ",".join(cls) + "}" for cls in classes)


def partition_from_classes(
    problem: OracleProblem,
    classes: Iterable[Iterable[str]],
    kind: str = "general",
    label: str | None = None,
) -> Partition:
    canon = _canonical(classes)
    members = [b for cls in canon for b in cls]
    if len(members) != len(set(members)):
        raise ValidationError("partition classes overlap")
    if sorted(members) != sorted(problem.setting_labels):
        raise ValidationError("partition classes must cover exactly the settings")
    if any(not cls for cls in canon):
        raise ValidationError("partition classes must be non-empty")
    return Partition(kind=kind, label=label if label is not None else _auto_label(canon), classes=canon)


@lru_cache(maxsize=None)
def _index_map(partition: Partition) -> dict[str, int]:
    return {b: i for i, cls in enumerate(partition.classes) for b in cls}


def class_of(partition: Partition, b: str) -> OutcomeClass:
    idx = _index_map(partition).get(b)
    if idx is None:
        raise UnknownSetting(f"setting {b!r} is not in this partition")
    return partition.classes[idx]


def size_profile(partition: Partition) -> tuple[int, ...]:
    """Per-setting class size, in the partition's canonical member order."""
    index = _index_map(partition)
    return tuple(len(partition.classes[index[b]]) for b in sorted(index))


# === Enumeration strategies ===

def _set_partitions(items: Sequence[str]):
    """All set partitions, by restricted growth assignment."""
    n = len(items)
    codes = [0] * n

    def rec(i: int, top: int):
        if i == n:
            groups: dict[int, list[str]] = {}
            for item, code in zip(items, codes):
                groups.setdefault(code, []).append(item)
            yield list(groups.values())
            return
        for code in range(top + 1):
            codes[i] = code
            yield from rec(i + 1, max(top, code + 1))

    yield from rec(0, 0)


def _grouped(problem: OracleProblem, key) -> tuple[OutcomeClass, ...]:
    groups: dict[tuple, list[str]] = {}
    for s in problem.settings:
        groups.setdefault(key(s), []).append(s.b)
    return _canonical(groups.values())


def enumerate_partitions(problem: OracleProblem, strategy: str = "general") -> list[Partition]:
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")

    parts: list[Partition] = []
    if strategy == "general":
        labels = list(problem.setting_labels)
        if len(labels) > MAX_PARTITION_BASE:
            raise SizeError(
                f"general enumeration caps at {MAX_PARTITION_BASE} settings, got {len(labels)}"
            )
        seen: set[tuple[OutcomeClass, ...]] = set()
        for raw in _set_partitions(labels):
            canon = _canonical(raw)
            if canon not in seen:
                seen.add(canon)
                parts.append(Partition(kind="general", label=_auto_label(canon), classes=canon))

    elif strategy == "bitmask":
        width = len(problem.settings[0].b)
        if width > MAX_PARTITION_BASE:
            raise SizeError(
                f"bitmask enumeration caps at {MAX_PARTITION_BASE} label bits, got {width}"
            )
        seen = set()
        for size in range(1, width):
            for positions in itertools.combinations(range(width), size):
                canon = _grouped(problem, lambda s: tuple(s.b[i] for i in positions))
                if canon not in seen:
                    seen.add(canon)
                    label = "bits[" + ",".join(str(i) for i in positions) + "]"
                    parts.append(Partition(kind="bitmask", label=label, classes=canon))

    else:  # half_table
        if not problem.is_table_suffix():
            raise ValidationError(
                "half_table strategy needs settings that spell out their tables"
            )
        args = problem.arguments
        if len(args) > MAX_PARTITION_BASE:
            raise SizeError(
                f"half_table enumeration caps at {MAX_PARTITION_BASE} arguments, got {len(args)}"
            )
        seen = set()
        for size in range(1, len(args)):
            for chosen in itertools.combinations(args, size):
                canon = _grouped(problem, lambda s: tuple(s.table[a] for a in chosen))
                if canon not in seen:
                    seen.add(canon)
                    label = "args[" + ",".join(chosen) + "]"
                    parts.append(Partition(kind="half_table", label=label, classes=canon))

    parts.sort(key=lambda p: p.classes)
    return parts


# === Entropies (base 2, uniform over settings) ===

def _entropy_of_sizes(sizes: Iterable[int]) -> float:
    sizes = sorted(k for k in sizes if k)
    total = sum(sizes)
    if total == 0:
        return 0.0
    h = -sum((k / total) * math.log2(k / total) for k in sizes)
    return max(0.0, h)


def outcome_entropy(partition: Partition) -> float:
    """Shannon entropy of the partition outcome for a uniformly random setting."""
    return _entropy_of_sizes(len(cls) for cls in partition.classes)


def conditional_outcome_entropy(p: Partition, q: Partition) -> float:
    """H(p | q) = H(joint) - H(q); zero iff q's outcome determines p's."""
    p_index = _index_map(p)
    q_index = _index_map(q)
    if set(p_index) != set(q_index):
        raise ValidationError("partitions must cover the same setting set")
    joint: dict[tuple[int, int], int] = {}
    for b, i in p_index.items():
        key = (i, q_index[b])
        joint[key] = joint.get(key, 0) + 1
    h = _entropy_of_sizes(joint.values()) - outcome_entropy(q)
    return max(0.0, h)


def solution_entropy(problem: OracleProblem, subset: Sequence[str]) -> float:
    """Entropy of the solution label over a uniformly random setting in subset."""
    if not subset:
        raise EmptySubset("solution_entropy needs a non-empty subset")
    counts: dict[str, int] = {}
    for b in subset:
        sol = problem.setting(b).solution
        counts[sol] = counts.get(sol, 0) + 1
    return _entropy_of_sizes(counts.values())
