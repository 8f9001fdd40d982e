"""Advance-knowledge rule: which partition pairs may share outcomes.

Two partial observables can hand their outcomes to an agent ahead of the
full computation only if, at the setting in play, the shared outcomes
single out the setting together without either one revealing it alone.
The checks below encode that as four named conditions; a verdict is either
"valid" or the first violated condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidPair, ValidationError
from .observables import (
    Partition,
    class_of,
    conditional_outcome_entropy,
    enumerate_partitions,
    size_profile,
    solution_entropy,
)
from .problems import OracleProblem

# conditional entropies this small count as zero (exact zeros are produced
# by construction; genuine positives at <= 10 settings are far larger)
_ENTROPY_EPS = 1e-12

VERDICT_VALID = "valid"
CONDITIONS = ("C-I", "C-eq", "C-nr", "C-no")


@dataclass(frozen=True)
class FeedbackConfig:
    """Knobs for the sharing rule.

    apply_condition_no: "on", "off", or "auto" (on exactly for structured
    problems, where some settings are excluded a priori).
    require_all_settings: extend C-I and C-no from the evaluated setting
    to every setting (strict exploration mode).
    r_target/r_tolerance: when set, find_pairs keeps only pairs whose
    instances have |r_value - r_target| <= r_tolerance.
    """

    apply_condition_no: str = "auto"
    require_all_settings: bool = False
    r_target: float | None = None
    r_tolerance: float = 0.0

    def __post_init__(self):
        if self.apply_condition_no not in ("auto", "on", "off"):
            raise ValidationError("apply_condition_no must be auto, on, or off")
        if self.r_target is not None and not (0.0 < self.r_target < 1.0):
            raise ValidationError("r_target must lie strictly between 0 and 1")
        if self.r_tolerance < 0:
            raise ValidationError("r_tolerance must be non-negative")

    def condition_no_active(self, problem: OracleProblem) -> bool:
        if self.apply_condition_no == "on":
            return True
        if self.apply_condition_no == "off":
            return False
        return problem.structured


DEFAULT_CONFIG = FeedbackConfig()


@dataclass
class FeedbackPair:
    """A valid sharing pair with its verdict at every setting."""

    p_i: Partition
    p_j: Partition
    verdicts: dict[str, str]


@dataclass(frozen=True)
class KnowledgeInstance:
    """What one shared outcome tells the agent at setting b.

    subset: the settings still compatible with the shared outcome.
    r_value: fraction of the setting information known in advance,
    1 - log2(|subset|) / log2(#settings).
    delta_e_solution: drop in solution-label entropy.
    delta_h_setting: drop in setting entropy, in bits.
    """

    b: str
    subset: tuple[str, ...]
    r_value: float
    delta_e_solution: float
    delta_h_setting: float


def _check_partition(problem: OracleProblem, p: Partition) -> None:
    members = sorted(b for cls in p.classes for b in cls)
    if members != sorted(problem.setting_labels):
        raise ValidationError("partition does not cover this problem's settings")


def check_conditions(
    problem: OracleProblem,
    p_i: Partition,
    p_j: Partition,
    b: str,
    config: FeedbackConfig | None = None,
) -> str:
    """Verdict for sharing the outcomes of p_i and p_j at setting b."""
    config = config or DEFAULT_CONFIG
    problem.setting(b)
    _check_partition(problem, p_i)
    _check_partition(problem, p_j)

    # C-nr, pair level: each outcome must leave the other uncertain
    if (
        conditional_outcome_entropy(p_i, p_j) <= _ENTROPY_EPS
        or conditional_outcome_entropy(p_j, p_i) <= _ENTROPY_EPS
    ):
        return "C-nr"

    targets = problem.setting_labels if config.require_all_settings else (b,)

    # C-I: together the two outcomes identify the setting exactly
    for t in targets:
        if set(class_of(p_i, t)) & set(class_of(p_j, t)) != {t}:
            return "C-I"

    # C-eq: the two observables carry setting information at the same rate,
    # checked across the whole setting set
    if size_profile(p_i) != size_profile(p_j):
        return "C-eq"

    # C-nr at b: neither outcome may subsume the other here
    ci = set(class_of(p_i, b))
    cj = set(class_of(p_j, b))
    if ci <= cj or cj <= ci:
        return "C-nr"

    # C-no: on structured problems each outcome must leave the coarse
    # answer open, otherwise it reveals more than setting bits
    if config.condition_no_active(problem):
        for t in targets:
            for p in (p_i, p_j):
                feats = {problem.setting(m).feature for m in class_of(p, t)}
                if len(feats) < 2:
                    return "C-no"

    return VERDICT_VALID


def _pair_r_value(problem: OracleProblem, p: Partition, b: str) -> float:
    cls = class_of(p, b)
    return 1.0 - math.log2(len(cls)) / math.log2(len(problem.settings))


def find_pairs(
    problem: OracleProblem,
    b: str,
    config: FeedbackConfig | None = None,
    strategy: str = "general",
) -> list[FeedbackPair]:
    """All valid unordered partition pairs at setting b, canonically ordered."""
    config = config or DEFAULT_CONFIG
    problem.setting(b)
    parts = enumerate_partitions(problem, strategy)

    # pairs with different size profiles can never pass C-eq (or they fail
    # C-nr first); grouping avoids the quadratic scan over everything
    groups: dict[tuple[int, ...], list[Partition]] = {}
    for p in parts:
        groups.setdefault(size_profile(p), []).append(p)

    pairs: list[FeedbackPair] = []
    for group in groups.values():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                p_i, p_j = group[i], group[j]
                if check_conditions(problem, p_i, p_j, b, config) != VERDICT_VALID:
                    continue
                if config.r_target is not None:
                    r = _pair_r_value(problem, p_i, b)
                    if abs(r - config.r_target) > config.r_tolerance + 1e-15:
                        continue
                verdicts = {
                    t: check_conditions(problem, p_i, p_j, t, config)
                    for t in problem.setting_labels
                }
                pairs.append(FeedbackPair(p_i=p_i, p_j=p_j, verdicts=verdicts))

    pairs.sort(key=lambda pr: (pr.p_i.classes, pr.p_j.classes))
    return pairs


def failure_histogram(
    problem: OracleProblem,
    b: str,
    config: FeedbackConfig | None = None,
    strategy: str = "general",
) -> dict[str, int]:
    """Count, per condition, how many candidate pairs it rejected at b."""
    config = config or DEFAULT_CONFIG
    parts = enumerate_partitions(problem, strategy)
    counts: dict[str, int] = {}
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            verdict = check_conditions(problem, parts[i], parts[j], b, config)
            if verdict != VERDICT_VALID:
                counts[verdict] = counts.get(verdict, 0) + 1
    return counts


def _instance(problem: OracleProblem, p: Partition, b: str) -> KnowledgeInstance:
    subset = class_of(p, b)
    c = len(problem.settings)
    return KnowledgeInstance(
        b=b,
        subset=subset,
        r_value=1.0 - math.log2(len(subset)) / math.log2(c),
        delta_e_solution=solution_entropy(problem, problem.setting_labels)
        - solution_entropy(problem, subset),
        delta_h_setting=math.log2(c) - math.log2(len(subset)),
    )


def instances_of(
    problem: OracleProblem,
    p_i: Partition,
    p_j: Partition,
    b: str,
    config: FeedbackConfig | None = None,
) -> tuple[KnowledgeInstance, KnowledgeInstance]:
    """The two knowledge instances of a valid pair at b."""
    verdict = check_conditions(problem, p_i, p_j, b, config)
    if verdict != VERDICT_VALID:
        raise InvalidPair(f"pair is not valid at {b}: violated {verdict}")
    return _instance(problem, p_i, b), _instance(problem, p_j, b)


def all_instances(
    problem: OracleProblem,
    b: str,
    config: FeedbackConfig | None = None,
    strategy: str = "general",
) -> list[KnowledgeInstance]:
    """Deduplicated knowledge instances over all valid pairs at b."""
    seen: dict[tuple[str, ...], KnowledgeInstance] = {}
    for pair in find_pairs(problem, b, config, strategy):
        for inst in instances_of(problem, pair.p_i, pair.p_j, b, config):
            seen.setdefault(inst.subset, inst)
    return [seen[k] for k in sorted(seen)]
