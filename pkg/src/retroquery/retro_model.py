"""Predicted query counts when part of the setting is known in advance.

The engine route: enumerate valid sharing pairs per setting, take the
minimax depth of each shared-knowledge subset, and aggregate. The closed
form route covers the search family at any advance-knowledge fraction r,
where knowing floor(r*n) of n setting bits leaves a search over
2^(n - floor(r*n)) arguments, i.e. 2^(n - floor(r*n)) - 1 queries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NoValidSharing, SizeError, ValidationError
from .feedback import FeedbackConfig, failure_histogram, find_pairs
from .observables import class_of
from .problems import OracleProblem
from .query_oracle import minimax_depth

MAX_CLOSED_FORM_N = 63
MAX_SCAN_N = 60

POLICIES = ("minimax", "maximax")

# auto strategy: exhaustive partitions while cheap, else table halves
AUTO_GENERAL_MAX_SETTINGS = 6


@dataclass(frozen=True)
class SettingPrediction:
    b: str
    pair_count: int
    instance_depths: tuple[tuple[tuple[str, ...], int], ...]  # (subset, depth)
    aggregate_depth: int


@dataclass(frozen=True)
class Prediction:
    problem: str
    r_target: float | None
    policy: str
    strategy: str
    per_setting: tuple[SettingPrediction, ...]
    predicted_queries: int


@dataclass(frozen=True)
class RInference:
    n: int
    queries: int
    r_value: float


@dataclass(frozen=True)
class GroverScanRow:
    n: int
    k_opt: int
    r_value: float
    half_r_queries: int  # 2^(n/2) - 1, the r = 1/2 closed form
    scaling_reference: float  # (pi/4) * 2^(n/2)


def auto_strategy(problem: OracleProblem) -> str:
    if len(problem.settings) <= AUTO_GENERAL_MAX_SETTINGS:
        return "general"
    if problem.is_table_suffix():
        return "half_table"
    return "bitmask"


def predict_queries(
    problem: OracleProblem,
    config: FeedbackConfig | None = None,
    strategy: str | None = None,
    policy: str = "minimax",
) -> Prediction:
    """Worst-case query count over settings, given one shared outcome pair.

    minimax: at each setting, the best valid pair decides (its worse
    instance counts). maximax: the worst instance of any valid pair.
    """
    if policy not in POLICIES:
        raise ValidationError(f"policy must be one of {POLICIES}")
    config = config or FeedbackConfig()
    strategy = strategy or auto_strategy(problem)

    depth_cache: dict[tuple[str, ...], int] = {}

    def depth(subset: tuple[str, ...]) -> int:
        if subset not in depth_cache:
            depth_cache[subset] = minimax_depth(problem, subset).depth
        return depth_cache[subset]

    records = []
    for b in problem.setting_labels:
        pairs = find_pairs(problem, b, config, strategy)
        if not pairs:
            raise NoValidSharing(b, failure_histogram(problem, b, config, strategy))
        per_pair: list[tuple[int, int]] = []
        seen: dict[tuple[str, ...], int] = {}
        for pair in pairs:
            d_i = depth(class_of(pair.p_i, b))
            d_j = depth(class_of(pair.p_j, b))
            per_pair.append((d_i, d_j))
            seen[class_of(pair.p_i, b)] = d_i
            seen[class_of(pair.p_j, b)] = d_j
        if policy == "minimax":
            aggregate = min(max(d_i, d_j) for d_i, d_j in per_pair)
        else:
            aggregate = max(seen.values())
        records.append(
            SettingPrediction(
                b=b,
                pair_count=len(pairs),
                instance_depths=tuple(sorted(seen.items())),
                aggregate_depth=aggregate,
            )
        )

    return Prediction(
        problem=problem.name,
        r_target=config.r_target,
        policy=policy,
        strategy=strategy,
        per_setting=tuple(records),
        predicted_queries=max(r.aggregate_depth for r in records),
    )


# === closed forms for the search family ===

def _check_n(n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise ValidationError("n must be a positive integer")
    if n > MAX_CLOSED_FORM_N:
        raise SizeError(f"closed forms support n <= {MAX_CLOSED_FORM_N}")


def grover_queries_for_r(n: int, r: float) -> int:
    """Classical queries left when a fraction r of the n setting bits is known."""
    _check_n(n)
    if not (0.0 <= r <= 1.0):
        raise ValidationError("r must lie in [0, 1]")
    # guard the float product: 0.3 * 10 lands just below 3
    known_bits = int(math.floor(r * n + 1e-9))
    return 2 ** (n - known_bits) - 1


def grover_optimal_k(n: int) -> int:
    """Iterations that maximize the success amplitude of amplitude-driven search."""
    _check_n(n)
    theta = math.asin(2 ** (-n / 2))
    return math.ceil(math.pi / (4 * theta) - 0.5)


def infer_r(n: int, queries: int) -> RInference:
    """Advance-knowledge fraction that explains a given query count."""
    _check_n(n)
    if not isinstance(queries, int) or queries < 0:
        raise ValidationError("queries must be a non-negative integer")
    if queries + 1 > 2 ** n:
        raise ValidationError(f"{queries} queries exceed the 2^{n} - 1 ever needed")
    return RInference(n=n, queries=queries, r_value=1.0 - math.log2(queries + 1) / n)


def grover_r_scan(n_min: int, n_max: int) -> list[GroverScanRow]:
    """infer_r over optimal iteration counts for even n in [n_min, n_max]."""
    if not (isinstance(n_min, int) and isinstance(n_max, int)) or n_min < 1 or n_min > n_max:
        raise ValidationError("need 1 <= n_min <= n_max")
    if n_max > MAX_SCAN_N:
        raise SizeError(f"scan supports n <= {MAX_SCAN_N}")
    rows = []
    for n in range(n_min, n_max + 1):
        if n % 2:
            continue
        k = grover_optimal_k(n)
        rows.append(
            GroverScanRow(
                n=n,
                k_opt=k,
                r_value=infer_r(n, k).r_value,
                half_r_queries=2 ** (n // 2) - 1,
                scaling_reference=math.pi / 4 * 2 ** (n / 2),
            )
        )
    if not rows:
        raise ValidationError(f"no even n in [{n_min}, {n_max}]")
    return rows
