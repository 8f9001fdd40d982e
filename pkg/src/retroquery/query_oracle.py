"""Exact worst-case classical query counts for distinguishing settings.

minimax_depth finds the cheapest adaptive query tree that pins down the
solution label for every setting still considered possible, assuming an
adversarial setting choice. brute_force_depth answers the same question by
enumerating trees outright; the two must agree and are kept separate on
purpose.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .errors import EmptySubset, SizeError, UnknownSetting, ValidationError
from .problems import OracleProblem

MINIMAX_MAX_SUBSET = 64
BRUTE_MAX_SUBSET = 8
BRUTE_MAX_ARGS = 8


@dataclass(frozen=True)
class Leaf:
    label: str


@dataclass(frozen=True)
class Query:
    argument: str
    children: tuple[tuple[str, "DecisionTree"], ...]  # (oracle value, subtree), sorted


DecisionTree = Union[Leaf, Query]


@dataclass(frozen=True)
class QueryBound:
    subset: tuple[str, ...]
    depth: int
    tree: DecisionTree


def _clean_subset(problem: OracleProblem, subset: Sequence[str]) -> tuple[str, ...]:
    if not subset:
        raise EmptySubset("need at least one setting")
    for b in subset:
        problem.setting(b)
    return tuple(sorted(set(subset)))


def minimax_depth(problem: OracleProblem, subset: Sequence[str]) -> QueryBound:
    """Cheapest worst-case query tree separating the subset's solutions."""
    members = _clean_subset(problem, subset)
    if len(members) > MINIMAX_MAX_SUBSET:
        raise SizeError(f"minimax_depth caps at {MINIMAX_MAX_SUBSET} settings")

    args = problem.arguments
    tables = {b: problem.setting(b).table for b in members}
    solutions = {b: problem.setting(b).solution for b in members}
    memo: dict[frozenset, tuple[int, DecisionTree]] = {}

    def solve(cands: frozenset) -> tuple[int, DecisionTree]:
        cached = memo.get(cands)
        if cached is not None:
            return cached
        labels = {solutions[b] for b in cands}
        if len(labels) == 1:
            result = (0, Leaf(next(iter(labels))))
            memo[cands] = result
            return result
        best: tuple[int, DecisionTree] | None = None
        for a in args:
            groups: dict[str, list[str]] = {}
            for b in cands:
                groups.setdefault(tables[b][a], []).append(b)
            if len(groups) < 2:
                continue  # uninformative here, and querying it cannot help later
            children = []
            worst = 0
            for value in sorted(groups):
                depth, sub = solve(frozenset(groups[value]))
                worst = max(worst, depth)
                children.append((value, sub))
            cand = (1 + worst, Query(argument=a, children=tuple(children)))
            if best is None or cand[0] < best[0]:
                best = cand  # strict: ties keep the smallest argument
        if best is None:
            raise ValidationError(
                "settings with identical tables carry different solutions"
            )
        memo[cands] = best
        return best

    depth, tree = solve(frozenset(members))
    return QueryBound(subset=members, depth=depth, tree=tree)


def verify_tree(problem: OracleProblem, subset: Sequence[str], tree: DecisionTree) -> bool:
    """Run every setting through the tree: right leaf, no repeated argument."""
    members = _clean_subset(problem, subset)
    for b in members:
        setting = problem.setting(b)
        node = tree
        used: set[str] = set()
        while isinstance(node, Query):
            if node.argument in used or node.argument not in setting.table:
                return False
            used.add(node.argument)
            value = setting.table[node.argument]
            node = dict(node.children).get(value)
            if node is None:
                return False
        if not isinstance(node, Leaf) or node.label != setting.solution:
            return False
    return True


def brute_force_depth(problem: OracleProblem, subset: Sequence[str]) -> int:
    """Minimal tree depth by plain enumeration; independent of minimax_depth."""
    members = _clean_subset(problem, subset)
    if len(members) > BRUTE_MAX_SUBSET:
        raise SizeError(f"brute_force_depth caps at {BRUTE_MAX_SUBSET} settings")
    args = problem.arguments
    if len(args) > BRUTE_MAX_ARGS:
        raise SizeError(f"brute_force_depth caps at {BRUTE_MAX_ARGS} arguments")

    tables = {b: problem.setting(b).table for b in members}
    solutions = {b: problem.setting(b).solution for b in members}

    def exists(cands: tuple[str, ...], budget: int, used: tuple[str, ...]) -> bool:
        if len({solutions[b] for b in cands}) == 1:
            return True
        if budget == 0:
            return False
        for a in args:
            if a in used:
                continue
            groups: dict[str, list[str]] = {}
            for b in cands:
                groups.setdefault(tables[b][a], []).append(b)
            if len(groups) < 2:
                continue
            if all(
                exists(tuple(groups[v]), budget - 1, used + (a,)) for v in groups
            ):
                return True
        return False

    for depth in range(len(members)):
        if exists(members, depth, ()):
            return depth
    raise ValidationError("settings with identical tables carry different solutions")
