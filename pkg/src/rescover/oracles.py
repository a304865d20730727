"""Centralized baselines and attack oracles: the two-phase resilient
scheme, plain partition greedy, random selection, brute-force optimum,
worst-case and greedy attacks, the clique-group baseline, and the
approximation-bound check.

Every oracle is pure given its inputs and uses the same total-order tie
key as the protocol, so baselines and the distributed run are exactly
comparable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Callable, Iterable, Sequence

from .commgraph import CommGraph, clique_partition
from .environment import as_rng
from .objective import SetFunction, curvature
from .protocol import RankedEntry, ScoredAction, value_key

EVALUATION_GUARD = 10**7


class InstanceTooLargeError(ValueError):
    """Brute-force enumeration would exceed the evaluation budget."""


@dataclass(frozen=True)
class AttackResult:
    removed: frozenset[int]
    surviving_value: float


@dataclass(frozen=True)
class CentralizedPlan:
    """Two-phase centralized solution with the same structure the protocol
    converges to: removal nominations plus the ordered greedy complement."""

    solution: frozenset[int]
    removals: tuple[ScoredAction, ...]
    complements: tuple[RankedEntry, ...]


def _best_standalone(f: SetFunction, robot: int, actions: Sequence[int]) -> ScoredAction:
    best = None
    for v in sorted(actions):
        val = f.evaluate((v,))
        if best is None or (-val, v) < (-best.value, best.action):
            best = ScoredAction(v, robot, val)
    return best


def _greedy_entries(
    f: SetFunction, robot_actions: dict[int, Sequence[int]]
) -> tuple[RankedEntry, ...]:
    """Partition-constrained greedy: per step, the best (robot, action)
    marginal gain among unassigned robots, ties by the total-order key.
    Gains are clamped at 0, matching the protocol's arithmetic exactly."""
    unassigned = set(robot_actions)
    prefix: list[int] = []
    prefix_value = f.evaluate(prefix)
    entries: list[RankedEntry] = []
    while unassigned:
        best = None
        for i in sorted(unassigned):
            for v in sorted(robot_actions[i]):
                gain = max(0.0, f.evaluate(prefix + [v]) - prefix_value)
                if best is None or value_key(gain, i, v) < value_key(*best):
                    best = (gain, i, v)
        gain, i, v = best
        entries.append(RankedEntry(v, i, gain, len(entries) + 1))
        unassigned.discard(i)
        prefix.append(v)
        prefix_value = f.evaluate(prefix)
    return tuple(entries)


def _resilient_plan(f: SetFunction, robot_actions: dict[int, Sequence[int]], k: int) -> CentralizedPlan:
    bests = [_best_standalone(f, i, acts) for i, acts in sorted(robot_actions.items())]
    ranked = sorted(bests, key=lambda s: value_key(s.value, s.owner, s.action))
    removals = tuple(ranked[: min(k, len(ranked))])
    bait_owners = {sa.owner for sa in removals}
    rest = {i: acts for i, acts in robot_actions.items() if i not in bait_owners}
    complements = _greedy_entries(f, rest)
    solution = frozenset(sa.action for sa in removals) | frozenset(e.action for e in complements)
    return CentralizedPlan(solution, removals, complements)


def centralized_resilient(f: SetFunction, action_sets: Sequence[Sequence[int]], k: int) -> CentralizedPlan:
    """Bait-then-greedy: nominate the top-k standalone actions (one per
    robot) as expected removals, then fill the remaining robots greedily
    from scratch."""
    if not (0 <= k <= len(action_sets)):
        raise ValueError("k must be in [0, n]")
    return _resilient_plan(f, {i: acts for i, acts in enumerate(action_sets)}, k)


def centralized_greedy(f: SetFunction, action_sets: Sequence[Sequence[int]]) -> frozenset[int]:
    entries = _greedy_entries(f, {i: acts for i, acts in enumerate(action_sets)})
    return frozenset(e.action for e in entries)


def centralized_random(action_sets: Sequence[Sequence[int]], rng) -> frozenset[int]:
    rng = as_rng(rng)
    chosen = []
    for acts in action_sets:
        acts = sorted(acts)
        chosen.append(acts[int(rng.integers(len(acts)))])
    return frozenset(chosen)


def worst_case_attack(
    f: SetFunction, solution: Iterable[int], k: int, max_evaluations: int = EVALUATION_GUARD
) -> AttackResult:
    """Exhaustive minimizing removal of exactly min(k, |S|) actions.

    Under monotonicity a maximal removal is always at least as damaging as
    any smaller one, so enumerating |F| = min(k, |S|) suffices. Ties break
    to the lexicographically first removal set.
    """
    ids = sorted(solution)
    m = min(k, len(ids))
    if comb(len(ids), m) > max_evaluations:
        raise InstanceTooLargeError(
            f"C({len(ids)}, {m}) removal sets exceed the {max_evaluations} evaluation guard"
        )
    best_f: tuple[int, ...] = ()
    best_val = None
    for removed in itertools.combinations(ids, m):
        rset = set(removed)
        val = f.evaluate(v for v in ids if v not in rset)
        if best_val is None or val < best_val:
            best_f, best_val = removed, val
    return AttackResult(frozenset(best_f), best_val)


def greedy_attack(f: SetFunction, solution: Iterable[int], k: int) -> AttackResult:
    """Iteratively remove the action whose loss hurts the most, k times
    (ties to the lower action id)."""
    remaining = sorted(solution)
    removed: list[int] = []
    for _ in range(min(k, len(remaining))):
        best = None
        for s in remaining:
            val = f.evaluate(v for v in remaining if v != s)
            if best is None or (val, s) < best:
                best = (val, s)
        removed.append(best[1])
        remaining.remove(best[1])
    return AttackResult(frozenset(removed), f.evaluate(remaining))


def brute_force_optimal(
    f: SetFunction,
    action_sets: Sequence[Sequence[int]],
    k: int,
    max_evaluations: int = EVALUATION_GUARD,
) -> tuple[frozenset[int], float]:
    """Maximin optimum: the action profile maximizing the worst-case
    surviving value over all size-min(k, n) removals. Profiles are scanned
    in lexicographic id order and ties keep the first, so the result is
    deterministic."""
    n = len(action_sets)
    m = min(k, n)
    n_profiles = 1
    for acts in action_sets:
        n_profiles *= len(acts)
    total = n_profiles * comb(n, m)
    if total > max_evaluations:
        raise InstanceTooLargeError(
            f"{n_profiles} profiles x C({n}, {m}) removals exceed the "
            f"{max_evaluations} evaluation guard"
        )
    best_profile = None
    best_val = None
    for profile in itertools.product(*[sorted(a) for a in action_sets]):
        worst = None
        for removed in itertools.combinations(profile, m):
            rset = set(removed)
            val = f.evaluate(v for v in profile if v not in rset)
            if worst is None or val < worst:
                worst = val
        if best_val is None or worst > best_val:
            best_profile, best_val = profile, worst
    return frozenset(best_profile), best_val


def semi_distributed_resilient(
    f: SetFunction,
    action_sets: Sequence[Sequence[int]],
    graph: CommGraph,
    k: int,
    group_budget: Callable[[int, int], int] | None = None,
) -> frozenset[int]:
    """Partition the robots into communication cliques and run the
    centralized resilient scheme inside each group independently.

    Each group defends against ``group_budget(k, |group|)`` attacks,
    min(k, |group|) by default (any single group could absorb every
    attack).
    """
    if group_budget is None:
        group_budget = min
    solution: set[int] = set()
    for group in clique_partition(graph):
        plan = _resilient_plan(
            f, {i: action_sets[i] for i in group}, group_budget(k, len(group))
        )
        solution |= plan.solution
    return frozenset(solution)


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool


def verify_bound(
    f: SetFunction,
    action_sets: Sequence[Sequence[int]],
    k: int,
    solution: Iterable[int],
    tol: float = 1e-9,
) -> BoundCheck:
    """Check the worst-case guarantee of a solution against the brute-force
    optimum: surviving value >= max((1-c)/(1+c), 1/(1+k), 1/(n-k)) times
    the optimal worst-case value, with c the objective's curvature. The
    1/(n-k) term is skipped at k = n (the optimal value is 0 there and the
    bound holds trivially)."""
    n = len(action_sets)
    lhs = worst_case_attack(f, solution, k).surviving_value
    _, opt_val = brute_force_optimal(f, action_sets, k)
    c = curvature(f)
    terms = [(1.0 - c) / (1.0 + c), 1.0 / (1.0 + k)]
    if n > k:
        terms.append(1.0 / (n - k))
    rhs = max(terms) * opt_val
    return BoundCheck(lhs, rhs, lhs >= rhs - tol)
