"""Distributed attack-resilient action selection on a synchronous round
simulator.

Each robot owns a disjoint slice of the ground set and must commit to
exactly one of its actions. The run has two phases:

1. *Removal consensus*: every robot nominates its best standalone action;
   the network agrees on the K highest-value nominations via K-max
   consensus (union, then truncate to the top K each round). These K
   actions approximate what a worst-case attacker would take out.
2. *Complement selection*: the remaining robots reconstruct, by gossip, the
   sequence a centralized greedy would pick for them. Sequences carry, per
   entry, the marginal gain at insertion time and the insertion position;
   merging keeps the longest prefix consistent with both sides' recorded
   positions, and local computation lets a robot displace an entry whenever
   one of its own actions beats it at that prefix.

All value comparisons go through one network-wide total order
(gain descending, then owner id, then action id), so floating-point ties
can never make two robots decide differently.

The round simulator is single-threaded and synchronous: all messages of a
round are snapshotted from end-of-previous-round states before anyone
updates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from .commgraph import CommGraph, diameter
from .objective import SetFunction

SELECTOR = "selector"
CONVEYOR = "conveyor"


class ProtocolError(RuntimeError):
    """Internal consistency violation; indicates a bug, never expected input."""


class ScoredAction(NamedTuple):
    """A nominated action with its standalone objective value."""

    action: int
    owner: int
    value: float


class RankedEntry(NamedTuple):
    """One slot of a greedy sequence: the recorded marginal gain is only
    valid at the recorded position with the recorded prefix."""

    action: int
    owner: int
    gain: float
    order: int


def value_key(value: float, owner: int, action: int) -> tuple:
    """Total-order sort key: higher value first, then lower owner, then
    lower action id. Smaller key wins everywhere."""
    return (-value, owner, action)


def entry_key(e: RankedEntry) -> tuple:
    return (-e.gain, e.owner, e.action)


@dataclass
class RobotState:
    """Per-robot protocol state plus instrumentation counters."""

    robot_id: int
    actions: tuple[int, ...]
    n_robots: int
    k: int
    d: int  # stopping thresholds use 2*d rounds
    own_best: ScoredAction | None = None
    removal_set: tuple[ScoredAction, ...] = ()
    alpha1: int = 0
    role: str | None = None
    n_slots: int = 0
    sequence: tuple[RankedEntry, ...] = ()
    alpha2: int = 0
    oracle_calls: int = 0
    _last_local_in: tuple[RankedEntry, ...] | None = None
    _last_local_out: tuple[RankedEntry, ...] | None = None


def _evaluate(f: SetFunction, state: RobotState, ids) -> float:
    state.oracle_calls += 1
    return f.evaluate(ids)


# ---------------------------------------------------------------------------
# Phase 1: removal consensus
# ---------------------------------------------------------------------------


def best_own_action(f: SetFunction, state: RobotState) -> ScoredAction:
    """Argmax of standalone value over the robot's own actions
    (ties to the lower action id)."""
    if not state.actions:
        raise ValueError(f"robot {state.robot_id} has no actions")
    best = None
    for v in state.actions:
        val = _evaluate(f, state, (v,))
        if best is None or (-val, v) < (-best.value, best.action):
            best = ScoredAction(v, state.robot_id, val)
    return best


def merge_removal_sets(
    own: tuple[ScoredAction, ...], received: Sequence[tuple[ScoredAction, ...]], k: int
) -> tuple[ScoredAction, ...]:
    """Union own and received nominations (dedup by action id), keep the
    top min(k, |union|) by the total-order key."""
    by_id: dict[int, ScoredAction] = {}
    for group in (own, *received):
        for sa in group:
            by_id.setdefault(sa.action, sa)
    ranked = sorted(by_id.values(), key=lambda s: value_key(s.value, s.owner, s.action))
    return tuple(ranked[: min(k, len(ranked))])


def removal_round(states: Sequence[RobotState], graph: CommGraph, k: int) -> None:
    """One synchronous exchange: everyone broadcasts its current removal
    set, merges what it received, and bumps its round counter."""
    msgs = {st.robot_id: st.removal_set for st in states}
    for st in states:
        received = [msgs[j] for j in graph.neighbors(st.robot_id)]
        st.removal_set = merge_removal_sets(st.removal_set, received, k)
        st.alpha1 += 1


def removal_sets_agree(states: Sequence[RobotState]) -> bool:
    first = states[0].removal_set
    return all(st.removal_set == first for st in states)


def derive_roles(states: Sequence[RobotState]) -> None:
    """Owners of the agreed removal set become conveyors (they only relay
    in the next phase); everyone else is a selector."""
    for st in states:
        owners = {sa.owner for sa in st.removal_set}
        st.role = CONVEYOR if st.robot_id in owners else SELECTOR
        st.n_slots = st.n_robots - len(st.removal_set)


# ---------------------------------------------------------------------------
# Phase 2: complement selection
# ---------------------------------------------------------------------------


def init_complements(f: SetFunction, state: RobotState) -> None:
    """Selectors seed their sequence with their best standalone action
    (already scored during removal consensus); conveyors start empty."""
    if state.role == SELECTOR:
        b = state.own_best
        state.sequence = (RankedEntry(b.action, b.owner, b.value, 1),)
    else:
        state.sequence = ()


def merge_sequences(
    mine: tuple[RankedEntry, ...], theirs: tuple[RankedEntry, ...]
) -> tuple[RankedEntry, ...]:
    """Merge two greedy-sequence claims into their longest consistent run.

    Walk both sequences position by position. While both sides agree
    (identical action, gain, position) the shared entry is kept: those are
    the redundant duplicates. At the first disagreement the entry with the
    stronger total-order key wins the slot and the losing side is
    invalidated from there on, because its later gains were conditioned on
    a prefix the merged sequence no longer has (its entries' positions
    would all shift). Once one side is exhausted or invalidated, the other
    side's remaining run is kept unchanged.

    Accepting an entry at position p therefore guarantees its source's
    first p-1 entries are exactly the accepted prefix, so the recorded
    gain is still valid at its recorded position. The result is idempotent
    and symmetric in its arguments.
    """
    if not theirs:
        return mine
    if not mine:
        return theirs
    shared = 0
    for a, b in zip(mine, theirs):
        if a != b:
            break
        shared += 1
    if shared == len(mine):
        return theirs
    if shared == len(theirs):
        return mine
    a, b = mine[shared], theirs[shared]
    # distinct entries at one position cannot tie: equal keys mean equal
    # (gain, owner, action), and the slot fixes the position
    winner = mine if entry_key(a) < entry_key(b) else theirs
    return winner


def _best_candidate(
    f: SetFunction, state: RobotState, prefix: list[int], prefix_value: float
) -> tuple[int, float]:
    """Robot's best own action on top of ``prefix`` (ties to lower id).

    Gains are clamped at 0: a monotone objective cannot lose value, and
    letting subtraction round to a tiny negative would make equal-gain
    tie-breaks order-dependent across robots.
    """
    best_v = -1
    best_gain = 0.0
    for v in state.actions:
        gain = max(0.0, _evaluate(f, state, prefix + [v]) - prefix_value)
        if best_v < 0 or (-gain, v) < (-best_gain, best_v):
            best_v, best_gain = v, gain
    return best_v, best_gain


def local_complement_update(
    f: SetFunction, state: RobotState, seq: tuple[RankedEntry, ...]
) -> tuple[RankedEntry, ...]:
    """Re-optimize the robot's own contribution against a merged sequence.

    If one of the robot's actions already sits in the sequence nothing can
    change: the prefix ahead of it was verified when that entry was created
    and merging preserves recorded prefixes. Otherwise scan the sequence,
    and at the first slot where the robot's best candidate strictly beats
    the incumbent under the total-order key, replace it and drop the tail
    (later gains assumed the incumbent). If no slot is beaten and room
    remains, append at the end.
    """
    me = state.robot_id
    if any(e.owner == me for e in seq):
        return seq
    prefix: list[int] = []
    prefix_value = _evaluate(f, state, prefix)
    for n, entry in enumerate(seq):
        v, gain = _best_candidate(f, state, prefix, prefix_value)
        if value_key(gain, me, v) < entry_key(entry):
            return seq[:n] + (RankedEntry(v, me, gain, n + 1),)
        prefix.append(entry.action)
        prefix_value = _evaluate(f, state, prefix)
    if len(seq) < state.n_slots:
        v, gain = _best_candidate(f, state, prefix, prefix_value)
        return seq + (RankedEntry(v, me, gain, len(seq) + 1),)
    raise ProtocolError(f"selector {me} missing from a full sequence")


def complement_round(states: Sequence[RobotState], graph: CommGraph, f: SetFunction) -> None:
    """One synchronous exchange of sequences.

    Every robot folds in each neighbor's sequence (ascending robot id; the
    merge is order-insensitive but a fixed order keeps runs replayable),
    selectors then re-optimize locally. The quiet counter grows only on
    rounds that leave the sequence untouched and resets on any change.

    A robot is ready to stop once it has been quiet for 2*d rounds, but it
    keeps merging and relaying until the whole network is quiet: a robot
    that freezes early can strand itself with a stale sequence and, worse,
    a frozen relay partitions the information flow for everyone behind it.
    Because the merge is symmetric, a round in which every robot stays
    quiet forces pairwise equality across every edge, so termination
    implies agreement.
    """
    msgs = {st.robot_id: st.sequence for st in states}
    for st in states:
        start = st.sequence
        seq = start
        for j in graph.neighbors(st.robot_id):
            seq = merge_sequences(seq, msgs[j])
        if st.role == SELECTOR:
            if seq == st._last_local_in:
                seq = st._last_local_out
            else:
                out = local_complement_update(f, st, seq)
                st._last_local_in = seq
                st._last_local_out = out
                seq = out
        st.alpha2 = st.alpha2 + 1 if seq == start else 0
        st.sequence = seq


def all_quiet(states: Sequence[RobotState]) -> bool:
    return all(st.alpha2 >= 2 * st.d for st in states)


# ---------------------------------------------------------------------------
# Full run
# ---------------------------------------------------------------------------


@dataclass
class DistributedRun:
    """Outcome of one full protocol execution (all robots agreed)."""

    solution: frozenset[int]
    removals: tuple[ScoredAction, ...]
    complements: tuple[RankedEntry, ...]
    conveyor_ids: frozenset[int]
    phase1_rounds: int
    phase1_agreement_round: int
    phase2_rounds: int
    oracle_calls: tuple[int, ...]

    @property
    def total_rounds(self) -> int:
        return self.phase1_rounds + self.phase2_rounds


TraceFn = Callable[[dict], None]


def _emit_trace(trace, states, f, round_no, phase):
    for st in states:
        ids = sorted(
            {sa.action for sa in st.removal_set} | {e.action for e in st.sequence}
        )
        trace.append(
            {
                "round": round_no,
                "phase": phase,
                "robot": st.robot_id,
                "role": st.role,
                "alpha": st.alpha1 if phase == 1 else st.alpha2,
                "s1": [sa.action for sa in st.removal_set],
                "s2": [[e.action, e.gain, e.order] for e in st.sequence],
                "utility": f.evaluate(ids),
            }
        )


def run_distributed(
    f: SetFunction,
    action_sets: Sequence[Sequence[int]],
    graph: CommGraph,
    k: int,
    trace: list | None = None,
) -> DistributedRun:
    """Execute both phases to termination and return the agreed selection.

    The returned solution contains exactly one action per robot. Raises
    ProtocolError if the robots fail to agree, which indicates a bug (the
    protocol provably converges on connected graphs).
    """
    n = len(action_sets)
    if graph.n != n:
        raise ValueError("graph size does not match the number of robots")
    if not (0 <= k <= n):
        raise ValueError("k must be in [0, n]")
    seen: set[int] = set()
    for acts in action_sets:
        if not acts:
            raise ValueError("every robot needs at least one action")
        if seen & set(acts):
            raise ValueError("action sets must be disjoint")
        seen |= set(acts)

    d = max(1, diameter(graph))
    states = [
        RobotState(i, tuple(sorted(action_sets[i])), n, k, d) for i in range(n)
    ]

    for st in states:
        st.own_best = best_own_action(f, st)
        st.removal_set = (st.own_best,)
    agreement_round = 0 if removal_sets_agree(states) else -1
    phase1_rounds = 2 * d
    for r in range(1, phase1_rounds + 1):
        removal_round(states, graph, k)
        if agreement_round < 0 and removal_sets_agree(states):
            agreement_round = r
        if trace is not None:
            _emit_trace(trace, states, f, r, 1)
    if not removal_sets_agree(states):
        raise ProtocolError("no agreement on the removal set at phase end")

    derive_roles(states)
    for st in states:
        init_complements(f, st)

    # Generous cap so a convergence-bound violation surfaces as a measured
    # round count in tests rather than as an exception mid-run.
    n_selectors = sum(1 for st in states if st.role == SELECTOR)
    cap = 4 * (n_selectors + 2) * d + 8
    phase2_rounds = 0
    for r in range(1, cap + 1):
        complement_round(states, graph, f)
        phase2_rounds = r
        if trace is not None:
            _emit_trace(trace, states, f, phase1_rounds + r, 2)
        if all_quiet(states):
            break
    else:
        raise ProtocolError(f"complement phase did not stop within {cap} rounds")

    first = states[0]
    for st in states[1:]:
        if st.removal_set != first.removal_set or st.sequence != first.sequence:
            raise ProtocolError("robots terminated without full agreement")

    solution = frozenset(sa.action for sa in first.removal_set) | frozenset(
        e.action for e in first.sequence
    )
    for acts in action_sets:
        if len(solution & set(acts)) != 1:
            raise ProtocolError("solution violates the one-action-per-robot constraint")
    return DistributedRun(
        solution=solution,
        removals=first.removal_set,
        complements=first.sequence,
        conveyor_ids=frozenset(st.robot_id for st in states if st.role == CONVEYOR),
        phase1_rounds=phase1_rounds,
        phase1_agreement_round=agreement_round,
        phase2_rounds=phase2_rounds,
        oracle_calls=tuple(st.oracle_calls for st in states),
    )


def validate_sequence(seq: tuple[RankedEntry, ...]) -> None:
    """Assert the ranked-sequence invariants (test/debug helper):
    non-increasing keys, consecutive positions from 1, distinct owners."""
    owners = [e.owner for e in seq]
    if len(set(owners)) != len(owners):
        raise AssertionError(f"duplicate owners in sequence: {seq}")
    for i, e in enumerate(seq):
        if e.order != i + 1:
            raise AssertionError(f"non-consecutive order at slot {i}: {seq}")
        if i and entry_key(seq[i - 1]) > entry_key(e):
            raise AssertionError(f"key order violated at slot {i}: {seq}")
