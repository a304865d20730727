import numpy as np
import pytest

from rescover.commgraph import CommGraph, diameter
from rescover.harness import random_instance
from rescover.objective import CallableSetFunction
from rescover.oracles import centralized_greedy, centralized_resilient
from rescover.protocol import (
    CONVEYOR,
    SELECTOR,
    RankedEntry,
    RobotState,
    ScoredAction,
    best_own_action,
    derive_roles,
    local_complement_update,
    merge_removal_sets,
    merge_sequences,
    run_distributed,
    validate_sequence,
)


def modular(values):
    ground = sorted(values)
    return CallableSetFunction(lambda s: float(sum(values[v] for v in s)), ground)


def path_graph(n):
    return CommGraph(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n):
    return CommGraph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def make_state(robot_id, actions, n_robots=4, k=0, d=1, role=SELECTOR, n_slots=None):
    st = RobotState(robot_id, tuple(actions), n_robots, k, d)
    st.role = role
    st.n_slots = n_slots if n_slots is not None else n_robots - k
    return st


# ---------------------------------------------------------------------------
# removal consensus
# ---------------------------------------------------------------------------


def test_best_own_action_breaks_value_ties_by_lower_id():
    f = modular({0: 5.0, 1: 9.0, 2: 9.0, 3: 2.0})
    st = make_state(0, (0, 1, 2, 3))
    assert best_own_action(f, st) == ScoredAction(1, 0, 9.0)


def test_best_own_action_singleton():
    f = modular({7: 3.5})
    st = make_state(2, (7,))
    assert best_own_action(f, st) == ScoredAction(7, 2, 3.5)


def test_best_own_action_matches_direct_argmax():
    rng = np.random.default_rng(0)
    inst = random_instance(3, rng)
    for i, acts in enumerate(inst.action_sets):
        st = make_state(i, acts)
        got = best_own_action(inst.f, st)
        values = {v: inst.f.evaluate((v,)) for v in acts}
        best_val = max(values.values())
        assert got.value == best_val
        assert got.action == min(v for v, val in values.items() if val == best_val)


def test_merge_removal_sets_union_below_k():
    own = (ScoredAction(0, 0, 9.0),)
    recv = [(ScoredAction(5, 1, 7.0),)]
    merged = merge_removal_sets(own, recv, k=2)
    assert [s.action for s in merged] == [0, 5]


def test_merge_removal_sets_truncates_to_top_k():
    own = (ScoredAction(0, 0, 9.0), ScoredAction(1, 0, 7.0))
    recv = [(ScoredAction(5, 1, 8.0),)]
    merged = merge_removal_sets(own, recv, k=2)
    assert [s.action for s in merged] == [0, 5]


def test_merge_removal_sets_k_zero_empties():
    own = (ScoredAction(0, 0, 9.0),)
    assert merge_removal_sets(own, [], k=0) == ()


def test_phase1_agreement_on_path_graph_takes_diameter_rounds():
    # strictly increasing values along a 4-path: the top value needs
    # exactly diameter hops to reach robot 0
    f = modular({0: 1.0, 1: 2.0, 2: 3.0, 3: 4.0})
    run = run_distributed(f, [(0,), (1,), (2,), (3,)], path_graph(4), k=1)
    assert run.phase1_agreement_round == 3
    assert run.phase1_rounds == 6
    assert [s.action for s in run.removals] == [3]


def test_phase1_k_at_least_n_keeps_every_best():
    f = modular({0: 1.0, 1: 2.0, 2: 3.0, 3: 4.0})
    run = run_distributed(f, [(0,), (1,), (2,), (3,)], path_graph(4), k=4)
    assert {s.action for s in run.removals} == {0, 1, 2, 3}
    assert run.complements == ()


def test_phase1_matches_global_top_k_of_per_robot_bests():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        inst = random_instance(n, rng)
        k = int(rng.integers(0, n + 1))
        run = run_distributed(inst.f, inst.action_sets, inst.graph, k)
        bests = []
        for i, acts in enumerate(inst.action_sets):
            vals = {v: inst.f.evaluate((v,)) for v in acts}
            top = max(vals.values())
            a = min(v for v in acts if vals[v] == top)
            bests.append(ScoredAction(a, i, top))
        bests.sort(key=lambda s: (-s.value, s.owner, s.action))
        assert run.removals == tuple(bests[: min(k, n)])
        assert len({s.owner for s in run.removals}) == len(run.removals)


def test_derive_roles_counts():
    for k, n_conv in [(0, 0), (3, 3), (5, 5)]:
        f = modular({i: float(i + 1) for i in range(5)})
        run = run_distributed(f, [(i,) for i in range(5)], complete_graph(5), k)
        assert len(run.conveyor_ids) == n_conv


def test_derive_roles_sets_conveyors_from_removal_owners():
    states = [make_state(i, (i,), n_robots=3, k=1) for i in range(3)]
    for st in states:
        st.removal_set = (ScoredAction(2, 2, 9.0),)
    derive_roles(states)
    assert [st.role for st in states] == [SELECTOR, SELECTOR, CONVEYOR]
    assert all(st.n_slots == 2 for st in states)


# ---------------------------------------------------------------------------
# complement sequence merging
# ---------------------------------------------------------------------------


def E(action, owner, gain, order):
    return RankedEntry(action, owner, gain, order)


def test_merge_keeps_consistent_prefix_when_orders_shift():
    # shared middle action recorded at different positions: the side that
    # recorded it later wins, the other side's tail is dropped
    mine = (E(0, 0, 10.0, 1), E(1, 1, 7.0, 2))
    theirs = (E(1, 1, 7.0, 1), E(2, 2, 4.0, 2))
    expect = (E(0, 0, 10.0, 1), E(1, 1, 7.0, 2))
    assert merge_sequences(mine, theirs) == expect
    assert merge_sequences(theirs, mine) == expect


def test_merge_identical_sequences_is_identity():
    seq = (E(0, 0, 10.0, 1), E(1, 1, 7.0, 2), E(2, 2, 3.0, 3))
    assert merge_sequences(seq, seq) == seq


def test_merge_competing_heads_keeps_stronger():
    mine = (E(0, 0, 10.0, 1),)
    theirs = (E(1, 1, 9.0, 1),)
    assert merge_sequences(mine, theirs) == mine
    assert merge_sequences(theirs, mine) == mine


def test_merge_with_empty_side():
    seq = (E(0, 0, 5.0, 1),)
    assert merge_sequences(seq, ()) == seq
    assert merge_sequences((), seq) == seq


def test_merge_shared_entry_survives_broken_side():
    # x is recorded identically by both sides; theirs breaks at its head
    # but x stays valid through mine
    mine = (E(0, 0, 10.0, 1), E(5, 2, 7.0, 2))
    theirs = (E(1, 1, 9.0, 1), E(5, 2, 7.0, 2))
    expect = (E(0, 0, 10.0, 1), E(5, 2, 7.0, 2))
    assert merge_sequences(mine, theirs) == expect
    assert merge_sequences(theirs, mine) == expect


def harvest_sequences(seed, n_instances=6):
    """Collect real mid-run sequences via the protocol trace."""
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(n_instances):
        n = int(rng.integers(3, 7))
        inst = random_instance(n, rng)
        owner_of = {a: i for i, acts in enumerate(inst.action_sets) for a in acts}
        k = int(rng.integers(0, n))
        trace = []
        run_distributed(inst.f, inst.action_sets, inst.graph, k, trace=trace)
        for rec in trace:
            if rec["phase"] == 2:
                seq = tuple(
                    RankedEntry(a, owner_of[a], g, o) for a, g, o in rec["s2"]
                )
                corpus.append(seq)
    return corpus


def test_merge_properties_on_harvested_corpus():
    corpus = harvest_sequences(seed=12)
    assert len(corpus) > 50
    rng = np.random.default_rng(1)
    for seq in corpus:
        validate_sequence(seq)
        assert merge_sequences(seq, seq) == seq
    for _ in range(300):
        a = corpus[int(rng.integers(len(corpus)))]
        b = corpus[int(rng.integers(len(corpus)))]
        ab = merge_sequences(a, b)
        ba = merge_sequences(b, a)
        assert ab == ba
        validate_sequence(ab)


# ---------------------------------------------------------------------------
# local complement computation
# ---------------------------------------------------------------------------


def test_local_update_replaces_beaten_head():
    f = modular({50: 10.0, 60: 12.0})
    st = make_state(9, (60,), n_robots=2, n_slots=2)
    seq = (E(50, 0, 10.0, 1),)
    assert local_complement_update(f, st, seq) == (E(60, 9, 12.0, 1),)


def test_local_update_appends_at_tail():
    f = modular({50: 10.0, 60: 6.0})
    st = make_state(9, (60,), n_robots=2, n_slots=2)
    seq = (E(50, 0, 10.0, 1),)
    assert local_complement_update(f, st, seq) == (E(50, 0, 10.0, 1), E(60, 9, 6.0, 2))


def test_local_update_tie_goes_to_lower_owner():
    f = modular({50: 10.0, 60: 10.0})
    incumbent = (E(50, 3, 10.0, 1),)
    low = make_state(1, (60,), n_robots=2, n_slots=2)
    assert local_complement_update(f, low, incumbent)[0].action == 60
    high = make_state(7, (60,), n_robots=2, n_slots=2)
    assert local_complement_update(f, high, incumbent) == (
        E(50, 3, 10.0, 1),
        E(60, 7, 10.0, 2),
    )


def test_local_update_noop_when_own_action_placed():
    f = modular({50: 10.0, 60: 6.0, 61: 99.0})
    st = make_state(9, (60, 61), n_robots=2, n_slots=2)
    seq = (E(60, 9, 6.0, 1), E(50, 0, 5.0, 2))
    assert local_complement_update(f, st, seq) == seq


def test_local_update_truncates_tail_on_replacement():
    f = modular({50: 10.0, 51: 4.0, 60: 7.0})
    st = make_state(9, (60,), n_robots=3, n_slots=3)
    seq = (E(50, 0, 10.0, 1), E(51, 1, 4.0, 2))
    assert local_complement_update(f, st, seq) == (E(50, 0, 10.0, 1), E(60, 9, 7.0, 2))


# ---------------------------------------------------------------------------
# full runs
# ---------------------------------------------------------------------------


def test_single_selector_on_complete_graph_stops_quickly():
    f = modular({0: 5.0, 1: 4.0, 2: 3.0})
    run = run_distributed(f, [(0,), (1,), (2,)], complete_graph(3), k=2)
    assert run.phase2_rounds == 3  # selector quiet after 2, conveyors after 3
    assert run.solution == {0, 1, 2}


def test_k_zero_equals_plain_distributed_greedy():
    rng = np.random.default_rng(8)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        inst = random_instance(n, rng)
        run = run_distributed(inst.f, inst.action_sets, inst.graph, 0)
        assert run.removals == ()
        assert run.solution == centralized_greedy(inst.f, inst.action_sets)


def test_singleton_system():
    f = modular({0: 1.0, 1: 6.0, 2: 2.0})
    run = run_distributed(f, [(0, 1, 2)], CommGraph(1, []), k=0)
    assert run.solution == {1}
    run = run_distributed(f, [(0, 1, 2)], CommGraph(1, []), k=1)
    assert run.solution == {1}
    assert run.complements == ()


def test_distributed_matches_centralized_on_fixed_topologies():
    rng = np.random.default_rng(31)
    for make in (path_graph, complete_graph):
        for n in (2, 4, 6):
            inst = random_instance(n, rng, edge_probability=0.0)
            graph = make(n)
            for k in range(n + 1):
                run = run_distributed(inst.f, inst.action_sets, graph, k)
                plan = centralized_resilient(inst.f, inst.action_sets, k)
                assert run.solution == plan.solution
                assert run.complements == plan.complements


def test_round_bounds_hold_on_random_instances():
    rng = np.random.default_rng(77)
    for _ in range(25):
        n = int(rng.integers(2, 8))
        inst = random_instance(n, rng)
        k = int(rng.integers(0, n + 1))
        run = run_distributed(inst.f, inst.action_sets, inst.graph, k)
        d = max(1, diameter(inst.graph))
        assert run.phase1_rounds == 2 * d
        assert 0 <= run.phase1_agreement_round <= d
        n_selectors = n - len(run.removals)
        assert run.phase2_rounds <= 2 * (n_selectors + 1) * d


def test_solution_respects_partition_constraint():
    rng = np.random.default_rng(99)
    for _ in range(15):
        n = int(rng.integers(2, 7))
        inst = random_instance(n, rng)
        k = int(rng.integers(0, n + 1))
        run = run_distributed(inst.f, inst.action_sets, inst.graph, k)
        assert len(run.solution) == n
        for acts in inst.action_sets:
            assert len(run.solution & set(acts)) == 1


def test_run_rejects_bad_inputs():
    f = modular({0: 1.0, 1: 2.0})
    with pytest.raises(ValueError):
        run_distributed(f, [(0,), (1,)], CommGraph(3, [(0, 1), (1, 2)]), k=0)
    with pytest.raises(ValueError):
        run_distributed(f, [(0,), (1,)], CommGraph(2, [(0, 1)]), k=5)
    with pytest.raises(ValueError):
        run_distributed(f, [(0,), (0,)], CommGraph(2, [(0, 1)]), k=0)
    with pytest.raises(ValueError):
        run_distributed(f, [(0, 1), ()], CommGraph(2, [(0, 1)]), k=0)


def test_trace_schema_and_cardinality():
    rng = np.random.default_rng(6)
    inst = random_instance(4, rng)
    trace = []
    run = run_distributed(inst.f, inst.action_sets, inst.graph, 2, trace=trace)
    assert len(trace) == 4 * run.total_rounds
    keys = {"round", "phase", "robot", "role", "alpha", "s1", "s2", "utility"}
    for rec in trace:
        assert set(rec) == keys
    final = [rec for rec in trace if rec["round"] == run.total_rounds]
    utilities = {rec["utility"] for rec in final}
    assert len(utilities) == 1  # consensus reached
