import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdgsim.core import ArrivalSequence, DropReason, FrameStatus, SimulationState, edf_feasible
from bdgsim.engine import Simulation, run
from bdgsim.policies import (
    POLICY_NAMES,
    Greedy,
    GreedySlack,
    Opportunistic,
    ProactiveGreedy,
    ProvisionalRule,
    TieBreak,
    TieBreakChain,
    build_provisional_schedule,
    make_policy,
)
from bdgsim.traffic import gen_random

from conftest import matching_feasible, pk, subset_optimum


def make_state(now, d, k, frames):
    """frames: {frame_id: (delivered_so_far, [deadline of each pending packet])}."""
    st_ = SimulationState(k=k, d=d, now=now)
    for fid, (done, deadlines) in frames.items():
        st_.delivered_count[fid] = done
        st_.pending[fid] = [pk(fid, done + i + 1, now, e) for i, e in enumerate(deadlines)]
    return st_


# --- ProactiveGreedy ----------------------------------------------------------


def test_pg_prefers_higher_index_and_drops_the_rest():
    st_ = make_state(0, 4, 3, {1: (1, [3, 4]), 2: (0, [4, 4])})
    dec = ProactiveGreedy().decide(st_)
    assert dec.deliver.pid == (1, 2)
    assert set(dec.proactive_drops) == set(st_.pending[2])


def test_pg_singleton_and_empty():
    st_ = make_state(0, 4, 2, {7: (0, [4, 4])})
    dec = ProactiveGreedy().decide(st_)
    assert dec.deliver.pid == (7, 1) and dec.proactive_drops == ()
    assert ProactiveGreedy().decide(SimulationState(2, 4)).deliver is None


# --- Greedy ---------------------------------------------------------------------


def test_greedy_picks_among_max_index_frames():
    st_ = make_state(0, 6, 4, {1: (2, [5]), 2: (2, [6]), 3: (0, [3, 4])})
    pol = Greedy(TieBreakChain(seed=11))
    dec = pol.decide(st_)
    assert dec.deliver.frame_id in (1, 2) and dec.deliver.index == 3
    assert dec.proactive_drops == ()
    ranks = {f: pol.tie_break.rank(st_.first_pending(f)) for f in (1, 2)}
    assert dec.deliver.frame_id == min(ranks, key=ranks.get)


def test_greedy_singleton():
    st_ = make_state(0, 3, 2, {4: (0, [3, 3])})
    assert Greedy().decide(st_).deliver.pid == (4, 1)


@pytest.mark.parametrize("k,d", [(2, 2), (3, 3), (3, 5), (4, 4), (2, 6), (2, 9)])
def test_greedy_burst_serves_frames_back_to_back(k, d):
    # b frames arrive together; each needs k of the d + 1 slots before the common deadline
    b = 4
    packets = [pk(f, i, 0, d) for f in range(1, b + 1) for i in range(1, k + 1)]
    seq = ArrivalSequence.from_packets(k, d, b * k, packets)
    tr = run(seq, "greedy")
    assert tr.goodput == subset_optimum(seq) == min(b, (d + 1) // k)
    if (d + 1) // k == 1:
        assert tr.goodput == 1


def test_greedy_burst_too_long_frames_all_die():
    # k = d + 2 cannot fit into the d + 1 slots of any window
    k, d = 4, 2
    packets = [pk(f, i, 0, d) for f in (1, 2) for i in range(1, k + 1)]
    tr = run(ArrivalSequence.from_packets(k, d, 8, packets), "greedy")
    assert tr.goodput == 0


# --- Greedy-slack --------------------------------------------------------------


def test_greedy_slack_prefers_urgent_frame():
    st_ = make_state(10, 6, 3, {1: (1, [11]), 2: (1, [14])})
    assert GreedySlack().decide(st_).deliver.frame_id == 1


def test_greedy_slack_index_dominates_slack():
    st_ = make_state(10, 6, 4, {1: (1, [11]), 2: (2, [16])})
    assert GreedySlack().decide(st_).deliver.frame_id == 2


def test_greedy_slack_equal_slack_uses_fixed_random_rank():
    winners = set()
    for _ in range(3):
        st_ = make_state(0, 6, 3, {1: (1, [3]), 2: (1, [3])})
        pol = GreedySlack(seed=5)
        w = pol.decide(st_).deliver.frame_id
        r = {f: pol.tie_break.rank(st_.first_pending(f)) for f in (1, 2)}
        assert w == min(r, key=r.get)
        winners.add(w)
    assert len(winners) == 1


def test_tie_break_chain_always_ends_random():
    assert TieBreakChain((TieBreak.MIN_SLACK,)).criteria[-1] is TieBreak.RANDOM
    with pytest.raises(ValueError):
        TieBreakChain((TieBreak.RANDOM, TieBreak.MIN_SLACK))


def test_pending_count_tie_break():
    st_ = make_state(0, 6, 4, {1: (0, [5, 6, 6]), 2: (0, [6])})
    pol = Greedy(TieBreakChain((TieBreak.MIN_PENDING,)))
    assert pol.decide(st_).deliver.frame_id == 2


def test_stream_priority_shared_by_frames_of_a_stream():
    chain = TieBreakChain(seed=3)
    a, b = pk(1, 1, 0, 5, stream=9), pk(2, 1, 0, 5, stream=9)
    assert chain.rank(a)[0] == chain.rank(b)[0]
    assert chain.rank(a) < chain.rank(b)


# --- provisional schedule / Opportunistic --------------------------------------


def test_provisional_counting_rules():
    # admitted slacks 1..5, candidate slack 5
    frames = {i: (2, [i]) for i in range(1, 6)}
    frames[6] = (1, [5])
    st_ = make_state(0, 6, 3, frames)
    assert build_provisional_schedule(st_, ProvisionalRule.SLOT_COUNT) == [1, 2, 3, 4, 5, 6]
    assert build_provisional_schedule(st_, ProvisionalRule.LITERAL) == [1, 2, 3, 4, 5]


def test_provisional_overflow_excludes_third_frame():
    # f1: slacks 2,3,4; f2: slacks 1,5; f3's packets push count(slack <= 5) to 7
    st_ = make_state(0, 6, 5, {1: (2, [2, 3, 4]), 2: (1, [1, 5]), 3: (0, [5, 5])})
    assert build_provisional_schedule(st_) == [1, 2]
    dec = Opportunistic().decide(st_)
    # the most urgent admitted packet, although f2 has the lower index
    assert dec.deliver.pid == (2, 2)
    assert dec.proactive_drops == ()


def test_provisional_single_frame_admitted():
    st_ = make_state(0, 3, 3, {1: (0, [1, 2, 3])})
    assert build_provisional_schedule(st_) == [1]
    assert build_provisional_schedule(st_, ProvisionalRule.LITERAL) == [1]


def test_opportunistic_delivers_zero_slack_packet():
    st_ = make_state(4, 6, 3, {1: (1, [9, 10]), 2: (0, [4])})
    assert Opportunistic().decide(st_).deliver.pid == (2, 1)


def test_opportunistic_singleton_and_empty():
    st_ = make_state(0, 3, 2, {8: (0, [2, 3])})
    assert Opportunistic().decide(st_).deliver.pid == (8, 1)
    assert Opportunistic().decide(SimulationState(2, 3)).deliver is None


@st.composite
def pending_states(draw):
    d = draw(st.integers(1, 6))
    k = draw(st.integers(1, 3))
    nframes = draw(st.integers(1, 6))
    frames = {}
    for fid in range(1, nframes + 1):
        done = draw(st.integers(0, k - 1))
        n = draw(st.integers(1, k - done))
        deadlines = sorted(draw(st.lists(st.integers(0, d), min_size=n, max_size=n)))
        frames[fid] = (done, deadlines)
    return make_state(0, d, k, frames)


@given(pending_states())
@settings(max_examples=300, deadline=None)
def test_slot_count_rule_is_exact_feasibility(state):
    admitted = build_provisional_schedule(state, ProvisionalRule.SLOT_COUNT)
    packets = [p for f in admitted for p in state.pending[f]]
    if len(admitted) > 1 or edf_feasible(state.pending[admitted[0]], 0):
        assert matching_feasible(packets, 0)
    # every rejected frame would have broken feasibility at its turn
    rank = TieBreakChain().rank
    order = sorted(
        state.queue(),
        key=lambda f: (-state.first_index(f), state.first_pending(f).deadline, rank(state.first_pending(f))),
    )
    kept = []
    for f in order:
        trial = kept + state.pending[f]
        if f in admitted:
            kept = trial
        elif kept:
            assert not edf_feasible(trial, 0)


@given(pending_states())
@settings(max_examples=200, deadline=None)
def test_literal_rule_admits_a_prefix_subset(state):
    loose = build_provisional_schedule(state, ProvisionalRule.SLOT_COUNT)
    strict = build_provisional_schedule(state, ProvisionalRule.LITERAL)
    assert strict[0] == loose[0]
    # whatever the strict rule admits beyond the top frame still fits s slots per prefix
    counts = sorted(p.deadline for f in strict[1:] for p in state.pending[f])
    for s in range(state.d + 1):
        head = sum(1 for p in state.pending[strict[0]] if p.deadline <= s)
        assert head + sum(1 for e in counts if e <= s) <= max(s, head)


# --- run-level invariants -------------------------------------------------------


def random_instances(count, seed0=0):
    ks = (2, 3, 6)
    for i in range(count):
        k = ks[i % 3]
        d = k + (i * 7) % (3 * k + 1)
        b = 2 + (i * 5) % 7
        yield gen_random(k, d, b, frames=4 + i % 9, seed=seed0 + i)


class Recorder:
    """Wraps a policy and checks per-decision invariants."""

    def __init__(self, policy):
        self.policy = policy
        self.name = policy.name
        self.violations = []

    def decide(self, state):
        dec = self.policy.decide(state)
        if dec.deliver is not None:
            f = dec.deliver.frame_id
            if dec.deliver.index != state.first_index(f):
                self.violations.append("not first pending")
            if isinstance(self.policy, Greedy):
                top = max(state.first_index(g) for g in state.queue())
                if dec.deliver.index < top:
                    self.violations.append("greedy skipped a higher index")
            if isinstance(self.policy, Opportunistic):
                if f not in build_provisional_schedule(state, self.policy.rule, self.policy.tie_break):
                    self.violations.append("outside provisional schedule")
        if dec.deliver in dec.proactive_drops:
            self.violations.append("delivered and dropped")
        return dec


def test_pg_never_expires_and_keeps_one_frame():
    for seq in random_instances(120):
        sim = Simulation(seq.k, seq.d, ProactiveGreedy())
        arrivals = seq.arrivals_by_slot()
        for t in range(seq.horizon + 1):
            rec = sim.step(arrivals.get(t, []))
            assert len(sim.state.pending) <= 1
            for _, reason in rec.drops:
                assert reason in (DropReason.PROACTIVE_POLICY_DROP, DropReason.FRAME_DEAD_ON_ARRIVAL)


@pytest.mark.parametrize("name", POLICY_NAMES)
def test_policy_decision_invariants(name):
    for seq in random_instances(60, seed0=1000):
        rec = Recorder(make_policy(name, seed=3))
        tr = run(seq, rec, seed=3)
        assert rec.violations == []
        order = {}
        for r in tr.records:
            if r.delivered:
                f, i = r.delivered
                assert i == order.get(f, 0) + 1
                order[f] = i


@pytest.mark.parametrize("name", POLICY_NAMES)
def test_runs_are_deterministic(name):
    seq = gen_random(3, 6, 4, frames=12, seed=99)
    a, b = run(seq, name, seed=4), run(seq, name, seed=4)
    assert a.records == b.records and a.statuses == b.statuses


def test_unknown_policy_lists_names():
    with pytest.raises(ValueError, match="greedy-slack"):
        make_policy("edf")


def test_statuses_are_final():
    seq = gen_random(2, 4, 3, frames=10, seed=1)
    tr = run(seq, "greedy")
    assert all(s is not FrameStatus.ALIVE or not seq.frame(f).complete for f, s in tr.statuses.items())
