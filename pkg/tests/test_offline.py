import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdgsim.core import ArrivalSequence, FrameStatus, edf_feasible
from bdgsim.engine import replay, run
from bdgsim.offline import (
    OracleLimitError,
    benchmark_offline,
    brute_force_optimal,
    edf_schedule,
    fifo_feasibility_check,
)
from bdgsim.policies import POLICY_NAMES
from bdgsim.traffic import AdversarySpec, gen_lower_bound, gen_random

from conftest import matching_feasible, pk, subset_optimum


def test_single_frame_accepted():
    seq = ArrivalSequence.from_packets(2, 3, 2, [pk(1, 1, 0, 3), pk(1, 2, 1, 4)])
    sol = benchmark_offline(seq)
    assert sol.goodput == 1
    assert sorted(sol.schedule.values()) == [(1, 1), (1, 2)]


def test_two_unit_frames_zero_slack():
    seq = ArrivalSequence.from_packets(1, 0, 2, [pk(1, 1, 0, 0), pk(2, 1, 0, 0)])
    assert benchmark_offline(seq).goodput == 1
    assert brute_force_optimal(seq).goodput == 1


def test_brute_force_empty_and_incomplete():
    assert brute_force_optimal(ArrivalSequence(2, 4, 4)).goodput == 0
    # stage-1 prefix only: first packets of many frames, no second packets
    packets = [pk(t * 4 + j + 1, 1, t, t + 2) for t in range(6) for j in range(4)]
    seq = ArrivalSequence.from_packets(2, 2, 4, packets)
    assert brute_force_optimal(seq).goodput == 0
    assert benchmark_offline(seq).goodput == 0


def test_brute_force_on_lower_bound_instance():
    inst = gen_lower_bound(AdversarySpec(b=4, d=2, k=2, n=6))
    opt = brute_force_optimal(inst.sequence)
    assert opt.goodput >= 6
    assert opt.goodput >= inst.adversary_goodput


def test_brute_force_limit():
    seq = gen_random(1, 3, 3, frames=21, seed=0)
    with pytest.raises(OracleLimitError):
        brute_force_optimal(seq)
    assert brute_force_optimal(seq, max_frames=21).goodput >= 1


def test_brute_force_matches_subset_enumeration():
    for i in range(40):
        seq = gen_random(2 + i % 2, 3 + i % 3, 3, frames=3 + i % 5, seed=i)
        assert brute_force_optimal(seq).goodput == subset_optimum(seq)


def test_benchmark_within_k_plus_one_on_random():
    for i in range(10):
        seq = gen_random(2, 4, 4, frames=10, seed=100 + i)
        opt = brute_force_optimal(seq).goodput
        bench = benchmark_offline(seq).goodput
        assert bench <= opt
        assert bench * (seq.k + 1) >= opt


@pytest.mark.parametrize("order", ["last_arrival", "first_arrival", "frame_id"])
def test_fast_and_edf_admission_agree(order):
    for i in range(60):
        seq = gen_random(1 + i % 4, 4 + i % 4, 2 + i % 5, frames=5 + i % 20, seed=500 + i)
        a = benchmark_offline(seq, order=order, fast=True)
        b = benchmark_offline(seq, order=order, fast=False)
        assert a.accepted_frames == b.accepted_frames


def test_fast_path_needs_uniform_slack():
    seq = ArrivalSequence.from_packets(1, 2, 2, [pk(1, 1, 0, 2), pk(2, 1, 0, 1)])
    with pytest.raises(ValueError):
        benchmark_offline(seq, fast=True)
    assert benchmark_offline(seq).goodput == 2


def test_witness_schedules_replay():
    for i in range(30):
        seq = gen_random(2, 3 + i % 4, 3, frames=8, seed=i)
        for sol in (benchmark_offline(seq), brute_force_optimal(seq)):
            statuses = replay(seq, sol.schedule)
            done = {f for f, s in statuses.items() if s is FrameStatus.SUCCESSFUL}
            assert done == set(sol.accepted_frames)


def test_edf_schedule_rejects_infeasible():
    with pytest.raises(ValueError):
        edf_schedule([pk(1, 1, 0, 0), pk(2, 1, 0, 0)])


# --- d-bFIFO cross-check --------------------------------------------------------


def test_fifo_singleton_frames():
    for i in range(20):
        seq = gen_random(3, 3 + i % 3, 4, frames=6, seed=i)
        for f in seq.frames:
            assert fifo_feasibility_check(seq, [f.frame_id])


def test_fifo_accepts_benchmark_sets():
    for i in range(20):
        seq = gen_random(2, 4, 4, frames=12, seed=40 + i)
        assert fifo_feasibility_check(seq, benchmark_offline(seq).accepted_frames)


def test_fifo_overflow_matches_edf():
    d = 3
    packets = [pk(f, 1, 0, d) for f in range(1, 2 * d + 2)]
    seq = ArrivalSequence.from_packets(1, d, 2 * d + 1, packets)
    ids = [f.frame_id for f in seq.frames]
    assert not fifo_feasibility_check(seq, ids)
    assert not edf_feasible(packets, 0)
    assert fifo_feasibility_check(seq, ids[: d + 1])


@given(st.integers(0, 10_000), st.integers(1, 3), st.integers(1, 4), st.integers(1, 9))
@settings(max_examples=150, deadline=None)
def test_fifo_equivalence_property(seed, k, extra, frames):
    seq = gen_random(k, k + extra - 1, 3, frames=frames, seed=seed)
    rng = random.Random(seed)
    ids = [f.frame_id for f in seq.frames]
    for _ in range(8):
        chosen = [f for f in ids if rng.random() < 0.5]
        packets = [p for f in seq.frames if f.frame_id in chosen for p in f.packets]
        assert fifo_feasibility_check(seq, chosen) == matching_feasible(packets, 0)


# --- sandwich -------------------------------------------------------------------


def test_online_never_beats_optimum():
    for i in range(25):
        seq = gen_random(2 + i % 2, 4, 3, frames=9, seed=300 + i)
        opt = brute_force_optimal(seq).goodput
        assert benchmark_offline(seq).goodput <= opt
        for name in POLICY_NAMES:
            assert run(seq, name, seed=i).goodput <= opt
