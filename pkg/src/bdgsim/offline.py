"""Offline solutions: greedy frame admission, exact subset search, FIFO cross-check."""

from __future__ import annotations

import heapq
from collections.abc import Iterable
from dataclasses import dataclass, field

from .core import ArrivalSequence, Frame, Packet, edf_feasible
from .seqio import sequence_digest

PacketId = tuple[int, int]


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class OfflineSolution:
    accepted_frames: frozenset[int]
    schedule: dict[int, PacketId] = field(hash=False)
    digest: str = ""

    @property
    def goodput(self) -> int:
        return len(self.accepted_frames)


def edf_schedule(packets: Iterable[Packet], start: int = 0) -> dict[int, PacketId]:
    """EDF witness: slot -> packet id. Ties go to (frame_id, index), preserving in-frame order."""
    jobs = sorted(packets, key=lambda p: (max(start, p.arrival), p.deadline, p.frame_id, p.index))
    heap: list[tuple[int, int, int]] = []
    out: dict[int, PacketId] = {}
    t = start
    i = 0
    while i < len(jobs) or heap:
        if not heap and max(start, jobs[i].arrival) > t:
            t = max(start, jobs[i].arrival)
        while i < len(jobs) and max(start, jobs[i].arrival) <= t:
            p = jobs[i]
            heapq.heappush(heap, (p.deadline, p.frame_id, p.index))
            i += 1
        deadline, fid, idx = heapq.heappop(heap)
        if deadline < t:
            raise ValueError("packet set is not EDF-feasible")
        out[t] = (fid, idx)
        t += 1
    return out


class _RiseTree:
    """Range-add segment tree over P(-1..T) answering max_{i<j} P(j) - P(i).

    For d-uniform unit jobs, a set of arrivals is feasible iff every window of
    arrival slots [x, z] holds at most (z - x + 1) + d packets. With
    P(t) = (#packets arriving <= t) - (t + 1) that is max rise <= d.
    """

    def __init__(self, size: int):
        self.n = size
        self.lo = [0] * (4 * size)
        self.hi = [0] * (4 * size)
        self.rise = [0] * (4 * size)
        self.lazy = [0] * (4 * size)
        self._build(1, 0, size - 1)

    def _build(self, node, l, r):
        if l == r:
            # position l stands for slot l - 1; initial P(t) = -(t + 1)
            v = -l
            self.lo[node] = self.hi[node] = v
            self.rise[node] = -(10**18)
            return
        m = (l + r) // 2
        self._build(2 * node, l, m)
        self._build(2 * node + 1, m + 1, r)
        self._pull(node)

    def _pull(self, node):
        a, b = 2 * node, 2 * node + 1
        self.lo[node] = min(self.lo[a], self.lo[b])
        self.hi[node] = max(self.hi[a], self.hi[b])
        self.rise[node] = max(self.rise[a], self.rise[b], self.hi[b] - self.lo[a])

    def _push(self, node):
        v = self.lazy[node]
        if v:
            for c in (2 * node, 2 * node + 1):
                self.lo[c] += v
                self.hi[c] += v
                self.lazy[c] += v
            self.lazy[node] = 0

    def add_suffix(self, pos: int, v: int) -> None:
        self._add(1, 0, self.n - 1, pos, v)

    def _add(self, node, l, r, pos, v):
        if r < pos:
            return
        if l >= pos:
            self.lo[node] += v
            self.hi[node] += v
            self.lazy[node] += v
            return
        self._push(node)
        m = (l + r) // 2
        self._add(2 * node, l, m, pos, v)
        self._add(2 * node + 1, m + 1, r, pos, v)
        self._pull(node)

    def max_rise(self) -> int:
        return self.rise[1]


def _is_uniform(seq: ArrivalSequence) -> bool:
    return all(p.deadline - p.arrival == seq.d for f in seq.frames for p in f.packets)


ADMISSION_ORDERS = {
    "last_arrival": lambda f: (f.last_arrival, f.first_arrival, f.frame_id),
    "first_arrival": lambda f: (f.first_arrival, f.last_arrival, f.frame_id),
    "frame_id": lambda f: (f.frame_id,),
}


def benchmark_offline(seq: ArrivalSequence, order: str = "last_arrival", fast: bool | None = None) -> OfflineSolution:
    """Greedy offline admission: keep a frame iff the admitted packets stay EDF-feasible.

    ``fast`` selects the windowed-count check, valid only for d-uniform
    traffic; by default it is used whenever the sequence is d-uniform.
    """
    frames = sorted((f for f in seq.frames if f.complete), key=ADMISSION_ORDERS[order])
    if fast is None:
        fast = _is_uniform(seq)
    accepted: list[Frame] = []
    if fast:
        if not _is_uniform(seq):
            raise ValueError("fast admission needs d-uniform traffic")
        top = max((p.arrival for f in frames for p in f.packets), default=0)
        tree = _RiseTree(top + 2)
        for f in frames:
            for p in f.packets:
                tree.add_suffix(p.arrival + 1, 1)
            if tree.max_rise() <= seq.d:
                accepted.append(f)
            else:
                for p in f.packets:
                    tree.add_suffix(p.arrival + 1, -1)
    else:
        chosen: list[Packet] = []
        for f in frames:
            if edf_feasible(chosen + list(f.packets), 0):
                accepted.append(f)
                chosen.extend(f.packets)
    schedule = edf_schedule([p for f in accepted for p in f.packets])
    return OfflineSolution(frozenset(f.frame_id for f in accepted), schedule, sequence_digest(seq))


def brute_force_optimal(seq: ArrivalSequence, max_frames: int = 20) -> OfflineSolution:
    """Maximum set of frames whose packets fit together; exact, exponential in the frame count.

    Frames missing packets can never succeed and do not count against ``max_frames``.
    """
    frames = sorted((f for f in seq.frames if f.complete), key=lambda f: (f.first_arrival, f.frame_id))
    if len(frames) > max_frames:
        raise OracleLimitError(
            f"instance has {len(frames)} complete frames, oracle limit is {max_frames}"
        )
    n = len(frames)
    best: list[int] = []
    # feasibility is closed under subsets, so exclusion never needs re-checking
    seed = benchmark_offline(seq, fast=False) if n else None
    if seed is not None:
        best = [i for i, f in enumerate(frames) if f.frame_id in seed.accepted_frames]

    def dfs(i: int, chosen: list[int], packets: list[Packet]) -> None:
        nonlocal best
        if len(chosen) + (n - i) <= len(best):
            return
        if i == n:
            best = chosen[:]
            return
        cand = packets + list(frames[i].packets)
        if edf_feasible(cand, 0):
            chosen.append(i)
            dfs(i + 1, chosen, cand)
            chosen.pop()
        dfs(i + 1, chosen, packets)

    dfs(0, [], [])
    accepted = [frames[i] for i in best]
    schedule = edf_schedule([p for f in accepted for p in f.packets])
    return OfflineSolution(frozenset(f.frame_id for f in accepted), schedule, sequence_digest(seq))


def fifo_feasibility_check(seq: ArrivalSequence, frames: Iterable[int]) -> bool:
    """Do the chosen frames survive a FIFO queue holding at most ``d`` packets?

    Each slot enqueues the chosen frames' arrivals, sends the head packet,
    then overflows if more than ``d`` packets remain. Only chosen frames'
    packets ever enter the queue.
    """
    chosen = set(frames)
    counts: dict[int, int] = {}
    for f in seq.frames:
        if f.frame_id in chosen:
            if not f.complete:
                return False
            for p in f.packets:
                counts[p.arrival] = counts.get(p.arrival, 0) + 1
    queue = 0
    t_prev = None
    for t in sorted(counts):
        if t_prev is not None:
            queue = max(0, queue - (t - t_prev - 1))
        queue += counts[t]
        queue -= 1
        if queue > seq.d:
            return False
        t_prev = t
    return True
