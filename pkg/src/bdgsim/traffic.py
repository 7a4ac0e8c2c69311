"""Arrival-sequence generators.

``gen_video`` builds the interleaved-streams workload used for the goodput
ratio experiments. ``gen_lower_bound`` and ``gen_token_bucket_lower_bound``
build the adversarial staged inputs; both co-simulate the target online
policy because what arrives in later stages depends on which packets the
policy chose to serve.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .core import ArrivalSequence, Packet
from .engine import Simulation
from .policies import Policy, make_policy


@dataclass(frozen=True)
class VideoScenario:
    k: int
    d: int
    streams: int = 50
    frames_per_stream: int = 3600
    frame_interval: int | None = None
    jitter_max: int = 5
    seed: int = 0

    @property
    def interval(self) -> int:
        # k * streams keeps the aggregate arrival rate at one packet per slot
        return self.frame_interval if self.frame_interval is not None else self.k * self.streams

    def validate(self) -> None:
        if self.k < 1 or self.streams < 1 or self.frames_per_stream < 0:
            raise ValueError("k and streams must be positive, frames_per_stream non-negative")
        if self.k > self.d:
            raise ValueError(f"k={self.k} exceeds d={self.d}")
        if self.jitter_max < 0:
            raise ValueError("jitter_max must be >= 0")
        if self.interval < 1:
            raise ValueError("frame_interval must be >= 1")


def gen_video(spec: VideoScenario) -> ArrivalSequence:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    S, F, k = spec.streams, spec.frames_per_stream, spec.k
    starts = rng.integers(0, spec.interval, size=S)
    nominal = starts[:, None] + np.arange(F)[None, :] * spec.interval
    jitter = rng.integers(0, spec.jitter_max + 1, size=(S, F, k))
    arrive = np.sort(nominal[:, :, None] + jitter, axis=2)

    # frame ids follow nominal arrival, streams numbered from 1
    order = np.lexsort((np.repeat(np.arange(S), F), nominal.ravel()))
    packets = []
    for fid, flat in enumerate(order.tolist(), start=1):
        s, j = divmod(flat, F)
        for idx, a in enumerate(arrive[s, j].tolist(), start=1):
            packets.append(Packet(fid, idx, a, a + spec.d, s + 1))
    b = int(np.bincount(arrive.ravel()).max()) if packets else 1
    return ArrivalSequence.from_packets(k, spec.d, b, packets)


def gen_random(
    k: int,
    d: int,
    b: int,
    frames: int,
    seed: int,
    spread: int | None = None,
    max_gap: int = 2,
) -> ArrivalSequence:
    """Small random d-uniform instance respecting the burst bound ``b``.

    First packets start uniformly in ``[0, spread)``; later packets follow
    after a random gap of up to ``max_gap`` slots, pushed later whenever the
    slot is already full.
    """
    rng = np.random.default_rng(seed)
    spread = spread if spread is not None else max(1, (frames * k) // max(1, b) + d)
    load: dict[int, int] = {}
    packets = []
    for fid in range(1, frames + 1):
        t = int(rng.integers(0, spread))
        for idx in range(1, k + 1):
            if idx > 1:
                t += int(rng.integers(0, max_gap + 1))
            while load.get(t, 0) >= b:
                t += 1
            load[t] = load.get(t, 0) + 1
            packets.append(Packet(fid, idx, t, t + d))
    return ArrivalSequence.from_packets(k, d, b, packets)


@dataclass(frozen=True)
class AdversarySpec:
    b: int
    d: int
    k: int
    n: int
    variant: str = "burst_bounded"

    def validate(self) -> None:
        if self.variant not in ("burst_bounded", "token_bucket"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.k < 2:
            raise ValueError("lower-bound construction needs k >= 2")
        if self.k > self.d:
            raise ValueError(f"k={self.k} exceeds d={self.d}")
        if self.b < 2 * self.d:
            raise ValueError(f"construction needs b >= 2d, got b={self.b}, d={self.d}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.variant == "burst_bounded" and (self.n + self.d) % self.b:
            raise ValueError(f"n + d = {self.n + self.d} must be a multiple of b={self.b}")


@dataclass
class LowerBoundInstance:
    sequence: ArrivalSequence
    adversary_frames: frozenset[int]
    adversary_schedule: dict[int, tuple[int, int]]
    # slot lists per stage: "stage1", "stage2.<j>", "stage3.<j>" for round j = 2..k
    stages: dict[str, list[int]] = field(default_factory=dict)
    policy: str = ""

    @property
    def adversary_goodput(self) -> int:
        return len(self.adversary_frames)


class _Builder:
    """Emits arrivals slot by slot while the target policy runs alongside."""

    def __init__(self, spec: AdversarySpec, policy: Policy):
        self.spec = spec
        self.sim = Simulation(spec.k, spec.d, policy)
        self.packets: list[Packet] = []
        self.delivered: list[tuple[int, tuple[int, int]]] = []
        self.next_fid = 1
        self.tokens = spec.b

    def new_frame(self) -> int:
        fid = self.next_fid
        self.next_fid += 1
        return fid

    def emit(self, arrivals: list[Packet]) -> None:
        t = self.sim.state.now
        if self.spec.variant == "token_bucket":
            if len(arrivals) > self.tokens:
                raise AssertionError(f"token bucket violated at slot {t}")
            self.tokens = min(self.spec.b, self.tokens - len(arrivals) + 1)
        self.packets.extend(arrivals)
        rec = self.sim.step(arrivals)
        if rec.delivered is not None:
            self.delivered.append((t, rec.delivered))

    def packet(self, fid: int, idx: int) -> Packet:
        t = self.sim.state.now
        return Packet(fid, idx, t, t + self.spec.d)

    def has_pending_index(self, idx: int, exclude: frozenset[int]) -> bool:
        return any(p.index == idx and p.frame_id not in exclude for p in self.sim.state.pending_packets())


def _adversary_first_packets(stage1: list[Packet], online: set[int], d: int) -> dict[int, tuple[int, int]]:
    """EDF over first packets of frames the online policy never served."""
    free = sorted((p for p in stage1 if p.frame_id not in online), key=lambda p: (p.arrival, p.frame_id))
    schedule: dict[int, tuple[int, int]] = {}
    heap: list[tuple[int, int]] = []
    i = 0
    t = 0
    last = max((p.deadline for p in free), default=-1)
    while t <= last:
        while i < len(free) and free[i].arrival <= t:
            heapq.heappush(heap, (free[i].deadline, free[i].frame_id))
            i += 1
        while heap and heap[0][0] < t:
            heapq.heappop(heap)
        if heap:
            _, fid = heapq.heappop(heap)
            schedule[t] = (fid, 1)
        t += 1
    return schedule


def _lower_bound(spec: AdversarySpec, policy: str | Policy, seed: int) -> LowerBoundInstance:
    spec.validate()
    if isinstance(policy, str):
        policy = make_policy(policy, seed)
    tb = spec.variant == "token_bucket"
    bld = _Builder(spec, policy)
    stages: dict[str, list[int]] = {"stage1": []}

    # stage 1: bursts of first packets of fresh frames
    stage1: list[Packet] = []
    burst_gap = 2 * spec.d if tb else 1
    for j in range(spec.n):
        target = j * burst_gap
        while bld.sim.state.now < target:
            bld.emit([])
        size = min(spec.b, bld.tokens) if tb else spec.b
        burst = [bld.packet(bld.new_frame(), 1) for _ in range(size)]
        stages["stage1"].append(bld.sim.state.now)
        stage1.extend(burst)
        bld.emit(burst)

    adversary: frozenset[int] = frozenset()
    adv_schedule: dict[int, tuple[int, int]] = {}
    for rnd in range(2, spec.k + 1):
        s2 = stages.setdefault(f"stage2.{rnd}", [])
        served = 0  # prefix of bld.delivered already turned into stage-2 arrivals
        waiting: list[int] = []
        last_burst = None
        while True:
            while served < len(bld.delivered):
                _, (fid, idx) = bld.delivered[served]
                served += 1
                if idx == rnd - 1 and fid not in adversary:
                    waiting.append(fid)
            if not waiting and not bld.has_pending_index(rnd - 1, adversary):
                break
            now = bld.sim.state.now
            ready = waiting and (not tb or last_burst is None or now - last_burst >= spec.b)
            if ready:
                size = min(spec.b, bld.tokens) if tb else spec.b
                burst = [bld.packet(fid, rnd) for fid in waiting[:size]]
                del waiting[:size]
                if burst:
                    s2.append(now)
                    last_burst = now
                bld.emit(burst)
            else:
                bld.emit([])

        if rnd == 2:
            online_first = {pid[0] for _, pid in bld.delivered if pid[1] == 1}
            adv_schedule = _adversary_first_packets(stage1, online_first, spec.d)
            adversary = frozenset(fid for fid, _ in adv_schedule.values())
        # stage 3: the adversary's frames, one packet per slot, each served on arrival
        s3 = stages.setdefault(f"stage3.{rnd}", [])
        start = max(bld.sim.state.now, max(adv_schedule, default=-1) + 1)
        while bld.sim.state.now < start:
            bld.emit([])
        first_slot = {pid[0]: t for t, pid in adv_schedule.items() if pid[1] == 1}
        order = sorted(adversary, key=first_slot.__getitem__)
        for fid in order:
            now = bld.sim.state.now
            s3.append(now)
            adv_schedule[now] = (fid, rnd)
            bld.emit([bld.packet(fid, rnd)])

    seq = ArrivalSequence.from_packets(spec.k, spec.d, spec.b, bld.packets)
    return LowerBoundInstance(seq, adversary, dict(sorted(adv_schedule.items())), stages, policy.name)


def gen_lower_bound(spec: AdversarySpec, policy: str | Policy = "greedy", seed: int = 0) -> LowerBoundInstance:
    """Staged burst-bounded input that starves ``policy`` of completable frames."""
    if spec.variant != "burst_bounded":
        raise ValueError("gen_lower_bound needs variant='burst_bounded'")
    return _lower_bound(spec, policy, seed)


def gen_token_bucket_lower_bound(
    spec: AdversarySpec, policy: str | Policy = "greedy", seed: int = 0
) -> LowerBoundInstance:
    """Same staging, shaped to a (b, rate 1) token bucket: stage-1 bursts 2d apart, stage-2 bursts b apart."""
    if spec.variant != "token_bucket":
        raise ValueError("gen_token_bucket_lower_bound needs variant='token_bucket'")
    return _lower_bound(spec, policy, seed)


def token_bucket_conforms(seq: ArrivalSequence, burst: int, rate: int = 1) -> bool:
    counts: dict[int, int] = {}
    for p in seq.packets:
        counts[p.arrival] = counts.get(p.arrival, 0) + 1
    level = burst
    prev = 0
    for t in sorted(counts):
        level = min(burst, level + rate * (t - prev))
        if counts[t] > level:
            return False
        level -= counts[t]
        prev = t
    return True
