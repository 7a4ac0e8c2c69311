"""Domain types and per-slot semantics of the bounded-delay goodput model.

Time is slotted. Every slot runs three substeps in order:

1. arrival: packets whose arrival slot is ``t`` join the queue,
2. delivery: at most one pending packet is sent over the unit-capacity link,
3. cleanup: packets that can no longer make their deadline are discarded.

A frame is worth one unit of goodput only when all ``k`` of its packets are
delivered by their deadlines.
"""

from __future__ import annotations

import enum
import heapq
from collections.abc import Iterable
from dataclasses import dataclass, field


class SchedulingError(ValueError):
    """A delivery or drop request that breaks the model's rules."""


class DropReason(str, enum.Enum):
    EXPIRED_DEADLINE = "expired_deadline"
    FRAME_INFEASIBLE = "frame_infeasible"
    FRAME_DEAD_ON_ARRIVAL = "frame_dead_on_arrival"
    PROACTIVE_POLICY_DROP = "proactive_policy_drop"


class FrameStatus(str, enum.Enum):
    ALIVE = "alive"
    EXPIRED = "expired"
    SUCCESSFUL = "successful"


@dataclass(frozen=True, order=True)
class Packet:
    """A unit-size packet; ``index`` is its 1-based position inside the frame."""

    frame_id: int
    index: int
    arrival: int
    deadline: int
    stream_id: int = 0

    def __post_init__(self):
        if self.deadline < self.arrival:
            raise ValueError(f"packet {self.pid}: deadline {self.deadline} < arrival {self.arrival}")
        if self.index < 1:
            raise ValueError(f"packet {self.pid}: index must be >= 1")

    @property
    def pid(self) -> tuple[int, int]:
        return (self.frame_id, self.index)

    @property
    def slack(self) -> int:
        return self.deadline - self.arrival


@dataclass(frozen=True)
class Frame:
    frame_id: int
    stream_id: int
    size: int
    packets: tuple[Packet, ...]

    @property
    def complete(self) -> bool:
        """True when all ``size`` packets exist in the sequence."""
        return len(self.packets) == self.size

    @property
    def first_arrival(self) -> int:
        return self.packets[0].arrival

    @property
    def last_arrival(self) -> int:
        return self.packets[-1].arrival


@dataclass(frozen=True)
class ArrivalSequence:
    """Frames plus the declared parameters ``k`` (frame size), ``d`` (slack), ``b`` (burst bound).

    Frames may hold fewer than ``k`` packets (the adversarial constructions
    never send the tail of some frames); such frames can never succeed.
    """

    k: int
    d: int
    b: int
    frames: tuple[Frame, ...] = ()

    def __post_init__(self):
        frames = tuple(sorted(self.frames, key=lambda f: f.frame_id))
        ids = [f.frame_id for f in frames]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate frame ids")
        object.__setattr__(self, "frames", frames)

    @classmethod
    def from_packets(cls, k: int, d: int, b: int, packets: Iterable[Packet]) -> ArrivalSequence:
        by_frame: dict[int, list[Packet]] = {}
        for p in packets:
            by_frame.setdefault(p.frame_id, []).append(p)
        frames = []
        for fid, ps in by_frame.items():
            ps.sort(key=lambda p: p.index)
            frames.append(Frame(fid, ps[0].stream_id, k, tuple(ps)))
        return cls(k, d, b, tuple(frames))

    @property
    def packets(self) -> list[Packet]:
        return [p for f in self.frames for p in f.packets]

    @property
    def horizon(self) -> int:
        """Last slot with any activity (the latest deadline), -1 when empty."""
        return max((p.deadline for f in self.frames for p in f.packets), default=-1)

    def arrivals_by_slot(self) -> dict[int, list[Packet]]:
        out: dict[int, list[Packet]] = {}
        for f in self.frames:
            for p in f.packets:
                out.setdefault(p.arrival, []).append(p)
        for ps in out.values():
            ps.sort(key=lambda p: (p.frame_id, p.index))
        return out

    def frame(self, frame_id: int) -> Frame:
        for f in self.frames:
            if f.frame_id == frame_id:
                return f
        raise KeyError(frame_id)

    def frame_map(self) -> dict[int, Frame]:
        return {f.frame_id: f for f in self.frames}


def residual_slack(p: Packet, t: int) -> int:
    if t > p.deadline:
        raise SchedulingError(f"packet {p.pid} expired at {p.deadline}, asked at slot {t}")
    return p.deadline - t


def edf_feasible(packets: Iterable[Packet], start: int) -> bool:
    """Can every packet get its own slot in ``[max(start, arrival), deadline]``?

    Earliest-deadline-first is exact for unit jobs with release times.
    """
    jobs = sorted(((max(start, p.arrival), p.deadline) for p in packets))
    heap: list[int] = []
    t = start
    i = 0
    n = len(jobs)
    while i < n or heap:
        if not heap and jobs[i][0] > t:
            t = jobs[i][0]
        while i < n and jobs[i][0] <= t:
            heapq.heappush(heap, jobs[i][1])
            i += 1
        if heapq.heappop(heap) < t:
            return False
        t += 1
    return True


def _released_feasible(deadlines: list[int], start: int) -> bool:
    # all jobs already released: sorted deadlines must clear start, start+1, ...
    for i, e in enumerate(sorted(deadlines)):
        if e < start + i:
            return False
    return True


@dataclass
class SimulationState:
    """Mutable queue state of one run.

    ``pending`` maps a frame id to its pending packets in index order; only
    alive frames with at least one pending packet appear there.
    """

    k: int
    d: int
    now: int = 0
    pending: dict[int, list[Packet]] = field(default_factory=dict)
    frame_status: dict[int, FrameStatus] = field(default_factory=dict)
    delivered_count: dict[int, int] = field(default_factory=dict)

    def status(self, frame_id: int) -> FrameStatus:
        return self.frame_status.get(frame_id, FrameStatus.ALIVE)

    def queue(self) -> list[int]:
        """Alive frames with pending packets (Q_t), in frame-id order."""
        return sorted(self.pending)

    def first_pending(self, frame_id: int) -> Packet:
        return self.pending[frame_id][0]

    def first_index(self, frame_id: int) -> int:
        return self.pending[frame_id][0].index

    def pending_count(self, frame_id: int) -> int:
        return len(self.pending.get(frame_id, ()))

    def pending_packets(self) -> list[Packet]:
        return [p for ps in self.pending.values() for p in ps]

    # substep (i)
    def arrive(self, packets: Iterable[Packet]) -> list[tuple[Packet, DropReason]]:
        drops = []
        for p in sorted(packets, key=lambda p: (p.frame_id, p.index)):
            if p.arrival != self.now:
                raise SchedulingError(f"packet {p.pid} arrives at {p.arrival}, state is at slot {self.now}")
            if self.status(p.frame_id) is not FrameStatus.ALIVE:
                drops.append((p, DropReason.FRAME_DEAD_ON_ARRIVAL))
                continue
            queue = self.pending.setdefault(p.frame_id, [])
            if queue and queue[-1].index >= p.index:
                raise SchedulingError(f"packet {p.pid} arrives out of in-frame order")
            queue.append(p)
        return drops

    # substeps (ii) and (iii); advances the clock
    def finish_slot(
        self, delivery: Packet | None = None, proactive_drops: Iterable[Packet] = ()
    ) -> list[tuple[Packet, DropReason]]:
        t = self.now
        drops: list[tuple[Packet, DropReason]] = []

        for p in proactive_drops:
            if delivery is not None and p == delivery:
                raise SchedulingError(f"packet {p.pid} both delivered and dropped")
            queue = self.pending.get(p.frame_id)
            if not queue or p not in queue:
                raise SchedulingError(f"proactive drop of non-pending packet {p.pid}")
            queue.remove(p)
            if not queue:
                del self.pending[p.frame_id]
            self.frame_status[p.frame_id] = FrameStatus.EXPIRED
            drops.append((p, DropReason.PROACTIVE_POLICY_DROP))

        if delivery is not None:
            fid = delivery.frame_id
            if self.status(fid) is not FrameStatus.ALIVE:
                raise SchedulingError(f"delivery of {delivery.pid} from {self.status(fid).value} frame")
            queue = self.pending.get(fid)
            if not queue or delivery not in queue:
                raise SchedulingError(f"delivery of non-pending packet {delivery.pid}")
            if queue[0] != delivery:
                raise SchedulingError(
                    f"in-frame order violation: delivering index {delivery.index}, first pending is {queue[0].index}"
                )
            if delivery.deadline < t:
                raise SchedulingError(f"delivery of {delivery.pid} after its deadline")
            queue.pop(0)
            if not queue:
                del self.pending[fid]
            w = self.delivered_count.get(fid, 0) + 1
            self.delivered_count[fid] = w
            if w == self.k:
                self.frame_status[fid] = FrameStatus.SUCCESSFUL

        for fid in list(self.pending):
            queue = self.pending[fid]
            if self.status(fid) is not FrameStatus.ALIVE:
                drops.extend((p, DropReason.FRAME_INFEASIBLE) for p in queue)
            elif any(p.deadline <= t for p in queue):
                self.frame_status[fid] = FrameStatus.EXPIRED
                for p in queue:
                    reason = DropReason.EXPIRED_DEADLINE if p.deadline <= t else DropReason.FRAME_INFEASIBLE
                    drops.append((p, reason))
            elif len(queue) > 1 and not _released_feasible([p.deadline for p in queue], t + 1):
                self.frame_status[fid] = FrameStatus.EXPIRED
                drops.extend((p, DropReason.FRAME_INFEASIBLE) for p in queue)
            else:
                continue
            del self.pending[fid]

        self.now = t + 1
        return drops


def advance_slot(
    state: SimulationState,
    arrivals: Iterable[Packet] = (),
    delivery: Packet | None = None,
    proactive_drops: Iterable[Packet] = (),
) -> list[tuple[Packet, DropReason]]:
    """Run one full slot on ``state`` in place; returns the packets removed undelivered."""
    drops = state.arrive(arrivals)
    drops.extend(state.finish_slot(delivery, proactive_drops))
    return drops
