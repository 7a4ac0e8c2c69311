"""Simulation loop, schedule traces and an independent trace checker."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .core import ArrivalSequence, DropReason, FrameStatus, Packet, SchedulingError, SimulationState
from .policies import Policy, make_policy
from .seqio import sequence_digest

PacketId = tuple[int, int]


@dataclass
class SlotRecord:
    slot: int
    delivered: PacketId | None = None
    drops: list[tuple[PacketId, DropReason]] = field(default_factory=list)


@dataclass
class ScheduleTrace:
    """Everything that happened in one run. Only slots with events are recorded."""

    records: list[SlotRecord]
    statuses: dict[int, FrameStatus]
    policy: str
    seed: int
    digest: str
    k: int
    d: int
    frame_streams: dict[int, int] = field(default_factory=dict)
    offered: frozenset[int] = frozenset()
    total_packets: int = 0

    @property
    def goodput(self) -> int:
        return sum(1 for s in self.statuses.values() if s is FrameStatus.SUCCESSFUL)

    def deliveries(self) -> dict[int, PacketId]:
        return {r.slot: r.delivered for r in self.records if r.delivered is not None}

    def drop_counts(self) -> Counter:
        return Counter(reason for r in self.records for _, reason in r.drops)


class Simulation:
    """Slot-by-slot driver around :class:`SimulationState`; arrivals may be supplied on the fly."""

    def __init__(self, k: int, d: int, policy: Policy):
        self.state = SimulationState(k, d)
        self.policy = policy

    def step(self, arrivals: list[Packet] = ()) -> SlotRecord:
        st = self.state
        t = st.now
        drops = st.arrive(arrivals)
        decision = self.policy.decide(st)
        drops += st.finish_slot(decision.deliver, decision.proactive_drops)
        return SlotRecord(
            t,
            decision.deliver.pid if decision.deliver is not None else None,
            [(p.pid, reason) for p, reason in drops],
        )

    def skip_to(self, slot: int) -> None:
        if self.state.pending:
            raise SchedulingError("cannot skip slots while packets are pending")
        self.state.now = max(self.state.now, slot)


def run(
    seq: ArrivalSequence,
    policy: str | Policy,
    seed: int = 0,
    **policy_config,
) -> ScheduleTrace:
    """Simulate ``policy`` on ``seq`` until every packet is delivered or dropped."""
    if isinstance(policy, str):
        policy = make_policy(policy, seed, **policy_config)
    arrivals = seq.arrivals_by_slot()
    slots = sorted(arrivals)
    sim = Simulation(seq.k, seq.d, policy)
    records = []
    i = 0
    while i < len(slots) or sim.state.pending:
        if not sim.state.pending and slots[i] > sim.state.now:
            sim.skip_to(slots[i])
        now = sim.state.now
        batch = []
        if i < len(slots) and slots[i] == now:
            batch = arrivals[now]
            i += 1
        rec = sim.step(batch)
        if rec.delivered is not None or rec.drops:
            records.append(rec)
    statuses = {f.frame_id: sim.state.status(f.frame_id) for f in seq.frames}
    return ScheduleTrace(
        records=records,
        statuses=statuses,
        policy=policy.name,
        seed=seed,
        digest=sequence_digest(seq),
        k=seq.k,
        d=seq.d,
        frame_streams={f.frame_id: f.stream_id for f in seq.frames},
        offered=frozenset(f.frame_id for f in seq.frames if f.complete),
        total_packets=sum(len(f.packets) for f in seq.frames),
    )


def replay(seq: ArrivalSequence, deliveries: dict[int, PacketId]) -> dict[int, FrameStatus]:
    """Push a fixed delivery schedule through the core slot semantics.

    Raises :class:`SchedulingError` on the first delivery the model forbids.
    """
    packets = {p.pid: p for p in seq.packets}
    arrivals = seq.arrivals_by_slot()
    last = max([seq.horizon, *deliveries]) if deliveries else seq.horizon
    state = SimulationState(seq.k, seq.d)
    for t in range(last + 1):
        pid = deliveries.get(t)
        if pid is not None and pid not in packets:
            raise SchedulingError(f"slot {t}: unknown packet {pid}")
        state.arrive(arrivals.get(t, ()))
        state.finish_slot(packets[pid] if pid is not None else None)
    return {f.frame_id: state.status(f.frame_id) for f in seq.frames}


def verify_trace(seq: ArrivalSequence, trace: ScheduleTrace) -> list[str]:
    """Re-check a trace against the sequence from scratch; returns violations as text."""
    problems = []
    if trace.digest != sequence_digest(seq):
        problems.append("trace digest does not match sequence")
    packets = {}
    for f in seq.frames:
        for p in f.packets:
            packets[(f.frame_id, p.index)] = p

    seen: dict[PacketId, str] = {}
    delivered_by_frame: dict[int, list[int]] = {}
    slots_used: set[int] = set()
    for rec in sorted(trace.records, key=lambda r: r.slot):
        if rec.delivered is not None:
            pid = rec.delivered
            if rec.slot in slots_used:
                problems.append(f"slot {rec.slot}: more than one delivery")
            slots_used.add(rec.slot)
            p = packets.get(pid)
            if p is None:
                problems.append(f"slot {rec.slot}: delivered unknown packet {pid}")
            else:
                if not p.arrival <= rec.slot <= p.deadline:
                    problems.append(
                        f"slot {rec.slot}: packet {pid} delivered outside [{p.arrival}, {p.deadline}]"
                    )
                done = delivered_by_frame.setdefault(pid[0], [])
                if pid[1] != len(done) + 1:
                    problems.append(f"slot {rec.slot}: frame {pid[0]} delivered index {pid[1]} after {done}")
                done.append(pid[1])
            if pid in seen:
                problems.append(f"packet {pid} {seen[pid]} and delivered again")
            seen[pid] = "delivered"
        for pid, reason in rec.drops:
            if pid not in packets:
                problems.append(f"slot {rec.slot}: dropped unknown packet {pid}")
            if pid in seen:
                problems.append(f"packet {pid} {seen[pid]} and dropped again")
            seen[pid] = "dropped"

    missing = set(packets) - set(seen)
    if missing:
        problems.append(f"{len(missing)} packets neither delivered nor dropped, e.g. {min(missing)}")
    for f in seq.frames:
        n = len(delivered_by_frame.get(f.frame_id, ()))
        success = n == seq.k
        status = trace.statuses.get(f.frame_id)
        if success != (status is FrameStatus.SUCCESSFUL):
            problems.append(f"frame {f.frame_id}: {n} deliveries but status {status}")
    return problems


def write_trace(trace: ScheduleTrace, path: str | Path) -> None:
    """One JSON record per line: a header, then delivery/drop events, then final statuses."""
    with open(path, "w") as fh:
        header = {
            "type": "header",
            "policy": trace.policy,
            "seed": trace.seed,
            "digest": trace.digest,
            "k": trace.k,
            "d": trace.d,
            "total_packets": trace.total_packets,
        }
        fh.write(json.dumps(header) + "\n")
        for rec in trace.records:
            if rec.delivered is not None:
                f, i = rec.delivered
                fh.write(json.dumps({"type": "deliver", "slot": rec.slot, "frame": f, "idx": i}) + "\n")
            for (f, i), reason in rec.drops:
                fh.write(
                    json.dumps({"type": "drop", "slot": rec.slot, "frame": f, "idx": i, "reason": reason.value})
                    + "\n"
                )
        for fid in sorted(trace.statuses):
            fh.write(
                json.dumps(
                    {
                        "type": "frame",
                        "frame": fid,
                        "stream": trace.frame_streams.get(fid, 0),
                        "offered": fid in trace.offered,
                        "status": trace.statuses[fid].value,
                    }
                )
                + "\n"
            )


def read_trace(path: str | Path) -> ScheduleTrace:
    header = None
    records: dict[int, SlotRecord] = {}
    statuses, streams, offered = {}, {}, set()
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            ev = json.loads(line)
            kind = ev["type"]
            if kind == "header":
                header = ev
            elif kind == "deliver":
                rec = records.setdefault(ev["slot"], SlotRecord(ev["slot"]))
                if rec.delivered is not None:
                    # keep both so the checker can flag it
                    rec = SlotRecord(ev["slot"])
                    records[(ev["slot"], len(records))] = rec
                rec.delivered = (ev["frame"], ev["idx"])
            elif kind == "drop":
                rec = records.setdefault(ev["slot"], SlotRecord(ev["slot"]))
                rec.drops.append(((ev["frame"], ev["idx"]), DropReason(ev["reason"])))
            elif kind == "frame":
                statuses[ev["frame"]] = FrameStatus(ev["status"])
                streams[ev["frame"]] = ev["stream"]
                if ev["offered"]:
                    offered.add(ev["frame"])
    if header is None:
        raise ValueError(f"{path}: missing trace header")
    return ScheduleTrace(
        records=sorted(records.values(), key=lambda r: r.slot),
        statuses=statuses,
        policy=header["policy"],
        seed=header["seed"],
        digest=header["digest"],
        k=header["k"],
        d=header["d"],
        frame_streams=streams,
        offered=frozenset(offered),
        total_packets=header["total_packets"],
    )
