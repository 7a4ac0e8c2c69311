"""Line-oriented sequence files.

::

    # comment
    k=2 d=4 b=4
    frame=1 stream=0 idx=1 arrive=0 deadline=4
    frame=1 stream=0 idx=2 arrive=1 deadline=5

Packet lines are written sorted by ``(arrive, frame, idx)``.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from pathlib import Path

from .core import ArrivalSequence, Packet


class SequenceParseError(ValueError):
    def __init__(self, lineno: int, field: str, message: str):
        super().__init__(f"line {lineno}: field {field!r}: {message}")
        self.lineno = lineno
        self.field = field


HEADER_FIELDS = ("k", "d", "b")
PACKET_FIELDS = ("frame", "stream", "idx", "arrive", "deadline")


def format_sequence(seq: ArrivalSequence) -> str:
    lines = [f"k={seq.k} d={seq.d} b={seq.b}"]
    for p in sorted(seq.packets, key=lambda p: (p.arrival, p.frame_id, p.index)):
        lines.append(
            f"frame={p.frame_id} stream={p.stream_id} idx={p.index} arrive={p.arrival} deadline={p.deadline}"
        )
    return "\n".join(lines) + "\n"


def sequence_digest(seq: ArrivalSequence) -> str:
    return hashlib.sha256(format_sequence(seq).encode()).hexdigest()


def _fields(line: str, lineno: int, expected: tuple[str, ...]) -> dict[str, int]:
    out: dict[str, int] = {}
    for token in line.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise SequenceParseError(lineno, token, "expected key=value")
        if key not in expected:
            raise SequenceParseError(lineno, key, "unknown field")
        try:
            out[key] = int(value)
        except ValueError:
            raise SequenceParseError(lineno, key, f"not an integer: {value!r}") from None
    for key in expected:
        if key not in out:
            raise SequenceParseError(lineno, key, "missing")
    return out


def parse_sequence(text: str) -> ArrivalSequence:
    header = None
    packets: list[Packet] = []
    seen: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            header = _fields(line, lineno, HEADER_FIELDS)
            continue
        f = _fields(line, lineno, PACKET_FIELDS)
        if not 1 <= f["idx"] <= header["k"]:
            raise SequenceParseError(lineno, "idx", f"must be in 1..{header['k']}, got {f['idx']}")
        if f["deadline"] < f["arrive"]:
            raise SequenceParseError(lineno, "deadline", "earlier than arrive")
        if (f["frame"], f["idx"]) in seen:
            raise SequenceParseError(lineno, "idx", f"duplicate packet for frame {f['frame']}")
        seen.add((f["frame"], f["idx"]))
        packets.append(Packet(f["frame"], f["idx"], f["arrive"], f["deadline"], f["stream"]))
    if header is None:
        raise SequenceParseError(0, "k", "missing header line")
    return ArrivalSequence.from_packets(header["k"], header["d"], header["b"], packets)


def write_sequence(seq: ArrivalSequence, path: str | Path) -> None:
    Path(path).write_text(format_sequence(seq))


def read_sequence(path: str | Path) -> ArrivalSequence:
    return parse_sequence(Path(path).read_text())


def validate_sequence(seq: ArrivalSequence) -> list[str]:
    """Model violations in ``seq``; an empty list means the sequence is valid."""
    problems = []
    if seq.k > seq.d:
        problems.append(f"frame size k={seq.k} exceeds slack d={seq.d}")
    per_slot = Counter(p.arrival for p in seq.packets)
    for slot, n in sorted(per_slot.items()):
        if n > seq.b:
            problems.append(f"burst: {n} arrivals at slot {slot} exceed b={seq.b}")
    for f in seq.frames:
        if len(f.packets) > seq.k:
            problems.append(f"frame {f.frame_id}: {len(f.packets)} packets exceed k={seq.k}")
        for p in f.packets:
            if not 1 <= p.index <= seq.k:
                problems.append(f"frame {f.frame_id}: index {p.index} outside 1..{seq.k}")
            if p.deadline - p.arrival != seq.d:
                problems.append(f"frame {f.frame_id} idx {p.index}: slack {p.slack} != d={seq.d}")
            if p.stream_id != f.stream_id:
                problems.append(f"frame {f.frame_id} idx {p.index}: stream {p.stream_id} != {f.stream_id}")
        for prev, nxt in zip(f.packets, f.packets[1:]):
            if nxt.arrival < prev.arrival:
                problems.append(
                    f"order: frame {f.frame_id} idx {nxt.index} arrives at {nxt.arrival} before idx {prev.index} at {prev.arrival}"
                )
    return problems
