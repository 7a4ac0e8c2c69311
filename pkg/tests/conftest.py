"""Independent oracles shared by the test modules.

None of these reuse the library's EDF code: feasibility is decided by
plain backtracking over slot assignments.
"""

import itertools

from bdgsim.core import Packet


def assignment_feasible(packets, start):
    """Exhaustive search for distinct slots s(p) in [max(start, a), e]."""
    windows = sorted(((max(start, p.arrival), p.deadline) for p in packets), key=lambda w: w[1] - w[0])
    used = set()

    def place(i):
        if i == len(windows):
            return True
        lo, hi = windows[i]
        for s in range(lo, hi + 1):
            if s not in used:
                used.add(s)
                if place(i + 1):
                    return True
                used.discard(s)
        return False

    return place(0)


def matching_feasible(packets, start):
    """Bipartite packet-to-slot matching by augmenting paths (Kuhn)."""
    windows = [(max(start, p.arrival), p.deadline) for p in packets]
    owner = {}

    def augment(i, seen):
        lo, hi = windows[i]
        for s in range(lo, hi + 1):
            if s in seen:
                continue
            seen.add(s)
            if s not in owner or augment(owner[s], seen):
                owner[s] = i
                return True
        return False

    return all(augment(i, set()) for i in range(len(windows)))


def subset_optimum(seq):
    """Largest frame subset whose packets admit a slot assignment (2^F enumeration)."""
    frames = [f for f in seq.frames if f.complete]
    for r in range(len(frames), 0, -1):
        for combo in itertools.combinations(frames, r):
            if matching_feasible([p for f in combo for p in f.packets], 0):
                return r
    return 0


def pk(frame, idx, a, e, stream=0):
    return Packet(frame, idx, a, e, stream)


# acceptance lines, printed once at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
