"""Bounded-delay goodput scheduling of frame-structured packet traffic."""

from .core import (
    ArrivalSequence,
    DropReason,
    Frame,
    FrameStatus,
    Packet,
    SchedulingError,
    SimulationState,
    advance_slot,
    edf_feasible,
    residual_slack,
)
from .engine import ScheduleTrace, Simulation, run, verify_trace
from .offline import OfflineSolution, benchmark_offline, brute_force_optimal, fifo_feasibility_check
from .policies import POLICY_NAMES, make_policy

__all__ = [
    "ArrivalSequence",
    "DropReason",
    "Frame",
    "FrameStatus",
    "Packet",
    "SchedulingError",
    "SimulationState",
    "advance_slot",
    "edf_feasible",
    "residual_slack",
    "ScheduleTrace",
    "Simulation",
    "run",
    "verify_trace",
    "OfflineSolution",
    "benchmark_offline",
    "brute_force_optimal",
    "fifo_feasibility_check",
    "POLICY_NAMES",
    "make_policy",
]
