"""Online scheduling policies.

Every policy looks at the state during the delivery substep and returns a
:class:`PolicyDecision`. Frames are ranked first by ``I_t(f)``, the index of
their first pending packet (frames closer to completion win); the remaining
ties go through a :class:`TieBreakChain` that always ends in a seeded but
fixed random priority over streams.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

from .core import Packet, SimulationState


class TieBreak(str, enum.Enum):
    MIN_SLACK = "min_residual_slack_of_first_pending"
    MIN_PENDING = "min_pending_count"
    RANDOM = "fixed_random_stream_priority"


class ProvisionalRule(str, enum.Enum):
    # count(slack <= s) <= s + 1: slots t..t+s are s + 1 delivery opportunities
    SLOT_COUNT = "slot_count"
    # count(slack <= s) <= s, read literally
    LITERAL = "literal"


@dataclass(frozen=True)
class PolicyDecision:
    deliver: Packet | None = None
    proactive_drops: tuple[Packet, ...] = ()


@dataclass(frozen=True)
class TieBreakChain:
    criteria: tuple[TieBreak, ...] = (TieBreak.RANDOM,)
    seed: int = 0
    _ranks: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        crit = tuple(TieBreak(c) for c in self.criteria)
        if TieBreak.RANDOM in crit[:-1]:
            raise ValueError("the random priority must be the last tie-break criterion")
        if not crit or crit[-1] is not TieBreak.RANDOM:
            crit = crit + (TieBreak.RANDOM,)
        object.__setattr__(self, "criteria", crit)

    def rank(self, frame: Packet) -> tuple[float, int]:
        """Fixed random rank of the frame's stream, or of the frame itself for stream 0."""
        kind, ident = ("s", frame.stream_id) if frame.stream_id else ("f", frame.frame_id)
        r = self._ranks.get((kind, ident))
        if r is None:
            r = random.Random(f"{self.seed}:{kind}:{ident}").random()
            self._ranks[(kind, ident)] = r
        return (r, frame.frame_id)

    def key(self, state: SimulationState, frame_id: int) -> tuple:
        first = state.first_pending(frame_id)
        parts: list = []
        for c in self.criteria:
            if c is TieBreak.MIN_SLACK:
                parts.append(first.deadline - state.now)
            elif c is TieBreak.MIN_PENDING:
                parts.append(state.pending_count(frame_id))
            else:
                parts.extend(self.rank(first))
        return tuple(parts)


class Policy:
    name = "policy"

    def __init__(self, tie_break: TieBreakChain | None = None):
        self.tie_break = tie_break or TieBreakChain()

    def decide(self, state: SimulationState) -> PolicyDecision:
        raise NotImplementedError

    def _select_max_index(self, state: SimulationState) -> int | None:
        q = state.queue()
        if not q:
            return None
        return min(q, key=lambda f: (-state.first_index(f), self.tie_break.key(state, f)))


class ProactiveGreedy(Policy):
    """Serve the frame closest to completion and drop every other pending frame."""

    name = "pg"

    def decide(self, state):
        f = self._select_max_index(state)
        if f is None:
            return PolicyDecision()
        drops = tuple(p for g in state.queue() if g != f for p in state.pending[g])
        return PolicyDecision(state.first_pending(f), drops)


class Greedy(Policy):
    """Serve the frame closest to completion; never drops on its own."""

    name = "greedy"

    def decide(self, state):
        f = self._select_max_index(state)
        if f is None:
            return PolicyDecision()
        return PolicyDecision(state.first_pending(f))


class GreedySlack(Greedy):
    name = "greedy-slack"

    def __init__(self, tie_break: TieBreakChain | None = None, seed: int = 0):
        super().__init__(tie_break or TieBreakChain((TieBreak.MIN_SLACK,), seed))


def build_provisional_schedule(
    state: SimulationState,
    rule: ProvisionalRule = ProvisionalRule.SLOT_COUNT,
    tie_break: TieBreakChain | None = None,
) -> list[int]:
    """Frames admitted to the provisional schedule F_t, in admission order.

    Candidates are visited by decreasing ``I_t(f)``, then by increasing
    residual slack of their first pending packet. A frame is admitted when,
    with all of its pending packets added, no prefix ``slack <= s`` of the
    schedule holds more packets than ``rule`` allows.
    """
    tie_break = tie_break or TieBreakChain()
    t = state.now
    q = state.queue()
    if not q:
        return []
    order = sorted(
        q,
        key=lambda f: (-state.first_index(f), state.first_pending(f).deadline - t, tie_break.rank(state.first_pending(f))),
    )
    horizon = max(p.deadline for f in q for p in state.pending[f]) - t
    counts = [0] * (horizon + 1)
    extra = 1 if rule is ProvisionalRule.SLOT_COUNT else 0
    admitted: list[int] = []
    for f in order:
        trial = counts[:]
        for p in state.pending[f]:
            trial[p.deadline - t] += 1
        total = 0
        ok = True
        for s, c in enumerate(trial):
            total += c
            if total > s + extra:
                ok = False
                break
        # the top frame is alive, so it always fits on its own
        if ok or not admitted:
            admitted.append(f)
            counts = trial
    return admitted


class Opportunistic(Policy):
    """Deliver the most urgent first-pending packet among provisionally admitted frames."""

    name = "opportunistic"

    def __init__(self, tie_break: TieBreakChain | None = None, rule: ProvisionalRule = ProvisionalRule.SLOT_COUNT):
        super().__init__(tie_break)
        self.rule = ProvisionalRule(rule)

    def decide(self, state):
        admitted = build_provisional_schedule(state, self.rule, self.tie_break)
        if not admitted:
            return PolicyDecision()
        # min() keeps the earliest admitted frame on equal slack
        f = min(admitted, key=lambda g: state.first_pending(g).deadline)
        return PolicyDecision(state.first_pending(f))


POLICY_NAMES = ("pg", "greedy", "greedy-slack", "opportunistic")


def make_policy(
    name: str,
    seed: int = 0,
    tie_break: tuple[str, ...] | None = None,
    provisional_rule: str = "slot_count",
) -> Policy:
    """Build a policy by its CLI name. ``tie_break`` overrides the named default chain."""
    chain = TieBreakChain(tuple(tie_break), seed) if tie_break is not None else None
    if name == "pg":
        return ProactiveGreedy(chain or TieBreakChain(seed=seed))
    if name == "greedy":
        return Greedy(chain or TieBreakChain(seed=seed))
    if name == "greedy-slack":
        return GreedySlack(chain, seed=seed)
    if name == "opportunistic":
        return Opportunistic(chain or TieBreakChain(seed=seed), ProvisionalRule(provisional_rule))
    raise ValueError(f"unknown policy {name!r}; valid names: {', '.join(POLICY_NAMES)}")
