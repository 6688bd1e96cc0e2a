"""Pairwise right-of-way negotiation between two conflicting robots.

Two robots take turns; each turn one of them queries its chat model with its
own mission context and the dialogue so far, and the reply goes into the
shared transcript. The exchange ends as soon as a reply carries an agreement
line ``{a: high priority, b: low priority}``. If the model never converges or
the service fails, the deterministic scripted rule decides instead.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, MutableMapping, Optional

from faca.chat import ChatClient, TransportError

PRIORITY_EPS = 1e-6
DISTANCE_EPS = 1e-6
PROMPT_FORMAT_VERSION = 1


class SamePair(ValueError):
    """A session for this unordered pair is already open (or the pair is degenerate)."""


class UnknownRobot(KeyError):
    pass


class MalformedReply(ValueError):
    """The dialogue ended without a parseable agreement."""


@dataclass(frozen=True)
class MissionContext:
    robot_id: str
    mission_text: str
    priority: float
    distance_to_goal: float
    urgency_note: Optional[str] = None

    def __post_init__(self):
        if not self.priority > 0:
            raise ValueError(f"priority must be > 0, got {self.priority}")


@dataclass(frozen=True)
class PriorityAssignment:
    high: str
    low: str
    # empty until bound to concrete priority values (see ``bind``)
    new_priorities: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.high == self.low:
            raise ValueError("high and low must be different robots")
        if self.new_priorities and not self.new_priorities[self.high] > self.new_priorities[self.low]:
            raise ValueError("new priority of the high robot must exceed the low robot's")

    def bind(self, priorities: Mapping[str, float]) -> PriorityAssignment:
        """Concrete values from current priorities: winner gets max + 1, loser min."""
        a, b = priorities[self.high], priorities[self.low]
        return PriorityAssignment(self.high, self.low,
                                  {self.high: max(a, b) + 1.0, self.low: min(a, b)})


@dataclass
class NegotiationSession:
    pair: tuple[str, str]
    max_rounds: int
    transcript: list[tuple[str, str]] = field(default_factory=list)
    outcome: Optional[PriorityAssignment] = None
    fallback: bool = False
    fallback_reason: Optional[str] = None

    @property
    def first_speaker(self) -> str:
        return self.pair[0]

    def next_speaker(self) -> str:
        return self.pair[len(self.transcript) % 2]

    def add(self, speaker: str, text: str):
        if speaker != self.next_speaker():
            raise ValueError(f"{speaker} spoke out of turn")
        if len(self.transcript) >= 2 * self.max_rounds:
            raise ValueError("transcript is full")
        self.transcript.append((speaker, text))


def pair_key(a: str, b: str) -> frozenset:
    return frozenset((a, b))


def open_session(ctx_i: MissionContext, ctx_j: MissionContext, max_rounds: int = 6,
                 active: Optional[MutableMapping[frozenset, NegotiationSession]] = None
                 ) -> NegotiationSession:
    """Start a session; the lexicographically smaller id speaks first.

    ``active`` tracks open sessions by unordered pair; opening a pair that is
    already in it raises ``SamePair``.
    """
    if ctx_i.robot_id == ctx_j.robot_id:
        raise SamePair(f"cannot negotiate {ctx_i.robot_id} with itself")
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    key = pair_key(ctx_i.robot_id, ctx_j.robot_id)
    if active is not None and key in active:
        raise SamePair(f"session for {sorted(key)} already open")
    session = NegotiationSession(tuple(sorted(key)), max_rounds)
    if active is not None:
        active[key] = session
    return session


def scripted_negotiate(ctx_i: MissionContext, ctx_j: MissionContext) -> PriorityAssignment:
    """Higher priority wins; then shorter distance to goal; then smaller id."""
    if abs(ctx_i.priority - ctx_j.priority) > PRIORITY_EPS:
        i_wins = ctx_i.priority > ctx_j.priority
    elif abs(ctx_i.distance_to_goal - ctx_j.distance_to_goal) > DISTANCE_EPS:
        i_wins = ctx_i.distance_to_goal < ctx_j.distance_to_goal
    else:
        i_wins = ctx_i.robot_id < ctx_j.robot_id
    hi, lo = (ctx_i, ctx_j) if i_wins else (ctx_j, ctx_i)
    return PriorityAssignment(hi.robot_id, lo.robot_id).bind(
        {hi.robot_id: hi.priority, lo.robot_id: lo.priority})


_ID = r"""["']?([^\s{}:,"']+)["']?"""
_AGREEMENT = re.compile(
    r"\{\s*" + _ID + r"\s*:\s*(high|low)\s+priority\s*,\s*" + _ID
    + r"\s*:\s*(high|low)\s+priority\s*\}",
    re.IGNORECASE)


def parse_agreement(text: str,
                    priorities: Optional[Mapping[str, float]] = None
                    ) -> Optional[PriorityAssignment]:
    """Find ``{a: high priority, b: low priority}`` (either order) in ``text``.

    The last well-formed agreement in the text wins. With ``priorities`` the
    result is bound to concrete values.
    """
    found = None
    for m in _AGREEMENT.finditer(text):
        id1, lvl1, id2, lvl2 = m.group(1), m.group(2).lower(), m.group(3), m.group(4).lower()
        if id1 == id2 or lvl1 == lvl2:
            continue
        found = (id1, id2) if lvl1 == "high" else (id2, id1)
    if found is None:
        return None
    out = PriorityAssignment(*found)
    return out.bind(priorities) if priorities is not None else out


def load_prompt_template() -> str:
    return resources.files("faca").joinpath("prompts/negotiator_system.txt").read_text()


def render_system_prompt(ctx: MissionContext, other_id: str, max_rounds: int,
                         template: Optional[str] = None) -> str:
    template = load_prompt_template() if template is None else template
    body = template.split("\n", 1)[1] if template.startswith("format_version") else template
    return body.format(robot_id=ctx.robot_id, other_id=other_id, mission_text=ctx.mission_text,
                       priority=ctx.priority, distance_to_goal=ctx.distance_to_goal,
                       urgency_note=ctx.urgency_note or "none", max_rounds=max_rounds)


def _messages_for(session: NegotiationSession, me: MissionContext, other_id: str,
                  template: Optional[str]) -> list[dict]:
    msgs = [{"role": "system",
             "content": render_system_prompt(me, other_id, session.max_rounds, template)}]
    if not session.transcript:
        msgs.append({"role": "user",
                     "content": f"Conflict warning: robot {other_id} is on a collision course. "
                                f"Open the negotiation."})
    for speaker, text in session.transcript:
        role = "assistant" if speaker == me.robot_id else "user"
        msgs.append({"role": role, "content": text})
    return msgs


def _fallback(session, ctx_i, ctx_j, reason):
    session.fallback = True
    session.fallback_reason = reason
    session.outcome = scripted_negotiate(ctx_i, ctx_j)
    return session.outcome


def llm_negotiate(session: NegotiationSession, ctx_i: MissionContext, ctx_j: MissionContext,
                  client: ChatClient, fallback: bool = True,
                  template: Optional[str] = None) -> PriorityAssignment:
    ctx = {ctx_i.robot_id: ctx_i, ctx_j.robot_id: ctx_j}
    if set(ctx) != set(session.pair):
        raise UnknownRobot(f"contexts {sorted(ctx)} do not match session pair {session.pair}")
    priorities = {k: c.priority for k, c in ctx.items()}
    while len(session.transcript) < 2 * session.max_rounds:
        speaker = session.next_speaker()
        other = session.pair[1] if speaker == session.pair[0] else session.pair[0]
        try:
            reply = client.complete(_messages_for(session, ctx[speaker], other, template))
        except TransportError as e:
            if not fallback:
                raise
            return _fallback(session, ctx_i, ctx_j, f"transport: {e}")
        session.add(speaker, reply)
        agreed = parse_agreement(reply)
        if agreed is not None and {agreed.high, agreed.low} == set(session.pair):
            session.outcome = agreed.bind(priorities)
            return session.outcome
    if not fallback:
        raise MalformedReply(f"no agreement after {session.max_rounds} rounds")
    return _fallback(session, ctx_i, ctx_j, "no consensus")


def apply_assignment(world_priorities: Mapping[str, float],
                     assignment: PriorityAssignment) -> dict[str, float]:
    for rid in (assignment.high, assignment.low):
        if rid not in world_priorities:
            raise UnknownRobot(rid)
    if not assignment.new_priorities:
        assignment = assignment.bind(world_priorities)
    out = dict(world_priorities)
    out.update(assignment.new_priorities)
    return out


class ScriptedNegotiator:
    name = "scripted"

    def negotiate(self, ctx_i: MissionContext, ctx_j: MissionContext):
        """Returns (assignment, session or None, simulated latency in seconds)."""
        return scripted_negotiate(ctx_i, ctx_j), None, 0.0


class LlmNegotiator:
    name = "llm"

    def __init__(self, client: ChatClient, max_rounds: int = 6, fallback: bool = True,
                 latency: Optional[float] = None, template: Optional[str] = None):
        self.client = client
        self.max_rounds = max_rounds
        self.fallback = fallback
        # None: use measured wall time as the simulated dialogue latency
        self.latency = latency
        self.template = template

    def negotiate(self, ctx_i: MissionContext, ctx_j: MissionContext):
        session = open_session(ctx_i, ctx_j, self.max_rounds)
        t0 = time.perf_counter()
        out = llm_negotiate(session, ctx_i, ctx_j, self.client, self.fallback, self.template)
        elapsed = time.perf_counter() - t0
        return out, session, elapsed if self.latency is None else self.latency
