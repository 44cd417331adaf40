"""Runs one match against five connected agents and records the event log."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from . import core
from .core import (
    AGENT_IDS,
    OVER,
    SKIP,
    GameState,
    Role,
    Species,
    Status,
    TalkEntry,
    VoteRecord,
)
from .protocol import Kind, MalformedMessage, Message, decode_reply, encode, filter_view
from .transport import AgentUnresponsive, Connection

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class MalformedLog(ValueError):
    pass


@dataclass(frozen=True)
class MatchConfig:
    seed: int = 0
    max_talk_turns_per_day: int = 10
    day0_talk_turns: int = 3
    timeout_per_request: float = 60.0

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.max_talk_turns_per_day < 2:
            raise ValueError("max_talk_turns_per_day must be at least 2")
        if self.day0_talk_turns < 1:
            raise ValueError("day0_talk_turns must be at least 1")


class EventLog:
    """Append-only list of match events; one JSON object per line on disk."""

    def __init__(self, events: Iterable[dict[str, Any]] = ()) -> None:
        self.events: list[dict[str, Any]] = list(events)

    def append(self, event: str, day: int, **fields: Any) -> dict[str, Any]:
        record = {"seq": len(self.events), "event": event, "day": day, **fields}
        self.events.append(record)
        return record

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    def of(self, event: str) -> list[dict[str, Any]]:
        return [e for e in self.events if e["event"] == event]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, ensure_ascii=False, separators=(",", ":")) + "\n" for e in self.events)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def from_jsonl(cls, text: str) -> EventLog:
        events = []
        for n, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLog(f"line {n}: {exc}") from exc
            if not isinstance(obj, dict) or "event" not in obj or "day" not in obj:
                raise MalformedLog(f"line {n}: not an event object")
            events.append(obj)
        if not events or events[0]["event"] != "game_start":
            raise MalformedLog("log must start with a game_start event")
        if events[0].get("schema_version") != SCHEMA_VERSION:
            raise MalformedLog(f"unsupported schema_version {events[0].get('schema_version')!r}")
        return cls(events)

    @classmethod
    def read(cls, path: str | Path) -> EventLog:
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"))


class Match:
    """Single-threaded owner of the authoritative game state."""

    def __init__(
        self,
        config: MatchConfig,
        connections: Sequence[Connection],
        on_send: Callable[[int, str], None] | None = None,
    ) -> None:
        if len(connections) != len(AGENT_IDS):
            raise ValueError(f"need {len(AGENT_IDS)} agent connections, got {len(connections)}")
        self.config = config
        self.conns = dict(zip(AGENT_IDS, connections))
        self.on_send = on_send
        self.rng = random.Random(config.seed)
        self.state = core.new_game(core.assign_roles(self.rng), config.seed)
        self.log = EventLog()
        self._sent = {a: 0 for a in AGENT_IDS}  # talk entries already delivered per agent

    # -- messaging -----------------------------------------------------------

    def _send(self, agent: int, kind: Kind, *, turn: int | None = None, final: bool = False) -> str | None:
        view = filter_view(self.state, agent, self._sent[agent], turn=turn, final=final)
        self._sent[agent] = len(self.state.talks)
        message = Message(kind, view)
        line = encode(message)
        if self.on_send is not None:
            self.on_send(agent, line)
        return self.conns[agent].request(line, message.response_expected)

    def _broadcast(self, kind: Kind, agents: Iterable[int]) -> None:
        for a in sorted(agents):
            try:
                self._send(a, kind)
            except AgentUnresponsive:
                # A timed-out stream is closed; notifications to it are dropped.
                log.warning("Agent %d unreachable for %s", a, kind.value)

    def _ask_target(self, agent: int, kind: Kind, valid: Sequence[int]) -> tuple[int, str | None]:
        """Request a target; invalid or missing replies get a seeded random fallback."""
        reason = None
        try:
            reply = decode_reply(self._send(agent, kind) or "")
            if reply.kind is not kind or reply.agent != agent:
                reason = "wrong reply kind"
            elif reply.target not in valid:
                reason = "invalid target"
            else:
                return reply.target, None
        except AgentUnresponsive:
            reason = "timeout"
        except MalformedMessage:
            reason = "malformed reply"
        target = self.rng.choice(sorted(valid))
        log.warning("Agent %d %s reply fell back to %d (%s)", agent, kind.value, target, reason)
        return target, reason

    def _ask_talk(self, agent: int, turn: int, final: bool) -> tuple[str, str | None]:
        try:
            reply = decode_reply(self._send(agent, Kind.TALK, turn=turn, final=final) or "")
        except AgentUnresponsive:
            return SKIP, "timeout"
        except MalformedMessage:
            return SKIP, "malformed reply"
        if reply.kind is not Kind.TALK or reply.agent != agent or not reply.text or not reply.text.strip():
            return SKIP, "invalid reply"
        return reply.text, None

    # -- phases --------------------------------------------------------------

    def talk_phase(self, turns: int) -> None:
        day = self.state.day
        finished: set[int] = set()
        for turn in range(turns):
            order = [a for a in sorted(self.state.alive) if a not in finished]
            if not order:
                break
            self.rng.shuffle(order)
            final = turn == turns - 1
            for idx, agent in enumerate(order):
                text, fallback = self._ask_talk(agent, turn, final)
                self.state = core.add_talk(self.state, TalkEntry(day, turn, idx, agent, text))
                extra = {"fallback": fallback} if fallback else {}
                self.log.append("talk", day, turn=turn, idx=idx, agent=agent, text=text, **extra)
                if text == OVER:
                    finished.add(agent)

    def vote_phase(self) -> None:
        day = self.state.day
        self.state = core.start_vote(self.state)
        votes = []
        for voter in sorted(self.state.alive):
            target, fallback = self._ask_target(voter, Kind.VOTE, core.vote_candidates(self.state, voter))
            votes.append(VoteRecord(day, voter, target))
            extra = {"fallback": fallback} if fallback else {}
            self.log.append("vote", day, agent=voter, target=target, **extra)
        counts: dict[int, int] = {}
        for v in votes:
            counts[v.target] = counts.get(v.target, 0) + 1
        tie = sorted(counts.values()).count(max(counts.values())) > 1
        executed = core.tally_votes(votes, self.state.alive, self.rng)
        self.state = core.record_votes(self.state, votes)
        self.state = core.resolve_elimination(self.state, executed)
        self.log.append("execution", day, target=executed, tie=tie)

    def night_phase(self) -> None:
        day = self.state.day
        if day > 0 and self.state.status is Status.ONGOING:
            wolf = self.state.werewolf
            target, fallback = self._ask_target(wolf, Kind.ATTACK, core.attack_candidates(self.state))
            self.state = core.resolve_attack(self.state, target)
            extra = {"fallback": fallback} if fallback else {}
            self.log.append("attack", day, agent=wolf, target=target, **extra)
        seer = self.state.seer
        if self.state.status is Status.ONGOING and seer in self.state.alive:
            target, fallback = self._ask_target(seer, Kind.DIVINE, core.divine_candidates(self.state))
            self.state, record = core.divine(self.state, target)
            extra = {"fallback": fallback} if fallback else {}
            self.log.append("divine", day, agent=seer, target=target, result=record.result.value, **extra)

    def _day_start(self, turns: int) -> None:
        self.log.append("day_start", self.state.day, alive=sorted(self.state.alive), talk_turns=turns)
        self._broadcast(Kind.DAILY_INITIALIZE, self.state.alive)

    def run(self) -> EventLog:
        cfg = self.config
        self.log.append(
            "game_start",
            0,
            schema_version=SCHEMA_VERSION,
            seed=cfg.seed,
            roles={str(a): r.value for a, r in sorted(self.state.roles.items())},
            config={
                "max_talk_turns_per_day": cfg.max_talk_turns_per_day,
                "day0_talk_turns": cfg.day0_talk_turns,
            },
        )
        self._broadcast(Kind.INITIALIZE, AGENT_IDS)

        self._day_start(cfg.day0_talk_turns)
        self.talk_phase(cfg.day0_talk_turns)
        self.state = core.start_night(self.state)
        self._broadcast(Kind.DAILY_FINISH, self.state.alive)
        self.night_phase()

        while self.state.status is Status.ONGOING:
            self.state = core.next_day(self.state)
            self._day_start(cfg.max_talk_turns_per_day)
            self.talk_phase(cfg.max_talk_turns_per_day)
            self.vote_phase()
            if self.state.status is not Status.ONGOING:
                break
            self._broadcast(Kind.DAILY_FINISH, self.state.alive)
            self.night_phase()

        self.log.append(
            "game_end",
            self.state.day,
            winner=self.state.status.winner.value,
            alive=sorted(self.state.alive),
        )
        self._broadcast(Kind.FINISH, AGENT_IDS)
        return self.log


def run_match(
    config: MatchConfig,
    connections: Sequence[Connection],
    on_send: Callable[[int, str], None] | None = None,
) -> EventLog:
    return Match(config, connections, on_send).run()


def replay(events: Iterable[dict[str, Any]]) -> GameState:
    """Rebuild the final game state by applying logged events through the rules."""
    state: GameState | None = None
    pending: list[VoteRecord] = []
    try:
        for ev in events:
            kind, day = ev["event"], ev["day"]
            if kind == "game_start":
                roles = {int(a): Role(r) for a, r in ev["roles"].items()}
                state = core.new_game(roles, ev["seed"])
                continue
            if state is None:
                raise MalformedLog("event before game_start")
            if kind == "day_start":
                if day != state.day:
                    state = core.next_day(state)
            elif kind == "talk":
                state = core.add_talk(state, TalkEntry(day, ev["turn"], ev["idx"], ev["agent"], ev["text"]))
            elif kind == "vote":
                if state.phase is core.Phase.TALK:
                    state = core.start_vote(state)
                pending.append(VoteRecord(day, ev["agent"], ev["target"]))
            elif kind == "execution":
                state = core.record_votes(state, pending)
                pending = []
                state = core.resolve_elimination(state, ev["target"])
            elif kind == "attack":
                state = core.resolve_attack(state, ev["target"])
            elif kind == "divine":
                if state.phase is core.Phase.TALK:
                    state = core.start_night(state)
                state, record = core.divine(state, ev["target"])
                if record.result is not Species(ev["result"]):
                    raise MalformedLog(f"divine result mismatch at seq {ev.get('seq')}")
            elif kind == "game_end":
                if state.status.winner is None or state.status.winner.value != ev["winner"]:
                    raise MalformedLog("game_end winner disagrees with the replayed state")
            else:
                raise MalformedLog(f"unknown event {kind!r}")
    except (KeyError, TypeError) as exc:
        raise MalformedLog(f"bad event: {exc}") from exc
    if state is None:
        raise MalformedLog("empty log")
    return state

