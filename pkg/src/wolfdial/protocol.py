"""Newline-delimited JSON messages between the orchestrator and agents.

Requests flow orchestrator -> agent as :class:`Message`; replies flow back as
:class:`Reply`. Both encode to exactly one line of UTF-8 JSON with a fixed key
order, so ``encode(decode(line)) == line`` for every line we produce.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Any

from .core import (
    AGENT_IDS,
    DivineRecord,
    GameState,
    Phase,
    Role,
    Species,
    TalkEntry,
    VoteRecord,
)

MESSAGE_FIELDS = (
    "kind",
    "day",
    "phase",
    "agent",
    "role",
    "alive",
    "talk",
    "executed",
    "attacked",
    "divine",
    "votes",
    "turn",
    "final",
)


class Kind(str, enum.Enum):
    INITIALIZE = "INITIALIZE"
    DAILY_INITIALIZE = "DAILY_INITIALIZE"
    TALK = "TALK"
    VOTE = "VOTE"
    DIVINE = "DIVINE"
    ATTACK = "ATTACK"
    DAILY_FINISH = "DAILY_FINISH"
    FINISH = "FINISH"


TARGET_KINDS = frozenset({Kind.VOTE, Kind.DIVINE, Kind.ATTACK})


class MalformedMessage(ValueError):
    pass


@dataclass(frozen=True)
class GameView:
    viewer: int
    day: int
    phase: Phase
    role: Role
    alive: tuple[int, ...]
    talk: tuple[TalkEntry, ...] = ()
    executed: int | None = None
    attacked: int | None = None
    divine: DivineRecord | None = None
    votes: tuple[VoteRecord, ...] = ()
    turn: int | None = None
    final: bool = False


@dataclass(frozen=True)
class Message:
    kind: Kind
    view: GameView

    @property
    def response_expected(self) -> bool:
        return self.kind is Kind.TALK or self.kind in TARGET_KINDS


@dataclass(frozen=True)
class Reply:
    kind: Kind
    agent: int
    text: str | None = None
    target: int | None = None


def filter_view(
    state: GameState,
    viewer: int,
    since: int = 0,
    *,
    turn: int | None = None,
    final: bool = False,
) -> GameView:
    """Project ``state`` onto what ``viewer`` may know.

    ``since`` is the number of talk entries the viewer has already been sent.
    """
    if viewer not in AGENT_IDS:
        raise ValueError(f"unknown viewer {viewer}")
    role = state.roles[viewer]
    divine = None
    if role is Role.SEER:
        own = [d for d in state.divinations if d.seer == viewer]
        divine = own[-1] if own else None
    return GameView(
        viewer=viewer,
        day=state.day,
        phase=state.phase,
        role=role,
        alive=tuple(sorted(state.alive)),
        talk=tuple(state.talks[since:]),
        executed=state.executions[-1].target if state.executions else None,
        attacked=state.attacks[-1].target if state.attacks else None,
        divine=divine,
        votes=state.votes,
        turn=turn,
        final=final,
    )


def _talk_to_obj(t: TalkEntry) -> dict[str, Any]:
    return {"day": t.day, "turn": t.turn, "idx": t.idx, "agent": t.agent, "text": t.text}


def _message_to_obj(message: Message) -> dict[str, Any]:
    v = message.view
    d = v.divine
    return {
        "kind": message.kind.value,
        "day": v.day,
        "phase": v.phase.value,
        "agent": v.viewer,
        "role": v.role.value,
        "alive": list(v.alive),
        "talk": [_talk_to_obj(t) for t in v.talk],
        "executed": v.executed,
        "attacked": v.attacked,
        "divine": None
        if d is None
        else {"day": d.day, "agent": d.seer, "target": d.target, "result": d.result.value},
        "votes": [{"day": x.day, "agent": x.voter, "target": x.target} for x in v.votes],
        "turn": v.turn,
        "final": v.final,
    }


def _dumps(obj: dict[str, Any]) -> str:
    # ensure_ascii=False keeps utterances readable; json escapes \n so lines stay single.
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def encode(message: Message) -> str:
    return _dumps(_message_to_obj(message))


def _as_int(value: Any, name: str, optional: bool = False) -> int | None:
    if value is None and optional:
        return None
    if not isinstance(value, int) or isinstance(value, bool):
        raise MalformedMessage(f"field {name!r} must be an integer, got {value!r}")
    return value


def _int(obj: dict, key: str, optional: bool = False) -> int | None:
    return _as_int(obj[key], key, optional)


def _str(obj: dict, key: str) -> str:
    if not isinstance(obj[key], str):
        raise MalformedMessage(f"field {key!r} must be a string")
    return obj[key]


def _loads(line: str) -> dict[str, Any]:
    if "\n" in line.rstrip("\n"):
        raise MalformedMessage("message spans multiple lines")
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedMessage(f"bad JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedMessage("message must be a JSON object")
    return obj


def decode(line: str) -> Message:
    obj = _loads(line)
    missing = [k for k in MESSAGE_FIELDS if k not in obj]
    if missing:
        raise MalformedMessage(f"missing fields: {missing}")
    extra = sorted(set(obj) - set(MESSAGE_FIELDS))
    if extra:
        raise MalformedMessage(f"unknown fields: {extra}")
    try:
        kind = Kind(obj["kind"])
        phase = Phase(obj["phase"])
        role = Role(obj["role"])
        talk = tuple(
            TalkEntry(_int(t, "day"), _int(t, "turn"), _int(t, "idx"), _int(t, "agent"), _str(t, "text"))
            for t in obj["talk"]
        )
        votes = tuple(
            VoteRecord(_int(x, "day"), _int(x, "agent"), _int(x, "target")) for x in obj["votes"]
        )
        d = obj["divine"]
        divine = (
            None
            if d is None
            else DivineRecord(_int(d, "day"), _int(d, "agent"), _int(d, "target"), Species(d["result"]))
        )
        if not isinstance(obj["final"], bool):
            raise MalformedMessage("field 'final' must be a boolean")
        view = GameView(
            viewer=_int(obj, "agent"),
            day=_int(obj, "day"),
            phase=phase,
            role=role,
            alive=tuple(_as_int(a, "alive") for a in obj["alive"]),
            talk=talk,
            executed=_int(obj, "executed", optional=True),
            attacked=_int(obj, "attacked", optional=True),
            divine=divine,
            votes=votes,
            turn=_int(obj, "turn", optional=True),
            final=obj["final"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MalformedMessage):
            raise
        raise MalformedMessage(f"invalid message: {exc}") from exc
    return Message(kind, view)


def encode_reply(reply: Reply) -> str:
    obj: dict[str, Any] = {"kind": reply.kind.value, "agent": reply.agent}
    if reply.kind is Kind.TALK:
        obj["text"] = reply.text
    else:
        obj["target"] = reply.target
    return _dumps(obj)


def decode_reply(line: str) -> Reply:
    obj = _loads(line)
    try:
        kind = Kind(obj["kind"])
        agent = _int(obj, "agent")
        if kind is Kind.TALK:
            text = obj["text"]
            if not isinstance(text, str):
                raise MalformedMessage("talk reply needs a string 'text'")
            return Reply(kind, agent, text=text)
        if kind in TARGET_KINDS:
            return Reply(kind, agent, target=_int(obj, "target"))
    except (KeyError, ValueError) as exc:
        if isinstance(exc, MalformedMessage):
            raise
        raise MalformedMessage(f"invalid reply: {exc}") from exc
    raise MalformedMessage(f"{kind.value} does not take a reply")


_ROLE_TOKENS = {r.value for r in Role}


def _role_tokens(obj: Any) -> list[str]:
    if isinstance(obj, str):
        return [obj] if obj in _ROLE_TOKENS else []
    if isinstance(obj, dict):
        return [tok for v in obj.values() for tok in _role_tokens(v)]
    if isinstance(obj, list):
        return [tok for v in obj for tok in _role_tokens(v)]
    return []


def find_leaks(line: str, roles: dict[int, Role]) -> list[str]:
    """Return descriptions of everything in ``line`` that discloses hidden roles.

    Allowed disclosures are the viewer's own role and, for the seer, the
    species verdict of its own latest divination. Talk texts are player
    speech and are not inspected.
    """
    obj = _loads(line)
    leaks = []
    viewer = obj.get("agent")
    if obj.get("role") != roles[viewer].value:
        leaks.append(f"role field {obj.get('role')!r} is not the viewer's own role")
    divine = obj.get("divine")
    if divine is not None:
        if roles[viewer] is not Role.SEER or divine.get("agent") != viewer:
            leaks.append(f"divination result shown to non-seer Agent {viewer}")
        elif divine.get("result") != roles[divine["target"]].species.value:
            leaks.append("divination result disagrees with the hidden role")
    stripped = {k: v for k, v in obj.items() if k not in ("role", "divine", "talk")}
    for tok in _role_tokens(stripped):
        leaks.append(f"role token {tok!r} outside the own-role field")
    return leaks
