"""Mutations that plant exactly one consistency violation in a clean log.

Used to check that :func:`wolfdial.analysis.check_consistency` finds every
fault it should and nothing else.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .core import CONTROL_TOKENS, Role
from .grammar import extract_target, find_claims, find_reports

FAULT_KINDS = ("vote_mismatch", "dead_speaker", "duplicate_turn_speech", "missing_seer_report")


class NotApplicable(ValueError):
    """The log has no place where this fault can be planted cleanly."""


@dataclass(frozen=True)
class Injection:
    kind: str
    day: int
    agent: int
    text: str  # the mutated log


def _events(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def _dump(events: list[dict]) -> str:
    for i, ev in enumerate(events):
        ev["seq"] = i
    return "".join(json.dumps(e, ensure_ascii=False, separators=(",", ":")) + "\n" for e in events)


def _day_starts(events: list[dict]) -> dict[int, dict]:
    return {e["day"]: e for e in events if e["event"] == "day_start"}


def _final_declarations(events: list[dict]) -> dict[tuple[int, int], int]:
    starts = _day_starts(events)
    out = {}
    for e in events:
        if e["event"] == "talk" and e["text"] not in CONTROL_TOKENS:
            if e["turn"] == starts[e["day"]]["talk_turns"] - 1:
                target = extract_target(e["text"])
                if target is not None:
                    out[(e["day"], e["agent"])] = target
    return out


def vote_mismatch(text: str, rng: random.Random) -> Injection:
    events = _events(text)
    declared = _final_declarations(events)
    starts = _day_starts(events)
    options = [
        i
        for i, e in enumerate(events)
        if e["event"] == "vote" and declared.get((e["day"], e["agent"])) == e["target"]
    ]
    if not options:
        raise NotApplicable("no declared vote to flip")
    i = rng.choice(options)
    ev = events[i]
    others = [a for a in starts[ev["day"]]["alive"] if a not in (ev["agent"], ev["target"])]
    ev["target"] = rng.choice(others)
    return Injection("vote_mismatch", ev["day"], ev["agent"], _dump(events))


def dead_speaker(text: str, rng: random.Random) -> Injection:
    events = _events(text)
    starts = _day_starts(events)
    options = []
    for i, e in enumerate(events):
        if e["event"] == "talk":
            dead = sorted(set(range(1, 6)) - set(starts[e["day"]]["alive"]))
            options += [(i, a) for a in dead]
    if not options:
        raise NotApplicable("nobody is dead during any talk phase")
    i, agent = rng.choice(options)
    src = events[i]
    ghost = {"seq": 0, "event": "talk", "day": src["day"], "turn": src["turn"], "idx": src["idx"] + 1,
             "agent": agent, "text": "Hello everyone, I have a few thoughts."}
    events.insert(i + 1, ghost)
    return Injection("dead_speaker", src["day"], agent, _dump(events))


def duplicate_turn_speech(text: str, rng: random.Random) -> Injection:
    events = _events(text)
    starts = _day_starts(events)
    options = [
        i
        for i, e in enumerate(events)
        if e["event"] == "talk" and e["turn"] < starts[e["day"]]["talk_turns"] - 1
    ]
    if not options:
        raise NotApplicable("no non-final talk turn")
    i = rng.choice(options)
    src = events[i]
    extra = dict(src, idx=src["idx"] + 1, text="And one more thing, let us stay calm.")
    events.insert(i + 1, extra)
    return Injection("duplicate_turn_speech", src["day"], src["agent"], _dump(events))


def missing_seer_report(text: str, rng: random.Random) -> Injection:
    """Plant a Seer claim the day before the last day for an agent who then reports nothing."""
    events = _events(text)
    starts = _day_starts(events)
    last = max(starts)
    if last < 1:
        raise NotApplicable("log has no day after a talk day")
    claim: dict[int, Role] = {}
    for e in events:
        if e["event"] == "talk" and e["day"] < last:
            for r in find_claims(e["text"]):
                claim[e["agent"]] = r
    options = []
    for agent in starts[last]["alive"]:
        if claim.get(agent) is Role.SEER:
            continue
        today = [e["text"] for e in events if e["event"] == "talk" and e["day"] == last and e["agent"] == agent]
        if any(find_reports(t) or find_claims(t) for t in today):
            continue
        prior = [
            i
            for i, e in enumerate(events)
            if e["event"] == "talk" and e["day"] == last - 1 and e["agent"] == agent
            and e["text"] not in CONTROL_TOKENS
        ]
        if prior:
            # The last utterance wins the latest-claim race for that day.
            options.append((agent, prior[-1]))
    if not options:
        raise NotApplicable("no agent can be turned into a silent Seer claimant")
    agent, i = rng.choice(options)
    events[i]["text"] = "I am the Seer. " + events[i]["text"]
    if find_claims(events[i]["text"])[-1] is not Role.SEER:
        raise NotApplicable("utterance already ends with another claim")
    return Injection("missing_seer_report", last, agent, _dump(events))


INJECTORS = {
    "vote_mismatch": vote_mismatch,
    "dead_speaker": dead_speaker,
    "duplicate_turn_speech": duplicate_turn_speech,
    "missing_seer_report": missing_seer_report,
}


def inject(text: str, kind: str, rng: random.Random) -> Injection:
    return INJECTORS[kind](text, rng)
