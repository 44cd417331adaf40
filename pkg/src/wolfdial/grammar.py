"""Text patterns shared by the agents and the log analyzer.

Only what these functions extract from free text ever has a game effect;
everything else an LLM writes is just talk.
"""

from __future__ import annotations

import re
from functools import lru_cache

from .core import Role, Species

# Agent[03], Agent[3], Agent 3, Agent3 (case-insensitive); a bare digit only on the last line.
_AGENT_RE = re.compile(r"\bagent\s*(?:\[\s*0*(\d+)\s*\]|0*(\d+)\b)", re.IGNORECASE)
_BARE_RE = re.compile(r"(?<![\w\[\]])0*([1-9])(?![\w\]])")

_CLAIM_RE = re.compile(
    r"\bI(?:\s+am|'m|’m)\s+(?:the\s+|a\s+|an\s+)?(?:true\s+|real\s+)?(seer|villager|werewolf|possessed)\b",
    re.IGNORECASE,
)
_REPORT_RE = re.compile(
    r"\bdivin\w*\s+(?:on\s+)?agent\s*\[?\s*0*(\d+)\s*\]?[^.!?]*?\b(human|werewolf)\b",
    re.IGNORECASE,
)
_CHOICE_RE = re.compile(r"(?<!\d)([1-9])(?!\d)")


_TAGS = {a: f"Agent[{a:02d}]" for a in range(1, 6)}


def agent_tag(agent: int) -> str:
    return _TAGS.get(agent) or f"Agent[{agent:02d}]"


def extract_target(text: str) -> int | None:
    """Last agent reference in ``text``, or None.

    Accepts ``Agent[0N]``, ``Agent N`` anywhere and a bare digit on the final
    non-empty line; the match that appears last wins.
    """
    matches: list[tuple[int, int]] = []
    for m in _AGENT_RE.finditer(text):
        matches.append((m.start(), int(m.group(1) or m.group(2))))
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if lines:
        last = lines[-1]
        offset = text.rfind(last)
        masked = _AGENT_RE.sub(lambda m: " " * len(m.group(0)), last)
        for m in _BARE_RE.finditer(masked):
            matches.append((offset + m.start(), int(m.group(1))))
    if not matches:
        return None
    return max(matches)[1]


def extract_choice(text: str, n: int) -> int | None:
    """Last standalone integer in 1..n, for picking one of ``n`` numbered options."""
    picks = [int(m.group(1)) for m in _CHOICE_RE.finditer(text) if 1 <= int(m.group(1)) <= n]
    return picks[-1] if picks else None


# Utterances are re-read on every prompt, so parsing is memoized per text.
@lru_cache(maxsize=65536)
def _claims(text: str) -> tuple[Role, ...]:
    return tuple(Role(m.group(1).upper()) for m in _CLAIM_RE.finditer(text))


@lru_cache(maxsize=65536)
def _reports(text: str) -> tuple[tuple[int, Species], ...]:
    return tuple((int(m.group(1)), Species(m.group(2).upper())) for m in _REPORT_RE.finditer(text))


def find_claims(text: str) -> list[Role]:
    """Roles the speaker claims for themselves, in order of appearance."""
    return list(_claims(text))


def find_reports(text: str) -> list[tuple[int, Species]]:
    """Divination reports such as "I divined Agent[03], and they are human"."""
    return list(_reports(text))


def claim_sentence(role: Role) -> str:
    return f"I am the {role.value.capitalize()}."


def report_sentence(target: int, species: Species) -> str:
    verdict = "a werewolf" if species is Species.WEREWOLF else "human"
    return f"I divined {agent_tag(target)}, and the result is {verdict}."


def vote_sentence(target: int) -> str:
    return f"I will vote for {agent_tag(target)}."


def divine_plan_sentence(target: int) -> str:
    return f"Tonight I plan to divine {agent_tag(target)}."
