"""End-of-day dialogue summaries that replace raw history in later prompts."""

from __future__ import annotations

import logging
import re
from typing import Any, Mapping, Sequence

from ..core import TalkEntry
from ..llm import Backend, BackendFailure, CompletionRequest, Purpose
from .assets import Assets, fill
from .memory import DaySummary
from .prompts import render_history

log = logging.getLogger(__name__)

_LINE_RE = re.compile(r"^\s*[-*]?\s*Agent\s*\[?\s*0*(\d+)\s*\]?\s*[:：-]\s*(.+?)\s*$", re.IGNORECASE)
NO_CLAIMS = "spoke but made no notable claims."
DEGRADED_CHARS = 200


def parse_summary(text: str, speakers: Sequence[int]) -> dict[int, str]:
    claims: dict[int, str] = {}
    for line in text.splitlines():
        m = _LINE_RE.match(line)
        if m and int(m.group(1)) in speakers:
            agent = int(m.group(1))
            claims[agent] = f"{claims[agent]} {m.group(2)}" if agent in claims else m.group(2)
    for agent in speakers:
        claims.setdefault(agent, NO_CLAIMS)
    return dict(sorted(claims.items()))


def degraded_summary(day: int, history: Sequence[TalkEntry]) -> DaySummary:
    claims: dict[int, str] = {}
    for t in history:
        if not t.is_control:
            claims[t.agent] = (claims.get(t.agent, "") + " " + t.text).strip()
    claims = {a: "said: " + text[:DEGRADED_CHARS] for a, text in sorted(claims.items())}
    return DaySummary(day, claims, degraded=True)


def summarize_day(
    history: Sequence[TalkEntry],
    backend: Backend,
    assets: Assets,
    day: int | None = None,
    digest: Mapping[str, Any] | None = None,
    retries: int = 1,
) -> DaySummary:
    if not history:
        raise ValueError("cannot summarize an empty day")
    day = history[0].day if day is None else day
    speakers = sorted({t.agent for t in history if not t.is_control})
    if not speakers:
        return DaySummary(day, {})
    prompt = fill(assets.templates["summary"], HISTORY=render_history(history))
    request = CompletionRequest(
        prompt,
        Purpose.SUMMARY,
        digest={
            **(digest or {}),
            "task": "summary",
            "history": [[t.agent, t.text] for t in history if not t.is_control],
        },
    )
    for attempt in range(retries + 1):
        try:
            return DaySummary(day, parse_summary(backend.complete(request), speakers))
        except BackendFailure as exc:
            log.warning("summary for day %d failed (attempt %d): %s", day, attempt + 1, exc)
    log.warning("summary for day %d degraded to truncated raw history", day)
    return degraded_summary(day, history)
