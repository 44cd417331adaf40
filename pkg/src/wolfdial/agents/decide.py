"""Target selection via zero-shot chain-of-thought prompts."""

from __future__ import annotations

import logging
import random
from typing import Any, Mapping, Sequence

from ..grammar import agent_tag, extract_target
from ..llm import Backend, BackendFailure, CompletionRequest, Purpose
from .assets import Assets, fill
from .memory import AgentMemory
from .prompts import render_history, render_summaries

log = logging.getLogger(__name__)


def candidate_list(candidates: Sequence[int]) -> str:
    return ", ".join(agent_tag(a) for a in candidates)


def _ask_for_target(
    prompt: str,
    purpose: Purpose,
    candidates: Sequence[int],
    backend: Backend,
    assets: Assets,
    rng: random.Random,
    digest: Mapping[str, Any],
) -> tuple[int, str]:
    digest = {**digest, "candidates": list(candidates)}
    reasoning = ""
    try:
        reasoning = backend.complete(CompletionRequest(prompt, purpose, digest=digest))
        target = extract_target(reasoning)
        if target in candidates:
            return target, reasoning
        retry = fill(assets.templates["reformat"], ANSWER=reasoning, CANDIDATE=candidate_list(candidates))
        answer = backend.complete(
            CompletionRequest(retry, purpose, max_tokens=16, digest={**digest, "task": "reformat"})
        )
        target = extract_target(answer)
        if target in candidates:
            return target, reasoning + "\n" + answer
        log.warning("could not extract a candidate from %r", answer)
    except BackendFailure as exc:
        log.warning("target decision failed: %s", exc)
    target = rng.choice(list(candidates))
    return target, reasoning + f"\n[fallback: random choice {agent_tag(target)}]"


def decide_target(
    kind: str,
    memory: AgentMemory,
    candidates: Sequence[int],
    backend: Backend,
    assets: Assets,
    rng: random.Random,
    digest: Mapping[str, Any] | None = None,
) -> tuple[int, str]:
    """Pick a vote or divination target; returns (target, reasoning)."""
    if kind not in ("vote", "divine"):
        raise ValueError(f"unknown decision kind {kind!r}")
    candidates = sorted(candidates)
    if not candidates:
        raise ValueError("no candidates")
    if memory.agent in candidates:
        raise ValueError("an agent cannot target itself")
    if kind == "vote" and memory.declared_vote_target in candidates:
        return memory.declared_vote_target, "declared on the final talk turn"
    if len(candidates) == 1:
        return candidates[0], "only one candidate"
    prompt = fill(
        assets.templates[kind],
        AGENT=agent_tag(memory.agent),
        ROLE=memory.role.value.capitalize(),
        SUMMARY=render_summaries([s for s in memory.summaries if s.day < memory.day]),
        HISTORY=render_history(memory.today),
        CANDIDATE=candidate_list(candidates),
    )
    return _ask_for_target(
        prompt,
        Purpose.TARGET_DECISION,
        candidates,
        backend,
        assets,
        rng,
        {**(digest or {}), "task": f"decide_{kind}"},
    )


def decide_attack(
    memory: AgentMemory,
    candidates: Sequence[int],
    backend: Backend,
    assets: Assets,
    rng: random.Random,
    digest: Mapping[str, Any] | None = None,
) -> int:
    candidates = sorted(candidates)
    if not candidates:
        raise ValueError("no candidates")
    if len(candidates) == 1:
        return candidates[0]
    prompt = fill(
        assets.templates["attack"],
        AGENT=agent_tag(memory.agent),
        STRATEGY=assets.card("attack", "attack").guideline,
        SUMMARY=render_summaries([s for s in memory.summaries if s.day < memory.day]),
        HISTORY=render_history(memory.today),
        CANDIDATE=candidate_list(candidates),
    )
    target, _ = _ask_for_target(
        prompt,
        Purpose.ATTACK_DECISION,
        candidates,
        backend,
        assets,
        rng,
        {**(digest or {}), "task": "attack"},
    )
    return target
