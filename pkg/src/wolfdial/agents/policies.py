"""Per-role utterance generation for Day 1 and later.

Each policy takes the :class:`~wolfdial.agents.player.LLMAgent` and returns
the raw utterance. Guards applied afterwards keep the game-relevant parts
(claims, reports) parseable even when the model ignores an instruction.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from ..core import Role, Species
from ..grammar import (
    agent_tag,
    claim_sentence,
    extract_choice,
    extract_target,
    find_claims,
    find_reports,
    report_sentence,
)
from ..llm import BackendFailure, Purpose
from .assets import StrategyCard, fill
from .decide import candidate_list
from .prompts import render_history, render_summaries

if TYPE_CHECKING:
    from .player import LLMAgent

log = logging.getLogger(__name__)

UTTERANCE_INSTRUCTION = "Now write your next utterance as [AGENT]. Output only the utterance."


def _demo_block(agent: LLMAgent, kind: str) -> str:
    demos = agent.assets.demos.get(kind, ())
    if kind == "reasoning":
        items = [f"Situation: {d['situation'].strip()}\nOutput: {d['output'].strip()}" for d in demos]
    else:
        items = [f"Strategy: {d['strategy'].strip()}\nUtterance: {d['output'].strip()}" for d in demos]
    return "Examples:\n" + "\n\n".join(items) if items else ""


def _instruction(agent: LLMAgent, extra: str = "") -> str:
    text = fill(UTTERANCE_INSTRUCTION, AGENT=agent_tag(agent.memory.agent))
    return f"{extra}\n{text}" if extra else text


def select_strategy(agent: LLMAgent, cards: list[StrategyCard]) -> StrategyCard:
    """Let the model pick one of ``cards``; falls back to a seeded random pick."""
    m = agent.memory
    options = "\n".join(f"{i}. {c.guideline}" for i, c in enumerate(cards, 1))
    prompt = fill(
        agent.assets.templates["select_strategy"],
        AGENT=agent_tag(m.agent),
        ROLE=m.role.value.capitalize(),
        DAY=m.day,
        SUMMARY=render_summaries([s for s in m.summaries if s.day < m.day]),
        HISTORY=render_history(m.today),
        STRATEGIES=options,
    )
    try:
        answer = agent.ask(Purpose.TALK, prompt, "select_strategy", options=[c.id for c in cards])
        choice = extract_choice(answer.splitlines()[-1] if answer.strip() else "", len(cards))
        if choice is None:
            choice = extract_choice(answer, len(cards))
    except BackendFailure as exc:
        log.warning("strategy selection failed: %s", exc)
        choice = None
    if choice is None:
        return agent.rng.choice(cards)
    return cards[choice - 1]


def villager_generate(agent: LLMAgent) -> str:
    m = agent.memory
    if not m.turn:
        card = agent.assets.card("villager", "villager-opening")
        prompt = agent.talk_prompt(card, _instruction(agent, _demo_block(agent, "utterance")))
        return agent.ask(Purpose.TALK, prompt, "talk", strategy=card.id)
    reason_card = agent.assets.card("villager", "villager-reasoning")
    prompt = agent.talk_prompt(
        reason_card,
        _demo_block(agent, "reasoning")
        + "\nNow write your own Reasoning and Strategy for this situation, in the same format.",
    )
    reasoning = agent.ask(Purpose.TALK, prompt, "villager_reason", strategy=reason_card.id)
    generated = StrategyCard("villager-generated", "any", " ".join(reasoning.split()))
    prompt = agent.talk_prompt(generated, _instruction(agent, _demo_block(agent, "utterance")))
    return agent.ask(Purpose.TALK, prompt, "talk", strategy=generated.id, reasoning=reasoning)


def _unreported(agent: LLMAgent) -> list:
    return [d for d in agent.memory.divinations if d.day not in agent.reported_days]


def seer_generate(agent: LLMAgent) -> str:
    m = agent.memory
    cards = agent.assets.cards_for_day("seer", m.day)
    if m.day_strategy is None:
        if agent.seer_selection == "fixed_sequence":
            m.day_strategy = cards[(m.day - 1) % len(cards)].id
        else:
            m.day_strategy = select_strategy(agent, cards).id
    chosen = agent.assets.card("seer", m.day_strategy)
    card = StrategyCard(chosen.id, chosen.applicable_day, f"{agent.assets.seer_guidelines} {chosen.guideline}")
    due = _unreported(agent) if m.spoken_today == 0 else []
    extra = ""
    if due:
        extra = "Open by stating that you are the Seer and report: " + " ".join(
            report_sentence(d.target, d.result) for d in due
        )
    prompt = agent.talk_prompt(card, _instruction(agent, extra))
    try:
        text = agent.ask(
            Purpose.TALK,
            prompt,
            "talk",
            strategy=card.id,
            report_due=[[d.target, d.result.value] for d in due],
        )
    except BackendFailure:
        text = "Skip"
    if due:
        text = ensure_report(agent.clean(text), [(d.target, d.result) for d in due])
        agent.reported_days.update(d.day for d in due)
    return text


def ensure_report(text: str, reports: list[tuple[int, Species]]) -> str:
    """Prefix the Seer claim and any of ``reports`` the text does not already state."""
    if agent_text_is_control(text):
        text = ""
    prefix = []
    if Role.SEER not in find_claims(text):
        prefix.append(claim_sentence(Role.SEER))
    stated = set(find_reports(text))
    prefix += [report_sentence(t, s) for t, s in reports if (t, s) not in stated]
    return " ".join(prefix + [text]).strip()


def agent_text_is_control(text: str) -> bool:
    return text.strip() in ("Over", "Skip", "")


def werewolf_generate(agent: LLMAgent) -> str:
    m = agent.memory
    cards = agent.assets.cards_for_day("werewolf", 2 if m.day >= 2 else 1)
    card = select_strategy(agent, cards)
    prompt = agent.talk_prompt(card, _instruction(agent))
    return agent.ask(Purpose.TALK, prompt, "talk", strategy=card.id)


def infer_seer(agent: LLMAgent) -> int:
    """Guess the real Seer from the Day 0 summary; the answer is kept for the match."""
    m = agent.memory
    cands = m.candidates()
    prompt = fill(
        agent.assets.templates["infer_seer"],
        AGENT=agent_tag(m.agent),
        SUMMARY=render_summaries([s for s in m.summaries if s.day == 0]),
        CANDIDATE=candidate_list(cands),
    )
    try:
        answer = agent.ask(Purpose.TARGET_DECISION, prompt, "infer_seer", candidates=cands)
        guess = extract_target(answer)
    except BackendFailure:
        guess = None
    return guess if guess in cands else agent.rng.choice(cands)


def possessed_generate(agent: LLMAgent) -> str:
    m = agent.memory
    if m.day == 1 and m.suspected_seer is None:
        m.suspected_seer = infer_seer(agent)
    target = agent_tag(m.suspected_seer) if m.suspected_seer else "the player you suspect"
    first = m.spoken_today == 0
    if m.day == 1:
        card_id = "possessed-fake-claim" if first else "possessed-persuade"
    else:
        card_id = "possessed-coming-out" if first else "possessed-coordinate"
    card = agent.assets.card("possessed", card_id).fill(TARGET=target)
    prompt = agent.talk_prompt(card, _instruction(agent))
    try:
        text = agent.ask(Purpose.TALK, prompt, "talk", strategy=card.id, suspected_seer=m.suspected_seer)
    except BackendFailure:
        text = "Skip"
    if not first:
        return text
    text = agent.clean(text)
    body = "" if agent_text_is_control(text) else text
    if m.day == 1 and m.suspected_seer:
        return ensure_report(body, [(m.suspected_seer, Species.WEREWOLF)])
    if m.day >= 2 and Role.POSSESSED not in find_claims(body):
        return f"{claim_sentence(Role.POSSESSED)} {body}".strip()
    return text


POLICIES = {
    Role.VILLAGER: villager_generate,
    Role.SEER: seer_generate,
    Role.WEREWOLF: werewolf_generate,
    Role.POSSESSED: possessed_generate,
}
