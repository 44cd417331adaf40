"""Six-part prompt assembly for utterance generation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..core import Role, Species, TalkEntry
from ..grammar import agent_tag
from .assets import Assets, PersonaCard, StrategyCard, fill
from .memory import AgentMemory, DaySummary

SECTION_HEADERS = (
    "### Task",
    "### Persona",
    "### Game Rules",
    "### Speech Strategy",
    "### Dialogue Summary",
    "### Today's Dialogue",
)

NO_SUMMARY = "(no previous days)"
NO_TALK = "(nobody has spoken yet today)"


class MissingComponent(ValueError):
    pass


@dataclass(frozen=True)
class PromptBundle:
    task_description: str
    persona: PersonaCard
    game_rules: str
    strategy: StrategyCard
    prior_day_summaries: tuple[DaySummary, ...]
    today_history: tuple[TalkEntry, ...]
    instruction: str = ""

    def render(self) -> str:
        parts = [
            self.task_description,
            self.persona.render(),
            self.game_rules,
            self.strategy.guideline,
            render_summaries(self.prior_day_summaries),
            render_history(self.today_history),
        ]
        out = "\n\n".join(f"{h}\n{p}" for h, p in zip(SECTION_HEADERS, parts))
        if self.instruction:
            out += "\n\n" + self.instruction
        return out


def render_history(history: Sequence[TalkEntry]) -> str:
    lines = [f"{agent_tag(t.agent)}: {t.text}" for t in history if not t.is_control]
    return "\n".join(lines) if lines else NO_TALK


def render_summaries(summaries: Sequence[DaySummary]) -> str:
    return "\n".join(s.render() for s in summaries) if summaries else NO_SUMMARY


def render_events(memory: AgentMemory) -> str:
    lines = []
    for day, agent in memory.executions:
        lines.append(f"{agent_tag(agent)} was executed by vote on Day {day}.")
    for day, agent in memory.attacks:
        lines.append(f"{agent_tag(agent)} was attacked by the werewolf in the night before Day {day}.")
    if memory.role is Role.SEER:
        for d in memory.divinations:
            verdict = "a werewolf" if d.result is Species.WEREWOLF else "human"
            lines.append(f"Your divination on night {d.day}: {agent_tag(d.target)} is {verdict}.")
    return "\n".join(lines) if lines else "Nobody has been eliminated yet."


def task_description(memory: AgentMemory, assets: Assets) -> str:
    return fill(
        assets.templates["task"],
        AGENT=agent_tag(memory.agent),
        ROLE=memory.role.value.capitalize() if memory.role else "unknown",
        DAY=memory.day,
        TURN=(memory.turn or 0) + 1,
        ALIVE=", ".join(agent_tag(a) for a in memory.alive),
        EVENTS=render_events(memory),
    )


def build_prompt(
    memory: AgentMemory,
    strategy: StrategyCard,
    persona: PersonaCard,
    assets: Assets,
    instruction: str = "",
) -> PromptBundle:
    if memory.role is None:
        raise MissingComponent("agent role unknown")
    if persona is None or memory.role not in persona.roles:
        raise MissingComponent(f"no persona bound to {memory.role.value}")
    if strategy is None or not strategy.guideline.strip():
        raise MissingComponent("speech strategy missing")
    rules = assets.templates.get("rules", "")
    if not rules.strip():
        raise MissingComponent("game rules missing")
    summaries = tuple(sorted((s for s in memory.summaries if s.day < memory.day), key=lambda s: s.day))
    if memory.day >= 1 and not summaries:
        raise MissingComponent(f"no dialogue summary available on Day {memory.day}")
    return PromptBundle(
        task_description=task_description(memory, assets),
        persona=persona,
        game_rules=rules,
        strategy=strategy,
        prior_day_summaries=summaries,
        today_history=tuple(t for t in memory.today if t.day == memory.day),
        instruction=instruction,
    )
