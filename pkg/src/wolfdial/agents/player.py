from __future__ import annotations

import logging
import random
import re
from typing import Any

from ..core import OVER, SKIP, Role
from ..grammar import agent_tag, divine_plan_sentence, extract_target, vote_sentence
from ..llm import Backend, BackendFailure, CompletionRequest, Purpose
from ..protocol import Kind, Message, Reply, decode, encode_reply
from .assets import Assets, PersonaCard, StrategyCard, default_assets
from .decide import decide_attack, decide_target
from .memory import AgentMemory
from .policies import POLICIES
from .prompts import build_prompt
from .summarizer import summarize_day

log = logging.getLogger(__name__)

MAX_UTTERANCE_CHARS = 500
_LABEL_RE = re.compile(r"^\s*(?:Agent\s*\[?\s*\d+\s*\]?|Utterance)\s*:\s*", re.IGNORECASE)


class LLMAgent:
    """One player. Feed it protocol messages; it answers TALK/VOTE/DIVINE/ATTACK."""

    def __init__(
        self,
        agent_id: int,
        backend: Backend,
        *,
        assets: Assets | None = None,
        seed: int = 0,
        persona_id: str | None = None,
        seer_selection: str = "llm_selected",
    ) -> None:
        if seer_selection not in ("llm_selected", "fixed_sequence"):
            raise ValueError(f"unknown seer_selection {seer_selection!r}")
        self.backend = backend
        self.assets = assets or default_assets()
        self.persona_id = persona_id
        self.seer_selection = seer_selection
        self.rng = random.Random(f"agent:{seed}:{agent_id}")
        self.memory = AgentMemory(agent_id)
        self.persona: PersonaCard | None = None
        self.reported_days: set[int] = set()

    # -- protocol ------------------------------------------------------------

    def handle_line(self, line: str) -> str | None:
        reply = self.handle(decode(line))
        return None if reply is None else encode_reply(reply)

    def handle(self, message: Message) -> Reply | None:
        view = message.view
        if message.kind is Kind.INITIALIZE:
            self.memory = AgentMemory(view.viewer, role=view.role)
            self.persona = self.assets.persona_for(view.role, self.persona_id)
            self.reported_days = set()
        m = self.memory
        m.absorb(view)
        me = m.agent
        if message.kind is Kind.TALK:
            return Reply(Kind.TALK, me, text=self.talk())
        if message.kind is Kind.VOTE:
            return Reply(Kind.VOTE, me, target=self.vote())
        if message.kind is Kind.DIVINE:
            return Reply(Kind.DIVINE, me, target=self.divine())
        if message.kind is Kind.ATTACK:
            return Reply(Kind.ATTACK, me, target=self.attack())
        if message.kind is Kind.DAILY_FINISH:
            self.finish_day()
        return None

    # -- backend helpers -----------------------------------------------------

    def digest(self, task: str, **extra: Any) -> dict[str, Any]:
        m = self.memory
        return {
            "task": task,
            "agent": m.agent,
            "role": m.role.value if m.role else None,
            "persona": self.persona.id if self.persona else None,
            "day": m.day,
            "turn": m.turn,
            "final": m.final,
            "alive": list(m.alive),
            "summaries": [s.render() for s in m.summaries if s.day < m.day],
            "today": [[t.agent, t.text] for t in m.today if not t.is_control],
            "divinations": [[d.target, d.result.value] for d in m.divinations],
            **extra,
        }

    def ask(self, purpose: Purpose, prompt: str, task: str, **extra: Any) -> str:
        return self.backend.complete(CompletionRequest(prompt, purpose, digest=self.digest(task, **extra)))

    def talk_prompt(self, strategy: StrategyCard, instruction: str = "") -> str:
        return build_prompt(self.memory, strategy, self.persona, self.assets, instruction).render()

    @staticmethod
    def clean(text: str) -> str:
        text = " ".join(text.split())
        text = _LABEL_RE.sub("", text).strip().strip('"').strip()
        if text.lower().rstrip(".") in ("over", "skip"):
            return text.rstrip(".").capitalize()
        if len(text) > MAX_UTTERANCE_CHARS:
            text = text[:MAX_UTTERANCE_CHARS].rsplit(" ", 1)[0]
        return text or SKIP

    # -- actions -------------------------------------------------------------

    def talk(self) -> str:
        m = self.memory
        if m.day == 0:
            text = self.greet() if not m.turn else OVER
        elif m.final:
            text = self.declare()
        else:
            try:
                text = self.clean(POLICIES[m.role](self))
            except BackendFailure as exc:
                log.warning("Agent %d talk failed: %s", m.agent, exc)
                text = SKIP
            if text == OVER:
                # Keep the final turn for the vote declaration.
                text = SKIP
        if text not in (OVER, SKIP):
            m.spoken_today += 1
        return text

    def greet(self) -> str:
        card = self.assets.cards["day0"][0]
        prompt = self.talk_prompt(card, f"Now greet everyone as {agent_tag(self.memory.agent)}. Output only the utterance.")
        try:
            return self.clean(self.ask(Purpose.TALK, prompt, "greet"))
        except BackendFailure:
            return SKIP

    def declare(self) -> str:
        m = self.memory
        cands = m.candidates()
        target, _ = decide_target("vote", m, cands, self.backend, self.assets, self.rng, self.digest("decide_vote"))
        divine_target = None
        card = self.assets.cards["vote_declaration"][0]
        extra = f"You have decided to vote for {agent_tag(target)}."
        if m.role is Role.SEER:
            divine_target, _ = decide_target(
                "divine", m, cands, self.backend, self.assets, self.rng, self.digest("decide_divine")
            )
            m.declared_divine_target = divine_target
            extra = (
                f"First declare that you will divine {agent_tag(divine_target)} tonight. "
                f"Then declare that you will vote for {agent_tag(target)}."
            )
            card = StrategyCard(card.id, card.applicable_day, f"{self.assets.seer_guidelines} {card.guideline}")
        prompt = self.talk_prompt(card, f"{extra}\nNow write your final utterance of the day. Output only the utterance.")
        try:
            text = self.clean(
                self.ask(Purpose.VOTE_DECLARATION, prompt, "declare", target=target, divine_target=divine_target)
            )
        except BackendFailure:
            text = ""
        text = enforce_declaration(text, target, divine_target)
        m.declared_vote_target = target
        return text

    def vote(self) -> int:
        m = self.memory
        cands = m.candidates()
        if m.declared_vote_target in cands:
            return m.declared_vote_target
        target, _ = decide_target("vote", m, cands, self.backend, self.assets, self.rng, self.digest("decide_vote"))
        return target

    def divine(self) -> int:
        m = self.memory
        cands = m.candidates()
        if m.declared_divine_target in cands:
            return m.declared_divine_target
        target, _ = decide_target("divine", m, cands, self.backend, self.assets, self.rng, self.digest("decide_divine"))
        return target

    def attack(self) -> int:
        m = self.memory
        return decide_attack(m, m.candidates(), self.backend, self.assets, self.rng, self.digest("attack"))

    def finish_day(self) -> None:
        m = self.memory
        history = [t for t in m.today if t.day == m.day]
        if not history:
            return
        summary = summarize_day(history, self.backend, self.assets, day=m.day, digest=self.digest("summary"))
        m.summaries = [s for s in m.summaries if s.day != m.day] + [summary]


def enforce_declaration(text: str, target: int, divine_target: int | None = None) -> str:
    """Make the vote target the last agent mentioned; the Seer names its divination target first."""
    if text in (OVER, SKIP):
        text = ""
    if divine_target is not None:
        tag = agent_tag(divine_target)
        if not re.search(rf"divin\w*[^.!?]*{re.escape(tag)}", text, re.IGNORECASE):
            text = f"{divine_plan_sentence(divine_target)} {text}".strip()
    if extract_target(text) != target:
        text = f"{text} {vote_sentence(target)}".strip()
    return text
