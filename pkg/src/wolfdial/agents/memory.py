from __future__ import annotations

from dataclasses import dataclass, field

from ..core import DivineRecord, Role, TalkEntry, VoteRecord
from ..grammar import agent_tag
from ..protocol import GameView


@dataclass(frozen=True)
class DaySummary:
    day: int
    per_agent_claims: dict[int, str]
    degraded: bool = False  # built from truncated raw talk after backend failure

    def render(self) -> str:
        lines = [f"Day {self.day}:"]
        lines += [f"- {agent_tag(a)}: {text}" for a, text in sorted(self.per_agent_claims.items())]
        return "\n".join(lines)


@dataclass
class AgentMemory:
    """Everything one agent remembers about the current match."""

    agent: int
    role: Role | None = None
    day: int = 0
    turn: int | None = None
    final: bool = False
    alive: tuple[int, ...] = ()
    summaries: list[DaySummary] = field(default_factory=list)
    today: list[TalkEntry] = field(default_factory=list)
    divinations: list[DivineRecord] = field(default_factory=list)
    votes: tuple[VoteRecord, ...] = ()
    executions: list[tuple[int, int]] = field(default_factory=list)  # (day, agent)
    attacks: list[tuple[int, int]] = field(default_factory=list)
    declared_vote_target: int | None = None
    declared_divine_target: int | None = None
    day_strategy: str | None = None
    suspected_seer: int | None = None
    spoken_today: int = 0

    def start_day(self, day: int) -> None:
        self.day = day
        self.today = [t for t in self.today if t.day == day]
        self.declared_vote_target = None
        self.declared_divine_target = None
        self.day_strategy = None
        self.spoken_today = 0
        self.turn = None
        self.final = False

    def absorb(self, view: GameView) -> None:
        if self.role is None:
            self.role = view.role
        if view.day != self.day:
            self.start_day(view.day)
        self.turn = view.turn
        self.final = view.final
        self.alive = view.alive
        self.today.extend(t for t in view.talk if t.day == self.day)
        self.votes = view.votes
        if view.executed is not None and view.executed not in [a for _, a in self.executions]:
            self.executions.append((view.day, view.executed))
        if view.attacked is not None and view.attacked not in [a for _, a in self.attacks]:
            self.attacks.append((view.day, view.attacked))
        if view.divine is not None and view.divine not in self.divinations:
            self.divinations.append(view.divine)

    def candidates(self) -> list[int]:
        return [a for a in self.alive if a != self.agent]

    def spoken(self) -> list[TalkEntry]:
        return [t for t in self.today if not t.is_control]
