"""Deterministic rules for the five-player Werewolf game.

Every operation takes a :class:`GameState` and returns a new one; nothing is
mutated in place. Randomness only enters through an explicit ``random.Random``
argument so that a match seed fully determines the outcome.
"""

from __future__ import annotations

import enum
import json
import random
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

AGENT_IDS: tuple[int, ...] = (1, 2, 3, 4, 5)

OVER = "Over"
SKIP = "Skip"
CONTROL_TOKENS = frozenset({OVER, SKIP})


class Role(str, enum.Enum):
    VILLAGER = "VILLAGER"
    SEER = "SEER"
    WEREWOLF = "WEREWOLF"
    POSSESSED = "POSSESSED"

    @property
    def team(self) -> Team:
        if self in (Role.WEREWOLF, Role.POSSESSED):
            return Team.WEREWOLF
        return Team.HUMAN

    @property
    def species(self) -> Species:
        return Species.WEREWOLF if self is Role.WEREWOLF else Species.HUMAN


class Team(str, enum.Enum):
    HUMAN = "HUMAN"
    WEREWOLF = "WEREWOLF"


class Species(str, enum.Enum):
    HUMAN = "HUMAN"
    WEREWOLF = "WEREWOLF"


class Phase(str, enum.Enum):
    TALK = "TALK"
    VOTE = "VOTE"
    NIGHT = "NIGHT"


class Status(str, enum.Enum):
    ONGOING = "ONGOING"
    HUMAN_WIN = "HUMAN_WIN"
    WEREWOLF_WIN = "WEREWOLF_WIN"

    @property
    def winner(self) -> Team | None:
        return {Status.HUMAN_WIN: Team.HUMAN, Status.WEREWOLF_WIN: Team.WEREWOLF}.get(self)


ROLE_MULTISET: tuple[Role, ...] = (
    Role.SEER,
    Role.WEREWOLF,
    Role.POSSESSED,
    Role.VILLAGER,
    Role.VILLAGER,
)


class GameError(Exception):
    """Base class for illegal game actions."""


class MissingVote(GameError):
    pass


class InvalidVote(GameError):
    pass


class NotAlive(GameError):
    pass


class GameFinished(GameError):
    pass


class InvalidTarget(GameError):
    pass


class SeerDead(GameError):
    pass


@dataclass(frozen=True)
class TalkEntry:
    day: int
    turn: int
    idx: int  # order within the turn
    agent: int
    text: str

    @property
    def is_control(self) -> bool:
        return self.text in CONTROL_TOKENS


@dataclass(frozen=True)
class VoteRecord:
    day: int
    voter: int
    target: int


@dataclass(frozen=True)
class DivineRecord:
    day: int
    seer: int
    target: int
    result: Species


@dataclass(frozen=True)
class AttackRecord:
    day: int
    attacker: int
    target: int


@dataclass(frozen=True)
class ExecutionRecord:
    day: int
    target: int


@dataclass(frozen=True)
class GameState:
    roles: Mapping[int, Role]
    rng_seed: int = 0
    day: int = 0
    phase: Phase = Phase.TALK
    alive: frozenset[int] = frozenset(AGENT_IDS)
    talks: tuple[TalkEntry, ...] = ()
    votes: tuple[VoteRecord, ...] = ()
    executions: tuple[ExecutionRecord, ...] = ()
    divinations: tuple[DivineRecord, ...] = ()
    attacks: tuple[AttackRecord, ...] = ()
    status: Status = Status.ONGOING

    def agent_with(self, role: Role) -> int:
        return next(a for a, r in sorted(self.roles.items()) if r is role)

    @property
    def werewolf(self) -> int:
        return self.agent_with(Role.WEREWOLF)

    @property
    def seer(self) -> int:
        return self.agent_with(Role.SEER)

    def is_alive(self, agent: int) -> bool:
        return agent in self.alive

    def to_dict(self) -> dict:
        return {
            "seed": self.rng_seed,
            "day": self.day,
            "phase": self.phase.value,
            "status": self.status.value,
            "alive": sorted(self.alive),
            "roles": {str(a): self.roles[a].value for a in sorted(self.roles)},
            "talks": [[t.day, t.turn, t.idx, t.agent, t.text] for t in self.talks],
            "votes": [[v.day, v.voter, v.target] for v in self.votes],
            "executions": [[e.day, e.target] for e in self.executions],
            "divinations": [[d.day, d.seer, d.target, d.result.value] for d in self.divinations],
            "attacks": [[a.day, a.attacker, a.target] for a in self.attacks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def assign_roles(rng: random.Random) -> dict[int, Role]:
    """Uniformly permute the fixed role multiset over agents 1..5."""
    roles = list(ROLE_MULTISET)
    rng.shuffle(roles)
    return dict(zip(AGENT_IDS, roles))


def validate_roles(roles: Mapping[int, Role]) -> None:
    if sorted(roles) != list(AGENT_IDS):
        raise ValueError(f"roles must cover agents {AGENT_IDS}, got {sorted(roles)}")
    if Counter(roles.values()) != Counter(ROLE_MULTISET):
        raise ValueError(f"invalid role multiset: {sorted(r.value for r in roles.values())}")


def new_game(roles: Mapping[int, Role], seed: int = 0) -> GameState:
    validate_roles(roles)
    return GameState(roles=dict(roles), rng_seed=seed)


def _require_ongoing(state: GameState) -> None:
    if state.status is not Status.ONGOING:
        raise GameFinished(f"game already finished with {state.status.value}")


def check_win(state: GameState) -> Status:
    wolf = state.werewolf
    if wolf not in state.alive:
        return Status.HUMAN_WIN
    humans = sum(1 for a in state.alive if state.roles[a] is not Role.WEREWOLF)
    if humans <= 1:
        return Status.WEREWOLF_WIN
    return Status.ONGOING


def add_talk(state: GameState, entry: TalkEntry) -> GameState:
    _require_ongoing(state)
    if state.phase is not Phase.TALK:
        raise GameError(f"talk outside the talk phase ({state.phase.value})")
    if entry.agent not in state.alive:
        raise NotAlive(f"Agent {entry.agent} is not alive")
    if entry.day != state.day:
        raise GameError(f"talk for day {entry.day} during day {state.day}")
    return replace(state, talks=state.talks + (entry,))


def start_vote(state: GameState) -> GameState:
    _require_ongoing(state)
    if state.day == 0:
        raise GameError("there is no vote on day 0")
    return replace(state, phase=Phase.VOTE)


def start_night(state: GameState) -> GameState:
    """Skip straight from talk to night; only legal on day 0."""
    _require_ongoing(state)
    if state.day != 0:
        raise GameError("only day 0 goes from talk straight to night")
    return replace(state, phase=Phase.NIGHT)


def validate_votes(votes: Iterable[VoteRecord], alive: Iterable[int]) -> None:
    alive = set(alive)
    seen: set[int] = set()
    for v in votes:
        if v.voter not in alive:
            raise InvalidVote(f"dead voter Agent {v.voter}")
        if v.target not in alive:
            raise InvalidVote(f"Agent {v.voter} voted for dead Agent {v.target}")
        if v.voter == v.target:
            raise InvalidVote(f"Agent {v.voter} voted for themselves")
        if v.voter in seen:
            raise InvalidVote(f"Agent {v.voter} voted twice")
        seen.add(v.voter)
    missing = alive - seen
    if missing:
        raise MissingVote(f"no vote from {sorted(missing)}")


def tally_votes(votes: Iterable[VoteRecord], alive: Iterable[int], rng: random.Random) -> int:
    """Return the plurality target; ties are broken uniformly with ``rng``.

    ``rng`` is only consumed when there is a tie.
    """
    votes = list(votes)
    validate_votes(votes, alive)
    counts = Counter(v.target for v in votes)
    top = max(counts.values())
    tied = sorted(a for a, c in counts.items() if c == top)
    if len(tied) == 1:
        return tied[0]
    return rng.choice(tied)


def record_votes(state: GameState, votes: Iterable[VoteRecord]) -> GameState:
    _require_ongoing(state)
    if state.phase is not Phase.VOTE:
        raise GameError(f"votes outside the vote phase ({state.phase.value})")
    votes = tuple(votes)
    validate_votes(votes, state.alive)
    if any(v.day != state.day for v in votes):
        raise InvalidVote("vote recorded for the wrong day")
    return replace(state, votes=state.votes + votes)


def _eliminate(state: GameState, target: int, **changes) -> GameState:
    state = replace(state, alive=state.alive - {target}, **changes)
    return replace(state, status=check_win(state))


def resolve_elimination(state: GameState, target: int) -> GameState:
    _require_ongoing(state)
    if target not in state.alive:
        raise NotAlive(f"Agent {target} is not alive")
    return _eliminate(
        state,
        target,
        phase=Phase.NIGHT,
        executions=state.executions + (ExecutionRecord(state.day, target),),
    )


def attack_candidates(state: GameState) -> list[int]:
    return sorted(a for a in state.alive if state.roles[a] is not Role.WEREWOLF)


def resolve_attack(state: GameState, target: int) -> GameState:
    _require_ongoing(state)
    wolf = state.werewolf
    if wolf not in state.alive:
        raise InvalidTarget("the werewolf is dead")
    if target not in state.alive:
        raise InvalidTarget(f"Agent {target} is not alive")
    if target == wolf:
        raise InvalidTarget("the werewolf cannot attack itself")
    return _eliminate(
        state,
        target,
        attacks=state.attacks + (AttackRecord(state.day, wolf, target),),
    )


def divine_candidates(state: GameState) -> list[int]:
    return sorted(a for a in state.alive if a != state.seer)


def divine(state: GameState, target: int) -> tuple[GameState, DivineRecord]:
    _require_ongoing(state)
    seer = state.seer
    if seer not in state.alive:
        raise SeerDead("the seer is dead")
    if target not in state.alive or target == seer:
        raise InvalidTarget(f"Agent {target} cannot be divined")
    record = DivineRecord(state.day, seer, target, state.roles[target].species)
    return replace(state, divinations=state.divinations + (record,)), record


def next_day(state: GameState) -> GameState:
    _require_ongoing(state)
    if state.phase is not Phase.NIGHT:
        raise GameError("a new day only starts after the night")
    return replace(state, day=state.day + 1, phase=Phase.TALK)


def vote_candidates(state: GameState, voter: int) -> list[int]:
    return sorted(a for a in state.alive if a != voter)
