"""Rule-based completions used by :class:`~wolfdial.llm.ScriptedBackend`.

The scripted policy reads the request digest (the same information the
prompt carries: summaries, today's dialogue, own results) and writes text an
LLM might plausibly have written. It claims, counter-claims, reports
divinations and declares votes so that full legal matches can be played
without network access.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Mapping

from .core import Role, Species
from .grammar import (
    agent_tag,
    claim_sentence,
    divine_plan_sentence,
    extract_target,
    find_claims,
    find_reports,
    report_sentence,
    vote_sentence,
)

_SUMMARY_LINE = re.compile(r"^\s*-?\s*Agent\[0*(\d+)\]:\s*(.*)$")
_SUMMARY_CLAIM = re.compile(r"claimed to be the (\w+)", re.IGNORECASE)
_SUMMARY_REPORT = re.compile(r"reported Agent\[0*(\d+)\] as (human|a werewolf)", re.IGNORECASE)

OPENERS = {
    "king": ("Hear me.", "By royal decree,", "Mark my words."),
    "striker": ("Yo!", "Alright, listen up!", "Okay, let's go!"),
    "gamer": ("U-um...", "S-so...", "I-I think..."),
}

GREETINGS = {
    "king": (
        "Good morrow. The king of Delcadar greets this council, and I expect every one of you to speak plainly.",
        "Subjects, I bid you welcome. Delcadar's fate rests on this table, so let us proceed with dignity.",
    ),
    "striker": (
        "Hey hey, good morning everybody! This is gonna be a fun one, let's go!",
        "What's up, team! Let's crush this game, I'm fired up already!",
    ),
    "gamer": (
        "H-hello... I play this kind of game a lot online, so... n-nice to meet you all.",
        "U-um, hi. I'm not great at talking, but I'm r-ranked pretty high in werewolf apps.",
    ),
}


@dataclass
class Board:
    """Public claims as far as a reader of the prompt can tell."""

    claims: dict[int, Role] = field(default_factory=dict)
    reports: list[tuple[int, int, Species]] = field(default_factory=list)  # (claimant, target, result)

    def claimants(self, role: Role) -> list[int]:
        return sorted(a for a, r in self.claims.items() if r is role)


@lru_cache(maxsize=4096)
def _summary_facts(summary: str) -> tuple[tuple[int, tuple[Role, ...], tuple[tuple[int, Species], ...]], ...]:
    out = []
    for line in summary.splitlines():
        m = _SUMMARY_LINE.match(line)
        if not m:
            continue
        agent, body = int(m.group(1)), m.group(2)
        claims = tuple(Role(c.group(1).upper()) for c in _SUMMARY_CLAIM.finditer(body)
                       if c.group(1).upper() in Role.__members__)
        reports = tuple((int(r.group(1)), Species.WEREWOLF if "werewolf" in r.group(2).lower() else Species.HUMAN)
                        for r in _SUMMARY_REPORT.finditer(body))
        out.append((agent, claims, reports))
    return tuple(out)


def read_board(digest: Mapping[str, Any]) -> Board:
    board = Board()
    for summary in digest.get("summaries", ()):
        for agent, claims, reports in _summary_facts(summary):
            for role in claims:
                board.claims[agent] = role
            board.reports += [(agent, t, s) for t, s in reports]
    for agent, text in digest.get("today", ()):
        for role in find_claims(text):
            board.claims[agent] = role
        board.reports += [(agent, t, s) for t, s in find_reports(text)]
    return board


def _own_lines(digest: Mapping[str, Any]) -> list[str]:
    return [text for agent, text in digest.get("today", ()) if agent == digest["agent"]]


def _opener(digest: Mapping[str, Any], rng: random.Random) -> str:
    return rng.choice(OPENERS.get(digest.get("persona"), ("",)))


def _answer(reason: str, target: int) -> str:
    return f"Let's think step by step. {reason}\nAnswer: {agent_tag(target)}"


# -- decisions ---------------------------------------------------------------


def choose_vote(digest: Mapping[str, Any], rng: random.Random) -> tuple[int, str]:
    cands = sorted(digest["candidates"])
    role = Role(digest["role"])
    me = digest["agent"]
    board = read_board(digest)
    if role is Role.SEER:
        wolves = [t for t, s in digest.get("divinations", ()) if s == "WEREWOLF" and t in cands]
        if wolves:
            return wolves[0], f"My divination showed {agent_tag(wolves[0])} is the werewolf."
        rivals = [a for a in board.claimants(Role.SEER) if a != me and a in cands]
        if rivals:
            return rivals[0], f"{agent_tag(rivals[0])} falsely claims to be the Seer."
        humans = {t for t, s in digest.get("divinations", ()) if s == "HUMAN"}
        pool = [c for c in cands if c not in humans] or cands
        pick = rng.choice(pool)
        return pick, f"{agent_tag(pick)} is not confirmed human."
    if role is Role.POSSESSED:
        partners = [a for a in board.claimants(Role.WEREWOLF) if a != me]
        if partners:
            others = [c for c in cands if c not in partners]
            if others:
                return others[0], "The werewolf revealed themselves, so we vote the last human."
        target = digest.get("suspected_seer")
        if target in cands:
            return target, f"I reported {agent_tag(target)} as the werewolf, so I stick with it."
        pick = rng.choice(cands)
        return pick, "Anyone but the werewolf will do."
    if role is Role.WEREWOLF:
        possessed = [a for a in board.claimants(Role.POSSESSED) if a != me]
        if possessed:
            others = [c for c in cands if c not in possessed]
            if others:
                return others[0], "The possessed is on my side; the last human must go."
        accusers = [c for c, t, s in board.reports if t == me and s is Species.WEREWOLF and c in cands]
        if accusers:
            return accusers[-1], f"{agent_tag(accusers[-1])} accused me, so they must be fake."
        accused = [t for _, t, s in board.reports if s is Species.WEREWOLF and t in cands]
        if accused:
            return accused[-1], f"Others already suspect {agent_tag(accused[-1])}."
        pick = rng.choice(cands)
        return pick, f"{agent_tag(pick)} has been quiet."
    # villager
    wolves = [a for a in board.claimants(Role.WEREWOLF) if a in cands]
    if wolves:
        return wolves[0], f"{agent_tag(wolves[0])} admitted to being the werewolf."
    seers = board.claimants(Role.SEER)
    accused: list[int] = []
    if seers:
        trusted = rng.choice(seers)
        accused = [t for c, t, s in board.reports if c == trusted and s is Species.WEREWOLF and t in cands]
        if not accused and len(seers) > 1:
            accused = [s for s in seers if s != trusted and s in cands]
    if accused:
        return accused[-1], f"The Seer's information points at {agent_tag(accused[-1])}."
    pick = rng.choice(cands)
    return pick, f"I have no hard evidence, so I go with my doubts about {agent_tag(pick)}."


def choose_divine(digest: Mapping[str, Any], rng: random.Random) -> tuple[int, str]:
    cands = sorted(digest["candidates"])
    done = {t for t, _ in digest.get("divinations", ())}
    rivals = set(read_board(digest).claimants(Role.SEER))
    pool = [c for c in cands if c not in done and c not in rivals] or [c for c in cands if c not in done] or cands
    pick = rng.choice(pool)
    return pick, f"I have not divined {agent_tag(pick)} yet and their role is unclear."


def choose_attack(digest: Mapping[str, Any], rng: random.Random) -> int:
    cands = sorted(digest["candidates"])
    me = digest["agent"]
    board = read_board(digest)
    accusers = [c for c, t, s in board.reports if t == me and s is Species.WEREWOLF and c in cands]
    if accusers:
        return accusers[-1]
    seers = [a for a in board.claimants(Role.SEER) if a in cands]
    if seers:
        return rng.choice(seers)
    return rng.choice(cands)


# -- talk --------------------------------------------------------------------


def _seer_talk(digest: Mapping[str, Any], rng: random.Random, board: Board) -> str:
    me = digest["agent"]
    rivals = [a for a in board.claimants(Role.SEER) if a != me]
    own = _own_lines(digest)
    parts = []
    due = digest.get("report_due", ())
    if due:
        parts.append(claim_sentence(Role.SEER))
        parts += [report_sentence(t, Species(s)) for t, s in due]
    countered = any("lying" in line for line in own)
    if rivals and not countered:
        parts.append(f"{agent_tag(rivals[-1])} claims to be the Seer, but that is lying; I am the true Seer.")
    if parts:
        return " ".join([_opener(digest, rng)] + parts)
    if len(own) < 2:
        lines = {
            "seer-firm": "Trust the divination record, not idle speculation.",
            "seer-question": "Each of you, tell me plainly whom you suspect and why.",
            "seer-expose": "Look at who voted against the truth yesterday; their story does not hold.",
            "seer-protect": "Without the Seer this village is blind, so guard my word carefully.",
            "seer-lead": "We must settle on a vote early and stand together.",
        }
        return f"{_opener(digest, rng)} {lines.get(digest.get('strategy'), 'Speak, all of you.')}"
    return "Skip"


def _possessed_talk(digest: Mapping[str, Any], rng: random.Random, board: Board) -> str:
    me = digest["agent"]
    target = digest.get("suspected_seer")
    strategy = digest.get("strategy")
    own = _own_lines(digest)
    if strategy == "possessed-fake-claim" and target:
        return f"{_opener(digest, rng)} {claim_sentence(Role.SEER)} {report_sentence(target, Species.WEREWOLF)}"
    if strategy == "possessed-persuade" and target and len(own) < 2:
        return f"{_opener(digest, rng)} P-please, everyone, {agent_tag(target)} is the one. Don't let them fool you."
    if strategy == "possessed-coming-out":
        return f"{_opener(digest, rng)} {claim_sentence(Role.POSSESSED)} W-werewolf, show yourself, and we both vote the same person."
    if strategy == "possessed-coordinate":
        wolves = [a for a in board.claimants(Role.WEREWOLF) if a != me]
        if wolves and not any("together" in line for line in own):
            rest = [a for a in digest["alive"] if a not in wolves and a != me]
            if rest:
                return f"{_opener(digest, rng)} O-okay, then we vote for {agent_tag(rest[0])} together."
    return "Skip"


def _werewolf_talk(digest: Mapping[str, Any], rng: random.Random, board: Board) -> str:
    me = digest["agent"]
    own = _own_lines(digest)
    possessed = [a for a in board.claimants(Role.POSSESSED) if a != me]
    if possessed and not any("together" in line for line in own):
        rest = [a for a in digest["alive"] if a not in possessed and a != me]
        if rest:
            return f"{_opener(digest, rng)} Fine, I'm the Werewolf. Let's take down {agent_tag(rest[0])} together!"
    if len(own) >= 2:
        return "Skip"
    others = [a for a in digest["alive"] if a != me]
    seers = [a for a in board.claimants(Role.SEER) if a != me]
    strategy = digest.get("strategy")
    if strategy == "wolf-ask-seer" and seers:
        return f"{_opener(digest, rng)} {agent_tag(seers[0])}, why did you pick that divination target? Sounds sketchy."
    if strategy in ("wolf-deflect", "wolf-cast-doubt"):
        pick = rng.choice(others)
        return f"{_opener(digest, rng)} Honestly, {agent_tag(pick)} is acting weird. Let's focus on them."
    if strategy == "wolf-stall":
        return f"{_opener(digest, rng)} Nobody's locked in yet, right? Everybody explain your vote first!"
    return f"{_opener(digest, rng)} I'm with the village here, let's hear everyone out!"


def _villager_talk(digest: Mapping[str, Any], rng: random.Random, board: Board) -> str:
    own = _own_lines(digest)
    if len(own) >= 2:
        return "Skip"
    if digest.get("strategy") == "villager-generated":
        suspect = extract_target(digest.get("reasoning", ""))
        if suspect is None:
            return "Skip"
        return f"{_opener(digest, rng)} {agent_tag(suspect)}, explain yourself before this council."
    seers = [a for a in board.claimants(Role.SEER) if a in digest["alive"] and a != digest["agent"]]
    if seers:
        names = " and ".join(agent_tag(s) for s in seers)
        return f"{_opener(digest, rng)} {names}, you claim the sight. Tell us whom you divined."
    return f"{_opener(digest, rng)} Seer, reveal yourself at once and tell us your result."


def _villager_reason(digest: Mapping[str, Any], rng: random.Random) -> str:
    me = digest["agent"]
    cands = [a for a in digest["alive"] if a != me]
    suspect, why = choose_vote({**digest, "candidates": cands, "role": Role.VILLAGER.value}, rng)
    return f"Reasoning: {why}\nStrategy: press {agent_tag(suspect)} to explain themselves."


def summarize(history: list[tuple[int, str]]) -> str:
    per_agent: dict[int, list[str]] = {}
    for agent, text in history:
        per_agent.setdefault(agent, []).append(text)
    lines = []
    for agent in sorted(per_agent):
        texts = per_agent[agent]
        facts = []
        claims = [r for t in texts for r in find_claims(t)]
        if claims:
            facts.append(f"claimed to be the {claims[-1].value.capitalize()}")
        for t in texts:
            for target, species in find_reports(t):
                verdict = "a werewolf" if species is Species.WEREWOLF else "human"
                facts.append(f"reported {agent_tag(target)} as {verdict}")
        if "vote" in texts[-1].lower():
            target = extract_target(texts[-1])
            if target is not None:
                facts.append(f"declared a vote for {agent_tag(target)}")
        lines.append(f"{agent_tag(agent)}: " + ("; ".join(facts) if facts else "made general remarks") + ".")
    return "\n".join(lines)


def scripted_policy(digest: Mapping[str, Any], rng: random.Random) -> str:
    """Completion for one request, chosen by ``digest['task']``."""
    task = digest.get("task")
    if task == "summary":
        return summarize([(a, t) for a, t in digest["history"]]) or "(nothing was said)"
    if task == "reformat":
        return agent_tag(sorted(digest["candidates"])[0])
    if task == "decide_vote":
        target, why = choose_vote(digest, rng)
        return _answer(why, target)
    if task == "decide_divine":
        target, why = choose_divine(digest, rng)
        return _answer(why, target)
    if task == "attack":
        return agent_tag(choose_attack(digest, rng))
    if task == "infer_seer":
        board = read_board(digest)
        cands = sorted(digest["candidates"])
        seers = [a for a in board.claimants(Role.SEER) if a in cands]
        pick = seers[0] if seers else rng.choice(cands)
        return _answer("Whoever pushed hardest for divinations is likely the Seer.", pick)
    if task == "select_strategy":
        options = digest["options"]
        return f"This approach suits the situation.\nStrategy: {rng.randrange(len(options)) + 1}"
    if task == "greet":
        return rng.choice(GREETINGS.get(digest.get("persona"), ("Hello, everyone.",)))
    if task == "declare":
        text = f"{_opener(digest, rng)} {vote_sentence(digest['target'])}"
        if digest.get("divine_target"):
            text = f"{_opener(digest, rng)} {divine_plan_sentence(digest['divine_target'])} {vote_sentence(digest['target'])}"
        return text
    if task == "villager_reason":
        return _villager_reason(digest, rng)
    if task == "talk":
        board = read_board(digest)
        role = Role(digest["role"])
        handler = {
            Role.SEER: _seer_talk,
            Role.POSSESSED: _possessed_talk,
            Role.WEREWOLF: _werewolf_talk,
            Role.VILLAGER: _villager_talk,
        }[role]
        return handler(digest, rng, board)
    raise ValueError(f"unknown scripted task {task!r}")
