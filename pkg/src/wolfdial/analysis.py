"""Consistency checks, match statistics and transcripts for event logs."""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from statistics import mean
from typing import Any, Iterable, Sequence

from .core import AGENT_IDS, CONTROL_TOKENS, OVER, Role
from .grammar import agent_tag, extract_target, find_claims, find_reports
from .orchestrator import SCHEMA_VERSION, MalformedLog

VIOLATION_KINDS = ("vote_mismatch", "dead_speaker", "duplicate_turn_speech", "missing_seer_report")

_REQUIRED = {
    "game_start": ("roles", "seed"),
    "day_start": ("alive", "talk_turns"),
    "talk": ("turn", "idx", "agent", "text"),
    "vote": ("agent", "target"),
    "execution": ("target",),
    "attack": ("agent", "target"),
    "divine": ("agent", "target", "result"),
    "game_end": ("winner",),
}


@dataclass(frozen=True)
class Violation:
    kind: str
    day: int
    agent: int
    evidence_lines: tuple[int, ...]
    detail: str = ""


@dataclass
class ConsistencyReport:
    violations: list[Violation] = field(default_factory=list)
    info: dict[str, Any] = field(default_factory=dict)

    def count(self, kind: str) -> int:
        return sum(1 for v in self.violations if v.kind == kind)

    def to_dict(self) -> dict[str, Any]:
        return {
            "violations": [asdict(v) | {"evidence_lines": list(v.evidence_lines)} for v in self.violations],
            "counts": {k: self.count(k) for k in VIOLATION_KINDS},
            "info": self.info,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)


def parse_log(text: str) -> list[tuple[int, dict[str, Any]]]:
    """(line number, event) pairs; line numbers are 1-based and refer to ``text``."""
    events = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            ev = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLog(f"line {n}: {exc}") from exc
        if not isinstance(ev, dict) or "event" not in ev or "day" not in ev:
            raise MalformedLog(f"line {n}: not an event object")
        missing = [k for k in _REQUIRED.get(ev["event"], ()) if k not in ev]
        if ev["event"] not in _REQUIRED:
            raise MalformedLog(f"line {n}: unknown event {ev['event']!r}")
        if missing:
            raise MalformedLog(f"line {n}: {ev['event']} event lacks {missing}")
        events.append((n, ev))
    if not events or events[0][1]["event"] != "game_start":
        raise MalformedLog("log must start with a game_start event")
    if events[0][1].get("schema_version") != SCHEMA_VERSION:
        raise MalformedLog(f"unsupported schema_version {events[0][1].get('schema_version')!r}")
    return events


def _read(source: str | Path) -> str:
    return Path(source).read_text(encoding="utf-8")


def distinct_n(texts: Sequence[str], n: int) -> float:
    grams = [tuple(t.lower().split()[i : i + n]) for t in texts for i in range(max(0, len(t.split()) - n + 1))]
    return len(set(grams)) / len(grams) if grams else 0.0


def check_consistency(text: str) -> ConsistencyReport:
    events = parse_log(text)
    alive = set(AGENT_IDS)
    violations: list[Violation] = []

    talks_by_day: dict[int, list[tuple[int, dict]]] = defaultdict(list)
    votes_by_day: dict[int, list[tuple[int, dict]]] = defaultdict(list)
    day_starts: dict[int, tuple[int, dict]] = {}
    for line, ev in events:
        kind, day = ev["event"], ev["day"]
        if kind == "day_start":
            day_starts[day] = (line, ev)
        elif kind == "talk":
            if ev["agent"] not in alive:
                violations.append(
                    Violation("dead_speaker", day, ev["agent"], (line,), "talk by an eliminated agent")
                )
            talks_by_day[day].append((line, ev))
        elif kind == "vote":
            votes_by_day[day].append((line, ev))
        elif kind in ("execution", "attack"):
            alive.discard(ev["target"])

    for day, talks in sorted(talks_by_day.items()):
        per_turn: dict[tuple[int, int], list[int]] = defaultdict(list)
        for line, ev in talks:
            per_turn[(ev["turn"], ev["agent"])].append(line)
        for (turn, agent), lines in sorted(per_turn.items()):
            if len(lines) > 1:
                violations.append(
                    Violation(
                        "duplicate_turn_speech", day, agent, tuple(lines), f"{len(lines)} utterances in turn {turn}"
                    )
                )

    for day, votes in sorted(votes_by_day.items()):
        if day not in day_starts:
            continue
        final_turn = day_starts[day][1]["talk_turns"] - 1
        declared: dict[int, tuple[int, int]] = {}
        for line, ev in talks_by_day.get(day, ()):
            if ev["turn"] == final_turn and ev["text"] not in CONTROL_TOKENS:
                target = extract_target(ev["text"])
                if target is not None:
                    declared[ev["agent"]] = (target, line)
        for line, ev in votes:
            if ev["agent"] in declared and declared[ev["agent"]][0] != ev["target"]:
                target, decl_line = declared[ev["agent"]]
                violations.append(
                    Violation(
                        "vote_mismatch",
                        day,
                        ev["agent"],
                        (decl_line, line),
                        f"declared {agent_tag(target)} but voted {agent_tag(ev['target'])}",
                    )
                )

    violations += _missing_reports(talks_by_day, day_starts)
    order = {k: i for i, k in enumerate(VIOLATION_KINDS)}
    violations.sort(key=lambda v: (v.day, order[v.kind], v.agent, v.evidence_lines))

    spoken: dict[int, list[str]] = defaultdict(list)
    for _, ev in events:
        if ev["event"] == "talk" and ev["text"] not in CONTROL_TOKENS:
            spoken[ev["agent"]].append(ev["text"])
    info = {
        "distinct_1": {str(a): round(distinct_n(t, 1), 4) for a, t in sorted(spoken.items())},
        "distinct_2": {str(a): round(distinct_n(t, 2), 4) for a, t in sorted(spoken.items())},
    }
    return ConsistencyReport(violations, info)


def _missing_reports(
    talks_by_day: dict[int, list[tuple[int, dict]]],
    day_starts: dict[int, tuple[int, dict]],
) -> list[Violation]:
    """Seer claimants must report a divination on each later day they are alive."""
    out = []
    claim: dict[int, tuple[Role, int]] = {}  # agent -> (latest claimed role, line)
    for day in sorted(day_starts):
        talks = talks_by_day.get(day, [])
        claimants = {a: ln for a, (r, ln) in claim.items() if r is Role.SEER}
        alive = set(day_starts[day][1]["alive"])
        for agent, claim_line in sorted(claimants.items()):
            if agent not in alive:
                continue
            own = [(ln, ev["text"]) for ln, ev in talks if ev["agent"] == agent]
            reported = any(find_reports(t) for _, t in own)
            retracted = any(r is not Role.SEER for _, t in own for r in find_claims(t))
            if not reported and not retracted:
                lines = (claim_line,) + tuple(ln for ln, _ in own) or (day_starts[day][0],)
                out.append(
                    Violation("missing_seer_report", day, agent, lines, "claimed Seer but reported no divination")
                )
        for line, ev in talks:
            for role in find_claims(ev["text"]):
                claim[ev["agent"]] = (role, line)
    return out


def analyze(log_path: str | Path) -> ConsistencyReport:
    return check_consistency(_read(log_path))


# -- match statistics ----------------------------------------------------------


@dataclass(frozen=True)
class GameRecord:
    seed: int
    winner: str
    end_day: int
    survival: dict[str, int]  # role -> survivors with that role


def game_record(text: str) -> GameRecord:
    events = [ev for _, ev in parse_log(text)]
    start, end = events[0], events[-1]
    if end["event"] != "game_end":
        raise MalformedLog("log does not end with a game_end event")
    roles = {int(a): Role(r) for a, r in start["roles"].items()}
    survival = Counter(roles[a].value for a in end.get("alive", ()))
    return GameRecord(start["seed"], end["winner"], end["day"], {r.value: survival.get(r.value, 0) for r in Role})


def match_report(records: Iterable[GameRecord]) -> dict[str, Any]:
    records = list(records)
    n = len(records)
    wins = Counter(r.winner for r in records)
    per_role = {r.value: 2 if r is Role.VILLAGER else 1 for r in Role}
    return {
        "games": [asdict(r) for r in records],
        "aggregate": {
            "games": n,
            "team_wins": {t: wins.get(t, 0) for t in ("HUMAN", "WEREWOLF")},
            "team_win_rate": {t: wins.get(t, 0) / n if n else 0.0 for t in ("HUMAN", "WEREWOLF")},
            "role_win_rate": {
                r.value: wins.get(r.team.value, 0) / n if n else 0.0 for r in Role
            },
            "role_survival_rate": {
                role: sum(rec.survival[role] for rec in records) / (k * n) if n else 0.0
                for role, k in per_role.items()
            },
            "mean_end_day": mean(r.end_day for r in records) if n else 0.0,
        },
    }


def report_table(report: dict[str, Any]) -> str:
    agg = report["aggregate"]
    lines = [f"games: {agg['games']}   mean end day: {agg['mean_end_day']:.2f}", ""]
    lines.append(f"{'team':<10}{'wins':>6}{'rate':>8}")
    for team in ("HUMAN", "WEREWOLF"):
        lines.append(f"{team:<10}{agg['team_wins'][team]:>6}{agg['team_win_rate'][team]:>8.3f}")
    lines += ["", f"{'role':<10}{'win':>8}{'survive':>9}"]
    for role in Role:
        lines.append(
            f"{role.value:<10}{agg['role_win_rate'][role.value]:>8.3f}{agg['role_survival_rate'][role.value]:>9.3f}"
        )
    return "\n".join(lines)


# -- transcript ------------------------------------------------------------------


def render_transcript(log_path: str | Path, include_control: bool = False) -> str:
    return transcript_from_text(_read(log_path), include_control)


def transcript_from_text(text: str, include_control: bool = False) -> str:
    events = [ev for _, ev in parse_log(text)]
    roles = events[0]["roles"]
    out = [f"Match seed {events[0]['seed']}", "Roles: " + ", ".join(f"{agent_tag(int(a))} {r.capitalize()}" for a, r in roles.items())]
    for ev in events[1:]:
        kind = ev["event"]
        if kind == "day_start":
            out += ["", f"===== Day {ev['day']} ====="]
        elif kind == "talk":
            if ev["text"] in CONTROL_TOKENS and not include_control:
                continue
            out.append(f"{agent_tag(ev['agent'])}: {ev['text']}")
        elif kind == "vote":
            out.append(f"  [vote] {agent_tag(ev['agent'])} -> {agent_tag(ev['target'])}")
        elif kind == "execution":
            tie = " (tie broken at random)" if ev.get("tie") else ""
            out.append(f"  [execution] {agent_tag(ev['target'])} was executed{tie}")
        elif kind == "attack":
            out.append(f"  [attack] {agent_tag(ev['target'])} was attacked")
        elif kind == "divine":
            out.append(f"  [divine] {agent_tag(ev['agent'])} divined {agent_tag(ev['target'])}: {ev['result'].lower()}")
        elif kind == "game_end":
            out += ["", f"===== {ev['winner'].capitalize()} team wins on Day {ev['day']} ====="]
    return "\n".join(out) + "\n"
