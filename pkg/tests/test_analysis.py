import json
import random

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from wolfdial.analysis import (
    VIOLATION_KINDS,
    check_consistency,
    distinct_n,
    game_record,
    match_report,
    parse_log,
    report_table,
    transcript_from_text,
)
from wolfdial.faults import FAULT_KINDS, NotApplicable, inject
from wolfdial.orchestrator import MalformedLog


def build_log(events):
    header = {"event": "game_start", "day": 0, "schema_version": 1, "seed": 0,
              "roles": {"1": "SEER", "2": "VILLAGER", "3": "WEREWOLF", "4": "VILLAGER", "5": "POSSESSED"}}
    out = [header] + events
    return "".join(json.dumps(dict(e, seq=i)) + "\n" for i, e in enumerate(out))


def talk(day, turn, idx, agent, text):
    return {"event": "talk", "day": day, "turn": turn, "idx": idx, "agent": agent, "text": text}


def two_claimant_log(vote_of_agent1=5):
    """Two seer claimants on Day 1; Agent[01] declares and votes Agent[05]."""
    return build_log([
        {"event": "day_start", "day": 0, "alive": [1, 2, 3, 4, 5], "talk_turns": 1},
        talk(0, 0, 0, 1, "H-hi everyone."),
        talk(0, 0, 1, 5, "Greetings, council."),
        {"event": "divine", "day": 0, "agent": 1, "target": 3, "result": "WEREWOLF"},
        {"event": "day_start", "day": 1, "alive": [1, 2, 3, 4, 5], "talk_turns": 2},
        talk(1, 0, 0, 5, "I am the Seer. I divined Agent[02], and the result is human."),
        talk(1, 0, 1, 1, "I-I'm the real seer... Agent[05] is lying. I divined Agent[03], and they are a werewolf."),
        talk(1, 0, 2, 2, "Over"),
        talk(1, 1, 0, 1, "S-so, Agent[05] must be the werewolf. I will vote for Agent[05]."),
        talk(1, 1, 1, 5, "I will vote for Agent[01]."),
        {"event": "vote", "day": 1, "agent": 1, "target": vote_of_agent1},
        {"event": "vote", "day": 1, "agent": 2, "target": 5},
        {"event": "vote", "day": 1, "agent": 3, "target": 1},
        {"event": "vote", "day": 1, "agent": 4, "target": 5},
        {"event": "vote", "day": 1, "agent": 5, "target": 1},
        {"event": "execution", "day": 1, "target": 5, "tie": False},
        {"event": "attack", "day": 1, "agent": 3, "target": 4},
        {"event": "game_end", "day": 1, "winner": "WEREWOLF", "alive": [1, 2, 3]},
    ])


def test_declared_and_cast_vote_agree():
    report = check_consistency(two_claimant_log())
    assert not [v for v in report.violations if v.kind == "vote_mismatch"]


def test_flipped_vote_names_agent_and_day():
    text = two_claimant_log(vote_of_agent1=2)
    report = check_consistency(text)
    assert [(v.kind, v.day, v.agent) for v in report.violations] == [("vote_mismatch", 1, 1)]
    lines = text.splitlines()
    decl, vote = report.violations[0].evidence_lines
    assert "I will vote for Agent[05]" in lines[decl - 1]
    assert '"event": "vote"' in lines[vote - 1] and '"agent": 1' in lines[vote - 1]


def test_dead_speaker_and_duplicate_detected():
    events = json.loads("[" + ",".join(two_claimant_log().splitlines()[1:]) + "]")
    events.insert(-1, talk(1, 1, 2, 4, "One more thing."))
    events.insert(-1, talk(1, 1, 3, 1, "And another."))
    report = check_consistency(build_log(events))
    kinds = sorted(v.kind for v in report.violations)
    assert kinds == ["dead_speaker", "duplicate_turn_speech"]


def test_missing_report_and_retraction_exemption():
    base = [
        {"event": "day_start", "day": 0, "alive": [1, 2, 3, 4, 5], "talk_turns": 1},
        talk(0, 0, 0, 2, "I am the Seer, just so you know."),
        {"event": "day_start", "day": 1, "alive": [1, 2, 3, 4, 5], "talk_turns": 2},
    ]
    silent = check_consistency(build_log(base + [talk(1, 0, 0, 2, "Let us vote wisely.")]))
    assert [(v.kind, v.day, v.agent) for v in silent.violations] == [("missing_seer_report", 1, 2)]
    retracted = check_consistency(build_log(base + [talk(1, 0, 0, 2, "Fine, I am a villager.")]))
    assert retracted.violations == []
    reported = check_consistency(build_log(base + [talk(1, 0, 0, 2, "I divined Agent[04] and they are human.")]))
    assert reported.violations == []


def test_clean_scripted_logs_have_no_violations(clean_runs):
    for run in clean_runs:
        assert check_consistency(run.text).violations == [], run.seed


def test_analysis_is_pure(clean_runs):
    text = clean_runs[3].text
    assert check_consistency(text).to_json() == check_consistency(text).to_json()


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(0, 99), st.sampled_from(FAULT_KINDS), st.integers(0, 2**16))
def test_fault_injection_completeness(clean_runs, index, kind, salt):
    text = clean_runs[index].text
    try:
        injection = inject(text, kind, random.Random(salt))
    except NotApplicable:
        return
    violations = check_consistency(injection.text).violations
    assert [(v.kind, v.day, v.agent) for v in violations] == [(kind, injection.day, injection.agent)]
    n_lines = len(injection.text.splitlines())
    assert all(1 <= ln <= n_lines for ln in violations[0].evidence_lines)


def test_every_kind_is_injectable(clean_runs):
    for kind in VIOLATION_KINDS:
        ok = 0
        for run in clean_runs[:40]:
            try:
                inject(run.text, kind, random.Random(run.seed))
                ok += 1
            except NotApplicable:
                pass
        assert ok >= 25, kind


@pytest.mark.parametrize(
    "text",
    [
        "",
        "{oops\n",
        '{"event":"talk","day":0,"turn":0,"idx":0,"agent":1,"text":"x"}\n',
        build_log([{"event": "talk", "day": 0}]),
        build_log([{"event": "mystery", "day": 0}]),
        build_log([]).replace('"schema_version": 1', '"schema_version": 2'),
    ],
)
def test_malformed_logs(text):
    with pytest.raises(MalformedLog):
        check_consistency(text)


def test_transcript_format():
    text = transcript_from_text(two_claimant_log())
    assert "===== Day 1 =====" in text
    assert "Agent[05]: I am the Seer." in text
    assert "[execution] Agent[05] was executed" in text
    assert "Agent[02]: Over" not in text
    assert "Agent[02]: Over" in transcript_from_text(two_claimant_log(), include_control=True)


def test_match_report_aggregates(clean_runs):
    records = [game_record(r.text) for r in clean_runs]
    report = match_report(records)
    agg = report["aggregate"]
    assert agg["games"] == len(records) == len(report["games"])
    assert sum(agg["team_wins"].values()) == len(records)
    assert agg["team_wins"]["HUMAN"] == sum(r.winner == "HUMAN" for r in records)
    assert abs(agg["team_win_rate"]["HUMAN"] + agg["team_win_rate"]["WEREWOLF"] - 1) < 1e-12
    assert agg["mean_end_day"] == pytest.approx(sum(r.end_day for r in records) / len(records))
    for r in records:
        assert r.survival["WEREWOLF"] == (1 if r.winner == "WEREWOLF" else 0)
    assert "HUMAN" in report_table(report)


def test_distinct_n():
    assert distinct_n(["a b c", "a b c"], 1) == 0.5
    assert distinct_n([], 2) == 0.0
    assert distinct_n(["a b", "c d"], 2) == 1.0


def test_parse_log_line_numbers_skip_blank_lines():
    text = two_claimant_log()
    events = parse_log(text.replace("\n", "\n\n", 1))
    assert events[1][0] == 3
