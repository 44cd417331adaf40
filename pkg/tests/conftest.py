from __future__ import annotations

from dataclasses import dataclass, field

import pytest

from wolfdial.orchestrator import MatchConfig
from wolfdial.selfplay import self_match


@dataclass
class Run:
    seed: int
    text: str
    events: list
    roles: dict
    sent: list = field(default_factory=list)  # (agent, line)
    agents: dict = field(default_factory=dict)


def run_scripted(seed: int, record: bool = False) -> Run:
    sent: list = []
    sm = self_match(MatchConfig(seed=seed), record=record, on_send=lambda a, line: sent.append((a, line)))
    log = sm.run()
    return Run(seed, log.to_jsonl(), log.events, dict(sm.match.state.roles), sent, sm.agents)


@pytest.fixture(scope="session")
def clean_runs() -> list[Run]:
    """Scripted self-matches over seeds 0..99, shared by several modules."""
    return [run_scripted(s) for s in range(100)]


@pytest.fixture(scope="session")
def recorded_runs() -> list[Run]:
    return [run_scripted(s, record=True) for s in range(20)]


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
