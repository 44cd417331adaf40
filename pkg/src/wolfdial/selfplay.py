"""Wiring for self-matches: five in-process agents behind the real codec."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .agents import LLMAgent
from .agents.assets import Assets
from .core import AGENT_IDS
from .llm import Backend, BackendConfig, HTTPBackend, RecordingBackend, ScriptedBackend
from .orchestrator import EventLog, Match, MatchConfig
from .transport import LocalConnection


def make_backend(kind: str, seed: int, agent: int, config: BackendConfig | None = None) -> Backend:
    if kind == "scripted":
        return ScriptedBackend(seed, agent, config)
    if kind == "http":
        return HTTPBackend(config)
    raise ValueError(f"unknown backend {kind!r}")


@dataclass
class SelfMatch:
    match: Match
    agents: dict[int, LLMAgent]
    log: EventLog | None = None

    def run(self) -> EventLog:
        self.log = self.match.run()
        return self.log


def self_match(
    config: MatchConfig,
    backend: str = "scripted",
    backend_config: BackendConfig | None = None,
    *,
    record: bool = False,
    assets: Assets | None = None,
    on_send: Callable[[int, str], None] | None = None,
    seer_selection: str = "llm_selected",
) -> SelfMatch:
    """Build (but do not run) a match between five agents of this package."""
    agents = {}
    for a in AGENT_IDS:
        b = make_backend(backend, config.seed, a, backend_config)
        if record:
            b = RecordingBackend(b, backend_config)
        agents[a] = LLMAgent(a, b, assets=assets, seed=config.seed, seer_selection=seer_selection)
    conns = [LocalConnection(agents[a].handle_line) for a in AGENT_IDS]
    return SelfMatch(Match(config, conns, on_send), agents)


def play(config: MatchConfig, backend: str = "scripted", backend_config: BackendConfig | None = None) -> EventLog:
    return self_match(config, backend, backend_config).run()
