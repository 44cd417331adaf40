"""Command-line entry points: run, analyze, transcript, serve, agent."""

from __future__ import annotations

import argparse
import json
import logging
import socket
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

import yaml

from .agents import LLMAgent
from .analysis import analyze, game_record, match_report, render_transcript, report_table, check_consistency
from .llm import BackendConfig, BackendFailure, ConfigError
from .orchestrator import MalformedLog, MatchConfig, run_match
from .selfplay import make_backend, play
from .transport import TransportError, accept_agents, run_client

log = logging.getLogger("wolfdial")


@dataclass
class RunConfig:
    match: MatchConfig = field(default_factory=MatchConfig)
    backend: BackendConfig = field(default_factory=BackendConfig)


def load_config(path: str | Path | None) -> RunConfig:
    """Read a YAML file with optional ``match`` and ``backend`` sections."""
    if path is None:
        return RunConfig()
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(data) - {"match", "backend"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    match_data = dict(data.get("match") or {})
    allowed = {f.name for f in fields(MatchConfig)}
    if set(match_data) - allowed:
        raise ConfigError(f"unknown match keys: {sorted(set(match_data) - allowed)}")
    try:
        match = MatchConfig(**match_data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(match, BackendConfig.from_mapping(data.get("backend")))


def _play_one(args: tuple[MatchConfig, str, BackendConfig]) -> str:
    config, backend, backend_config = args
    return play(config, backend, backend_config).to_jsonl()


def cmd_run(ns: argparse.Namespace) -> int:
    cfg = load_config(ns.config)
    out = Path(ns.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(replace(cfg.match, seed=ns.seed + i), ns.backend, cfg.backend) for i in range(ns.games)]
    if ns.workers > 1:
        with ProcessPoolExecutor(ns.workers) as pool:
            logs = list(pool.map(_play_one, jobs))
    else:
        logs = [_play_one(j) for j in jobs]

    records, consistency = [], {}
    for (config, _, _), text in zip(jobs, logs):
        name = f"game_{config.seed}.jsonl"
        (out / name).write_text(text, encoding="utf-8")
        records.append(game_record(text))
        consistency[name] = check_consistency(text).to_dict()["counts"]
    report = match_report(records)
    report["consistency"] = consistency
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    table = report_table(report)
    (out / "report.txt").write_text(table + "\n", encoding="utf-8")
    print(table)
    total = sum(sum(c.values()) for c in consistency.values())
    print(f"\nconsistency violations: {total}")
    return 1 if ns.strict and total else 0


def cmd_analyze(ns: argparse.Namespace) -> int:
    total = 0
    for path in ns.logs:
        report = analyze(path)
        total += len(report.violations)
        if ns.json:
            print(report.to_json())
            continue
        print(f"{path}: {len(report.violations)} violation(s)")
        for v in report.violations:
            lines = ",".join(map(str, v.evidence_lines))
            print(f"  {v.kind} day={v.day} agent={v.agent} lines={lines} {v.detail}")
    return 1 if ns.strict and total else 0


def cmd_transcript(ns: argparse.Namespace) -> int:
    sys.stdout.write(render_transcript(ns.log, include_control=ns.show_control))
    return 0


def cmd_serve(ns: argparse.Namespace) -> int:
    cfg = load_config(ns.config)
    config = replace(cfg.match, seed=ns.seed)
    with socket.create_server((ns.host, ns.port)) as server:
        print(f"waiting for 5 agents on {ns.host}:{server.getsockname()[1]}", file=sys.stderr)
        conns = accept_agents(server, timeout=config.timeout_per_request)
        try:
            events = run_match(config, conns)
        finally:
            for c in conns:
                c.close()
    text = events.to_jsonl()
    if ns.out:
        Path(ns.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_agent(ns: argparse.Namespace) -> int:
    cfg = load_config(ns.config)

    def make_handler(agent_id: int):
        backend = make_backend(ns.backend, ns.seed, agent_id, cfg.backend)
        return LLMAgent(agent_id, backend, seed=ns.seed).handle_line

    run_client(ns.host, ns.port, make_handler)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wolfdial", description="Five-player werewolf self-matches and log analysis.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="play seeded self-matches and write logs plus a report")
    r.add_argument("--games", type=int, default=1)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--backend", choices=("scripted", "http"), default="scripted")
    r.add_argument("--config", help="YAML file with match/backend sections")
    r.add_argument("--out-dir", default="runs")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--strict", action="store_true", help="exit 1 if any log has consistency violations")
    r.set_defaults(func=cmd_run)

    a = sub.add_parser("analyze", help="check logs for consistency violations")
    a.add_argument("logs", nargs="+")
    a.add_argument("--strict", action="store_true")
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("transcript", help="print a readable transcript of one log")
    t.add_argument("log")
    t.add_argument("--show-control", action="store_true", help="keep Over/Skip lines")
    t.set_defaults(func=cmd_transcript)

    s = sub.add_parser("serve", help="run one match against five TCP agents")
    s.add_argument("--host", default="127.0.0.1")
    s.add_argument("--port", type=int, default=10000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--config")
    s.add_argument("--out")
    s.set_defaults(func=cmd_serve)

    g = sub.add_parser("agent", help="connect one agent to a serving orchestrator")
    g.add_argument("--host", default="127.0.0.1")
    g.add_argument("--port", type=int, default=10000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--backend", choices=("scripted", "http"), default="scripted")
    g.add_argument("--config")
    g.set_defaults(func=cmd_agent)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    if getattr(ns, "games", 1) < 1:
        print("error: --games must be at least 1", file=sys.stderr)
        return 2
    try:
        return ns.func(ns)
    except (ConfigError, MalformedLog, TransportError, BackendFailure, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
