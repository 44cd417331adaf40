"""Play a batch of scripted self-matches and print outcome statistics.

    python scripts/self_match.py --games 200 --seed 0
"""

from __future__ import annotations

import argparse
import time

from wolfdial.analysis import check_consistency, game_record, match_report, report_table
from wolfdial.orchestrator import MatchConfig
from wolfdial.selfplay import play


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--games", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--talk-turns", type=int, default=None, help="override max talk turns per day")
    ns = p.parse_args()

    cfg_kwargs = {} if ns.talk_turns is None else {"max_talk_turns_per_day": ns.talk_turns}
    t0 = time.perf_counter()
    records, violations = [], 0
    for seed in range(ns.seed, ns.seed + ns.games):
        text = play(MatchConfig(seed=seed, **cfg_kwargs)).to_jsonl()
        records.append(game_record(text))
        violations += len(check_consistency(text).violations)
    elapsed = time.perf_counter() - t0

    print(report_table(match_report(records)))
    print(f"consistency violations: {violations}")
    print(f"{ns.games} games in {elapsed:.1f} s ({1000 * elapsed / max(ns.games, 1):.0f} ms/game)")


if __name__ == "__main__":
    main()
