"""Inject each fault kind into clean scripted logs and tabulate detection.

    python scripts/fault_sweep.py --logs 100
"""

from __future__ import annotations

import argparse
import random
from collections import Counter

from wolfdial.analysis import check_consistency
from wolfdial.faults import FAULT_KINDS, NotApplicable, inject
from wolfdial.orchestrator import MatchConfig
from wolfdial.selfplay import play


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--logs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    ns = p.parse_args()

    texts = [play(MatchConfig(seed=s)).to_jsonl() for s in range(ns.seed, ns.seed + ns.logs)]
    print(f"{'kind':<24}{'injected':>9}{'exact':>7}{'n/a':>6}")
    for kind in FAULT_KINDS:
        tally = Counter()
        for i, text in enumerate(texts):
            try:
                inj = inject(text, kind, random.Random(ns.seed + i))
            except NotApplicable:
                tally["n/a"] += 1
                continue
            tally["injected"] += 1
            found = [(v.kind, v.day, v.agent) for v in check_consistency(inj.text).violations]
            tally["exact"] += found == [(kind, inj.day, inj.agent)]
        print(f"{kind:<24}{tally['injected']:>9}{tally['exact']:>7}{tally['n/a']:>6}")


if __name__ == "__main__":
    main()
