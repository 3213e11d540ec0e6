"""Run (or resume) the conjecture search and print its summary.

    python scripts/run_search.py --out search.jsonl
    python scripts/run_search.py --out search.jsonl --resume
"""

import argparse
import json
import logging

from matineq import search


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", required=True, help="JSONL results file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=500, help="trials per (n, t) cell")
    p.add_argument("--refine-top", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--resume", action="store_true", help="continue an interrupted file")
    p.add_argument("--salvage", action="store_true", help="drop a corrupt trailing line on resume")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    cfg = search.SearchConfig(trials_per_cell=args.trials, refine_top=args.refine_top, seed=args.seed,
                              out_path=args.out, workers=args.workers)
    if args.resume:
        report = search.resume(args.out, cfg, salvage=args.salvage)
    else:
        report = search.run(cfg)
    print(json.dumps(report.summary(), indent=2))


if __name__ == "__main__":
    main()
