"""Regression sweep of the proven inequalities plus the perturbation profile.

Prints per-check worst margins, then how far the main-theorem margins move
when a semidefinite pair is shifted by eps*I. The movement is reported both
against eps and against sqrt(eps).

    python scripts/theorem_sweep.py --count 10000
"""

import argparse
import json
import time

import numpy as np

from matineq import drury, harness
from matineq import linalg as la
from matineq.inequalities import check_bkd


def perturbation_profile(count, seed):
    lin, root = {}, {}
    for spec in harness.trial_specs(count, seed):
        if spec.rank is None:
            continue
        A, B = harness.trial_pair(spec)
        m0 = check_bkd(A, B).margins
        s = la.scale(A, B)
        for eps, m in drury.epsilon_sweep(A, B).items():
            d = float(np.max(np.abs(m - m0)))
            lin[eps] = max(lin.get(eps, 0.0), d / (eps * s))
            root[eps] = max(root.get(eps, 0.0), d / (np.sqrt(eps) * s))
    return {repr(e): {"over_eps": lin[e], "over_sqrt_eps": root[e]} for e in sorted(lin)}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb-count", type=int, default=1000)
    args = p.parse_args()

    t0 = time.perf_counter()
    summary = harness.regression(args.count, args.seed)
    out = summary.to_record()
    out["seconds"] = round(time.perf_counter() - t0, 2)
    out["perturbation"] = perturbation_profile(args.perturb_count, args.seed)
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
