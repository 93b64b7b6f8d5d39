"""Run the axiom harness on every measure over random datasets and tabulate pass rates.

Usage: python scripts/axiom_table.py [--datasets 20] [--seed 0] [--jsonl reports.jsonl]
"""

import argparse

import numpy as np

from mimkit.axioms import AXIOMS, counterfactual_measure, lime_measure, mim_measure, parzen_measure, reports_to_jsonl, run_axioms
from mimkit.core import Dataset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--datasets", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jsonl", help="also write every report here")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    sets = []
    for _ in range(args.datasets):
        m, n = int(rng.integers(3, 11)), int(rng.integers(1, 5))
        sets.append(Dataset(rng.uniform(-2, 2, (m, n)), rng.choice([-1.0, 1.0], m)))
    measures = [mim_measure(), parzen_measure(1.0), lime_measure(3.0), counterfactual_measure()]

    all_reports = []
    print(f"{'measure':<18}" + "".join(f"{a:>14}" for a in AXIOMS))
    for measure in measures:
        passed = dict.fromkeys(AXIOMS, 0)
        for k, ds in enumerate(sets):
            for r in run_axioms(measure, ds, 0, seed=k):
                passed[r.axiom] += r.passed
                all_reports.append(r)
        print(f"{measure.name:<18}" + "".join(f"{passed[a]:>10}/{len(sets):<3}" for a in AXIOMS))
    if args.jsonl:
        with open(args.jsonl, "w") as fh:
            fh.write(reports_to_jsonl(all_reports))


if __name__ == "__main__":
    main()
