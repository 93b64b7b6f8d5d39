"""Sweep random games and report the worst psi / Banzhaf proportionality gap per n.

Usage: python scripts/psi_banzhaf_sweep.py [--games 20] [--max-n 10] [--seed 0]
"""

import argparse
import time

import numpy as np

from mimkit.games import CooperativeGame, verify_psi_banzhaf


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--games", type=int, default=20)
    ap.add_argument("--max-n", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    print(f"{'n':>3} {'factor':>12} {'max residual':>14} {'seconds':>8}")
    for n in range(1, args.max_n + 1):
        start = time.perf_counter()
        worst, factor = 0.0, None
        for _ in range(args.games):
            game = CooperativeGame.random(n, rng)
            for i in range(n):
                rep = verify_psi_banzhaf(game, i)
                worst, factor = max(worst, rep.residual), rep.factor
        print(f"{n:>3} {str(factor):>12} {worst:>14.2e} {time.perf_counter() - start:>8.2f}")


if __name__ == "__main__":
    main()
