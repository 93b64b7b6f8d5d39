"""Show a strengthening addition lowering Parzen influence while MIM rises.

Usage: python scripts/parzen_counterexample.py [--sigma 0.5]
"""

import argparse

from mimkit.baselines import parzen_influence, parzen_potential
from mimkit.core import Dataset, WeightKernel
from mimkit.mim import mim_influence


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma", type=float, default=0.5)
    args = ap.parse_args()

    base = Dataset([[1.5], [0.3], [0.0], [0.15], [0.45]], [1, 1, -1, -1, -1])
    grown = base.with_point([1.65], 1).with_point([1.8], 1)
    kernel = WeightKernel("inverse_square")
    print(f"{'dataset':<8} {'potential':>10} {'parzen':>10} {'mim':>10}")
    for name, ds in (("before", base), ("after", grown)):
        p = parzen_potential(ds, ds.X[0], args.sigma)
        g = parzen_influence(ds, 0, args.sigma).values[0]
        m = mim_influence(ds, 0, kernel).values[0]
        print(f"{name:<8} {p:>10.4f} {g:>10.4f} {m:>10.4f}")


if __name__ == "__main__":
    main()
