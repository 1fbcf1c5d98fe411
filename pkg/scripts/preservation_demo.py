"""Normality along subsets of the naturals for a seeded PRNG word."""

import argparse

from detnorm.analysis import interval_domains, preservation_experiment
from detnorm.generators import prng_uniform, squarefree_indicator
from detnorm.group_core import everything, naturals, residue_class, standard_intervals


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    y = prng_uniform(args.seed, naturals())
    sets = {
        "all": everything(),
        "evens": residue_class(0, 2),
        "1 mod 3": residue_class(1, 3),
        "squarefree": squarefree_indicator(args.n),
    }
    for name, A in sets.items():
        r = preservation_experiment(y, A, standard_intervals(), args.n, interval_domains(naturals(), 3))
        print(f"{name:12s} simple={r['simple']['verdict']} orbit={r['orbit']['verdict']} "
              f"block={r['block']['verdict']} density={r['density']['lower']:.4f} "
              f"rate={r['rate']['rate_estimate']:.4f}")


if __name__ == "__main__":
    main()
