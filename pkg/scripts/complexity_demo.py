"""Block complexity ratios for Thue-Morse, a PRNG word and a periodic word."""

import argparse

from detnorm.analysis import interval_domains, rate_profile
from detnorm.generators import prng_uniform, thue_morse
from detnorm.group_core import FiniteSet, naturals
from detnorm.symbolic import periodic


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200000)
    ap.add_argument("--max-len", type=int, default=16)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    G = naturals()
    W = FiniteSet.interval(G, 0, args.n - 1)
    words = {
        "thue-morse": thue_morse(G),
        "prng": prng_uniform(args.seed, G),
        "periodic-011": periodic(G, [0, 1, 1]),
    }
    doms = interval_domains(G, args.max_len)
    for name, x in words.items():
        prof = rate_profile(x, doms, W)
        print(f"# {name}  estimate={prof.estimate:.4f}")
        print(prof.to_csv(), end="")


if __name__ == "__main__":
    main()
