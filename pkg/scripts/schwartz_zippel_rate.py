"""Empirical rate at which random mixing matrices make a user's determinant vanish.

Compares the observed rate per extension degree with the bound 3 d' / q^z,
where d' is the extended message dimension.

    python3 scripts/schwartz_zippel_rate.py --instances 500 --draws 20 --z-offset 0
"""

import argparse
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from lcbc3.field import make_field
from lcbc3.instance import random_instance
from lcbc3.scheme import mixing_vanishes, prepare, schwartz_zippel_bound


@dataclass
class RateConfig:
    instances: int = 500
    draws: int = 20
    z_offset: int = 0  # negative values probe fields below the planner's choice
    seed: int = 0


def run(cfg: RateConfig) -> None:
    fields = [make_field(p, n) for p, n in ((2, 1), (3, 1), (2, 2), (5, 1))]
    by_bound = defaultdict(lambda: [0, 0])
    for i in range(cfg.instances):
        F = fields[i % len(fields)]
        skel = prepare(random_instance([cfg.seed, i], F, 1 + i % 6))
        z = max(1, skel.planner_z + cfg.z_offset)
        rng = np.random.default_rng([cfg.seed, i, z])
        cache = {}
        hits = sum(mixing_vanishes(skel, z, rng, cache) for _ in range(cfg.draws))
        key = round(schwartz_zippel_bound(skel, z), 4)
        by_bound[key][0] += hits
        by_bound[key][1] += cfg.draws
    total_hits = sum(h for h, _ in by_bound.values())
    total = sum(n for _, n in by_bound.values())
    print(f"{'bound':>8} {'draws':>7} {'rate':>8}")
    for b in sorted(by_bound):
        h, n = by_bound[b]
        print(f"{b:8.4f} {n:7d} {h / n:8.4f}")
    mean_bound = sum(b * n for b, (_, n) in by_bound.items()) / total
    sigma = math.sqrt(sum(n * b * (1 - min(b, 1)) for b, (_, n) in by_bound.items())) / total
    print(f"overall rate {total_hits / total:.4f}, mean bound {mean_bound:.4f}, bound + 3 sigma {mean_bound + 3 * sigma:.4f}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=RateConfig.instances)
    ap.add_argument("--draws", type=int, default=RateConfig.draws)
    ap.add_argument("--z-offset", type=int, default=RateConfig.z_offset)
    ap.add_argument("--seed", type=int, default=RateConfig.seed)
    a = ap.parse_args()
    run(RateConfig(a.instances, a.draws, a.z_offset, a.seed))


if __name__ == "__main__":
    main()
