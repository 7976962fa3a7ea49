"""One-shot (L=1) chromatic cost against Delta* on small random instances.

Every instance must satisfy q^Delta* <= chi.  Instances where chi is strictly
larger show the gap that vector-linear coding closes.

    python3 scripts/oracle_sandwich.py --instances 200 --max-vertices 256
"""

import argparse
from collections import Counter
from dataclasses import dataclass

from lcbc3.capacity import solve
from lcbc3.field import make_field
from lcbc3.instance import FIXTURES, fixture, random_instance
from lcbc3.oracle import build_confusability, scalar_optimal_cost


@dataclass
class SandwichConfig:
    instances: int = 200
    max_vertices: int = 256
    node_budget: int = 200_000
    seed: int = 0


def check(inst, budget):
    ds = solve(inst).delta_star
    res, cost = scalar_optimal_cost(build_confusability(inst, cap=10**6), budget)
    sound = inst.q**ds.numerator <= cost.chi_upper**ds.denominator
    return ds, res, cost, sound


def run(cfg: SandwichConfig) -> int:
    print("fixtures:")
    for name in sorted(FIXTURES):
        ds, res, cost, _ = check(fixture(name), cfg.node_budget)
        print(f"  {name:>9}: chi={res.chi} one-shot {cost.describe():<22} Delta*={ds}")
    fields = [make_field(2), make_field(3)]
    tally, violations = Counter(), 0
    for i in range(cfg.instances):
        F = fields[i % 2]
        inst = random_instance([cfg.seed, i], F, 1 + i % 5)
        if F.q**inst.d > cfg.max_vertices:
            tally["skipped"] += 1
            continue
        ds, res, cost, sound = check(inst, cfg.node_budget)
        violations += not sound
        if not res.exact:
            tally["inconclusive"] += 1
        elif cost.strictly_above(ds):
            tally["gap"] += 1
        else:
            tally["tight"] += 1
    print(f"random: {dict(tally)}, violations of q^Delta* <= chi: {violations}")
    return int(violations > 0)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=SandwichConfig.instances)
    ap.add_argument("--max-vertices", type=int, default=SandwichConfig.max_vertices)
    ap.add_argument("--node-budget", type=int, default=SandwichConfig.node_budget)
    ap.add_argument("--seed", type=int, default=SandwichConfig.seed)
    a = ap.parse_args()
    raise SystemExit(run(SandwichConfig(a.instances, a.max_vertices, a.node_budget, a.seed)))


if __name__ == "__main__":
    main()
