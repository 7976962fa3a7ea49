"""Closed form vs waterfilling on seeded random instances, plus the decomposition checks.

    python3 scripts/equivalence_sweep.py --per-field 1000
"""

import argparse
import time
from collections import Counter
from dataclasses import dataclass

from lcbc3.capacity import capacity_report
from lcbc3.decomposition import accounting_holds, decompose, verify_properties
from lcbc3.field import make_field
from lcbc3.instance import random_instance, signal_spaces
from lcbc3.oracle import lp_lattice_oracle


@dataclass
class SweepConfig:
    per_field: int = 1000
    max_d: int = 6
    fields: tuple[tuple[int, int], ...] = ((2, 1), (3, 1), (2, 2), (5, 1))
    lattice_every: int = 40
    decompose: bool = True


def run(cfg: SweepConfig) -> int:
    mismatches = prop_failures = lattice_bad = lattice_runs = 0
    deltas = Counter()
    t0 = time.perf_counter()
    for fi, (p, n) in enumerate(cfg.fields):
        F = make_field(p, n)
        for i in range(cfg.per_field):
            inst = random_instance([fi, i], F, 1 + i % cfg.max_d)
            fam = signal_spaces(inst)
            rep = capacity_report(fam)
            deltas[rep.delta_star.denominator] += 1
            mismatches += rep.delta_star != rep.F_star
            if cfg.decompose:
                b = decompose(fam)
                prop_failures += not (verify_properties(b).ok and accounting_holds(b))
            if cfg.lattice_every and i % cfg.lattice_every == 0:
                lattice_runs += 1
                lattice_bad += lp_lattice_oracle(inst).best != rep.F_star
        print(f"GF({p}^{n}): {cfg.per_field} instances done, {time.perf_counter() - t0:.1f}s elapsed")
    total = cfg.per_field * len(cfg.fields)
    print(f"instances: {total}")
    print(f"closed form != waterfill: {mismatches}")
    print(f"half-integral optima: {deltas[2]}, integral: {deltas[1]}")
    if cfg.decompose:
        print(f"decomposition failures: {prop_failures}")
    print(f"lattice oracle disagreements: {lattice_bad}/{lattice_runs}")
    return int(bool(mismatches or prop_failures or lattice_bad))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--per-field", type=int, default=SweepConfig.per_field)
    ap.add_argument("--max-d", type=int, default=SweepConfig.max_d)
    ap.add_argument("--lattice-every", type=int, default=SweepConfig.lattice_every)
    ap.add_argument("--no-decompose", action="store_true")
    a = ap.parse_args()
    raise SystemExit(run(SweepConfig(a.per_field, a.max_d, lattice_every=a.lattice_every, decompose=not a.no_decompose)))


if __name__ == "__main__":
    main()
