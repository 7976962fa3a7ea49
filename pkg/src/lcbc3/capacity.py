"""Optimal broadcast cost: closed form, compact delta form and constrained waterfilling.

Everything here is exact; values are ints or ``fractions.Fraction``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .instance import LcbcInstance, SubspaceFamily, normalize, signal_spaces
from .linalg import MatrixFq, hstack, rank

PERMS = tuple(itertools.permutations(range(3)))
LAMBDA_NAMES = ("l123", "l12", "l13", "l23", "l")


class CapacityError(AssertionError):
    """An identity that must hold between the capacity paths failed."""


def perm_label(p) -> str:
    return "".join(str(i + 1) for i in p)


@dataclass(frozen=True)
class RankVector:
    m: tuple[int, int, int]
    r123: int
    r12: int
    r13: int
    r23: int
    r12_13: int
    r12_23: int
    r13_23: int
    r1_23: int  # r_{1(2,3)}
    r2_13: int  # r_{2(1,3)}
    r3_12: int  # r_{3(1,2)}

    @property
    def msum(self) -> int:
        return sum(self.m)

    def invariant_violations(self) -> list[str]:
        bad = []
        if self.r12_13 < max(self.r12, self.r13):
            bad.append("r12,13 < max(r12, r13)")
        if self.r12_23 < max(self.r12, self.r23):
            bad.append("r12,23 < max(r12, r23)")
        if self.r13_23 < max(self.r13, self.r23):
            bad.append("r13,23 < max(r13, r23)")
        if self.r123 > min(self.r12, self.r13, self.r23):
            bad.append("r123 > min pairwise")
        for v, owners in ((self.r12, (self.r1_23, self.r2_13)), (self.r13, (self.r1_23, self.r3_12)),
                          (self.r23, (self.r2_13, self.r3_12))):
            if any(v > o for o in owners):
                bad.append("pairwise rank exceeds an owner's cross rank")
        return bad

    def to_json(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


@dataclass(frozen=True)
class LambdaAllocation:
    l123: Fraction
    l12: Fraction
    l13: Fraction
    l23: Fraction
    l: Fraction

    def as_tuple(self) -> tuple[Fraction, ...]:
        return (self.l123, self.l12, self.l13, self.l23, self.l)

    def pair(self, i: int, j: int) -> Fraction:
        return {(0, 1): self.l12, (0, 2): self.l13, (1, 2): self.l23}[(min(i, j), max(i, j))]

    def denominator(self) -> int:
        return lcm(*(Fraction(v).denominator for v in self.as_tuple()))

    def scaled(self, factor: int) -> tuple[int, ...]:
        out = tuple(Fraction(v) * factor for v in self.as_tuple())
        if any(v.denominator != 1 for v in out):
            raise ValueError(f"scaling by {factor} leaves a fractional lambda")
        return tuple(int(v) for v in out)

    def to_json(self) -> dict:
        return {n: fmt(v) for n, v in zip(LAMBDA_NAMES, self.as_tuple())}


@dataclass(frozen=True)
class CapacityReport:
    delta1: dict[str, Fraction]  # keyed by permutation label "ijk"
    delta2: dict[str, Fraction]
    small_deltas: dict[str, Fraction]  # d1 d2 d3 d12 d13 d23
    delta_star: Fraction
    capacity: Fraction | None  # None when nothing needs broadcasting (unbounded)
    F_star: Fraction
    allocation: LambdaAllocation
    ranks: RankVector
    agree: bool

    def to_json(self) -> dict:
        return {
            "delta1": {k: fmt(v) for k, v in sorted(self.delta1.items())},
            "delta2": {k: fmt(v) for k, v in sorted(self.delta2.items())},
            "deltas": {k: fmt(v) for k, v in sorted(self.small_deltas.items())},
            "delta_star": fmt(self.delta_star),
            "capacity": "inf" if self.capacity is None else fmt(self.capacity),
            "F_star": fmt(self.F_star),
            "lambda": self.allocation.to_json(),
            "ranks": self.ranks.to_json(),
            "agree": self.agree,
        }


def fmt(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


# --- closed form -------------------------------------------------------------------


def closed_form(family: SubspaceFamily) -> tuple[dict[str, Fraction], dict[str, Fraction], Fraction]:
    """All twelve permutation bounds and their maximum."""
    f = family
    msum = sum(f.m(k) for k in range(3))
    r123 = min(f.crank(("U123",), k) for k in range(3))
    d1, d2 = {}, {}
    for p in PERMS:
        i, j, k = p
        d1[perm_label(p)] = Fraction(msum - f.crank(("pair", i, j), j) - f.crank(("cross", k), k))
        pairs = (tuple(sorted((i, j))), tuple(sorted((i, k))))
        half = r123 + f.crank(("pairs",) + pairs, i) + f.crank(("cross", j), j) + f.crank(("cross", k), k)
        d2[perm_label(p)] = msum - Fraction(half, 2)
    return d1, d2, max(max(d1.values()), max(d2.values()))


def rank_vector(family: SubspaceFamily) -> RankVector:
    f = family
    c = f.crank
    return RankVector(
        m=tuple(f.m(k) for k in range(3)),
        r123=min(c(("U123",), k) for k in range(3)),
        r12=min(c(("pair", 0, 1), 0), c(("pair", 0, 1), 1)),
        r13=min(c(("pair", 0, 2), 0), c(("pair", 0, 2), 2)),
        r23=min(c(("pair", 1, 2), 1), c(("pair", 1, 2), 2)),
        r12_13=c(("pairs", (0, 1), (0, 2)), 0),
        r12_23=c(("pairs", (0, 1), (1, 2)), 1),
        r13_23=c(("pairs", (0, 2), (1, 2)), 2),
        r1_23=c(("cross", 0), 0),
        r2_13=c(("cross", 1), 1),
        r3_12=c(("cross", 2), 2),
    )


def small_deltas(rv: RankVector) -> dict[str, Fraction]:
    s = rv.msum
    return {
        "d1": Fraction(s - rv.r23 - rv.r1_23),
        "d2": Fraction(s - rv.r13 - rv.r2_13),
        "d3": Fraction(s - rv.r12 - rv.r3_12),
        "d23": s - Fraction(rv.r123 + rv.r12_13 + rv.r2_13 + rv.r3_12, 2),
        "d13": s - Fraction(rv.r123 + rv.r12_23 + rv.r1_23 + rv.r3_12, 2),
        "d12": s - Fraction(rv.r123 + rv.r13_23 + rv.r1_23 + rv.r2_13, 2),
    }


# --- linear program ----------------------------------------------------------------


def objective(rv_or_m, alloc: LambdaAllocation) -> Fraction:
    msum = rv_or_m.msum if isinstance(rv_or_m, RankVector) else sum(rv_or_m)
    a = alloc
    return msum - 2 * a.l123 - a.l12 - a.l13 - a.l23 - a.l


def lp_constraints(family: SubspaceFamily) -> list[tuple[tuple[int, ...], int, str]]:
    """The fifteen constraints as (coefficients on LAMBDA_NAMES, bound, label)."""
    c = family.crank
    out = []
    for k in range(3):
        out.append(((1, 0, 0, 0, 0), c(("U123",), k), f"l123 <= rk(U123|V{k + 1}')"))
    for (i, j), coeff in (((0, 1), (1, 1, 0, 0, 0)), ((0, 2), (1, 0, 1, 0, 0)), ((1, 2), (1, 0, 0, 1, 0))):
        for k in (i, j):
            out.append((coeff, c(("pair", i, j), k), f"l{i + 1}{j + 1} + l123 <= rk(U{i + 1}{j + 1}|V{k + 1}')"))
    out.append(((1, 1, 1, 0, 0), c(("pairs", (0, 1), (0, 2)), 0), "l12 + l13 + l123 <= rk(U12,U13|V1')"))
    out.append(((1, 1, 0, 1, 0), c(("pairs", (0, 1), (1, 2)), 1), "l12 + l23 + l123 <= rk(U12,U23|V2')"))
    out.append(((1, 0, 1, 1, 0), c(("pairs", (0, 2), (1, 2)), 2), "l13 + l23 + l123 <= rk(U13,U23|V3')"))
    out.append(((1, 1, 1, 0, 1), c(("cross", 0), 0), "l + l12 + l13 + l123 <= rk(U1(2,3)|V1')"))
    out.append(((1, 1, 0, 1, 1), c(("cross", 1), 1), "l + l12 + l23 + l123 <= rk(U2(1,3)|V2')"))
    out.append(((1, 0, 1, 1, 1), c(("cross", 2), 2), "l + l13 + l23 + l123 <= rk(U3(1,2)|V3')"))
    return out


def violated_constraints(family: SubspaceFamily, alloc: LambdaAllocation) -> list[str]:
    vals = alloc.as_tuple()
    bad = [f"{n} < 0" for n, v in zip(LAMBDA_NAMES, vals) if v < 0]
    for coeff, bound, label in lp_constraints(family):
        if sum(a * v for a, v in zip(coeff, vals)) > bound:
            bad.append(label)
    return bad


def waterfill(rv: RankVector) -> tuple[LambdaAllocation, Fraction]:
    """Optimal LP allocation by filling three vessels with individual and pairwise caps."""
    bad = rv.invariant_violations()
    if bad:
        raise CapacityError(f"rank vector violates its invariants: {bad}")
    b = (Fraction(rv.r1_23), Fraction(rv.r2_13), Fraction(rv.r3_12))
    wmax = (rv.r23 - rv.r123, rv.r13 - rv.r123, rv.r12 - rv.r123)
    wpair = {(0, 1): rv.r13_23 - rv.r123, (0, 2): rv.r12_23 - rv.r123, (1, 2): rv.r12_13 - rv.r123}
    candidates = [b[i] + wmax[i] for i in range(3)]
    candidates += [(b[i] + b[j] + wp) / 2 for (i, j), wp in wpair.items()]
    h = min(candidates)
    w = [max(Fraction(0), h - b[i]) for i in range(3)]
    # the six vessel caps
    if any(w[i] > wmax[i] for i in range(3)) or any(w[i] + w[j] > wp for (i, j), wp in wpair.items()):
        raise CapacityError(f"water level {h} is infeasible for {rv}")
    l123 = Fraction(rv.r123)
    l23, l13, l12 = w
    lam = min(b[0] - l12 - l13, b[1] - l12 - l23, b[2] - l13 - l23) - l123
    alloc = LambdaAllocation(l123, l12, l13, l23, lam)
    F = objective(rv, alloc)
    if F != rv.msum - rv.r123 - h:
        raise CapacityError("objective disagrees with the water level")
    return alloc, F


def capacity_report(family: SubspaceFamily) -> CapacityReport:
    d1, d2, delta_star = closed_form(family)
    rv = rank_vector(family)
    sd = small_deltas(rv)
    # pairwise maxima of the permutation bounds collapse to the six deltas;
    # d_k pairs the two orders ending in k
    expect = {
        "d3": max(d1["123"], d1["213"]),
        "d2": max(d1["132"], d1["312"]),
        "d1": max(d1["231"], d1["321"]),
        "d23": max(d2["123"], d2["132"]),
        "d13": max(d2["213"], d2["231"]),
        "d12": max(d2["312"], d2["321"]),
    }
    if expect != sd:
        raise CapacityError(f"delta aggregation mismatch: {expect} vs {sd}")
    alloc, F = waterfill(rv)
    bad = violated_constraints(family, alloc)
    if bad:
        raise CapacityError(f"waterfill allocation violates {bad}")
    agree = F == delta_star == max(sd.values())
    if not agree:
        raise CapacityError(f"F* = {F} but closed form gives {delta_star}")
    cap = 1 / delta_star if delta_star else None
    return CapacityReport(d1, d2, sd, delta_star, cap, F, alloc, rv, agree)


def solve(inst: LcbcInstance) -> CapacityReport:
    return capacity_report(signal_spaces(normalize(inst)))


def two_user_cost(V1: MatrixFq, V1p: MatrixFq, V2: MatrixFq, V2p: MatrixFq) -> Fraction:
    """Optimal broadcast cost of the two-user problem."""
    users = ((V1, V1p), (V2, V2p))
    total = rank(hstack(V1, V2, V1p, V2p))
    best = None
    for i, j in ((0, 1), (1, 0)):
        Vi, Vip = users[i]
        Vjp = users[j][1]
        val = rank(hstack(Vi, Vip)) - rank(Vip) + total - rank(hstack(Vi, Vip, Vjp))
        best = val if best is None else max(best, val)
    return Fraction(best)
