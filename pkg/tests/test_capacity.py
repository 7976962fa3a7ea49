from fractions import Fraction

import numpy as np
import pytest

from lcbc3.capacity import (
    LAMBDA_NAMES,
    CapacityError,
    LambdaAllocation,
    RankVector,
    capacity_report,
    closed_form,
    lp_constraints,
    objective,
    rank_vector,
    small_deltas,
    solve,
    two_user_cost,
    violated_constraints,
    waterfill,
)
from lcbc3.field import make_field
from lcbc3.instance import example3, example5_side_problem, fixture, make_instance, normalize, random_instance, signal_spaces
from lcbc3.linalg import MatrixFq, conditional_rank, hstack, rank

GF2, GF3, GF4, GF5 = make_field(2), make_field(3), make_field(2, 2), make_field(5)
H = Fraction(1, 2)

EXPECTED = {
    "ex1": (Fraction(1), (1, 0, 0, 0, 0)),
    "ex2": (Fraction(3, 2), (0, H, H, H, 0)),
    "ex3": (Fraction(2), (0, 0, 0, 0, 1)),
    "ex4": (Fraction(1), (1, 0, 0, 0, 0)),
    "ex5": (Fraction(3), (0, 1, 0, 0, 1)),
}


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_fixture_capacity_and_allocation(name):
    delta, lam = EXPECTED[name]
    rep = solve(fixture(name))
    assert rep.delta_star == rep.F_star == delta
    assert rep.capacity == 1 / delta
    assert rep.allocation.as_tuple() == tuple(Fraction(x) for x in lam)
    assert rep.agree


def test_closed_form_alone_on_fixtures():
    for name, (delta, _) in EXPECTED.items():
        _, _, ds = closed_form(signal_spaces(normalize(fixture(name))))
        assert ds == delta


def test_single_shared_symbol():
    e = [[1]]
    inst = make_instance(GF2, 1, [([], e), ([], e), ([], e)])
    assert solve(inst).delta_star == 1


def test_nothing_to_send():
    I = [[1, 0], [0, 1]]
    inst = make_instance(GF3, 2, [(I, I), (I, []), (I, [[1, 1]])])
    rep = solve(inst)
    assert rep.delta_star == 0 and rep.capacity is None
    assert rep.to_json()["capacity"] == "inf"
    rv = rep.ranks
    assert all(getattr(rv, f) == 0 for f in ("r123", "r12", "r13", "r23", "r1_23", "r2_13", "r3_12"))


def test_example3_rank_vector():
    rv = rank_vector(signal_spaces(normalize(example3())))
    assert (rv.r12, rv.r13, rv.r23) == (0, 0, 0)
    assert (rv.r1_23, rv.r2_13, rv.r3_12) == (1, 1, 1)


def test_inseparability_side_problem():
    assert solve(example5_side_problem()).delta_star == 2


def test_report_json_uses_fraction_strings():
    j = solve(fixture("ex2")).to_json()
    assert j["delta_star"] == "3/2" and j["capacity"] == "2/3"
    assert set(j["lambda"]) == set(LAMBDA_NAMES)
    assert all(isinstance(v, str) for v in j["deltas"].values())


def test_waterfill_rejects_bad_rank_vector():
    rv = RankVector((1, 1, 1), 2, 1, 1, 1, 1, 1, 1, 1, 1, 1)
    assert rv.invariant_violations()
    with pytest.raises(CapacityError):
        waterfill(rv)


def test_lp_has_fifteen_constraints():
    cons = lp_constraints(signal_spaces(normalize(fixture("ex5"))))
    assert len(cons) == 15
    assert all(len(c) == 5 for c, _, _ in cons)


def test_violated_constraints_detects_excess():
    fam = signal_spaces(normalize(fixture("ex3")))
    assert violated_constraints(fam, LambdaAllocation(0, 0, 0, 0, 1)) == []
    assert violated_constraints(fam, LambdaAllocation(0, 1, 0, 0, 1))
    assert violated_constraints(fam, LambdaAllocation(0, 0, 0, 0, -1)) == ["l < 0"]


def test_allocation_scaling():
    a = LambdaAllocation(0, H, H, H, 0)
    assert a.denominator() == 2 and a.scaled(2) == (0, 1, 1, 1, 0)
    with pytest.raises(ValueError):
        a.scaled(1)


@pytest.mark.parametrize("F", [GF2, GF3, GF4, GF5], ids=str)
def test_closed_form_matches_waterfill_random(F):
    for s in range(250):
        fam = signal_spaces(random_instance([3, s], F, 1 + s % 6))
        rep = capacity_report(fam)
        assert rep.delta_star == rep.F_star
        assert rep.delta_star == max(rep.small_deltas.values())
        assert rep.delta_star.denominator in (1, 2)
        assert violated_constraints(fam, rep.allocation) == []
        m = [fam.m(k) for k in range(3)]
        assert max(m) <= rep.delta_star <= sum(m)


def test_small_deltas_from_rank_vector_match_permutation_maxima():
    for s in range(100):
        fam = signal_spaces(random_instance([5, s], GF3, 1 + s % 6))
        d1, d2, ds = closed_form(fam)
        sd = small_deltas(rank_vector(fam))
        assert max(sd.values()) == ds == max(list(d1.values()) + list(d2.values()))


def test_monotone_in_side_information():
    rng = np.random.default_rng(0)
    for s in range(150):
        F = (GF2, GF3, GF5)[s % 3]
        inst = random_instance([11, s], F, 1 + s % 5)
        base = solve(inst).delta_star
        raw = inst.provenance.original
        k = int(rng.integers(0, 3))
        extra = MatrixFq.from_columns(F, [rng.integers(0, F.q, raw.d).tolist()], raw.d)
        users = list(raw.users)
        u = users[k]
        users[k] = type(u)(hstack(u.V_prime, extra), u.V)
        more = type(raw)(F, raw.d, tuple(users))
        assert solve(more).delta_star <= base


def test_objective_accepts_m_tuple():
    assert objective((1, 2, 3), LambdaAllocation(1, 0, 0, 0, 1)) == 3


# --- two-user formula ----------------------------------------------------------------


def test_two_user_identical_users():
    V = MatrixFq.from_columns(GF3, [(1, 0, 0), (0, 1, 1)], 3)
    Vp = MatrixFq.from_columns(GF3, [(0, 0, 1)], 3)
    assert two_user_cost(V, Vp, V, Vp) == conditional_rank(V, Vp)


def test_two_user_example3_users_1_2():
    inst = example3()
    u1, u2 = inst.users[0], inst.users[1]
    assert two_user_cost(u1.V, u1.V_prime, u2.V, u2.V_prime) == 2


def test_two_user_reduces_to_single_user():
    rng = np.random.default_rng(4)
    from lcbc3.linalg import random_matrix

    for _ in range(30):
        V1, V1p = random_matrix(GF3, 4, 2, rng), random_matrix(GF3, 4, 1, rng)
        V2p = random_matrix(GF3, 4, 2, rng)
        V2 = V2p @ random_matrix(GF3, 2, 1, rng)
        assert two_user_cost(V1, V1p, V2, V2p) == rank(hstack(V1, V1p)) - rank(V1p)


# --- floating-point LP cross-check ---------------------------------------------------


def test_waterfill_agrees_with_scipy_linprog():
    linprog = pytest.importorskip("scipy.optimize").linprog
    for s in range(200):
        F = (GF2, GF3, GF4, GF5)[s % 4]
        fam = signal_spaces(random_instance([13, s], F, 1 + s % 6))
        cons = lp_constraints(fam)
        A = [list(c) for c, _, _ in cons]
        b = [bound for _, bound, _ in cons]
        res = linprog(c=[-2, -1, -1, -1, -1], A_ub=A, b_ub=b, bounds=[(0, None)] * 5, method="highs")
        assert res.status == 0
        msum = sum(fam.m(k) for k in range(3))
        rep = capacity_report(fam)
        assert abs((msum + res.fun) - float(rep.F_star)) < 1e-9
