import itertools
import random

import numpy as np
import pytest

from lcbc3.field import FieldError, make_field
from lcbc3.instance import example1, example3, example4, example5, signal_spaces
from lcbc3.linalg import (
    LinalgError,
    MatrixFq,
    column_basis,
    conditional_rank,
    contains,
    det,
    extend_basis,
    hstack,
    intersect_column_spaces,
    kernel,
    kron_identity,
    np_matmul,
    random_matrix,
    rank,
    rref,
    same_span,
    select_joint_submatrices,
    select_submatrix,
    solve,
    solve_matrix,
    steinitz_complement,
    vstack,
)

GF2, GF3, GF4, GF5 = make_field(2), make_field(3), make_field(2, 2), make_field(5)


def cols(F, columns, d):
    return MatrixFq.from_columns(F, columns, d)


def elim_rank_prime(rows, p, rng):
    """Independent rank oracle for prime fields: elimination on shuffled rows."""
    rows = [list(r) for r in rows]
    rng.shuffle(rows)
    rk = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rk, len(rows)) if rows[i][c] % p), None)
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        inv = pow(rows[rk][c], p - 2, p)
        for i in range(len(rows)):
            if i != rk and rows[i][c] % p:
                f = rows[i][c] * inv % p
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rk])]
        rk += 1
    return sum(1 for r in rows if any(x % p for x in r))


def test_rref_identity():
    R, rk, piv = rref(MatrixFq.identity(GF3, 4))
    assert rk == 4 and piv == [0, 1, 2, 3] and R == MatrixFq.identity(GF3, 4)


def test_example1_user1_signal_rank():
    U1 = cols(GF3, [(1, 0, 0), (0, 1, 1)], 3)
    assert rank(U1) == 2


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_rank_matches_independent_elimination(p):
    F = make_field(p)
    rng = np.random.default_rng(p)
    prng = random.Random(p)
    for _ in range(100):
        M = random_matrix(F, 6, 4, rng)
        if prng.random() < 0.5:  # force dependencies
            M = hstack(M.select_columns([0, 1]), M.select_columns([0, 1]) @ random_matrix(F, 2, 2, rng))
        assert rank(M) == elim_rank_prime(M.data, p, prng)


def test_rref_is_reduced(field):
    rng = np.random.default_rng(3)
    M = random_matrix(field, 5, 7, rng)
    R, rk, piv = rref(M)
    for i, c in enumerate(piv):
        assert R.data[i][c] == 1
        assert all(R.data[j][c] == 0 for j in range(R.rows) if j != i)
    assert all(not any(R.data[i]) for i in range(rk, R.rows))


def test_conditional_rank_self_is_zero(field):
    M = random_matrix(field, 4, 3, np.random.default_rng(0))
    assert conditional_rank(M, M) == 0


def test_example3_conditional_rank_is_zero():
    fam = signal_spaces(example3())
    assert conditional_rank(fam.U_pair(0, 2), fam.V_prime(0)) == 0


def test_conditional_rank_row_mismatch():
    with pytest.raises(LinalgError):
        conditional_rank(MatrixFq.zeros(GF2, 2, 1), MatrixFq.zeros(GF2, 3, 1))


def test_conditional_rank_via_intersection(field):
    rng = np.random.default_rng(11)
    for _ in range(50):
        A = random_matrix(field, 5, 2, rng)
        B = random_matrix(field, 5, 3, rng)
        assert conditional_rank(A, B) == rank(A) - rank(intersect_column_spaces(A, B))


def test_intersection_of_identities():
    I = MatrixFq.identity(GF5, 4)
    X = intersect_column_spaces(I, I)
    assert rank(X) == 4 == X.cols


def test_example1_pair_intersection_is_all_ones():
    fam = signal_spaces(example1())
    X = intersect_column_spaces(fam.U[0], fam.U[1])
    assert X.cols == 1 and same_span(X, cols(GF3, [(1, 1, 1)], 3))


@pytest.mark.parametrize("F", [GF2, GF3, GF4, GF5], ids=str)
def test_dimension_formula(F):
    rng = np.random.default_rng(5)
    for _ in range(1000 // 4):
        d = int(rng.integers(1, 6))
        A = random_matrix(F, d, int(rng.integers(0, 4)), rng)
        B = random_matrix(F, d, int(rng.integers(0, 4)), rng)
        if rng.random() < 0.5 and A.cols:
            B = hstack(B, A.select_columns([0]))
        X = intersect_column_spaces(A, B)
        assert X.cols == rank(X)
        assert contains(A, X) and contains(B, X)
        assert rank(A) + rank(B) == rank(hstack(A, B)) + rank(X)


def test_conditional_rank_monotone(field):
    rng = np.random.default_rng(2)
    for _ in range(100):
        M1, M2, M3 = (random_matrix(field, 4, int(rng.integers(0, 3)), rng) for _ in range(3))
        c = conditional_rank(M1, M2)
        assert 0 <= c <= rank(M1)
        assert conditional_rank(M1, hstack(M2, M3)) <= c


def test_steinitz_identity():
    I = MatrixFq.identity(GF3, 3)
    C = steinitz_complement(I, I.select_columns([0]))
    assert C == I.select_columns([1, 2])


def test_steinitz_example5_pair_space():
    fam = signal_spaces(example5())
    U12 = fam.U_pair(0, 1)
    C = steinitz_complement(U12, MatrixFq.zeros(GF3, 5, 0))
    assert C.cols == 1 and same_span(C, cols(GF3, [(1, 1, 1, 0, 0)], 5))


def test_steinitz_random_nested(field):
    rng = np.random.default_rng(9)
    for _ in range(60):
        A = random_matrix(field, 5, int(rng.integers(1, 5)), rng)
        B = column_basis(A @ random_matrix(field, A.cols, int(rng.integers(0, 3)), rng))
        C = steinitz_complement(A, B)
        assert rank(hstack(B, C)) == B.cols + C.cols == rank(A)
        assert set(C.columns()) <= set(A.columns())


def test_steinitz_errors():
    I = MatrixFq.identity(GF2, 3)
    e1 = I.select_columns([0])
    with pytest.raises(LinalgError):
        steinitz_complement(e1, I.select_columns([1]))
    with pytest.raises(LinalgError):
        steinitz_complement(I, hstack(e1, e1))


def test_select_joint_trivial():
    A = MatrixFq.identity(GF3, 3).select_columns([0])
    b1, b2 = select_joint_submatrices(A, MatrixFq.zeros(GF3, 3, 0), MatrixFq.zeros(GF3, 3, 0), 0, 0)
    assert b1.cols == b2.cols == 0


def test_select_example1_shared_column():
    fam = signal_spaces(example1())
    e1 = cols(GF3, [(1, 0, 0)], 3)
    b1, b2 = select_joint_submatrices(e1, fam.U123, fam.U123, 1, 0)
    assert b2.cols == 0 and rank(hstack(e1, b1)) == 2
    assert same_span(b1, cols(GF3, [(1, 1, 1)], 3))


def test_select_submatrix_trivial_cases():
    I = MatrixFq.identity(GF2, 3)
    assert select_submatrix(I.select_columns([0]), I, 0).cols == 0
    assert select_submatrix(MatrixFq.zeros(GF2, 3, 0), I, 2) == I.select_columns([0, 1])


def test_select_rejects_inadmissible():
    I = MatrixFq.identity(GF2, 2)
    with pytest.raises(LinalgError):
        select_submatrix(I, I, 1)


def _exhaustive_exists(A, B1, B2, n1, n2):
    for s1 in itertools.combinations(range(B1.cols), n1):
        for s2 in itertools.combinations(range(B2.cols), n2):
            M = hstack(A, B1.select_columns(s1), B2.select_columns(s2))
            if rank(M) == M.cols:
                return True
    return False


@pytest.mark.parametrize("F", [GF2, GF3], ids=str)
def test_joint_selection_against_exhaustive_search(F):
    rng = np.random.default_rng(17)
    checked = 0
    while checked < 150:
        d = int(rng.integers(2, 6))
        pool = random_matrix(F, d, int(rng.integers(1, d + 1)), rng)
        A = column_basis(random_matrix(F, d, int(rng.integers(0, 3)), rng))
        B1 = column_basis(pool @ random_matrix(F, pool.cols, int(rng.integers(1, 4)), rng))
        B2 = column_basis(pool @ random_matrix(F, pool.cols, int(rng.integers(1, 4)), rng))
        if B1.cols + B2.cols > 8:
            continue
        c1, c2 = conditional_rank(B1, A), conditional_rank(B2, A)
        c12 = conditional_rank(hstack(B1, B2), A)
        n1, n2 = int(rng.integers(0, c1 + 1)), int(rng.integers(0, c2 + 1))
        if n1 + n2 > c12:
            continue
        assert _exhaustive_exists(A, B1, B2, n1, n2)
        s1, s2 = select_joint_submatrices(A, B1, B2, n1, n2)
        assert (s1.cols, s2.cols) == (n1, n2)
        assert rank(hstack(A, s1, s2)) == A.cols + n1 + n2
        assert set(s1.columns()) <= set(B1.columns()) and set(s2.columns()) <= set(B2.columns())
        checked += 1


def test_joint_selection_is_deterministic():
    rng = np.random.default_rng(4)
    A = random_matrix(GF3, 5, 1, rng)
    B1 = random_matrix(GF3, 5, 3, rng)
    B2 = random_matrix(GF3, 5, 3, rng)
    assert select_joint_submatrices(A, B1, B2, 2, 2) == select_joint_submatrices(A, B1, B2, 2, 2)


def test_kron_identity_z1_is_noop(field):
    M = random_matrix(field, 3, 2, np.random.default_rng(1))
    assert kron_identity(M, 1) == M
    assert kron_identity(M, 1, "left") == M


def test_kron_example4_user_signal_spaces():
    fam = signal_spaces(example4())
    U1 = kron_identity(fam.U[0], 2)
    assert U1 == MatrixFq.identity(GF2, 4)
    U2 = kron_identity(fam.U[1], 2)
    assert U2.columns() == [(0, 0, 1, 0), (0, 0, 0, 1), (1, 0, 1, 0), (0, 1, 0, 1)]


def test_kron_rank_scales(field):
    rng = np.random.default_rng(6)
    for _ in range(10):
        M = random_matrix(field, 3, 3, rng) @ random_matrix(field, 3, 3, rng).select_columns([0, 1])
        for order in ("left", "right"):
            assert rank(kron_identity(M, 3, order)) == 3 * rank(M)


def test_solve_identity():
    I = MatrixFq.identity(GF5, 3)
    assert solve(I, [1, 2, 3]) == [1, 2, 3]


def test_solve_example3_decoding():
    # user 1 knows A and receives A+B, B+C; B = (A+B) + A over GF(2)
    Y = cols(GF2, [(1, 0, 0), (1, 1, 0), (0, 1, 1)], 3)
    x = solve(Y, [0, 1, 0])
    assert x == [1, 1, 0]


def test_solve_flags_inconsistency():
    M = cols(GF2, [(1, 0, 0)], 3)
    assert solve(M, [0, 1, 0]) is None
    assert solve_matrix(M, cols(GF2, [(0, 1, 0)], 3)) is None


def test_solve_round_trip(field):
    rng = np.random.default_rng(8)
    for _ in range(50):
        A = random_matrix(field, 5, 4, rng)
        x = random_matrix(field, 4, 1, rng)
        b = [r[0] for r in (A @ x).data]
        y = solve(A, b)
        assert [r[0] for r in (A @ MatrixFq.from_columns(field, [y], 4)).data] == b


def test_kernel_and_det(field):
    rng = np.random.default_rng(12)
    for _ in range(20):
        M = random_matrix(field, 4, 4, rng)
        K = kernel(M)
        assert (M @ K).is_zero() and K.cols == 4 - rank(M)
        assert (det(M) != 0) == (rank(M) == 4)


def test_det_small_cases():
    assert det(cols(GF5, [(1, 2), (3, 4)], 2)) == (1 * 4 - 3 * 2) % 5
    assert det(MatrixFq.zeros(GF5, 0, 0)) == 1


def test_json_round_trip_column_major(field):
    M = random_matrix(field, 3, 2, np.random.default_rng(2))
    obj = M.to_json()
    assert obj["rows"] == 3 and obj["cols"] == 2
    assert [tuple(c) for c in obj["data"]] == M.columns()
    assert MatrixFq.from_json(field, obj) == M


def test_json_rejects_bad_entries():
    with pytest.raises(LinalgError):
        MatrixFq.from_json(GF2, {"rows": 2, "cols": 1, "data": [[0, 2]]})
    with pytest.raises(LinalgError):
        MatrixFq.from_json(GF2, {"rows": 2, "cols": 2, "data": [[0, 1]]})


def test_empty_matrices_are_first_class():
    E = MatrixFq.zeros(GF3, 3, 0)
    assert rank(E) == 0
    assert conditional_rank(MatrixFq.identity(GF3, 3), E) == 3
    assert hstack(E, E).cols == 0
    assert intersect_column_spaces(E, MatrixFq.identity(GF3, 3)).cols == 0


def test_hstack_vstack_checks():
    with pytest.raises(LinalgError):
        hstack(MatrixFq.zeros(GF2, 2, 1), MatrixFq.zeros(GF2, 3, 1))
    with pytest.raises(FieldError):
        hstack(MatrixFq.zeros(GF2, 2, 1), MatrixFq.zeros(GF3, 2, 1))
    assert vstack(MatrixFq.identity(GF2, 2), MatrixFq.zeros(GF2, 1, 2)).rows == 3


def test_np_matmul_matches_exact(field):
    rng = np.random.default_rng(13)
    A = random_matrix(field, 4, 3, rng)
    B = random_matrix(field, 3, 5, rng)
    assert np.array_equal(np_matmul(field, A.to_numpy(), B.to_numpy()), (A @ B).to_numpy())


def test_extend_basis_limit():
    I = MatrixFq.identity(GF3, 4)
    assert extend_basis(I.select_columns([0]), I, limit=2) == I.select_columns([1, 2])


def test_operations_are_deterministic(field):
    rng = np.random.default_rng(21)
    A = random_matrix(field, 5, 3, rng)
    B = random_matrix(field, 5, 3, rng)
    assert intersect_column_spaces(A, B) == intersect_column_spaces(A, B)
    assert rref(A) == rref(A)
