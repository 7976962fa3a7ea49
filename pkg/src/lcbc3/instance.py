"""Three-user LCBC instances, their signal spaces and entropic profiles."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field as dc_field
from typing import Sequence

import numpy as np

from .field import FieldSpec, make_field
from .linalg import (
    LinalgError,
    MatrixFq,
    column_basis,
    conditional_rank,
    extend_basis,
    hstack,
    intersect_column_spaces,
    rank,
    solve_matrix,
)

K = 3
PAIRS = ((0, 1), (0, 2), (1, 2))


class InstanceError(ValueError):
    """Malformed or inconsistent instance description."""


@dataclass(frozen=True)
class UserSpec:
    V_prime: MatrixFq  # side information coefficients, d x m'
    V: MatrixFq  # demand coefficients, d x m

    @property
    def U(self) -> MatrixFq:
        return hstack(self.V_prime, self.V)


@dataclass(frozen=True)
class Normalization:
    """How a normalized user relates to the one originally supplied.

    ``demand_map`` satisfies ``V_orig = [V'_norm, V_norm] @ demand_map`` and
    ``side_index`` lists the columns of the original V' that were kept.
    """

    demand_map: tuple[MatrixFq, MatrixFq, MatrixFq]
    side_index: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]
    original: "LcbcInstance"


@dataclass(frozen=True)
class LcbcInstance:
    field: FieldSpec
    d: int
    users: tuple[UserSpec, UserSpec, UserSpec]
    provenance: Normalization | None = dc_field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if len(self.users) != K:
            raise InstanceError(f"expected {K} users, got {len(self.users)}")
        for k, u in enumerate(self.users, 1):
            for name, M in (("V_prime", u.V_prime), ("V", u.V)):
                if M.field != self.field:
                    raise InstanceError(f"user {k} {name}: field {M.field!r} differs from {self.field!r}")
                if M.rows != self.d:
                    raise InstanceError(f"user {k} {name}: has {M.rows} rows, expected d={self.d}")

    @property
    def q(self) -> int:
        return self.field.q

    def m(self, k: int) -> int:
        return self.users[k].V.cols

    def m_prime(self, k: int) -> int:
        return self.users[k].V_prime.cols

    def is_normalized(self) -> bool:
        return all(rank(u.U) == u.U.cols for u in self.users)

    # -- serialization

    def to_json(self) -> dict:
        return {
            "p": self.field.p,
            "n": self.field.n,
            "d": self.d,
            "users": [{"V_prime": u.V_prime.to_json(), "V": u.V.to_json()} for u in self.users],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


def make_instance(field: FieldSpec, d: int, users: Sequence[tuple[Sequence, Sequence]]) -> LcbcInstance:
    """Build an instance from per-user (side columns, demand columns) lists."""
    specs = tuple(
        UserSpec(MatrixFq.from_columns(field, vp, d), MatrixFq.from_columns(field, v, d)) for vp, v in users
    )
    return LcbcInstance(field, d, specs)


def parse_instance(text: bytes | str) -> LcbcInstance:
    try:
        obj = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InstanceError(f"instance is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise InstanceError("instance must be a JSON object")
    for key in ("p", "n", "d", "users"):
        if key not in obj:
            raise InstanceError(f"instance is missing key {key!r}")
    try:
        field = make_field(int(obj["p"]), int(obj["n"]))
    except ValueError as exc:
        raise InstanceError(f"bad field: {exc}") from None
    d = obj["d"]
    if not isinstance(d, int) or d < 0:
        raise InstanceError(f"d must be a non-negative integer, got {d!r}")
    users = obj["users"]
    if not isinstance(users, list) or len(users) != K:
        raise InstanceError(f"expected a list of {K} users, got {len(users) if isinstance(users, list) else users!r}")
    specs = []
    for k, u in enumerate(users, 1):
        mats = []
        for name in ("V_prime", "V"):
            if name not in u:
                raise InstanceError(f"user {k} is missing {name!r}")
            try:
                M = MatrixFq.from_json(field, u[name], name=f"user {k} {name}")
            except LinalgError as exc:
                raise InstanceError(str(exc)) from None
            if M.rows != d:
                raise InstanceError(f"user {k} {name}: has {M.rows} rows, expected d={d}")
            mats.append(M)
        specs.append(UserSpec(*mats))
    return LcbcInstance(field, d, tuple(specs))


def serialize_instance(inst: LcbcInstance) -> str:
    return inst.dumps()


def normalize(inst: LcbcInstance) -> LcbcInstance:
    """Drop redundant side-information and demand columns, keeping a map back.

    Spans of V' and of [V', V] are preserved, so applying this to an already
    normalized instance changes nothing and the provenance keeps pointing at
    the raw input.
    """
    prev = inst.provenance
    users, maps, sides = [], [], []
    for k, u in enumerate(inst.users):
        Vp = column_basis(u.V_prime)
        Vn = extend_basis(Vp, u.V)
        U = hstack(Vp, Vn)
        side = _column_indices(u.V_prime, Vp)
        if prev is None:
            coeff = solve_matrix(U, u.V)
        else:
            coeff = solve_matrix(U, u.U) @ prev.demand_map[k]
            side = [prev.side_index[k][i] for i in side]
        assert coeff is not None, "demand must lie in the normalized signal space"
        users.append(UserSpec(Vp, Vn))
        maps.append(coeff)
        sides.append(tuple(side))
    original = prev.original if prev else inst
    return LcbcInstance(inst.field, inst.d, tuple(users), Normalization(tuple(maps), tuple(sides), original))


def _column_indices(M: MatrixFq, sub: MatrixFq) -> list[int]:
    cols = M.columns()
    out, j = [], 0
    for c in sub.columns():
        while cols[j] != c:
            j += 1
        out.append(j)
        j += 1
    return out


# --- signal spaces ------------------------------------------------------------------


@dataclass
class SubspaceFamily:
    """Bases of the signal spaces and a memo of conditional ranks against each V_k'."""

    instance: LcbcInstance
    U: tuple[MatrixFq, MatrixFq, MatrixFq]
    pair: dict[tuple[int, int], MatrixFq]  # U_ij, keys (0,1),(0,2),(1,2)
    U123: MatrixFq
    cross: tuple[MatrixFq, MatrixFq, MatrixFq]  # U_{i(j,k)} for i = 0,1,2
    _memo: dict = dc_field(default_factory=dict, repr=False)

    @property
    def field(self) -> FieldSpec:
        return self.instance.field

    def V_prime(self, k: int) -> MatrixFq:
        return self.instance.users[k].V_prime

    def V(self, k: int) -> MatrixFq:
        return self.instance.users[k].V

    def U_pair(self, i: int, j: int) -> MatrixFq:
        return self.pair[(min(i, j), max(i, j))]

    def m(self, k: int) -> int:
        """rk(V_k | V_k')."""
        return self.crank(("V", k), k)

    def space(self, key) -> MatrixFq:
        """Resolve a symbolic key to a matrix.

        Keys: ("U", i), ("V", i), ("U123",), ("pair", i, j), ("cross", i),
        ("pairs", (i, j), (k, l)) for [U_ij, U_kl].
        """
        tag = key[0]
        if tag == "U":
            return self.U[key[1]]
        if tag == "V":
            return self.V(key[1])
        if tag == "U123":
            return self.U123
        if tag == "pair":
            return self.U_pair(key[1], key[2])
        if tag == "cross":
            return self.cross[key[1]]
        if tag == "pairs":
            return hstack(self.U_pair(*key[1]), self.U_pair(*key[2]))
        raise KeyError(key)

    def crank(self, key, k: int) -> int:
        """rk(space(key) | V_k'), memoized."""
        memo_key = (key, k)
        if memo_key not in self._memo:
            self._memo[memo_key] = conditional_rank(self.space(key), self.V_prime(k))
        return self._memo[memo_key]

    def rank_table(self) -> dict[str, int]:
        """Every conditional rank the capacity formulas read, by readable name."""
        t = {}
        for k in range(K):
            t[f"m{k + 1}"] = self.m(k)
            t[f"rk(U123|V{k + 1}')"] = self.crank(("U123",), k)
        for i, j in PAIRS:
            for k in (i, j):
                t[f"rk(U{i + 1}{j + 1}|V{k + 1}')"] = self.crank(("pair", i, j), k)
        for i in range(K):
            j, k = (x for x in range(K) if x != i)
            t[f"rk(U{i + 1}({j + 1},{k + 1})|V{i + 1}')"] = self.crank(("cross", i), i)
            a, b = tuple(sorted((i, j))), tuple(sorted((i, k)))
            t[f"rk(U{a[0] + 1}{a[1] + 1},U{b[0] + 1}{b[1] + 1}|V{i + 1}')"] = self.crank(("pairs", a, b), i)
        return t


def signal_spaces(inst: LcbcInstance) -> SubspaceFamily:
    U = tuple(column_basis(u.U) for u in inst.users)
    pair = {(i, j): intersect_column_spaces(U[i], U[j]) for i, j in PAIRS}
    U123 = intersect_column_spaces(pair[(0, 1)], U[2])
    cross = []
    for i in range(K):
        j, k = (x for x in range(K) if x != i)
        cross.append(intersect_column_spaces(U[i], hstack(U[j], U[k])))
    return SubspaceFamily(inst, U, pair, U123, tuple(cross))


# --- entropic profile ---------------------------------------------------------------

W_LABELS = ("W1", "W1'", "W2", "W2'", "W3", "W3'")


def entropic_profile(inst: LcbcInstance) -> dict[tuple[str, ...], int]:
    """Rank of every nonempty union of demand/side-information coefficient blocks."""
    blocks = []
    for u in inst.users:
        blocks += [u.V, u.V_prime]
    out = {}
    for r in range(1, len(W_LABELS) + 1):
        for subset in itertools.combinations(range(len(W_LABELS)), r):
            out[tuple(W_LABELS[s] for s in subset)] = rank(hstack(*(blocks[s] for s in subset)))
    return out


# --- random instances ---------------------------------------------------------------


def random_instance(
    seed: int | Sequence[int],
    field: FieldSpec,
    d: int,
    m_max: int = 3,
    mp_max: int = 3,
    pool: bool | None = None,
) -> LcbcInstance:
    """A reproducible normalized instance.

    With ``pool`` (chosen at random when None) columns are drawn from a small
    shared subspace so that intersections between users are typically
    nontrivial; otherwise entries are uniform.
    """
    rng = np.random.default_rng(seed)
    if pool is None:
        pool = bool(rng.integers(0, 3))
    q = field.q
    basis = None
    if pool:
        r = int(rng.integers(1, d + 1))
        basis = rng.integers(0, q, size=(d, r))

    def column():
        if basis is None:
            return rng.integers(0, q, size=d)
        coeff = rng.integers(0, q, size=basis.shape[1])
        # sparse combos make shared dimensions more likely
        coeff *= rng.random(basis.shape[1]) < 0.6
        v = np.zeros(d, dtype=np.int64)
        for c, b in zip(coeff, basis.T):
            if c:
                v = field.np_add(v, field.np_mul(np.int64(c), b))
        return v

    users = []
    for _ in range(K):
        mp = int(rng.integers(0, mp_max + 1))
        m = int(rng.integers(0, m_max + 1))
        users.append(([column() for _ in range(mp)], [column() for _ in range(m)]))
    return normalize(make_instance(field, d, users))


# --- fixtures -----------------------------------------------------------------------


def _e(d: int, *terms: tuple[int, int]) -> list[int]:
    """Column vector sum of coef*e_idx over (idx, coef) pairs."""
    v = [0] * d
    for idx, c in terms:
        v[idx] = c
    return v


def example1() -> LcbcInstance:
    f, A, B, C = make_field(3), 0, 1, 2
    e = lambda *t: _e(3, *t)  # noqa: E731
    return make_instance(
        f,
        3,
        [
            ([e((A, 1))], [e((B, 1), (C, 1))]),
            ([e((B, 1))], [e((A, 1), (C, 1))]),
            ([e((C, 1))], [e((A, 1), (B, 1))]),
        ],
    )


def example2() -> LcbcInstance:
    f, A, B, C = make_field(3), 0, 1, 2
    e = lambda *t: _e(3, *t)  # noqa: E731
    return make_instance(
        f,
        3,
        [
            ([e((A, 1))], [e((B, 1), (C, 1))]),
            ([e((B, 1))], [e((A, 1), (C, 1))]),
            ([e((C, 1))], [e((A, 1), (B, 2))]),
        ],
    )


def example3() -> LcbcInstance:
    f, A, B, C = make_field(2), 0, 1, 2
    e = lambda *t: _e(3, *t)  # noqa: E731
    return make_instance(
        f,
        3,
        [([e((A, 1))], [e((B, 1))]), ([e((B, 1))], [e((C, 1))]), ([e((C, 1))], [e((A, 1))])],
    )


def example4() -> LcbcInstance:
    f, A, B = make_field(2), 0, 1
    e = lambda *t: _e(2, *t)  # noqa: E731
    return make_instance(
        f,
        2,
        [
            ([e((A, 1))], [e((B, 1))]),
            ([e((B, 1))], [e((A, 1), (B, 1))]),
            ([e((A, 1), (B, 1))], [e((A, 1))]),
        ],
    )


def example5() -> LcbcInstance:
    f, A, B, C, D, E = make_field(3), 0, 1, 2, 3, 4
    e = lambda *t: _e(5, *t)  # noqa: E731
    return make_instance(
        f,
        5,
        [
            ([e((A, 1))], [e((B, 1), (C, 1)), e((D, 1))]),
            ([e((B, 1))], [e((A, 1), (C, 1)), e((E, 1))]),
            ([e((C, 1)), e((D, 1), (E, 1))], [e((A, 1), (B, 2))]),
        ],
    )


def example5_side_problem() -> LcbcInstance:
    """The (D, E) part of the inseparability example as its own instance."""
    f = make_field(3)
    return make_instance(f, 2, [([], [[1, 0]]), ([], [[0, 1]]), ([[1, 1]], [])])


def field_extension_instance() -> LcbcInstance:
    """The two-dimensional GF(2) instance used to illustrate field extension."""
    return example4()


FIXTURES = {
    "ex1": example1,
    "ex2": example2,
    "ex3": example3,
    "ex4": example4,
    "ex5": example5,
    "field_ext": field_extension_instance,
}


def fixture(name: str) -> LcbcInstance:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise InstanceError(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
