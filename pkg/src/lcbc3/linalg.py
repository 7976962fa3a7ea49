"""Dense exact linear algebra over a FieldSpec.

Matrices hold integer element codes.  The column span is the object of
interest throughout, so most helpers take and return bases as matrices whose
columns are the basis vectors.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .field import FieldError, FieldSpec, make_field


class LinalgError(ValueError):
    """Shape mismatch or violated precondition."""


@dataclass(frozen=True, eq=True)
class MatrixFq:
    field: FieldSpec
    rows: int
    cols: int
    data: tuple[tuple[int, ...], ...]  # row-major

    def __post_init__(self):
        if len(self.data) != self.rows or any(len(r) != self.cols for r in self.data):
            raise LinalgError("data does not match declared shape")

    # -- constructors

    @classmethod
    def from_rows(cls, field: FieldSpec, rows: Sequence[Sequence[int]], ncols: int | None = None) -> "MatrixFq":
        data = tuple(tuple(int(v) for v in r) for r in rows)
        if not data and ncols is None:
            ncols = 0
        cols = len(data[0]) if data else ncols
        return cls(field, len(data), cols, data)

    @classmethod
    def from_columns(cls, field: FieldSpec, columns: Sequence[Sequence[int]], nrows: int) -> "MatrixFq":
        columns = [tuple(int(v) for v in c) for c in columns]
        if any(len(c) != nrows for c in columns):
            raise LinalgError(f"every column must have {nrows} entries")
        data = tuple(tuple(c[i] for c in columns) for i in range(nrows))
        return cls(field, nrows, len(columns), data)

    @classmethod
    def zeros(cls, field: FieldSpec, rows: int, cols: int) -> "MatrixFq":
        return cls(field, rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "MatrixFq":
        return cls(field, n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    # -- access

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.data)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def select_columns(self, idx: Iterable[int]) -> "MatrixFq":
        idx = list(idx)
        return MatrixFq(self.field, self.rows, len(idx), tuple(tuple(r[j] for j in idx) for r in self.data))

    def transpose(self) -> "MatrixFq":
        return MatrixFq.from_columns(self.field, self.data, self.cols) if self.rows else MatrixFq.zeros(
            self.field, self.cols, 0
        )

    @property
    def T(self) -> "MatrixFq":
        return self.transpose()

    def __repr__(self) -> str:
        return f"MatrixFq({self.field!r}, {self.rows}x{self.cols}, {[list(r) for r in self.data]})"

    # -- arithmetic

    def _same(self, other: "MatrixFq") -> None:
        if self.field != other.field:
            raise FieldError(f"field mismatch: {self.field!r} vs {other.field!r}")

    def __add__(self, other: "MatrixFq") -> "MatrixFq":
        self._same(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise LinalgError("shape mismatch in addition")
        f = self.field
        return MatrixFq(
            f, self.rows, self.cols, tuple(tuple(f.add(a, b) for a, b in zip(r, s)) for r, s in zip(self.data, other.data))
        )

    def __neg__(self) -> "MatrixFq":
        f = self.field
        return MatrixFq(f, self.rows, self.cols, tuple(tuple(f.neg(a) for a in r) for r in self.data))

    def __sub__(self, other: "MatrixFq") -> "MatrixFq":
        return self + (-other)

    def __matmul__(self, other: "MatrixFq") -> "MatrixFq":
        self._same(other)
        if self.cols != other.rows:
            raise LinalgError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        f = self.field
        out = []
        for r in self.data:
            acc = [0] * other.cols
            for a, orow in zip(r, other.data):
                if a:
                    acc = f.axpy_row(acc, f.neg(a), list(orow))
            out.append(tuple(acc))
        return MatrixFq(f, self.rows, other.cols, tuple(out))

    def scale(self, c: int) -> "MatrixFq":
        f = self.field
        return MatrixFq(f, self.rows, self.cols, tuple(tuple(f.scale_row(c, list(r))) for r in self.data))

    def is_zero(self) -> bool:
        return all(v == 0 for r in self.data for v in r)

    def map_entries(self, field: FieldSpec, fn) -> "MatrixFq":
        return MatrixFq(field, self.rows, self.cols, tuple(tuple(fn(v) for v in r) for r in self.data))

    def to_numpy(self) -> np.ndarray:
        return np.array(self.data, dtype=np.int64).reshape(self.rows, self.cols)

    # -- serialization (column-major, mirroring column-span semantics)

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "data": [list(c) for c in self.columns()]}

    @classmethod
    def from_json(cls, field: FieldSpec, obj: dict, name: str = "matrix") -> "MatrixFq":
        try:
            rows, cols, data = int(obj["rows"]), int(obj["cols"]), obj["data"]
        except (KeyError, TypeError, ValueError) as exc:
            raise LinalgError(f"{name}: expected keys rows/cols/data ({exc})") from None
        if len(data) != cols:
            raise LinalgError(f"{name}: declared {cols} columns but data has {len(data)}")
        for j, c in enumerate(data):
            if len(c) != rows:
                raise LinalgError(f"{name}: column {j} has {len(c)} entries, expected {rows}")
            for v in c:
                if not isinstance(v, int) or not 0 <= v < field.q:
                    raise LinalgError(f"{name}: entry {v!r} in column {j} is not an element of {field!r}")
        return cls.from_columns(field, data, rows)


def hstack(*mats: MatrixFq) -> MatrixFq:
    mats = [m for m in mats if m is not None]
    if not mats:
        raise LinalgError("hstack of nothing")
    f, rows = mats[0].field, mats[0].rows
    for m in mats:
        if m.field != f:
            raise FieldError("field mismatch in hstack")
        if m.rows != rows:
            raise LinalgError(f"row-count mismatch in hstack: {m.rows} vs {rows}")
    data = tuple(tuple(itertools.chain.from_iterable(m.data[i] for m in mats)) for i in range(rows))
    return MatrixFq(f, rows, sum(m.cols for m in mats), data)


def vstack(*mats: MatrixFq) -> MatrixFq:
    f, cols = mats[0].field, mats[0].cols
    if any(m.cols != cols for m in mats):
        raise LinalgError("column-count mismatch in vstack")
    data = tuple(itertools.chain.from_iterable(m.data for m in mats))
    return MatrixFq(f, len(data), cols, data)


def _check_rows(*mats: MatrixFq) -> None:
    r = mats[0].rows
    for m in mats[1:]:
        if m.rows != r:
            raise LinalgError(f"row-count mismatch: {m.rows} vs {r}")
        if m.field != mats[0].field:
            raise FieldError("field mismatch")


# --- elimination ------------------------------------------------------------------


def _rref_rows(field: FieldSpec, rows: list[list[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    """In-place RREF on a list of row lists; returns (rows, pivot columns)."""
    pivots: list[int] = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if rows[i][c]), None)
        if piv is None:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
        lead = rows[r][c]
        if lead != 1:
            rows[r] = field.scale_row(field.inv(lead), rows[r])
        prow = rows[r]
        for i in range(nrows):
            if i != r:
                v = rows[i][c]
                if v:
                    rows[i] = field.axpy_row(rows[i], v, prow)
        pivots.append(c)
        r += 1
    return rows, pivots


def rref(M: MatrixFq) -> tuple[MatrixFq, int, list[int]]:
    rows, pivots = _rref_rows(M.field, [list(r) for r in M.data], M.cols)
    R = MatrixFq(M.field, M.rows, M.cols, tuple(tuple(r) for r in rows))
    return R, len(pivots), pivots


def rank(M: MatrixFq) -> int:
    if M.rows == 0 or M.cols == 0:
        return 0
    # eliminate on the smaller orientation
    if M.cols < M.rows:
        rows = [list(c) for c in M.columns()]
        return len(_rref_rows(M.field, rows, M.rows)[1])
    return len(_rref_rows(M.field, [list(r) for r in M.data], M.cols)[1])


def conditional_rank(M1: MatrixFq, M2: MatrixFq) -> int:
    """rk(M1 | M2) = rk([M1, M2]) - rk(M2)."""
    _check_rows(M1, M2)
    return rank(hstack(M1, M2)) - rank(M2)


def column_basis(M: MatrixFq) -> MatrixFq:
    """The pivot columns of M: a basis of <M> made of literal columns of M."""
    _, _, piv = rref(M)
    return M.select_columns(piv)


def kernel(M: MatrixFq) -> MatrixFq:
    """Right-kernel basis (columns), one vector per free column of the RREF."""
    f = M.field
    R, _, piv = rref(M)
    free = [c for c in range(M.cols) if c not in set(piv)]
    vecs = []
    for fc in free:
        v = [0] * M.cols
        v[fc] = 1
        for i, pc in enumerate(piv):
            v[pc] = f.neg(R.data[i][fc])
        vecs.append(v)
    return MatrixFq.from_columns(f, vecs, M.cols)


def intersect_column_spaces(A: MatrixFq, B: MatrixFq) -> MatrixFq:
    """Full-column-rank basis of <A> ∩ <B> via the kernel of [A | -B]."""
    _check_rows(A, B)
    A, B = column_basis(A), column_basis(B)
    if A.cols == 0 or B.cols == 0:
        return MatrixFq.zeros(A.field, A.rows, 0)
    K = kernel(hstack(A, -B))
    U = K.select_columns(range(K.cols))
    u = MatrixFq(A.field, A.cols, K.cols, U.data[: A.cols])
    return A @ u


def contains(A: MatrixFq, B: MatrixFq) -> bool:
    """True when <B> ⊆ <A>."""
    return conditional_rank(B, A) == 0


def same_span(A: MatrixFq, B: MatrixFq) -> bool:
    return contains(A, B) and contains(B, A)


def steinitz_complement(A: MatrixFq, B: MatrixFq) -> MatrixFq:
    """Columns C of A (greedy, lowest index first) such that [B, C] is a basis of <A>."""
    _check_rows(A, B)
    if rank(B) != B.cols:
        raise LinalgError("steinitz_complement: B must have full column rank")
    if not contains(A, B):
        raise LinalgError("steinitz_complement: <B> is not contained in <A>")
    return extend_basis(B, A)


def extend_basis(base: MatrixFq, pool: MatrixFq, limit: int | None = None) -> MatrixFq:
    """Greedily pick columns of ``pool`` independent modulo <base> (at most ``limit``)."""
    f = base.field
    # maintain an echelon form of the accepted vectors, as rows
    echelon: list[list[int]] = []
    pivcols: list[int] = []

    def reduce(v: list[int]) -> list[int]:
        for row, pc in zip(echelon, pivcols):
            c = v[pc]
            if c:
                v = f.axpy_row(v, c, row)
        return v

    def accept(v: list[int]) -> bool:
        v = reduce(v)
        pc = next((i for i, x in enumerate(v) if x), None)
        if pc is None:
            return False
        v = f.scale_row(f.inv(v[pc]), v)
        for k, row in enumerate(echelon):
            if row[pc]:
                echelon[k] = f.axpy_row(row, row[pc], v)
        echelon.append(v)
        pivcols.append(pc)
        return True

    for c in base.columns():
        accept(list(c))
    chosen = []
    for j, c in enumerate(pool.columns()):
        if limit is not None and len(chosen) >= limit:
            break
        if accept(list(c)):
            chosen.append(j)
    return pool.select_columns(chosen)


def select_joint_submatrices(
    A: MatrixFq, B1: MatrixFq, B2: MatrixFq, n1: int, n2: int
) -> tuple[MatrixFq, MatrixFq]:
    """Column subsets B1' (n1 cols) of B1 and B2' (n2 cols) of B2 with [A, B1', B2'] full column rank.

    Starts from greedy complements of A inside B1 and B2 and drops columns
    one at a time, choosing among those in the support of a kernel vector
    while the stack is dependent, then trimming to the targets.  Among the
    droppable columns the highest-index one goes first.
    """
    _check_rows(A, B1, B2)
    for name, M in (("A", A), ("B1", B1), ("B2", B2)):
        if rank(M) != M.cols:
            raise LinalgError(f"select_joint_submatrices: {name} must have full column rank")
    r1, r2 = conditional_rank(B1, A), conditional_rank(B2, A)
    r12 = conditional_rank(hstack(B1, B2), A)
    if n1 < 0 or n2 < 0 or n1 > r1 or n2 > r2 or n1 + n2 > r12:
        raise LinalgError(
            f"select_joint_submatrices: need n1<={r1}, n2<={r2}, n1+n2<={r12}; got n1={n1}, n2={n2}"
        )
    f = A.field
    idx1 = _greedy_indices(A, B1)
    idx2 = _greedy_indices(A, B2)

    def stacked():
        return hstack(A, B1.select_columns(idx1), B2.select_columns(idx2))

    while True:
        Y = stacked()
        if rank(Y) == Y.cols:
            break
        z = kernel(Y).column(0)
        # positions of Y: A first, then idx1, then idx2
        cand = []
        for pos in range(Y.cols - 1, A.cols - 1, -1):
            if not z[pos]:
                continue
            k = pos - A.cols
            if k < len(idx1):
                if len(idx1) > n1:
                    cand.append((1, k))
            elif len(idx2) > n2:
                cand.append((2, k - len(idx1)))
        if not cand:  # pragma: no cover - excluded by the hypotheses
            raise LinalgError("select_joint_submatrices: no droppable column (hypothesis violated)")
        side, k = cand[0]
        (idx1 if side == 1 else idx2).pop(k)
    while len(idx2) > n2:
        idx2.pop()
    while len(idx1) > n1:
        idx1.pop()
    return B1.select_columns(idx1), B2.select_columns(idx2)


def _greedy_indices(A: MatrixFq, B: MatrixFq) -> list[int]:
    chosen = extend_basis(A, B)
    # recover indices (columns of B are distinct vectors in general; match in order)
    out, j = [], 0
    cols = B.columns()
    for c in chosen.columns():
        while cols[j] != c:
            j += 1
        out.append(j)
        j += 1
    return out


def select_submatrix(A: MatrixFq, B: MatrixFq, n: int) -> MatrixFq:
    """n columns of B such that [A, B'] has full column rank."""
    empty = MatrixFq.zeros(A.field, A.rows, 0)
    return select_joint_submatrices(A, B, empty, n, 0)[0]


def kron(M: MatrixFq, N: MatrixFq) -> MatrixFq:
    f = M.field
    rows = []
    for i in range(M.rows):
        for k in range(N.rows):
            rows.append(tuple(f.mul(M.data[i][j], N.data[k][l]) for j in range(M.cols) for l in range(N.cols)))
    return MatrixFq(f, M.rows * N.rows, M.cols * N.cols, tuple(rows))


def kron_identity(M: MatrixFq, z: int, order: str = "right") -> MatrixFq:
    """``M ⊗ I_z`` (order="right") or ``I_z ⊗ M`` (order="left")."""
    if z < 1:
        raise LinalgError("z must be >= 1")
    eye = MatrixFq.identity(M.field, z)
    if order == "right":
        return kron(M, eye)
    if order == "left":
        return kron(eye, M)
    raise ValueError(f"order must be 'left' or 'right', got {order!r}")


def solve(A: MatrixFq, b: Sequence[int]) -> list[int] | None:
    """Some x with A x = b (free variables zero), or None when inconsistent."""
    if len(b) != A.rows:
        raise LinalgError("right-hand side length mismatch")
    f = A.field
    rows = [list(r) + [int(v)] for r, v in zip(A.data, b)]
    rows, piv = _rref_rows(f, rows, A.cols)
    x = [0] * A.cols
    for i, pc in enumerate(piv):
        x[pc] = rows[i][A.cols]
    for i in range(len(piv), A.rows):
        if rows[i][A.cols]:
            return None
    return x


def solve_matrix(A: MatrixFq, B: MatrixFq) -> MatrixFq | None:
    """X with A X = B column by column, or None if any column is inconsistent."""
    _check_rows(A, B)
    f = A.field
    rows = [list(r) + list(s) for r, s in zip(A.data, B.data)]
    rows, piv = _rref_rows(f, rows, A.cols)
    for i in range(len(piv), A.rows):
        if any(rows[i][A.cols :]):
            return None
    X = [[0] * B.cols for _ in range(A.cols)]
    for i, pc in enumerate(piv):
        X[pc] = rows[i][A.cols :]
    return MatrixFq(f, A.cols, B.cols, tuple(tuple(r) for r in X))


def det(M: MatrixFq) -> int:
    if M.rows != M.cols:
        raise LinalgError("determinant of a non-square matrix")
    f = M.field
    rows = [list(r) for r in M.data]
    n = M.rows
    d = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if rows[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            rows[c], rows[piv] = rows[piv], rows[c]
            d = f.neg(d)
        lead = rows[c][c]
        d = f.mul(d, lead)
        inv = f.inv(lead)
        for i in range(c + 1, n):
            v = rows[i][c]
            if v:
                rows[i] = f.axpy_row(rows[i], f.mul(v, inv), rows[c])
    return d


def random_matrix(field: FieldSpec, rows: int, cols: int, rng: np.random.Generator) -> MatrixFq:
    data = rng.integers(0, field.q, size=(rows, cols))
    return MatrixFq(field, rows, cols, tuple(tuple(int(v) for v in r) for r in data))


def np_matmul(field: FieldSpec, X: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Batched row-vector products over the field: (T x D) @ (D x C)."""
    T, C = X.shape[0], G.shape[1]
    acc = np.zeros((T, C), dtype=np.int64)
    for i in range(G.shape[0]):
        acc = field.np_add(acc, field.np_mul(X[:, i : i + 1], G[i : i + 1, :]))
    return acc


def parse_matrix(field: FieldSpec, text_rows: Sequence[str]) -> MatrixFq:
    """Tiny helper for tests: rows of space-separated element codes."""
    return MatrixFq.from_rows(field, [[int(v) for v in r.split()] for r in text_rows])


__all__ = [
    "LinalgError",
    "MatrixFq",
    "column_basis",
    "conditional_rank",
    "contains",
    "det",
    "extend_basis",
    "hstack",
    "intersect_column_spaces",
    "kernel",
    "kron",
    "kron_identity",
    "make_field",
    "np_matmul",
    "random_matrix",
    "rank",
    "rref",
    "same_span",
    "select_joint_submatrices",
    "select_submatrix",
    "solve",
    "solve_matrix",
    "steinitz_complement",
    "vstack",
]
