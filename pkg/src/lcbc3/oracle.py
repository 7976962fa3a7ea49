"""Brute-force ground truth, kept independent of the capacity and scheme paths.

* The confusability graph of a scalar (L=1) code and its exact chromatic
  number.  Any proper coloring is a valid, possibly nonlinear, broadcast
  code, so log_q(chi) is the optimal one-shot cost.
* Exhaustive end-to-end decoding of a constructed scheme.
* A half-step lattice search over the lambda program, with constraint
  bounds recomputed from raw conditional ranks.
"""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .field import FieldSpec
from .instance import LcbcInstance, normalize, signal_spaces
from .linalg import MatrixFq, conditional_rank, hstack, intersect_column_spaces as cap_

DEFAULT_CAP = 4096
DEFAULT_NODE_BUDGET = 200_000


class OracleCapExceeded(ValueError):
    """The brute-force search space is larger than the configured cap."""


# --- confusability ---------------------------------------------------------------


@dataclass(frozen=True)
class ConfusabilityGraph:
    field: FieldSpec
    d: int
    adjacency: np.ndarray  # (n, n) bool; vertex index = base-q digits of x, little-endian

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.sum()) // 2

    def neighbors(self, v: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency[v])

    def is_proper(self, coloring) -> bool:
        c = np.asarray(coloring)
        if len(c) != self.n:
            return False
        i, j = np.nonzero(self.adjacency)
        return bool(np.all(c[i] != c[j]))


def _realizations(field: FieldSpec, d: int) -> np.ndarray:
    idx = np.arange(field.q**d, dtype=np.int64)
    return (idx[:, None] // field.q ** np.arange(d, dtype=np.int64)) % field.q  # (n, d)


def _evaluate(field: FieldSpec, X: np.ndarray, V: MatrixFq) -> np.ndarray:
    """Each row of X times V, accumulated one column at a time with table lookups."""
    out = np.zeros((X.shape[0], V.cols), dtype=np.int64)
    for c in range(V.cols):
        acc = np.zeros(X.shape[0], dtype=np.int64)
        for i in range(V.rows):
            acc = field.np_add(acc, field.np_mul(X[:, i], np.int64(V.data[i][c])))
        out[:, c] = acc
    return out


def _keys(vals: np.ndarray, q: int) -> np.ndarray:
    return (vals * q ** np.arange(vals.shape[1], dtype=np.int64)).sum(axis=1) if vals.shape[1] else np.zeros(len(vals), np.int64)


def build_confusability(inst: LcbcInstance, cap: int = DEFAULT_CAP) -> ConfusabilityGraph:
    q, d = inst.q, inst.d
    if q**d > cap:
        raise OracleCapExceeded(f"q^d = {q}^{d} exceeds cap {cap}; lower d or use randomized checks")
    X = _realizations(inst.field, d)
    n = len(X)
    adj = np.zeros((n, n), dtype=bool)
    for u in inst.users:
        side = _keys(_evaluate(inst.field, X, u.V_prime), q)
        want = _keys(_evaluate(inst.field, X, u.V), q)
        adj |= (side[:, None] == side[None, :]) & (want[:, None] != want[None, :])
    return ConfusabilityGraph(inst.field, d, adj)


# --- chromatic number ------------------------------------------------------------


@dataclass(frozen=True)
class ChromaticResult:
    chi: int | None  # None when the node budget ran out
    lower: int
    upper: int
    coloring: tuple[int, ...]
    nodes: int

    @property
    def exact(self) -> bool:
        return self.chi is not None


def greedy_clique(g: ConfusabilityGraph) -> list[int]:
    """Largest clique found by greedy growth from each high-degree start vertex."""
    if g.n == 0:
        return []
    adj = g.adjacency
    deg = adj.sum(axis=1)
    order = np.argsort(-deg, kind="stable")
    best: list[int] = [int(order[0])]
    for start in order[: min(g.n, 64)]:
        clique = [int(start)]
        cand = adj[start].copy()
        while cand.any():
            idx = np.flatnonzero(cand)
            v = int(idx[np.argmax(deg[idx])])
            clique.append(v)
            cand &= adj[v]
        if len(clique) > len(best):
            best = clique
    return best


def dsatur_greedy(g: ConfusabilityGraph) -> list[int]:
    n = g.n
    adj = g.adjacency
    colors = [-1] * n
    seen = [set() for _ in range(n)]
    deg = adj.sum(axis=1)
    for _ in range(n):
        v = max((u for u in range(n) if colors[u] < 0), key=lambda u: (len(seen[u]), deg[u], -u))
        c = 0
        while c in seen[v]:
            c += 1
        colors[v] = c
        for w in np.flatnonzero(adj[v]):
            seen[w].add(c)
    return colors


def coset_coloring(g: ConfusabilityGraph, target: int = 1, budget: int = 20_000) -> list[int]:
    """Color by cosets of the largest subspace H found with (H - H) free of edges.

    Adjacency depends only on x - y, so x -> x + H is proper whenever no
    nonzero h in H is a neighbour of 0.  Search stops once q^(d - dim H)
    reaches ``target``.
    """
    F, d, q = g.field, g.d, g.q
    X = _realizations(F, d)
    weights = q ** np.arange(d, dtype=np.int64)
    bad = g.adjacency[0]
    best = [np.zeros(1, dtype=np.int64)]
    nodes = 0

    def grow(H: np.ndarray, v: int) -> np.ndarray:
        parts = [H]
        for c in range(1, q):
            shifted = F.np_add(X[H], F.np_mul(np.int64(c), X[v])[None, :])
            parts.append(shifted @ weights)
        return np.unique(np.concatenate(parts))

    def dfs(H: np.ndarray, last: int) -> bool:
        nonlocal nodes
        nodes += 1
        if len(H) > len(best[0]):
            best[0] = H
            if g.n // len(H) <= target:
                return True
        if nodes > budget:
            return True
        inH = np.zeros(g.n, dtype=bool)
        inH[H] = True
        for v in range(last + 1, g.n):
            if inH[v] or bad[v]:
                continue
            H2 = grow(H, v)
            if not bad[H2].any() and dfs(H2, v):
                return True
        return False

    dfs(best[0], 0)
    H = best[0]
    label = np.full(g.n, -1, dtype=np.int64)
    nxt = 0
    for x in range(g.n):
        if label[x] < 0:
            coset = (F.np_add(X[H], X[x][None, :]) @ weights)
            label[coset] = nxt
            nxt += 1
    return label.tolist()


def chromatic_number(g: ConfusabilityGraph, node_budget: int = DEFAULT_NODE_BUDGET) -> ChromaticResult:
    """Exact chi by DSatur branch and bound, seeded with greedy bounds."""
    n = g.n
    if n == 0:
        return ChromaticResult(0, 0, 0, (), 0)
    clique = greedy_clique(g)
    lower = len(clique)
    best = dsatur_greedy(g)
    coset = coset_coloring(g, target=lower)
    if max(coset) < max(best):
        best = coset
    upper = max(best) + 1
    if lower == upper:
        return ChromaticResult(upper, lower, upper, tuple(best), 0)

    nbrs = [np.flatnonzero(g.adjacency[v]).tolist() for v in range(n)]
    deg = [len(x) for x in nbrs]
    colors = [-1] * n
    # counts[v][c]: colored neighbours of v using color c
    counts = [dict() for _ in range(n)]
    for c, v in enumerate(clique):  # fixing the clique breaks color symmetry
        colors[v] = c
        for w in nbrs[v]:
            counts[w][c] = counts[w].get(c, 0) + 1
    state = {"best": best, "upper": upper, "nodes": 0, "aborted": False}

    def assign(v, c, sign):
        for w in nbrs[v]:
            k = counts[w].get(c, 0) + sign
            if k:
                counts[w][c] = k
            else:
                counts[w].pop(c, None)

    def search(used: int, remaining: int) -> None:
        if state["aborted"]:
            return
        state["nodes"] += 1
        if state["nodes"] > node_budget:
            state["aborted"] = True
            return
        if remaining == 0:
            state["best"], state["upper"] = list(colors), used
            return
        v = max((u for u in range(n) if colors[u] < 0), key=lambda u: (len(counts[u]), deg[u]))
        for c in range(min(used + 1, state["upper"] - 1)):
            if c in counts[v]:
                continue
            colors[v] = c
            assign(v, c, 1)
            search(max(used, c + 1), remaining - 1)
            assign(v, c, -1)
            colors[v] = -1
            if state["upper"] == lower or state["aborted"]:
                return

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, n + 1000))
    try:
        search(lower, n - lower)
    finally:
        sys.setrecursionlimit(limit)
    up = state["upper"]
    chi = None if state["aborted"] and up > lower else up
    return ChromaticResult(chi, lower if chi is None else chi, up, tuple(state["best"]), state["nodes"])


@dataclass(frozen=True)
class ScalarCost:
    """One-shot (L=1) optimal cost in q-ary symbols, exact when chi is a power of q."""

    q: int
    chi: int | None
    chi_lower: int
    chi_upper: int
    nodes: int

    @property
    def exact(self) -> Fraction | None:
        if self.chi is None:
            return None
        e = _int_log(self.chi, self.q)
        return Fraction(e) if e is not None else None

    @property
    def ceil_bound(self) -> int:
        """ceil(log_q chi_upper): symbols needed by an integral-length code."""
        return _ceil_log(self.chi_upper, self.q)

    def at_least(self, value: Fraction) -> bool:
        """log_q(chi_lower) >= value, compared exactly as q^num <= chi^den."""
        value = Fraction(value)
        return self.q**value.numerator <= self.chi_lower**value.denominator

    def strictly_above(self, value: Fraction) -> bool:
        value = Fraction(value)
        return self.q**value.numerator < self.chi_lower**value.denominator

    def describe(self) -> str:
        if self.exact is not None:
            return f"{self.exact}"
        if self.chi is not None:
            return f"log_{self.q}({self.chi}) in ({_ceil_log(self.chi, self.q) - 1}, {_ceil_log(self.chi, self.q)}]"
        return f"log_{self.q}(chi), chi in [{self.chi_lower}, {self.chi_upper}]"

    def to_json(self) -> dict:
        ex = self.exact
        return {
            "q": self.q,
            "chi": self.chi,
            "chi_lower": self.chi_lower,
            "chi_upper": self.chi_upper,
            "cost": None if ex is None else f"{ex.numerator}/{ex.denominator}",
            "cost_ceil": self.ceil_bound,
            "cost_text": self.describe(),
            "nodes": self.nodes,
        }


def _int_log(x: int, q: int) -> int | None:
    e, v = 0, 1
    while v < x:
        v *= q
        e += 1
    return e if v == x else None


def _ceil_log(x: int, q: int) -> int:
    e, v = 0, 1
    while v < x:
        v *= q
        e += 1
    return e


def scalar_optimal_cost(g: ConfusabilityGraph, node_budget: int = DEFAULT_NODE_BUDGET) -> tuple[ChromaticResult, ScalarCost]:
    res = chromatic_number(g, node_budget)
    return res, ScalarCost(g.q, res.chi, res.lower, res.upper, res.nodes)


# --- exhaustive decoding ---------------------------------------------------------


def exhaustive_decode_check(scheme, cap: int = DEFAULT_CAP) -> bool:
    """Encode every X, decode for all users, compare with X^T V_k from the raw instance."""
    from .scheme import DecodeError, decode_batch, encode_batch

    inst = scheme.instance
    raw = inst.provenance.original
    F, d, L = inst.field, inst.d, scheme.L
    if F.q ** (d * L) > cap:
        raise OracleCapExceeded(f"q^(dL) = {F.q}^{d * L} exceeds cap {cap}")
    flat = _realizations(F, d * L)  # (N, d*L), entry i*L + t
    X = flat.reshape(-1, d, L)
    S = encode_batch(scheme, X)
    cols = flat.reshape(-1, d, L).transpose(0, 2, 1).reshape(-1, d)  # one row per (realization, t)
    for k, u in enumerate(raw.users):
        side = _evaluate(F, cols, u.V_prime).reshape(len(X), L, u.V_prime.cols)
        truth = _evaluate(F, cols, u.V).reshape(len(X), L, u.V.cols)
        try:
            got = decode_batch(scheme, k, S, side)
        except DecodeError:
            return False
        if got.shape != truth.shape or np.any(got != truth):
            return False
    return True


# --- lambda lattice --------------------------------------------------------------


@dataclass(frozen=True)
class LatticeResult:
    best: Fraction
    argbest: tuple[Fraction, ...]
    points: int


def raw_constraints(inst: LcbcInstance) -> list[tuple[tuple[int, ...], int]]:
    """The fifteen (coefficients on l123 l12 l13 l23 l, bound) pairs from direct conditional ranks."""
    fam = signal_spaces(normalize(inst))
    U = fam.U
    Vp = [fam.V_prime(k) for k in range(3)]
    U12, U13, U23 = cap_(U[0], U[1]), cap_(U[0], U[2]), cap_(U[1], U[2])
    U123 = cap_(U12, U[2])
    cross = (cap_(U[0], hstack(U[1], U[2])), cap_(U[1], hstack(U[0], U[2])), cap_(U[2], hstack(U[0], U[1])))
    cr = conditional_rank
    out = [((1, 0, 0, 0, 0), cr(U123, Vp[k])) for k in range(3)]
    for P, coeff, owners in ((U12, (1, 1, 0, 0, 0), (0, 1)), (U13, (1, 0, 1, 0, 0), (0, 2)), (U23, (1, 0, 0, 1, 0), (1, 2))):
        out += [(coeff, cr(P, Vp[k])) for k in owners]
    out.append(((1, 1, 1, 0, 0), cr(hstack(U12, U13), Vp[0])))
    out.append(((1, 1, 0, 1, 0), cr(hstack(U12, U23), Vp[1])))
    out.append(((1, 0, 1, 1, 0), cr(hstack(U13, U23), Vp[2])))
    out.append(((1, 1, 1, 0, 1), cr(cross[0], Vp[0])))
    out.append(((1, 1, 0, 1, 1), cr(cross[1], Vp[1])))
    out.append(((1, 0, 1, 1, 1), cr(cross[2], Vp[2])))
    return out


def lp_lattice_oracle(inst: LcbcInstance, step: Fraction = Fraction(1, 2)) -> LatticeResult:
    """Minimize sum m - 2 l123 - l12 - l13 - l23 - l over the step lattice inside the constraint box."""
    cons = raw_constraints(inst)
    base = normalize(inst)
    msum = sum(base.m(k) for k in range(3))
    box = [min(b for c, b in cons if c[i]) for i in range(5)]
    grids = [[step * t for t in range(int(math.floor(Fraction(b) / step)) + 1)] for b in box]
    best, arg, pts = None, None, 0
    for lam in itertools.product(*grids):
        pts += 1
        if all(sum(c * x for c, x in zip(coef, lam)) <= b for coef, b in cons):
            val = msum - 2 * lam[0] - lam[1] - lam[2] - lam[3] - lam[4]
            if best is None or val < best:
                best, arg = val, lam
    return LatticeResult(Fraction(best), tuple(arg), pts)


__all__ = [
    "ChromaticResult",
    "ConfusabilityGraph",
    "LatticeResult",
    "OracleCapExceeded",
    "ScalarCost",
    "build_confusability",
    "chromatic_number",
    "coset_coloring",
    "exhaustive_decode_check",
    "greedy_clique",
    "lp_lattice_oracle",
    "raw_constraints",
    "scalar_optimal_cost",
]
