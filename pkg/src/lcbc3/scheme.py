"""Optimal linear broadcast schemes.

The construction runs in two phases.  ``prepare`` works entirely over the
base field: matrix extension by ``I_{L'}``, signal spaces, decomposition and
the fixed per-user column selections.  ``build_scheme`` then lifts the
skeleton to GF(q^z), draws the random mixing matrices and keeps the first
draw for which all three user determinants are nonzero.

Data layout: ``X`` is ``d x L`` over the base field with ``L = L' z``.
Extended data symbol ``j*d + i`` packs the block ``X[i, j*z:(j+1)*z]``;
side information and demands are packed the same way, column ``c`` of copy
``j`` landing at index ``j*m + c``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .capacity import LambdaAllocation, solve as solve_capacity
from .decomposition import DecompositionBases, decompose
from .field import Embedding, FieldSpec, embedding
from .instance import LcbcInstance, SubspaceFamily, UserSpec, normalize, signal_spaces
from .linalg import (
    MatrixFq,
    det,
    hstack,
    kernel,
    kron_identity,
    np_matmul,
    rank,
    random_matrix,
    select_joint_submatrices,
    select_submatrix,
    solve_matrix,
)

MIXING_NAMES = ("N123", "N12", "N13", "N23", "M12", "M13", "M23", "M")
BLOCK_NAMES = ("U123N123", "U12N12", "U13N13", "U23N23", "lambda1", "lambda2", "U1t", "U2t", "U3t")
OWN_PAIRS = (((0, 1), (0, 2)), ((0, 1), (1, 2)), ((0, 2), (1, 2)))


class SchemeError(RuntimeError):
    """No valid mixing was found within the retry budget."""


class DecodeError(ValueError):
    """Broadcast and side information are not consistent with any data."""


# --- planning ----------------------------------------------------------------------


def plan_extensions(alloc: LambdaAllocation, inst: LcbcInstance) -> tuple[int, int]:
    """(L', z): clear lambda denominators, then the smallest z with q^z > 3 L' d."""
    L_prime = alloc.denominator()
    bound = 3 * L_prime * inst.d
    z = 1
    while inst.q**z <= bound:
        z += 1
    return L_prime, z


def matrix_extension(inst: LcbcInstance, L_prime: int) -> LcbcInstance:
    users = tuple(
        UserSpec(kron_identity(u.V_prime, L_prime, "left"), kron_identity(u.V, L_prime, "left")) for u in inst.users
    )
    return LcbcInstance(inst.field, inst.d * L_prime, users)


# --- skeleton (base field) ---------------------------------------------------------


@dataclass(frozen=True)
class UserSelection:
    """Fixed columns certifying that user k's determinant polynomial is nonzero."""

    U123: MatrixFq
    pair_a: MatrixFq
    pair_b: MatrixFq
    cross: MatrixFq
    Ut: MatrixFq
    Z: MatrixFq
    t: int


@dataclass(frozen=True)
class SchemeSkeleton:
    base: LcbcInstance  # normalized input
    allocation: LambdaAllocation
    L_prime: int
    planner_z: int
    extended: LcbcInstance  # after matrix extension, base field
    family: SubspaceFamily = dc_field(repr=False)
    bases: DecompositionBases = dc_field(repr=False)
    lam: tuple[int, int, int, int, int] = (0, 0, 0, 0, 0)  # integer l123 l12 l13 l23 l
    selections: tuple[UserSelection, ...] = ()

    @property
    def d(self) -> int:
        return self.extended.d

    def mixing_shapes(self) -> dict[str, tuple[int, int]]:
        l123, l12, l13, l23, l = self.lam
        f, b = self.family, self.bases
        r12, r13, r23 = (f.U_pair(i, j).cols for i, j in ((0, 1), (0, 2), (1, 2)))
        return {
            "N123": (f.U123.cols, l123),
            "N12": (r12, l12),
            "N13": (r13, l13),
            "N23": (r23, l23),
            "M12": (r12, l),
            "M13": (r13, l),
            "M23": (r23, l),
            "M": (b.B1.cols, l),
        }


def prepare(inst: LcbcInstance, alloc: LambdaAllocation | None = None) -> SchemeSkeleton:
    base = normalize(inst)
    if alloc is None:
        alloc = solve_capacity(base).allocation
    L_prime, planner_z = plan_extensions(alloc, base)
    ext = matrix_extension(base, L_prime)
    family = signal_spaces(ext)
    bases = decompose(family)
    lam = alloc.scaled(L_prime)
    l123, l12, l13, l23, l = lam
    pair_lam = {(0, 1): l12, (0, 2): l13, (1, 2): l23}
    sels = []
    eye = MatrixFq.identity(ext.field, ext.d)
    for k in range(3):
        pa, pb = OWN_PAIRS[k]
        A = family.V_prime(k)
        s123 = select_submatrix(A, family.U123, l123)
        A = hstack(A, s123)
        sa, sb = select_joint_submatrices(A, family.U_pair(*pa), family.U_pair(*pb), pair_lam[pa], pair_lam[pb])
        A = hstack(A, sa, sb)
        sc = select_submatrix(A, family.cross[k], l)
        A = hstack(A, sc)
        t = family.m(k) - (l123 + pair_lam[pa] + pair_lam[pb] + l)
        ut = select_submatrix(A, family.U[k], t)
        A = hstack(A, ut)
        Z = select_submatrix(A, eye, ext.d - A.cols)
        sels.append(UserSelection(s123, sa, sb, sc, ut, Z, t))
    return SchemeSkeleton(base, alloc, L_prime, planner_z, ext, family, bases, lam, tuple(sels))


# --- scheme ------------------------------------------------------------------------


@dataclass(frozen=True)
class BroadcastScheme:
    skeleton: SchemeSkeleton = dc_field(repr=False)
    z: int
    ext_field: FieldSpec
    G: MatrixFq
    blocks: tuple[tuple[str, int, int], ...]
    mixing: Mapping[str, MatrixFq] = dc_field(repr=False)
    user_bases: tuple[MatrixFq, MatrixFq, MatrixFq] = dc_field(repr=False)
    dets: tuple[int, int, int]
    decoders: tuple[MatrixFq, MatrixFq, MatrixFq] = dc_field(repr=False)
    checks: tuple[MatrixFq, MatrixFq, MatrixFq] = dc_field(repr=False)
    seed: int
    attempts: int
    z_history: tuple[int, ...]

    @property
    def instance(self) -> LcbcInstance:
        return self.skeleton.base

    @property
    def L_prime(self) -> int:
        return self.skeleton.L_prime

    @property
    def L(self) -> int:
        return self.skeleton.L_prime * self.z

    @property
    def planner_z(self) -> int:
        return self.skeleton.planner_z

    @property
    def t(self) -> tuple[int, ...]:
        return tuple(s.t for s in self.skeleton.selections)

    @property
    def cost(self) -> Fraction:
        """Broadcast q-ary symbols per computation: cols(G) * z / (L' z)."""
        return Fraction(self.G.cols, self.L_prime)

    @property
    def embedding(self) -> Embedding:
        return embedding(self.instance.field, self.z)

    def block(self, name: str) -> MatrixFq:
        for n, a, b in self.blocks:
            if n == name:
                return self.G.select_columns(range(a, b))
        raise KeyError(name)

    def to_json(self) -> dict:
        mj = lambda M: M.to_json()  # noqa: E731
        return {
            "L_prime": self.L_prime,
            "z": self.z,
            "planner_z": self.planner_z,
            "L": self.L,
            "ext_field": {"p": self.ext_field.p, "n": self.ext_field.n, "modulus": list(self.ext_field.modulus)},
            "cost": f"{self.cost.numerator}/{self.cost.denominator}",
            "lambda_int": list(self.skeleton.lam),
            "t": list(self.t),
            "generator": mj(self.G),
            "blocks": [[n, a, b] for n, a, b in self.blocks],
            "mixing": {k: mj(v) for k, v in sorted(self.mixing.items())},
            "decoders": [mj(D) for D in self.decoders],
            "dets": list(self.dets),
            "seed": self.seed,
            "attempts": self.attempts,
            "z_history": list(self.z_history),
        }


def _lift(M: MatrixFq, emb: Embedding) -> MatrixFq:
    return M.map_entries(emb.ext, emb.lift)


def sample_mixing(skel: SchemeSkeleton, ext: FieldSpec, rng: np.random.Generator) -> dict[str, MatrixFq]:
    return {n: random_matrix(ext, r, c, rng) for n, (r, c) in skel.mixing_shapes().items()}


class _Lifted:
    """The skeleton's matrices over GF(q^z), computed once per z."""

    def __init__(self, skel: SchemeSkeleton, z: int):
        emb = embedding(skel.base.field, z)
        self.emb, self.ext = emb, emb.ext
        f, b = skel.family, skel.bases
        L = lambda M: _lift(M, emb)  # noqa: E731
        self.U123 = L(f.U123)
        self.U12, self.U13, self.U23 = (L(f.U_pair(i, j)) for i, j in ((0, 1), (0, 2), (1, 2)))
        self.B1, self.B2 = L(b.B1), L(b.B2)
        self.Vp = tuple(L(f.V_prime(k)) for k in range(3))
        self.V = tuple(L(f.V(k)) for k in range(3))
        self.Ut = tuple(L(s.Ut) for s in skel.selections)
        self.Z = tuple(L(s.Z) for s in skel.selections)

    def columns(self, mix: Mapping[str, MatrixFq]):
        x = mix
        g123 = self.U123 @ x["N123"]
        g12, g13, g23 = self.U12 @ x["N12"], self.U13 @ x["N13"], self.U23 @ x["N23"]
        lam1 = self.U12 @ x["M12"] + self.U13 @ x["M13"] + self.B1 @ x["M"]
        lam2 = -(self.U12 @ x["M12"]) + self.U23 @ x["M23"] + self.B2 @ x["M"]
        return g123, g12, g13, g23, lam1, lam2

    def user_bases(self, cols) -> tuple[MatrixFq, MatrixFq, MatrixFq]:
        g123, g12, g13, g23, lam1, lam2 = cols
        return (
            hstack(self.Vp[0], g123, g12, g13, lam1, self.Ut[0]),
            hstack(self.Vp[1], g123, g12, g23, lam2, self.Ut[1]),
            hstack(self.Vp[2], g123, g13, g23, lam1 + lam2, self.Ut[2]),
        )

    def dets(self, bases) -> tuple[int, int, int]:
        return tuple(det(hstack(Y, self.Z[k])) for k, Y in enumerate(bases))


def mixing_vanishes(skel: SchemeSkeleton, z: int, rng: np.random.Generator, _cache: dict | None = None) -> bool:
    """One Schwartz-Zippel trial: does P1 P2 P3 vanish at a uniform random point?"""
    lifted = _cache.get(z) if _cache is not None else None
    if lifted is None:
        lifted = _Lifted(skel, z)
        if _cache is not None:
            _cache[z] = lifted
    mix = sample_mixing(skel, lifted.ext, rng)
    return 0 in lifted.dets(lifted.user_bases(lifted.columns(mix)))


def build_scheme(
    inst: LcbcInstance,
    alloc: LambdaAllocation | None = None,
    seed: int = 0,
    *,
    z: int | None = None,
    mixing: Mapping[str, MatrixFq] | None = None,
    retry_cap: int = 16,
    max_escalations: int = 4,
    skeleton: SchemeSkeleton | None = None,
) -> BroadcastScheme:
    """Construct a scheme; ``z`` and ``mixing`` override the planner and the random draw."""
    skel = skeleton or prepare(inst, alloc)
    z0 = skel.planner_z if z is None else z
    history = []
    for zz in range(z0, z0 + max_escalations + 1):
        history.append(zz)
        lifted = _Lifted(skel, zz)
        for attempt in range(1 if mixing is not None else retry_cap):
            if mixing is not None:
                mix = dict(mixing)
            else:
                mix = sample_mixing(skel, lifted.ext, np.random.default_rng([seed, zz, attempt]))
            cols = lifted.columns(mix)
            ubases = lifted.user_bases(cols)
            dets = lifted.dets(ubases)
            if 0 not in dets:
                return _assemble(skel, lifted, zz, mix, cols, ubases, dets, seed, attempt + 1, tuple(history))
        if mixing is not None:
            raise SchemeError(f"supplied mixing gives determinants {dets} at z={zz}")
    raise SchemeError(f"no nonvanishing mixing found; tried z in {history} with {retry_cap} draws each")


def _assemble(skel, lifted: _Lifted, z, mix, cols, ubases, dets, seed, attempts, history) -> BroadcastScheme:
    ext = lifted.ext
    parts = list(cols) + list(lifted.Ut)
    G = hstack(*parts)
    blocks, start = [], 0
    for name, part in zip(BLOCK_NAMES, parts):
        blocks.append((name, start, start + part.cols))
        start += part.cols
    offs = {n: (a, b) for n, a, b in blocks}
    decoders, checks = [], []
    for k in range(3):
        Vp, V = lifted.Vp[k], lifted.V[k]
        Y = ubases[k]
        D = solve_matrix(Y, V)
        if D is None:
            raise SchemeError(f"user {k + 1}: demand not in the span of its decoding basis")
        # selector T with [V'_k, G] @ T = Y
        names = [
            ("U123N123", "U12N12", "U13N13", "lambda1", "U1t"),
            ("U123N123", "U12N12", "U23N23", "lambda2", "U2t"),
            ("U123N123", "U13N13", "U23N23", ("lambda1", "lambda2"), "U3t"),
        ][k]
        mp = Vp.cols
        rows = mp + G.cols
        sel_cols = [[int(r == i) for r in range(rows)] for i in range(mp)]
        for nm in names:
            group = nm if isinstance(nm, tuple) else (nm,)
            width = offs[group[0]][1] - offs[group[0]][0]
            for c in range(width):
                v = [0] * rows
                for g in group:
                    v[mp + offs[g][0] + c] = 1
                sel_cols.append(v)
        T = MatrixFq.from_columns(ext, sel_cols, rows)
        full = hstack(Vp, G)
        assert full @ T == Y
        decoders.append(T @ D)
        checks.append(kernel(full))
    return BroadcastScheme(
        skel, z, ext, G, tuple(blocks), dict(mix), tuple(ubases), tuple(dets), tuple(decoders), tuple(checks),
        seed, attempts, history,
    )


# --- encode / decode ---------------------------------------------------------------


def _as_array(X, shape=None) -> np.ndarray:
    arr = np.asarray(X, dtype=np.int64)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    return arr


def pack_data(scheme: BroadcastScheme, X: np.ndarray) -> np.ndarray:
    """(..., d, L) base symbols -> (..., L' d) extension symbols."""
    d, Lp, z = scheme.instance.d, scheme.L_prime, scheme.z
    blocks = X.reshape(X.shape[:-2] + (d, Lp, z))
    packed = scheme.embedding.np_pack(blocks)  # (..., d, L')
    return np.swapaxes(packed, -1, -2).reshape(X.shape[:-2] + (Lp * d,))


def pack_columns(scheme: BroadcastScheme, W: np.ndarray) -> np.ndarray:
    """(..., L, m) base symbols -> (..., L' m) extension symbols, index j*m + c."""
    Lp, z = scheme.L_prime, scheme.z
    m = W.shape[-1]
    blocks = W.reshape(W.shape[:-2] + (Lp, z, m))
    packed = scheme.embedding.np_pack(np.swapaxes(blocks, -1, -2))  # (..., L', m)
    return packed.reshape(W.shape[:-2] + (Lp * m,))


def unpack_columns(scheme: BroadcastScheme, w: np.ndarray, m: int) -> np.ndarray:
    Lp, z = scheme.L_prime, scheme.z
    blocks = scheme.embedding.np_unpack(w.reshape(w.shape[:-1] + (Lp, m)))  # (..., L', m, z)
    return np.swapaxes(blocks, -1, -2).reshape(w.shape[:-1] + (Lp * z, m))


def encode_batch(scheme: BroadcastScheme, X: np.ndarray) -> np.ndarray:
    """(T, d, L) -> (T, cols(G)) broadcast symbols over GF(q^z)."""
    X = _as_array(X)
    xbar = pack_data(scheme, X)
    return np_matmul(scheme.ext_field, xbar, scheme.G.to_numpy())


def encode(scheme: BroadcastScheme, X) -> tuple[int, ...]:
    inst = scheme.instance
    X = _as_array(X, (inst.d, scheme.L))
    return tuple(int(v) for v in encode_batch(scheme, X[None])[0])


def side_information(scheme: BroadcastScheme, k: int, X: np.ndarray) -> np.ndarray:
    """(T, d, L) data -> (T, L, m'_orig) side information for the originally supplied V'_k."""
    orig = scheme.instance.provenance.original.users[k].V_prime
    return _apply(scheme.instance.field, X, orig)


def demand(scheme: BroadcastScheme, k: int, X: np.ndarray) -> np.ndarray:
    orig = scheme.instance.provenance.original.users[k].V
    return _apply(scheme.instance.field, X, orig)


def _apply(field: FieldSpec, X: np.ndarray, V: MatrixFq) -> np.ndarray:
    T, d, L = X.shape
    flat = np.swapaxes(X, 1, 2).reshape(T * L, d)
    out = np_matmul(field, flat, V.to_numpy()) if V.cols else np.zeros((T * L, 0), dtype=np.int64)
    return out.reshape(T, L, V.cols)


def decode_batch(scheme: BroadcastScheme, k: int, S: np.ndarray, W_side: np.ndarray) -> np.ndarray:
    """Recover the originally requested demand of user k for a batch of trials.

    ``S`` is (T, cols(G)); ``W_side`` is (T, L, m'_orig).  Raises DecodeError
    when some trial is inconsistent.
    """
    inst, ext, base = scheme.instance, scheme.ext_field, scheme.instance.field
    prov = inst.provenance
    W_side = _as_array(W_side)
    S = _as_array(S)
    side = W_side[..., list(prov.side_index[k])]  # normalized side information
    a = np.concatenate([pack_columns(scheme, side), S], axis=-1)
    K = scheme.checks[k]
    if K.cols:
        resid = np_matmul(ext, a, K.to_numpy())
        if resid.any():
            raise DecodeError(f"user {k + 1}: broadcast inconsistent with side information")
    m = inst.m(k)
    wbar = np_matmul(ext, a, scheme.decoders[k].to_numpy()) if m else np.zeros(a.shape[:-1] + (0,), np.int64)
    W_norm = unpack_columns(scheme, wbar, m)  # (T, L, m)
    both = np.concatenate([side, W_norm], axis=-1)
    T, L = both.shape[:2]
    demand_map = prov.demand_map[k]
    if demand_map.cols == 0:
        return np.zeros((T, L, 0), dtype=np.int64)
    if demand_map.rows == 0:
        return np.zeros((T, L, demand_map.cols), dtype=np.int64)
    out = np_matmul(base, both.reshape(T * L, -1), demand_map.to_numpy())
    return out.reshape(T, L, demand_map.cols)


def decode(scheme: BroadcastScheme, k: int, S, W_side) -> np.ndarray:
    S = _as_array(S)[None]
    W_side = _as_array(W_side)[None]
    return decode_batch(scheme, k, S, W_side)[0]


def base_generator(scheme: BroadcastScheme) -> MatrixFq:
    """The scheme as a base-field linear map: rows index X entries (i*L + t), columns broadcast symbols."""
    inst = scheme.instance
    d, L, z = inst.d, scheme.L, scheme.z
    eye = np.eye(d * L, dtype=np.int64).reshape(d * L, d, L)
    S = encode_batch(scheme, eye)  # (dL, cols)
    base_syms = scheme.embedding.np_unpack(S).reshape(d * L, -1)  # each ext symbol -> z base symbols
    return MatrixFq.from_rows(inst.field, base_syms.tolist(), ncols=base_syms.shape[1])


# --- verification ------------------------------------------------------------------


@dataclass(frozen=True)
class SchemeReport:
    dets_nonzero: bool
    cost_matches: bool
    decode_ok: bool
    exhaustive: bool
    trials: int
    failures: int
    cost: Fraction
    F_star: Fraction
    column_count_ok: bool

    @property
    def ok(self) -> bool:
        return self.dets_nonzero and self.cost_matches and self.decode_ok and self.column_count_ok

    def to_json(self) -> dict:
        return {
            "dets_nonzero": self.dets_nonzero,
            "cost_matches": self.cost_matches,
            "column_count_ok": self.column_count_ok,
            "decode_ok": self.decode_ok,
            "exhaustive": self.exhaustive,
            "trials": self.trials,
            "failures": self.failures,
            "cost": f"{self.cost.numerator}/{self.cost.denominator}",
            "F_star": f"{self.F_star.numerator}/{self.F_star.denominator}",
            "ok": self.ok,
        }


def all_data(field: FieldSpec, d: int, L: int) -> np.ndarray:
    n = d * L
    idx = np.arange(field.q**n, dtype=np.int64)
    digits = (idx[:, None] // field.q ** np.arange(n, dtype=np.int64)) % field.q
    return digits.reshape(-1, d, L)


def check_decoding(scheme: BroadcastScheme, X: np.ndarray, batch: int = 4096) -> int:
    """Number of (trial, user) pairs that fail to decode exactly."""
    failures = 0
    for s in range(0, len(X), batch):
        Xb = X[s : s + batch]
        S = encode_batch(scheme, Xb)
        for k in range(3):
            try:
                W = decode_batch(scheme, k, S, side_information(scheme, k, Xb))
            except DecodeError:
                failures += len(Xb)
                continue
            truth = demand(scheme, k, Xb)
            failures += int(np.any(W != truth, axis=(1, 2)).sum())
    return failures


def verify_scheme(scheme: BroadcastScheme, trials: int = 1000, seed: int = 0, cap: int = 4096) -> SchemeReport:
    skel = scheme.skeleton
    lifted = _Lifted(skel, scheme.z)
    dets = lifted.dets(lifted.user_bases(lifted.columns(scheme.mixing)))
    dets_ok = 0 not in dets and all(Y.cols == rank(Y) for Y in scheme.user_bases)
    rv_F = _objective(skel)
    cost_ok = scheme.cost == rv_F
    l123, l12, l13, l23, l = skel.lam
    cols_ok = scheme.G.cols == l123 + l12 + l13 + l23 + 2 * l + sum(scheme.t)
    inst = scheme.instance
    q, d, L = inst.q, inst.d, scheme.L
    exhaustive = q ** (d * L) <= cap
    if exhaustive:
        X = all_data(inst.field, d, L)
    else:
        X = np.random.default_rng(seed).integers(0, q, size=(trials, d, L))
    failures = check_decoding(scheme, X)
    return SchemeReport(dets_ok, cost_ok, failures == 0, exhaustive, len(X), failures, scheme.cost, rv_F, cols_ok)


def _objective(skel: SchemeSkeleton) -> Fraction:
    a = skel.allocation
    msum = sum(skel.base.m(k) for k in range(3))
    return msum - 2 * a.l123 - a.l12 - a.l13 - a.l23 - a.l


def schwartz_zippel_bound(scheme_or_skel, z: int) -> float:
    skel = getattr(scheme_or_skel, "skeleton", scheme_or_skel)
    return 3 * skel.d / skel.base.q**z


__all__ = [
    "BroadcastScheme",
    "DecodeError",
    "SchemeError",
    "SchemeReport",
    "SchemeSkeleton",
    "base_generator",
    "build_scheme",
    "decode",
    "decode_batch",
    "encode",
    "encode_batch",
    "matrix_extension",
    "mixing_vanishes",
    "plan_extensions",
    "prepare",
    "verify_scheme",
]
