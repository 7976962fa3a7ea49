"""Finite fields GF(p^n) with deterministic moduli and subfield embeddings.

Elements are handled internally as integer codes in ``[0, q)``: the base-p
digits of the code are the polynomial coefficients, little-endian.  This is
the same encoding used in instance files, so a matrix entry read from JSON is
already an element code.

Arithmetic on codes goes through lookup tables for small fields (q <= 1024),
plain modular arithmetic for prime fields, and log/exp tables otherwise.  The
tables are derived from the polynomial arithmetic below and built lazily.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

MAX_PRIME = 1 << 16
TABLE_LIMIT = 1024


class FieldError(ValueError):
    """Invalid field construction or mixed-field operation."""


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


# --- polynomials over GF(p), little-endian coefficient lists ------------------


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], m: Sequence[int], p: int) -> list[int]:
    a = _trim(list(a))
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) - 1 >= dm and a:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        _trim(a)
    return a


def _poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _trim(out)


def _poly_sub(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return _trim(out)


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _poly_mod(a, b, p)
    return a


def _poly_powmod(base: list[int], e: int, m: Sequence[int], p: int) -> list[int]:
    result = [1]
    base = _poly_mod(base, m, p)
    while e:
        if e & 1:
            result = _poly_mod(_poly_mul(result, base, p), m, p)
        base = _poly_mod(_poly_mul(base, base, p), m, p)
        e >>= 1
    return result


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Rabin-style test: f of degree n has no factor of degree <= n/2."""
    f = _trim(list(f))
    n = len(f) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    xp = [0, 1]
    for _ in range(1, n // 2 + 1):
        xp = _poly_powmod(xp, p, f, p)
        if len(_poly_gcd(f, _poly_sub(xp, [0, 1], p), p)) > 1:
            return False
    return True


def smallest_irreducible(p: int, n: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree n, low degree first."""
    if n == 1:
        return (0, 1)
    for low in itertools.product(range(p), repeat=n):
        if low[0] == 0:
            continue  # divisible by x
        f = list(low) + [1]
        if is_irreducible(f, p):
            return tuple(f)
    raise FieldError(f"no irreducible polynomial of degree {n} over GF({p})")  # pragma: no cover


# --- field -------------------------------------------------------------------


@dataclass(frozen=True)
class FieldSpec:
    p: int
    n: int
    modulus: tuple[int, ...]

    def __post_init__(self):
        if not is_prime(self.p) or self.p >= MAX_PRIME:
            raise FieldError(f"characteristic must be a prime below {MAX_PRIME}, got {self.p}")
        if self.n < 1:
            raise FieldError(f"extension degree must be >= 1, got {self.n}")
        if len(self.modulus) != self.n + 1 or self.modulus[-1] != 1:
            raise FieldError("modulus must be monic of degree n")
        if self.n > 1 and not is_irreducible(self.modulus, self.p):
            raise FieldError(f"modulus {self.modulus} is reducible over GF({self.p})")

    def __repr__(self) -> str:
        return f"GF({self.p}^{self.n})" if self.n > 1 else f"GF({self.p})"

    @property
    def q(self) -> int:
        return self.p**self.n

    # -- code <-> coefficients

    def coeffs(self, a: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.n):
            a, r = divmod(a, self.p)
            out.append(r)
        return tuple(out)

    def code(self, coeffs: Sequence[int]) -> int:
        c = 0
        for v in reversed(list(coeffs)):
            c = c * self.p + (v % self.p)
        return c

    def poly_mul(self, a: int, b: int) -> int:
        """Reference multiplication via polynomial arithmetic (no tables)."""
        prod = _poly_mul(_trim(list(self.coeffs(a))), _trim(list(self.coeffs(b))), self.p)
        r = _poly_mod(prod, self.modulus, self.p) if self.n > 1 else prod
        return self.code(r + [0] * (self.n - len(r)))

    def poly_add(self, a: int, b: int) -> int:
        ca, cb = self.coeffs(a), self.coeffs(b)
        return self.code([(x + y) % self.p for x, y in zip(ca, cb)])

    def poly_inv(self, a: int) -> int:
        """Inverse via the extended Euclidean algorithm on polynomials."""
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        p = self.p
        if self.n == 1:
            return pow(a, p - 2, p)
        r0, r1 = list(self.modulus), _trim(list(self.coeffs(a)))
        s0, s1 = [], [1]
        while r1:
            # r0 = qt * r1 + rem
            qt, rem = [], list(r0)
            inv_lead = pow(r1[-1], p - 2, p)
            qt = [0] * max(len(r0) - len(r1) + 1, 0)
            while rem and len(rem) >= len(r1):
                c = rem[-1] * inv_lead % p
                shift = len(rem) - len(r1)
                qt[shift] = c
                for i, v in enumerate(r1):
                    rem[shift + i] = (rem[shift + i] - c * v) % p
                _trim(rem)
            r0, r1 = r1, rem
            s0, s1 = s1, _poly_sub(s0, _poly_mul(_trim(qt), s1, p), p)
        # r0 is a nonzero constant
        c = pow(r0[0], p - 2, p)
        s = [v * c % p for v in s0]
        s = _poly_mod(s, self.modulus, p)
        return self.code(s + [0] * (self.n - len(s)))

    # -- fast arithmetic on codes

    @cached_property
    def _tables(self) -> "_Tables":
        return _Tables(self)

    def add(self, a: int, b: int) -> int:
        return self._tables.add(a, b)

    def sub(self, a: int, b: int) -> int:
        return self._tables.sub(a, b)

    def mul(self, a: int, b: int) -> int:
        return self._tables.mul(a, b)

    def neg(self, a: int) -> int:
        return self._tables.neg(a)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return self._tables.inv(a)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def axpy_row(self, row: list[int], c: int, prow: list[int]) -> list[int]:
        """Return ``row - c * prow`` elementwise."""
        return self._tables.axpy(row, c, prow)

    def scale_row(self, c: int, row: list[int]) -> list[int]:
        return self._tables.scale(c, row)

    # numpy-vectorised versions (used by batched encode/decode)

    def np_add(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self._tables.np_add(a, b)

    def np_sub(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self._tables.np_sub(a, b)

    def np_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self._tables.np_mul(a, b)

    def element(self, value: int | Sequence[int]) -> "FieldElement":
        if isinstance(value, (int, np.integer)):
            v = int(value)
            if not 0 <= v < self.q:
                raise FieldError(f"element code {v} outside [0, {self.q})")
            return FieldElement(self, v)
        coeffs = list(value)
        if len(coeffs) != self.n or any(not 0 <= c < self.p for c in coeffs):
            raise FieldError(f"bad coefficient vector {coeffs} for {self!r}")
        return FieldElement(self, self.code(coeffs))

    def elements(self):
        return range(self.q)


class _Tables:
    """Lookup machinery for one field; everything derived from poly arithmetic."""

    def __init__(self, f: FieldSpec):
        self.f = f
        p, q = f.p, f.q
        self.prime = f.n == 1
        self.small = q <= TABLE_LIMIT
        if self.small:
            if self.prime:
                add = [[(a + b) % p for b in range(q)] for a in range(q)]
                mul = [[(a * b) % p for b in range(q)] for a in range(q)]
            else:
                add = [[f.poly_add(a, b) for b in range(q)] for a in range(q)]
                mul = [[0] * q for _ in range(q)]
                for a in range(1, q):
                    for b in range(a, q):
                        mul[a][b] = mul[b][a] = f.poly_mul(a, b)
            self.add_t = add
            self.mul_t = mul
            self.neg_t = [next(b for b in range(q) if add[a][b] == 0) for a in range(q)]
            self.sub_t = [[add[a][self.neg_t[b]] for b in range(q)] for a in range(q)]
            inv = [0] * q
            for a in range(1, q):
                row = mul[a]
                inv[a] = row.index(1)
            self.inv_t = inv
            self.np_add_t = np.array(add, dtype=np.int64)
            self.np_sub_t = np.array(self.sub_t, dtype=np.int64)
            self.np_mul_t = np.array(mul, dtype=np.int64)
        elif not self.prime:
            self._build_log_exp()

    def _build_log_exp(self):
        f = self.f
        q = f.q
        order = q - 1
        factors = [r for r in range(2, order + 1) if order % r == 0 and is_prime(r)]
        for g in range(2, q):
            if all(_slow_pow(f, g, order // r) != 1 for r in factors):
                break
        exp = [1] * (2 * order)
        for i in range(1, 2 * order):
            exp[i] = f.poly_mul(exp[i - 1], g)
        log = [0] * q
        for i in range(order):
            log[exp[i]] = i
        self.exp, self.log = exp, log
        self.np_exp, self.np_log = np.array(exp, dtype=np.int64), np.array(log, dtype=np.int64)
        self.pw = np.array([f.p**i for i in range(f.n)], dtype=np.int64)

    # scalar ops

    def add(self, a, b):
        if self.small:
            return self.add_t[a][b]
        if self.prime:
            return (a + b) % self.f.p
        return self.f.poly_add(a, b)

    def neg(self, a):
        if self.small:
            return self.neg_t[a]
        if self.prime:
            return (-a) % self.f.p
        return self.f.code([(-c) % self.f.p for c in self.f.coeffs(a)])

    def sub(self, a, b):
        if self.small:
            return self.sub_t[a][b]
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.small:
            return self.mul_t[a][b]
        if self.prime:
            return (a * b) % self.f.p
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def inv(self, a):
        if self.small:
            return self.inv_t[a]
        if self.prime:
            return pow(a, self.f.p - 2, self.f.p)
        return self.exp[(self.f.q - 1 - self.log[a]) % (self.f.q - 1)]

    def axpy(self, row, c, prow):
        if self.small:
            if self.prime:
                p = self.f.p
                return [(a - c * b) % p for a, b in zip(row, prow)]
            sub, mr = self.sub_t, self.mul_t[c]
            return [sub[a][mr[b]] for a, b in zip(row, prow)]
        return [self.sub(a, self.mul(c, b)) for a, b in zip(row, prow)]

    def scale(self, c, row):
        if self.small:
            mr = self.mul_t[c]
            return [mr[b] for b in row]
        return [self.mul(c, b) for b in row]

    # numpy ops

    def np_add(self, a, b):
        if self.small:
            return self.np_add_t[a, b]
        if self.prime:
            return (a + b) % self.f.p
        return self._np_digitwise(a, b, 1)

    def np_sub(self, a, b):
        if self.small:
            return self.np_sub_t[a, b]
        if self.prime:
            return (a - b) % self.f.p
        return self._np_digitwise(a, b, -1)

    def np_mul(self, a, b):
        if self.small:
            return self.np_mul_t[a, b]
        if self.prime:
            return (a * b) % self.f.p
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        out = self.np_exp[self.np_log[a] + self.np_log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def _np_digitwise(self, a, b, sign):
        p = self.f.p
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        out = np.zeros(a.shape, dtype=np.int64)
        for w in self.pw:
            out += (((a // w) % p + sign * ((b // w) % p)) % p) * w
        return out


def _slow_pow(f: FieldSpec, a: int, e: int) -> int:
    result = 1
    while e:
        if e & 1:
            result = f.poly_mul(result, a)
        a = f.poly_mul(a, a)
        e >>= 1
    return result


@lru_cache(maxsize=None)
def make_field(p: int, n: int = 1) -> FieldSpec:
    """GF(p^n) with the lexicographically smallest monic irreducible modulus."""
    if not isinstance(p, int) or not is_prime(p):
        raise FieldError(f"characteristic must be prime, got {p!r}")
    if p >= MAX_PRIME:
        raise FieldError(f"characteristic {p} exceeds the supported cap {MAX_PRIME}")
    if not isinstance(n, int) or n < 1:
        raise FieldError(f"extension degree must be a positive integer, got {n!r}")
    return FieldSpec(p, n, smallest_irreducible(p, n))


# --- elements ------------------------------------------------------------------


@dataclass(frozen=True)
class FieldElement:
    field: FieldSpec
    value: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.field.coeffs(self.value)

    def _check(self, other: "FieldElement") -> None:
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected FieldElement, got {type(other).__name__}")
        if other.field != self.field:
            raise FieldError(f"field mismatch: {self.field!r} vs {other.field!r}")

    def __add__(self, other):
        self._check(other)
        return FieldElement(self.field, self.field.add(self.value, other.value))

    def __sub__(self, other):
        self._check(other)
        return FieldElement(self.field, self.field.sub(self.value, other.value))

    def __mul__(self, other):
        self._check(other)
        return FieldElement(self.field, self.field.mul(self.value, other.value))

    def __neg__(self):
        return FieldElement(self.field, self.field.neg(self.value))

    def __truediv__(self, other):
        self._check(other)
        return self * other.inverse()

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field.pow(self.value, e))

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field.inv(self.value))

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"{self.field!r}({self.value})"


def arith(op: str, a: FieldElement, b: FieldElement | int | None = None) -> FieldElement:
    """Dispatch one of add/sub/mul/neg/inv/pow."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "inv":
        return a.inverse()
    if op == "pow":
        return a ** int(b)
    raise ValueError(f"unknown field operation {op!r}")


# --- subfield embedding and block packing -----------------------------------------


def _inverse_mod_p(mat: list[list[int]], p: int) -> list[list[int]]:
    n = len(mat)
    aug = [list(row) + [int(i == j) for j in range(n)] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] % p)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = pow(aug[col][col], p - 2, p)
        aug[col] = [v * inv % p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                c = aug[r][col]
                aug[r] = [(a - c * b) % p for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


class Embedding:
    """GF(q) inside GF(q^z), plus the block <-> extension element correspondence.

    The base generator maps to the smallest root (low-degree-first coefficient
    order) of the base modulus in the extension.  Blocks ``[a_0..a_{z-1}]`` of
    base symbols pack to ``sum_i lift(a_i) * y^i`` where ``y`` is the
    extension generator.
    """

    def __init__(self, base: FieldSpec, z: int):
        if z < 1:
            raise FieldError("extension degree z must be >= 1")
        self.base, self.z = base, z
        self.ext = make_field(base.p, base.n * z)
        ext, p = self.ext, base.p
        if base.n == 1:
            root = None
            image = list(range(base.q))
        else:
            root = self._smallest_root()
            powers = [1]
            for _ in range(base.n - 1):
                powers.append(ext.mul(powers[-1], root))
            image = []
            for a in range(base.q):
                acc = 0
                for c, pw in zip(base.coeffs(a), powers):
                    if c:
                        acc = ext.add(acc, ext.mul(c, pw))
                image.append(acc)
        self.root = root
        self.image = tuple(image)
        self._preimage = {v: k for k, v in enumerate(image)}
        y = p if ext.n > 1 else 0  # the code of the polynomial "x"
        self.ypow = [1]
        for _ in range(z - 1):
            self.ypow.append(ext.mul(self.ypow[-1], y))
        # GF(p)-matrix of the packing map, columns indexed by (block pos i, base coeff j)
        cols = []
        for i in range(z):
            for j in range(base.n):
                e = ext.mul(self.image[base.code([int(t == j) for t in range(base.n)])], self.ypow[i])
                cols.append(ext.coeffs(e))
        m = ext.n
        self._pack_mat = [[cols[c][r] for c in range(m)] for r in range(m)]
        self._unpack_mat = _inverse_mod_p(self._pack_mat, p)
        self.np_image = np.array(self.image, dtype=np.int64)
        self.np_ypow = np.array(self.ypow, dtype=np.int64)
        self._np_unpack = None

    def _smallest_root(self) -> int:
        ext, base = self.ext, self.base
        poly = list(base.modulus)
        for coeffs in itertools.product(range(ext.p), repeat=ext.n):
            r = ext.code(coeffs)
            acc = 0
            for c in reversed(poly):
                acc = ext.add(ext.mul(acc, r), c)
            if acc == 0:
                return r
        raise FieldError("base modulus has no root in the extension")  # pragma: no cover

    def lift(self, a: int) -> int:
        return self.image[a]

    def is_in_subfield(self, e: int) -> bool:
        return e in self._preimage

    def restrict(self, e: int) -> int:
        """Inverse of ``lift`` on the image of the base field."""
        try:
            return self._preimage[e]
        except KeyError:
            raise FieldError(f"{e} is not in the embedded subfield") from None

    def pack(self, block: Sequence[int]) -> int:
        if len(block) != self.z:
            raise FieldError(f"block length {len(block)} != z={self.z}")
        acc = 0
        for a, yp in zip(block, self.ypow):
            if a:
                acc = self.ext.add(acc, self.ext.mul(self.image[a], yp))
        return acc

    def unpack(self, e: int) -> tuple[int, ...]:
        p, base = self.base.p, self.base
        v = self.ext.coeffs(e)
        flat = [sum(row[k] * v[k] for k in range(len(v))) % p for row in self._unpack_mat]
        return tuple(base.code(flat[i * base.n : (i + 1) * base.n]) for i in range(self.z))

    def np_pack(self, blocks: np.ndarray) -> np.ndarray:
        """Pack the last axis (length z) of an integer array."""
        ext = self.ext
        acc = np.zeros(blocks.shape[:-1], dtype=np.int64)
        for i in range(self.z):
            acc = ext.np_add(acc, ext.np_mul(self.np_image[blocks[..., i]], self.np_ypow[i]))
        return acc

    def np_unpack(self, codes: np.ndarray) -> np.ndarray:
        if self._np_unpack is None:
            Q = self.ext.q
            if Q > 1 << 16:
                return np.array([[*self.unpack(int(c))] for c in codes.ravel()], dtype=np.int64).reshape(
                    codes.shape + (self.z,)
                )
            self._np_unpack = np.array([self.unpack(e) for e in range(Q)], dtype=np.int64)
        return self._np_unpack[codes]


@lru_cache(maxsize=None)
def embedding(base: FieldSpec, z: int) -> Embedding:
    return Embedding(base, z)


def lift_to_extension(e: FieldElement, z: int) -> FieldElement:
    emb = embedding(e.field, z)
    return FieldElement(emb.ext, emb.lift(e.value))


def pack_data_blocks(field: FieldSpec, symbols: Sequence[int], z: int) -> list[int]:
    """Group base-field symbols in blocks of z and map each to GF(q^z)."""
    if len(symbols) % z:
        raise FieldError(f"length {len(symbols)} not divisible by z={z}")
    emb = embedding(field, z)
    return [emb.pack(symbols[i : i + z]) for i in range(0, len(symbols), z)]


def unpack_data_blocks(field: FieldSpec, symbols: Sequence[int], z: int) -> list[int]:
    emb = embedding(field, z)
    out: list[int] = []
    for e in symbols:
        out.extend(emb.unpack(e))
    return out
