import itertools
import random

import numpy as np
import pytest

from lcbc3.field import (
    FieldElement,
    FieldError,
    arith,
    embedding,
    is_irreducible,
    is_prime,
    lift_to_extension,
    make_field,
    pack_data_blocks,
    smallest_irreducible,
    unpack_data_blocks,
)


def test_prime_field_modulus_is_placeholder():
    F = make_field(2, 1)
    assert F.q == 2 and F.modulus == (0, 1)


def test_gf4_modulus_is_x2_x_1():
    assert make_field(2, 2).modulus == (1, 1, 1)


def test_gf9_modulus_matches_root_scan():
    # independent scan: x^2 + b x + c is irreducible over GF(3) iff it has no root
    irr = sorted((c, b, 1) for b in range(3) for c in range(3) if all((x * x + b * x + c) % 3 for x in range(3)))
    assert make_field(3, 2).modulus == irr[0] == (1, 0, 1)


def test_make_field_is_deterministic():
    assert make_field(5, 3).modulus == smallest_irreducible(5, 3)
    make_field.cache_clear()
    assert make_field(5, 3).modulus == smallest_irreducible(5, 3)


@pytest.mark.parametrize("p,n", [(4, 1), (1, 1), (0, 2), (2, 0), (9, 2)])
def test_bad_parameters_rejected(p, n):
    with pytest.raises(FieldError):
        make_field(p, n)


def test_is_prime_small():
    assert [x for x in range(30) if is_prime(x)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_gf4_x_times_x():
    F = make_field(2, 2)
    x = F.element([0, 1])
    assert (x * x).coeffs == (1, 1)


def test_additive_inverse(field):
    for v in field.elements():
        a = field.element(v)
        assert (a + (-a)).value == 0


def test_fermat_in_gf9():
    F = make_field(3, 2)
    rng = random.Random(0)
    for _ in range(20):
        a = F.element(rng.randrange(1, F.q))
        acc = F.element(1)
        for _ in range(F.q - 1):  # repeated multiplication, not pow
            acc = acc * a
        assert acc.value == 1


def test_inverse_of_zero_raises(field):
    with pytest.raises(ZeroDivisionError):
        field.inv(0)


def test_field_mismatch_raises():
    a = make_field(2, 2).element(1)
    b = make_field(3).element(1)
    with pytest.raises(FieldError):
        a + b


def test_arith_dispatch():
    F = make_field(3, 2)
    a, b = F.element(4), F.element(7)
    assert arith("add", a, b) == a + b
    assert arith("sub", a, b) == a - b
    assert arith("mul", a, b) == a * b
    assert arith("neg", a) == -a
    assert arith("inv", a) * a == F.element(1)
    assert arith("pow", a, 3) == a * a * a


@pytest.mark.parametrize("p,n", [(2, 1), (3, 1), (2, 2), (2, 3), (3, 2), (2, 4)])
def test_field_axioms_exhaustive(p, n):
    F = make_field(p, n)
    E = range(F.q)
    for a, b in itertools.product(E, E):
        assert F.add(a, b) == F.add(b, a)
        assert F.mul(a, b) == F.mul(b, a)
        # table arithmetic agrees with the polynomial reference path
        assert F.mul(a, b) == F.poly_mul(a, b)
        assert F.add(a, b) == F.poly_add(a, b)
    for a, b, c in itertools.product(E, E, E):
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
    for a in range(1, F.q):
        assert F.mul(a, F.inv(a)) == 1
        assert F.inv(a) == F.poly_inv(a)


@pytest.mark.parametrize("p,n", [(2, 5), (3, 3), (7, 2), (31, 1)])
def test_field_axioms_random(p, n):
    F = make_field(p, n)
    rng = random.Random(p * 100 + n)
    for _ in range(10_000):
        a, b, c = (rng.randrange(F.q) for _ in range(3))
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
        assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
        if a:
            assert F.mul(a, F.inv(a)) == 1


@pytest.mark.parametrize("p,n", [(2, 1), (2, 2), (3, 1), (2, 3), (3, 2), (2, 4)])
def test_frobenius_fixed_point(p, n):
    F = make_field(p, n)
    assert all(F.pow(a, F.q) == a for a in range(F.q))


def test_smallest_irreducible_is_irreducible_and_minimal():
    for p, n in [(2, 3), (2, 4), (3, 3), (5, 2)]:
        m = smallest_irreducible(p, n)
        assert is_irreducible(m, p)
        # every monic candidate that is smaller low-degree-first is reducible
        smaller = [tuple(low) + (1,) for low in itertools.product(range(p), repeat=n)]
        smaller = [c for c in smaller if c < m]
        assert not any(is_irreducible(c, p) for c in smaller)


def test_numpy_paths_match_scalar(field):
    rng = np.random.default_rng(1)
    a = rng.integers(0, field.q, 500)
    b = rng.integers(0, field.q, 500)
    assert list(field.np_add(a, b)) == [field.add(x, y) for x, y in zip(a, b)]
    assert list(field.np_sub(a, b)) == [field.sub(x, y) for x, y in zip(a, b)]
    assert list(field.np_mul(a, b)) == [field.mul(x, y) for x, y in zip(a, b)]


# --- embedding ---------------------------------------------------------------------


def test_prime_subfield_fixed():
    emb = embedding(make_field(2), 2)
    assert [emb.lift(0), emb.lift(1)] == [0, 1]


def test_gf2_matrices_unchanged_after_lift():
    emb = embedding(make_field(2), 2)
    assert all(emb.lift(a) == a for a in (0, 1))


@pytest.mark.parametrize("p,n,z", [(2, 2, 2), (2, 1, 3), (3, 1, 2), (2, 2, 3), (2, 3, 2), (2, 3, 3)])
def test_lift_is_injective_homomorphism(p, n, z):
    base = make_field(p, n)
    emb = embedding(base, z)
    ext = emb.ext
    assert emb.lift(1) == 1
    assert len(set(emb.image)) == base.q
    for a, b in itertools.product(range(base.q), repeat=2):
        assert emb.lift(base.add(a, b)) == ext.add(emb.lift(a), emb.lift(b))
        assert emb.lift(base.mul(a, b)) == ext.mul(emb.lift(a), emb.lift(b))


def test_lift_to_extension_element():
    F = make_field(2, 2)
    x = F.element(2)
    lx = lift_to_extension(x, 2)
    assert lx.field.q == 16
    # the lifted element satisfies the base modulus x^2 + x + 1
    assert (lx * lx + lx + lift_to_extension(F.element(1), 2)).value == 0


def test_embedding_root_is_smallest():
    emb = embedding(make_field(2, 2), 2)
    ext = emb.ext
    roots = [r for r in range(ext.q) if ext.add(ext.add(ext.mul(r, r), r), 1) == 0]
    assert emb.root == min(roots, key=ext.coeffs)


def test_pack_identity_for_z1(field):
    syms = list(range(field.q))
    assert pack_data_blocks(field, syms, 1) == syms


def test_pack_gf2_z2_is_a1_plus_a2_x():
    F = make_field(2)
    # (A1, A2) -> A1 + A2 x, code of x is 2
    assert pack_data_blocks(F, [1, 0, 0, 1, 1, 1], 2) == [1, 2, 3]


def test_pack_rejects_ragged_length():
    with pytest.raises(FieldError):
        pack_data_blocks(make_field(2), [1, 0, 1], 2)


@pytest.mark.parametrize("p,n,z", [(2, 1, 3), (3, 1, 2), (2, 2, 2), (5, 1, 2)])
def test_pack_round_trip(p, n, z):
    F = make_field(p, n)
    rng = random.Random(7)
    for _ in range(100):
        v = [rng.randrange(F.q) for _ in range(z * 4)]
        assert unpack_data_blocks(F, pack_data_blocks(F, v, z), z) == v
    emb = embedding(F, z)
    blocks = np.array([[rng.randrange(F.q) for _ in range(z)] for _ in range(100)])
    assert np.array_equal(emb.np_unpack(emb.np_pack(blocks)), blocks)


def test_pack_is_bijective():
    F = make_field(3)
    emb = embedding(F, 2)
    images = {emb.pack(b) for b in itertools.product(range(3), repeat=2)}
    assert images == set(range(9))


def test_field_element_repr_and_bool():
    F = make_field(3)
    assert not FieldElement(F, 0)
    assert int(FieldElement(F, 2)) == 2
