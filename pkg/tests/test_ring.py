import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgring.ring import (
    ARROWS,
    KGRing,
    build_presentation,
    degree,
    complete_rewrite_system,
    ring_basis,
    rewrite_system,
    verify_derived_relations,
)

PRIMES = (2, 3, 5, 7)


@pytest.mark.parametrize("p", PRIMES)
def test_completion_is_confluent_and_small(p):
    rs = rewrite_system(p)
    assert len(rs.rules) == 11
    assert rs.is_confluent()


@pytest.mark.parametrize("p", PRIMES)
def test_relations_reduce_to_zero(p):
    rs = rewrite_system(p)
    for name, poly in build_presentation(p).relations:
        assert rs.reduce(poly) == {}, name


@pytest.mark.parametrize("p", PRIMES)
def test_basis_ranks(p):
    basis = KGRing((p,)).basis()
    expect = {(0, 0): p, (1, 1): p, (2, 2): 2 * p - 2, (0, 1): 1, (1, 0): 1}
    for t, s in itertools.product(range(3), repeat=2):
        assert len(basis[((t,), (s,))]) == expect.get((t, s), p - 1)
    assert KGRing((p,)).rank() == 8 * p - 4


@pytest.mark.parametrize("p", PRIMES)
def test_derived_relations(p):
    rep = verify_derived_relations(p)
    assert len(rep.entries) == 12
    assert rep.all_passed, str(rep)


def test_non_prime_rejected():
    with pytest.raises(ValueError):
        build_presentation(6)
    with pytest.raises(ValueError):
        KGRing((3, 2))


def test_complete_accepts_presentation():
    rs = complete_rewrite_system(build_presentation(3))
    assert rs.is_confluent()
    assert sum(len(v) for v in ring_basis(3).values()) == KGRing((3,)).rank()


@pytest.mark.parametrize("p", (2, 3, 5))
def test_unit_and_idempotents(p):
    R = KGRing((p,))
    one = R.one()
    for ab in ARROWS:
        a = R.arrow(0, *ab)
        assert one * a == a and a * one == a
        assert R.idempotent((ab[0],)) * a == a
        assert R.idempotent((ab[1],)) * a * R.idempotent((ab[1],)) == R.zero()
    assert sum((R.idempotent((v,)) for v in range(3)), R.zero()) == one


def test_odd_arrows_have_degree_one():
    R = KGRing((3,))
    assert degree(R.arrow(0, 1, 2)) == 1
    assert degree(R.arrow(0, 2, 1) * R.arrow(0, 1, 2)) == 0
    assert degree(R.arrow(0, 0, 1)) == 0
    with pytest.raises(ValueError):
        degree(R.arrow(0, 1, 2) + R.arrow(0, 0, 2))


def test_tensor_factors_commute():
    R = KGRing((2, 3))
    for ab in ARROWS:
        for cd in ARROWS:
            x, y = R.arrow(0, *ab), R.arrow(1, *cd)
            assert x * y == y * x


def _words(p):
    R = KGRing((p,))
    letters = [R.arrow(0, *ab) for ab in ARROWS] + [R.idempotent((v,)) for v in range(3)]
    return R, st.lists(st.sampled_from(range(len(letters))), min_size=0, max_size=5).map(
        lambda idx: _product(R, [letters[i] for i in idx]))


def _product(R, xs):
    out = R.one()
    for x in xs:
        out = out * x
    return out


R3, WORDS3 = _words(3)


@settings(max_examples=150, deadline=None)
@given(WORDS3, WORDS3, WORDS3)
def test_multiplication_is_associative(x, y, z):
    assert (x * y) * z == x * (y * z)


@settings(max_examples=100, deadline=None)
@given(WORDS3, WORDS3, WORDS3)
def test_multiplication_distributes(x, y, z):
    assert x * (y + z) == x * y + x * z
    assert (x + y) * z == x * z + y * z
