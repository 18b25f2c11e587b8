import random

import pytest

from kgring.examples import standard_module, witness_module
from kgring.exactness import brute_force_exactness, is_exact
from kgring.intlinalg import GradedGroup, IntMatrix
from kgring.modules import KGModule, direct_sum, free_module, suspend, validate

from oracles import cyclic_family, cyclic_module, fast_valid


@pytest.fixture(scope="module")
def family():
    found, rejected = cyclic_family(2, 8)
    return found, rejected


def test_family_size(family):
    found, rejected = family
    assert len(found) == 758
    assert len(found) + len(rejected) == 58112


def test_fast_validity_agrees_with_validate(family):
    found, rejected = family
    for orders, par, x in found:
        assert validate(cyclic_module(2, orders, par, x)).ok
    for orders, par, x in random.Random(0).sample(rejected, 600):
        assert not validate(cyclic_module(2, orders, par, x)).ok


def test_is_exact_agrees_with_enumeration(family):
    found, _ = family
    exact = 0
    for orders, par, x in found:
        M = cyclic_module(2, orders, par, x)
        verdict = is_exact(M).exact
        assert verdict == brute_force_exactness(M), (orders, par, x)
        exact += verdict
    assert exact == 88


def test_witness_is_valid_but_not_exact():
    W = witness_module(2)
    assert validate(W).ok
    rep = is_exact(W)
    assert not rep.exact
    assert any(f.node == 1 and f.orientation == "clockwise" for f in rep.failures())


def _reduction(p, n):
    Z = GradedGroup(1, (0, (n,)), (0, ()))
    return KGModule((p,), {(0,): Z, (1,): Z},
                    {(0, (0, 1), (1,)): IntMatrix([[1]]), (0, (1, 0), (0,)): IntMatrix([[p]])}, 1)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_witness_reductions_agree(k):
    M = _reduction(2, 2 ** k)
    assert validate(M).ok
    assert fast_valid(2, (2 ** k, 2 ** k, 1), (1, 0, 2, 0, 0, 0))
    assert not is_exact(M).exact
    assert not brute_force_exactness(M)


def test_witness_becomes_exact_when_p_is_inverted():
    assert is_exact(witness_module(2, 2)).exact
    assert is_exact(standard_module(2, 2, (1, 0, 0)).module).exact


def test_zero_module_is_exact():
    Z = KGModule((2,), {}, {}, 1)
    assert is_exact(Z).exact and brute_force_exactness(Z)


@pytest.mark.parametrize("primes", [(2,), (3,), (5,), (2, 3), (2, 5), (3, 5)])
def test_free_modules_are_exact(primes):
    for v in KGModule(primes, {}, {}, 1).vertices:
        assert is_exact(free_module(primes, v)).exact


def test_direct_sum_and_suspension(family):
    found, _ = family
    rng = random.Random(2)
    mods = [cyclic_module(2, o, p, x) for o, p, x in rng.sample(found, 40)]
    for M, N in zip(mods[::2], mods[1::2]):
        a, b = is_exact(M).exact, is_exact(N).exact
        assert is_exact(direct_sum(M, N)).exact == (a and b)
        assert is_exact(suspend(M)).exact == a


def test_report_lists_every_node():
    rep = is_exact(free_module((2, 3), (0, 1), 1))
    assert len(rep.checks) == 6 * 2
