import random

import pytest

from kgring.examples import random_exact_free, random_valid_target, standard_module, witness_module
from kgring.intlinalg import GradedGroup, IntMatrix
from kgring.modules import (
    KGModule,
    ModuleMap,
    ResolutionError,
    direct_sum,
    ext1,
    external_tensor,
    find_isomorphism,
    free_module,
    hom,
    inverse_map,
    is_isomorphism,
    restrict_to_prime,
    suspend,
    validate,
)
from kgring.exactness import is_exact

from oracles import brute_force_ext_order, brute_force_hom_order, cyclic_module


def _targets(primes, m):
    out = [KGModule(primes, {}, {}, m)]
    for v in KGModule(primes, {}, {}, m).vertices:
        out.append(free_module(primes, v, m))
        out.append(suspend(free_module(primes, v, m)))
    if len(primes) == 1:
        p = primes[0]
        out.append(standard_module(p, m).module if m % p == 0 else witness_module(p))
        out.append(cyclic_module(p, (5, 5, 1), (0, 0, 0), (1, 0, p, 0, 0, 0)))
    else:
        rng = random.Random(7)
        out += [random_valid_target(rng, primes, m) for _ in range(4)]
    return out


@pytest.mark.parametrize("primes,m", [((2,), 2), ((3,), 3), ((2,), 1), ((2, 3), 6)])
def test_yoneda(primes, m):
    for N in _targets(primes, m):
        if N.modulus != m:
            N = KGModule(N.primes, {v: GradedGroup(m, g.even, g.odd) for v, g in N.components.items()},
                         {k: a.with_modulus(m) for k, a in N.actions.items()}, m)
        for v in N.vertices:
            assert hom(free_module(primes, v, m), N) == N.components[v], (N, v)


def test_hom_of_rank_one_standard_module():
    M = standard_module(2, 2, (1, 0, 0)).module
    assert hom(M, M) == GradedGroup(2, (1, ()), (0, ()))


def test_hom_contains_identity_and_zero_target():
    M = standard_module(3).module
    from kgring.modules import HomSpace
    hs = HomSpace(M, M, 0)
    assert hs.coords(ModuleMap.identity(M)) is not None
    Z = KGModule((3,), {}, {}, 3)
    assert hom(M, Z).is_zero and hom(Z, M).is_zero


def test_hom_additive_on_direct_sums():
    A = standard_module(2, 2, (1, 0, 0)).module
    B = standard_module(2, 2, (0, 1, 1)).module
    N = standard_module(2, 2).module

    def rank(g):
        return g.even[0], g.odd[0]

    lhs = rank(hom(direct_sum(A, B), N))
    ra, rb = rank(hom(A, N)), rank(hom(B, N))
    assert lhs == (ra[0] + rb[0], ra[1] + rb[1])
    lhs = rank(hom(N, direct_sum(A, B)))
    ra, rb = rank(hom(N, A)), rank(hom(N, B))
    assert lhs == (ra[0] + rb[0], ra[1] + rb[1])


def _cyclic_pairs():
    """Exact cyclic 𝔎_2- and 𝔎_3-modules where Hom/Ext are small enough to count."""
    return [
        (cyclic_module(2, (7, 1, 7), (0, 0, 0), (0, 2, 0, 0, 1, 0)),
         cyclic_module(2, (5, 1, 5), (0, 0, 0), (0, 2, 0, 0, 1, 0))),
        (cyclic_module(2, (7, 1, 7), (0, 0, 0), (0, 2, 0, 0, 1, 0)),
         cyclic_module(2, (7, 1, 7), (0, 0, 0), (0, 2, 0, 0, 1, 0))),
        (cyclic_module(2, (3, 3, 1), (0, 0, 0), (1, 0, 2, 0, 0, 0)),
         cyclic_module(2, (3, 3, 1), (0, 0, 0), (1, 0, 2, 0, 0, 0))),
        (cyclic_module(2, (1, 5, 5), (0, 0, 1), (0, 0, 0, 2, 0, 1)),
         cyclic_module(2, (1, 5, 5), (0, 0, 1), (0, 0, 0, 2, 0, 1))),
    ]


@pytest.mark.parametrize("i", range(4))
def test_hom_matches_enumeration(i):
    M, N = _cyclic_pairs()[i]
    assert validate(M) and validate(N) and is_exact(M).exact
    h = hom(M, N)
    assert h.even[0] == 0 and h.odd[0] == 0
    even = 1
    for d in h.even[1]:
        even *= d
    odd = 1
    for d in h.odd[1]:
        odd *= d
    assert even == brute_force_hom_order(M, N, 0)
    assert odd == brute_force_hom_order(M, N, 1)


@pytest.mark.parametrize("i", range(4))
def test_ext1_matches_enumeration(i):
    M, N = _cyclic_pairs()[i]
    e = ext1(M, N)
    order = 1
    for d in e.even[1]:
        order *= d
    assert e.even[0] == 0
    assert order == brute_force_ext_order(M, N)


def test_nonzero_ext1_instance():
    """Self-extensions of Z/7 sitting on the loop 0 -> 2 -> 0 are non-trivial."""
    found = []
    for M, N in _cyclic_pairs():
        e = ext1(M, N)
        if not e.is_zero:
            found.append((e, brute_force_ext_order(M, N)))
    assert found
    for e, order in found:
        assert order > 1 and e.even[1] and e.even[1][-1] > 1


def test_coprime_ext_vanishes():
    M, N = _cyclic_pairs()[0]
    assert ext1(M, N).is_zero
    assert brute_force_ext_order(M, N) == 1


@pytest.mark.parametrize("primes,m", [((2,), 2), ((3,), 3), ((2, 3), 6)])
def test_ext1_of_free_module_vanishes(primes, m):
    rng = random.Random(1)
    for v in KGModule(primes, {}, {}, m).vertices:
        F = free_module(primes, v, m)
        targets = [standard_module(primes[0], m).module] if len(primes) == 1 else \
            [random_valid_target(rng, primes, m) for _ in range(2)]
        for N in targets:
            assert ext1(F, N).is_zero


def test_ext1_of_exact_free_module_vanishes():
    rng = random.Random(3)
    for _ in range(4):
        Q = random_exact_free(rng, max_rank=4, max_terms=2)
        N = random_valid_target(rng, max_rank=4)
        assert ext1(Q, N).is_zero


def test_ext1_refuses_non_exact_module():
    with pytest.raises(ResolutionError):
        ext1(witness_module(2), witness_module(2))


def test_validate_detects_corruption():
    M = standard_module(2, 2).module
    assert validate(M).ok
    acts = dict(M.actions)
    key = (0, (1, 0), (0,))
    bad = [list(r) for r in acts[key].data]
    bad[0][0] = 3
    acts[key] = IntMatrix(bad, acts[key].rows, acts[key].cols, 2)
    rep = validate(KGModule(M.primes, M.components, acts, 2, check=False))
    assert not rep.ok
    assert any("alpha01 alpha10" in name for name, _ in rep.failures)


def test_validate_fuzzing(rng):
    """Changing one non-zero arrow entry of a standard module breaks a relation."""
    for p in (2, 3):
        M = standard_module(p, p, (1, 1, 1)).module
        keys = [k for k, a in M.actions.items() if a.rows and a.cols]
        broken = 0
        trials = 0
        for key in keys:
            A = M.actions[key]
            for i in range(A.rows):
                for j in range(A.cols):
                    data = [list(r) for r in A.data]
                    data[i][j] += rng.choice((1, 2, -1))
                    acts = dict(M.actions)
                    acts[key] = IntMatrix(data, A.rows, A.cols, M.modulus)
                    trials += 1
                    if not validate(KGModule(M.primes, M.components, acts, M.modulus, check=False)).ok:
                        broken += 1
        assert trials and broken == trials


def test_zero_module_is_valid():
    assert validate(KGModule((2, 3), {}, {}, 6)).ok


def test_suspend_is_involution():
    M = standard_module(3).module
    assert suspend(suspend(M)) == M
    assert validate(suspend(M)).ok
    Z = KGModule((3,), {}, {}, 3)
    assert suspend(Z).is_zero()


def test_suspended_z_summand_matches_flipped_parities():
    M = standard_module(2, 2, (0, 0, 1)).module
    S = suspend(M)
    for v in M.vertices:
        g, h = M.components[v], S.components[v]
        assert (h.even, h.odd) == (g.odd, g.even)


def test_direct_sum_ranks_add():
    A = standard_module(2).module
    B = free_module((2,), (2,), 2)
    S = direct_sum(A, B)
    for v in S.vertices:
        assert S.size(v) == A.size(v) + B.size(v)
    Z = KGModule((2,), {}, {}, 2)
    assert direct_sum(Z, Z).is_zero()
    assert find_isomorphism(direct_sum(A, Z), A) is not None


def test_external_tensor_of_free_modules():
    F = external_tensor(free_module((2,), (0,), 6), free_module((3,), (1,), 6))
    G = free_module((2, 3), (0, 1), 6)
    assert validate(F).ok
    assert find_isomorphism(F, G) is not None


def test_restrict_to_prime_regroups():
    M = free_module((2, 3), (0, 0), 6)
    R = restrict_to_prime(M, 0)
    assert R.primes == (2,)
    for i in range(3):
        assert R.size((i,)) == sum(M.size(v) for v in M.vertices if v[0] == i)
    assert validate(R).ok
    one = free_module((2,), (1,), 2)
    assert restrict_to_prime(one, 0) == one


def test_find_isomorphism_and_inverse(rng):
    from kgring.examples import disguise
    M = standard_module(3, 3, (2, 1, 1)).module
    N, f = disguise(M, rng)
    assert is_isomorphism(f)
    g = inverse_map(f)
    assert (g @ f) == ModuleMap.identity(M)
    h = find_isomorphism(N, M)
    assert h is not None and is_isomorphism(h)


def test_max_rank_cap(monkeypatch):
    monkeypatch.setenv("KGRING_MAX_RANK", "2")
    with pytest.raises(ValueError):
        KGModule((2,), {(0,): GradedGroup.free(3, 0, 2)}, {}, 2)
