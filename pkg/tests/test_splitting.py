import random

import pytest

from kgring.divisible import CyclotomicModule, StandardTriple, build_standard_module
from kgring.examples import random_exact_free, standard_module, witness_module
from kgring.modules import (
    Extension,
    KGModule,
    ModuleMap,
    external_tensor,
    free_cover,
    free_module,
    _kernel_module,
)
from kgring.splitting import (
    SectionError,
    average,
    bezout,
    diagonalize,
    find_subring_section,
    intertwine,
    perturb_section,
    random_extension,
    split_extension,
    upgrade_section,
)


def _is_section(sigma, gamma):
    return (sigma.beta @ gamma) == ModuleMap.identity(sigma.quotient)


def _random_sigma(seed, max_rank=6):
    rng = random.Random(seed)
    Q = random_exact_free(rng, max_rank=max_rank)
    sub = random_exact_free(rng, max_rank=max_rank, max_terms=2)
    return random_extension(sub, Q, seed=seed)


@pytest.mark.parametrize("seed", range(8))
def test_random_extensions_split(seed):
    sigma = _random_sigma(seed)
    sigma.check()
    res = split_extension(sigma)
    assert _is_section(sigma, res.section)
    assert res.section.is_linear()
    assert res.coefficients == (-2, 1)


def test_defect_trace():
    sigma = _random_sigma(100)
    for j, p in enumerate((2, 3)):
        up = upgrade_section(sigma, find_subring_section(sigma, j), j)
        assert up.trace == [("solve", 1), ("diagonalize", 1), ("average", p), ("intertwine", p * p)]
        assert up.gamma.is_linear()
        assert (sigma.beta @ up.gamma) == ModuleMap.identity(sigma.quotient) * (p * p)


def test_intertwined_section_commutes_with_alpha10():
    sigma = _random_sigma(5)
    Q, Qm = sigma.quotient, sigma.middle
    up = upgrade_section(sigma, find_subring_section(sigma, 0), 0)
    a10 = Q.ring.arrow(0, 1, 0)
    lhs = up.gamma @ Q.element_map(a10)
    rhs = Qm.element_map(a10) @ up.gamma
    assert (lhs - rhs).is_zero()


def test_perturbed_section_is_upgraded():
    sigma = _random_sigma(11)
    start = find_subring_section(sigma, 0)
    bumped = perturb_section(sigma, start, 0, (0, 1))
    assert not bumped.gamma.respects_idempotents(0)
    assert _is_section(sigma, bumped.gamma)
    diag = diagonalize(sigma, bumped, 0)
    assert diag.gamma.respects_idempotents(0)
    assert _is_section(sigma, diag.gamma)
    final = intertwine(sigma, average(sigma, diag, 0), 0)
    assert final.defect == 4 and final.gamma.is_linear()


def test_diagonal_section_is_unchanged_by_diagonalize():
    sigma = _random_sigma(3)
    start = find_subring_section(sigma, 0)
    diag = diagonalize(sigma, start, 0)
    again = diagonalize(sigma, diag, 0)
    assert again.gamma == diag.gamma


def test_average_is_p_times_gamma_when_loops_act_trivially():
    # Q^(2)(A, 0, 0) has t0 = 1 and s1 = 1 and nothing at digit 2; so has
    # any extension of two such modules
    A = standard_module(3, 6, (1, 0, 0)).module
    zero = CyclotomicModule(KGModule((3,), {}, {}, 6))
    Q = build_standard_module(StandardTriple(2, CyclotomicModule(A), zero, zero)).module
    sigma = random_extension(Q, Q, seed=4)
    diag = diagonalize(sigma, find_subring_section(sigma, 0), 0)
    avg = average(sigma, diag, 0)
    assert avg.gamma == diag.gamma * 2


def test_bezout():
    assert bezout(4, 9) == (-2, 1)
    assert -2 * 4 + 1 * 9 == 1
    for a, b in [(4, 25), (9, 25), (25, 49)]:
        m, n = bezout(a, b)
        assert m * a + n * b == 1


def test_bezout_combination_verifies():
    sigma = _random_sigma(21)
    res = split_extension(sigma)
    g2, g3 = res.upgrades[0].gamma, res.upgrades[1].gamma
    combined = g2 * -2 + g3 * 1
    assert combined == res.section
    assert _is_section(sigma, combined) and combined.is_linear()


def test_already_split_extension():
    rng = random.Random(8)
    Q = random_exact_free(rng, max_rank=4)
    sub = free_module((2, 3), (2, 2), 6)
    sigma = random_extension(sub, Q, seed=1, scale=0, disguise=False)
    assert _is_section(sigma, split_extension(sigma).section)


def test_single_prime_is_refused():
    sigma = random_extension(free_module((2,), (2,), 2), standard_module(2).module, seed=3)
    with pytest.raises(SectionError, match="at least two primes"):
        split_extension(sigma)
    # the direct solver handles the single-prime case
    cand = find_subring_section(sigma, None)
    assert _is_section(sigma, cand.gamma) and cand.gamma.is_linear()


def test_direct_solve_agrees_with_pipeline():
    sigma = _random_sigma(31, max_rank=4)
    direct = find_subring_section(sigma, None)
    piped = split_extension(sigma).section
    for g in (direct.gamma, piped):
        assert _is_section(sigma, g) and g.is_linear()
    # two sections differ by a map into the sub-module
    diff = sigma.beta @ (direct.gamma - piped)
    assert diff.is_zero()


def test_non_exact_quotient_has_no_section():
    M = external_tensor(witness_module(2), witness_module(3))
    cov = free_cover(M, [((1, 1), 0)])
    K, inc = _kernel_module(cov)
    sigma = Extension(inc, cov.projection)
    sigma.check()
    with pytest.raises(SectionError):
        split_extension(sigma)
    with pytest.raises(SectionError):
        find_subring_section(sigma, None)


def test_torsion_quotient_refused_but_solvable():
    from kgring.intlinalg import GradedGroup
    from kgring.modules import direct_sum_with_maps, validate
    F = free_module((2, 3), (0, 0), 6)
    T = KGModule(F.primes, {v: GradedGroup(6, (0, (5,) * g.even[0]), (0, (5,) * g.odd[0]))
                            for v, g in F.components.items()}, F.actions, 6)
    assert validate(T).ok
    S, (i1, i2), (p1, p2) = direct_sum_with_maps([F, T])
    tau = Extension(i1, p2)
    tau.check()
    with pytest.raises(SectionError, match="torsion"):
        split_extension(tau)
    gamma = find_subring_section(tau, None).gamma
    assert _is_section(tau, gamma) and gamma.is_linear()
