"""One test per acceptance criterion.  Each prints a PASS/FAIL line in the
"acceptance criteria" section of the pytest summary."""

import random
import time
from contextlib import contextmanager

from conftest import ACCEPTANCE_LINES
from oracles import cyclic_family, cyclic_module

from kgring.divisible import central_idempotents, full_decompose, hensel_root, reconstruct
from kgring.examples import (
    random_divisible,
    random_exact_free,
    random_valid_target,
    six_module,
    standard_module,
    witness_module,
)
from kgring.exactness import brute_force_exactness, is_exact
from kgring.intlinalg import GradedGroup, IntMatrix
from kgring.modules import KGModule, ModuleMap, ext1, free_module, hom, is_isomorphism, validate
from kgring.ring import KGRing, rewrite_system, verify_derived_relations
from kgring.splitting import bezout, random_extension, split_extension

import pytest


@contextmanager
def criterion(n, title):
    info = []
    start = time.perf_counter()
    try:
        yield info
    except BaseException as err:
        ACCEPTANCE_LINES.append(f"criterion {n}: FAIL  {title}  ({type(err).__name__}: {err})")
        raise
    took = time.perf_counter() - start
    extra = f"; {'; '.join(info)}" if info else ""
    ACCEPTANCE_LINES.append(f"criterion {n}: PASS  {title}  ({took:.1f} s{extra})")


def test_criterion_01_ring_self_test():
    with criterion(1, "derived relations and confluence") as info:
        t = time.perf_counter()
        for p in (2, 3, 5, 7):
            rep = verify_derived_relations(p)
            assert rep.all_passed, [name for name, ok in rep.entries if not ok]
        for p in (2, 3, 5):
            rs = rewrite_system(p)
            assert rs.is_confluent()
            info.append(f"p={p}: {len(rs.critical_pairs())} critical pairs")
        assert time.perf_counter() - t < 10


def test_criterion_02_presentation_identities():
    with criterion(2, "a01 a10 a01 = p a01 and a10 a01 a10 = p a10"):
        for p in (2, 3, 5):
            R = KGRing((p,))
            a01, a10 = R.arrow(0, 0, 1), R.arrow(0, 1, 0)
            assert a01 * a10 * a01 == p * a01
            assert a10 * a01 * a10 == p * a10


def _slot_diag(std, v, scalars):
    M = std.module
    total = IntMatrix.zeros(M.size(v), M.size(v), M.modulus)
    for name, (inj, proj) in std.slots[v].items():
        total = total + inj @ proj * scalars.get(name, 0)
    return total


def test_criterion_03_standard_modules():
    with criterion(3, "standard modules valid, exact, with the expected N-matrices"):
        for p in (2, 3, 5):
            std = standard_module(p, p, (1, 1, 1))
            M = std.module
            assert validate(M).ok
            assert is_exact(M).exact
            R = M.ring

            def N(name, v):
                return M.element_map(R.norm(0, R.named(0, name))).block((v,), (v,))

            assert N("t0", 0) == _slot_diag(std, (0,), {"X": p})
            assert N("t2", 2) == _slot_diag(std, (2,), {"SZ": p})
            assert N("s2", 2) == _slot_diag(std, (2,), {"Y": p})


def _divisible_family():
    rng = random.Random(2024)
    mods = [standard_module(p, p, (1, 1, 1)).module for p in (2, 3, 5)]
    mods.append(standard_module(3, 6, (2, 1, 2)).module)
    mods.append(six_module().module)
    mods += [random_divisible(rng) for _ in range(6)]
    return mods


def test_criterion_04_idempotents():
    with criterion(4, "E_X, E_Y, E_Z idempotent, orthogonal, summing to 1, central") as info:
        count = 0
        for M in _divisible_family():
            I = ModuleMap.identity(M)
            for p in M.primes:
                E = central_idempotents(M, p)
                es = (E.E_X, E.E_Y, E.E_Z)
                for e in es:
                    assert (e @ e) == e
                    assert e.is_linear()
                for i, e in enumerate(es):
                    for j, f in enumerate(es):
                        if i != j:
                            assert (e @ f).is_zero()
                assert (E.E_X + E.E_Y + E.E_Z) == I
                count += 1
        info.append(f"{count} module/prime pairs")


def test_criterion_05_splitting_pipeline():
    with criterion(5, "random extensions over K_6 split") as info:
        start = time.perf_counter()
        n = 0
        for seed in range(100):
            rng = random.Random(seed)
            Q = random_exact_free(rng, max_rank=6)
            sub = random_exact_free(rng, max_rank=6, max_terms=2)
            sigma = random_extension(sub, Q, seed=seed)
            res = split_extension(sigma)
            for up, p in zip(res.upgrades, (2, 3)):
                assert [c for _, c in up.trace] == [1, 1, p, p * p]
                assert [s for s, _ in up.trace] == ["solve", "diagonalize", "average", "intertwine"]
            assert (sigma.beta @ res.section) == ModuleMap.identity(Q)
            assert res.section.is_linear()
            n += 1
        took = time.perf_counter() - start
        info.append(f"{n} extensions")
        assert took < 60


def test_criterion_06_bezout():
    with criterion(6, "Bezout combination -2*4 + 1*9 = 1"):
        m, n = bezout(4, 9)
        assert (m, n) == (-2, 1) and m * 4 + n * 9 == 1
        rng = random.Random(99)
        sigma = random_extension(random_exact_free(rng), random_exact_free(rng), seed=99)
        res = split_extension(sigma)
        g = res.upgrades[0].gamma * m + res.upgrades[1].gamma * n
        assert g == res.section
        assert (sigma.beta @ g) == ModuleMap.identity(sigma.quotient) and g.is_linear()


def test_criterion_07_exactness_oracle():
    with criterion(7, "is_exact agrees with enumeration") as info:
        found, _ = cyclic_family(2, 8)
        exact = 0
        for orders, par, x in found:
            M = cyclic_module(2, orders, par, x)
            verdict = is_exact(M).exact
            assert verdict == brute_force_exactness(M)
            exact += verdict
        W = witness_module(2)
        assert validate(W).ok and not is_exact(W).exact
        for k in (1, 2, 3):
            n = 2 ** k
            G = GradedGroup(1, (0, (n,)), (0, ()))
            R = KGModule((2,), {(0,): G, (1,): G},
                         {(0, (0, 1), (1,)): IntMatrix([[1]]), (0, (1, 0), (0,)): IntMatrix([[2]])}, 1)
            assert validate(R).ok
            assert is_exact(R).exact == brute_force_exactness(R) == False  # noqa: E712
        info.append(f"{len(found)} valid modules, {exact} exact")


def test_criterion_08_ext_vanishing():
    with criterion(8, "Ext^1 vanishes on exact free and free modules") as info:
        rng = random.Random(8)
        pairs = 0
        for _ in range(20):
            Q = random_exact_free(rng, max_rank=4, max_terms=2)
            N = random_valid_target(rng, max_rank=4)
            assert ext1(Q, N).is_zero
            pairs += 1
        free = 0
        for primes, m in (((2,), 2), ((3,), 3), ((2, 3), 6)):
            targets = [random_valid_target(rng, max_rank=4) for _ in range(2)] if len(primes) == 2 \
                else [standard_module(primes[0], m).module]
            for v in KGModule(primes, {}, {}, m).vertices:
                for N in targets:
                    assert ext1(free_module(primes, v, m), N).is_zero
                    free += 1
        info.append(f"{pairs} exact free pairs, {free} free pairs")


def test_criterion_09_decomposition_round_trip():
    with criterion(9, "reconstruct(full_decompose(M)) isomorphic to M") as info:
        mods = [random_divisible(random.Random(s)) for s in range(8)] + [six_module().module]
        for M in mods:
            d = full_decompose(M)
            Q, iso = reconstruct(d, verify=False)
            assert is_isomorphism(iso)
        nine = full_decompose(six_module().module)
        assert len(nine.nonzero()) == 9
        info.append(f"{len(mods)} modules, nine-summand case included")


def test_criterion_10_hensel():
    with criterion(10, "hensel_root(7,3,2) = 30; q not dividing p-1 rejected"):
        u = hensel_root(7, 3, 2)
        assert u == 30 and pow(u, 3, 49) == 1 and u % 7 != 1
        with pytest.raises(ValueError):
            hensel_root(7, 5, 2)


def test_criterion_11_yoneda():
    with criterion(11, "hom(free_module(v), N) = N_v") as info:
        rng = random.Random(11)
        checks = 0
        for primes, m in (((2,), 2), ((3,), 3), ((2, 3), 6)):
            if len(primes) == 1:
                p = primes[0]
                targets = [standard_module(p, m).module, free_module(primes, (2,), m),
                           cyclic_module(p, (5, 5, 1), (0, 0, 0), (1, 0, p, 0, 0, 0))]
                targets[-1] = KGModule(primes, {v: GradedGroup(m, g.even, g.odd)
                                                for v, g in targets[-1].components.items()},
                                       {k: a.with_modulus(m) for k, a in targets[-1].actions.items()}, m)
            else:
                targets = [random_valid_target(rng, primes, m, max_rank=6) for _ in range(3)]
                targets.append(six_module().module)
            for N in targets:
                assert validate(N).ok
                for v in N.vertices:
                    assert hom(free_module(primes, v, m), N) == N.components[v]
                    checks += 1
        info.append(f"{checks} vertex/target pairs")
