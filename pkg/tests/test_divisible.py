import itertools
import random

import pytest

from kgring.divisible import (
    DivisibilityError,
    StandardTriple,
    adic_structure,
    build_standard_module,
    central_idempotents,
    cyclotomic_free,
    decompose,
    full_decompose,
    hensel_root,
    is_uniquely_p_divisible,
    reconstruct,
    trivial_piece,
)
from kgring.examples import random_divisible, six_module, standard_module, witness_module
from kgring.exactness import is_exact
from kgring.intlinalg import GradedGroup, IntMatrix
from kgring.modules import KGModule, ModuleMap, is_isomorphism, validate


def _slot_diag(std, v, scalars):
    """Block-diagonal matrix on component v with the given scalar per slot."""
    M = std.module
    total = IntMatrix.zeros(M.size(v), M.size(v), M.modulus)
    for name, (inj, proj) in std.slots[v].items():
        total = total + inj @ proj * scalars.get(name, 0)
    return total


@pytest.mark.parametrize("p", [2, 3, 5])
def test_standard_module_norm_matrices(p):
    std = standard_module(p)
    M = std.module
    assert validate(M).ok and is_exact(M).exact
    R = M.ring

    def N(name, v):
        return M.element_map(R.norm(0, R.named(0, name))).block((v,), (v,))

    assert N("t0", 0) == _slot_diag(std, (0,), {"X": p})
    assert N("s1", 1) == _slot_diag(std, (1,), {"X": p})
    assert N("t2", 2) == _slot_diag(std, (2,), {"SZ": p})
    assert N("s2", 2) == _slot_diag(std, (2,), {"Y": p})
    assert N("t2", 2) + N("s2", 2) == IntMatrix.scalar(M.size((2,)), p, p)


def test_rank_one_x_summand():
    M = standard_module(3, 3, (1, 0, 0)).module
    assert M.actions[(0, (0, 1), (1,))] == IntMatrix([[1]], 1, 1, 3)
    assert M.actions[(0, (1, 0), (0,))] == IntMatrix([[3]], 1, 1, 3)
    assert M.size((2,)) == 0


def test_zero_triple_gives_zero_module():
    zero = trivial_piece(GradedGroup(2))
    assert build_standard_module(StandardTriple(2, zero, zero, zero)).module.is_zero()


def _divisible_modules():
    rng = random.Random(5)
    out = [standard_module(p).module for p in (2, 3, 5)]
    out.append(six_module().module)
    out += [random_divisible(rng) for _ in range(3)]
    return out


@pytest.mark.parametrize("i", range(7))
def test_idempotents(i):
    M = _divisible_modules()[i]
    for p in M.primes:
        E = central_idempotents(M, p)
        assert E.verify() == []
        I = ModuleMap.identity(M)
        assert (E.E_X + E.E_Y + E.E_Z) == I
        for e in (E.E_X, E.E_Y, E.E_Z):
            assert (e @ e) == e and e.is_linear()
        for e, f in itertools.permutations((E.E_X, E.E_Y, E.E_Z), 2):
            assert (e @ f).is_zero()


def test_e_x_projects_onto_x_slots():
    p = 3
    std = standard_module(p)
    E = central_idempotents(std.module, p)
    for v in std.module.vertices:
        assert E.E_X.block(v, v) == _slot_diag(std, v, {"X": 1})
        assert E.E_Y.block(v, v) == _slot_diag(std, v, {"Y": 1})
        assert E.E_Z.block(v, v) == _slot_diag(std, v, {"Z": 1, "SZ": 1})


def test_divisibility_checks():
    Zp = KGModule((3,), {(0,): GradedGroup.free(1, 0, 3)}, {}, 3)
    assert is_uniquely_p_divisible(Zp, 3, 0)
    Z3 = KGModule((3,), {(0,): GradedGroup(1, (0, (3,)), (0, ()))}, {}, 1)
    assert not is_uniquely_p_divisible(Z3, 3, 0)
    Z5 = KGModule((3,), {(0,): GradedGroup(1, (0, (5,)), (0, ()))}, {}, 1)
    assert is_uniquely_p_divisible(Z5, 3, 0)
    with pytest.raises(DivisibilityError):
        central_idempotents(witness_module(2), 2)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_decompose_round_trip(p):
    X = trivial_piece(GradedGroup.free(2, 0, p))
    Y = cyclotomic_free(p, 1, p)
    Z = cyclotomic_free(p, 2, p, 1)
    M = build_standard_module(StandardTriple(p, X, Y, Z)).module
    d = decompose(M, p)
    assert is_isomorphism(d.phi)
    for got, want in ((d.X, X), (d.Y, Y), (d.Z, Z)):
        assert got.module.components == want.module.components
        assert got.check() == []


def test_x_only_module_has_no_y_or_z():
    d = decompose(standard_module(2, 2, (1, 0, 0)).module, 2)
    assert not d.X.is_zero() and d.Y.is_zero() and d.Z.is_zero()


def test_z_piece_carries_a_root_of_unity():
    p = 5
    d = decompose(standard_module(p, p, (0, 0, 1)).module, p)
    theta = d.Z.theta[p]
    total = ModuleMap.zero(d.Z.module, d.Z.module)
    power = ModuleMap.identity(d.Z.module)
    for _ in range(p):
        total = total + power
        power = theta @ power
    assert total.is_zero()


def test_nine_pieces():
    d = full_decompose(six_module().module)
    assert len(d.pieces) == 9 and len(d.nonzero()) == 9
    assert d.rings[("X", "X")] == "Z[1/6]"
    assert d.rings[("X", "Y")] == "Z[1/6][theta_3]"
    assert d.rings[("Y", "X")] == "Z[1/6][theta_2]"
    assert d.rings[("Z", "Z")] == "Z[1/6][theta_2, theta_3]"


def test_single_prime_full_decompose_matches_decompose():
    M = standard_module(3).module
    d = full_decompose(M)
    one = decompose(M, 3)
    assert set(d.pieces) == {("X",), ("Y",), ("Z",)}
    for n in "XYZ":
        assert d.pieces[(n,)].module.components == getattr(one, n).module.components


def test_zero_module_decomposes_to_zero():
    d = full_decompose(KGModule((2, 3), {}, {}, 6))
    assert len(d.pieces) == 9 and not d.nonzero()


@pytest.mark.parametrize("seed", range(5))
def test_reconstruct_builds_its_own_isomorphism(seed):
    M = random_divisible(random.Random(seed))
    d = full_decompose(M)
    Q, iso = reconstruct(d, verify=False)
    assert iso.source == Q and iso.target == M
    assert is_isomorphism(iso)


def test_reconstruct_nine_summands():
    M = six_module().module
    Q, iso = reconstruct(full_decompose(M), verify=False)
    assert is_isomorphism(iso)


def test_hensel_values():
    assert hensel_root(7, 3, 1) in (2, 4)
    assert hensel_root(7, 3, 2) == 30
    assert pow(30, 3, 49) == 1 and 30 % 7 != 1
    for k in range(1, 5):
        assert hensel_root(5, 2, k) == 5 ** k - 1


@pytest.mark.parametrize("p,q,k", [(7, 3, 1), (7, 3, 2), (7, 3, 3), (13, 3, 2), (11, 5, 2), (31, 5, 2)])
def test_hensel_against_enumeration(p, q, k):
    n = p ** k
    roots = {u for u in range(n) if pow(u, q, n) == 1 and u % p != 1}
    assert hensel_root(p, q, k) in roots
    # every root mod p has exactly one lift
    assert len(roots) == q - 1


def test_hensel_rejects_bad_input():
    with pytest.raises(ValueError):
        hensel_root(7, 5, 1)
    with pytest.raises(ValueError):
        hensel_root(7, 5, 3)
    with pytest.raises(ValueError):
        hensel_root(7, 7, 1)


def _seven_torsion(d):
    G = GradedGroup(1, (0, (d,)), (0, ()))
    if d == 7:
        return KGModule((7,), {(0,): G}, {}, 1)
    return KGModule((7,), {(0,): G, (1,): G},
                    {(0, (0, 1), (1,)): IntMatrix([[1]]), (0, (1, 0), (0,)): IntMatrix([[7]])}, 1)


def test_adic_structure():
    for d, expect in ((7, (2, 4)), (49, (30,))):
        M = _seven_torsion(d)
        assert validate(M).ok
        C = adic_structure(M, 3)
        assert C.check() == []
        for v in M.vertices:
            if M.size(v):
                assert C.theta[3].block(v, v).data[0][0] in expect
    with pytest.raises(ValueError):
        adic_structure(_seven_torsion(7), 5)
