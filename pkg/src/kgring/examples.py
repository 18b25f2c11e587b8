"""Ready-made modules: the standard modules, the non-exact witness, random
exact free modules and random uniquely divisible modules."""

from kgring.divisible import (
    CyclotomicModule,
    StandardTriple,
    build_standard_module,
    cyclotomic_free,
    trivial_piece,
)
from kgring.intlinalg import GradedGroup, IntMatrix
from kgring.modules import KGModule, ModuleMap, _moved, direct_sum, free_module
from kgring.splitting import _random_unimodular

__all__ = [
    "witness_module",
    "standard_module",
    "six_module",
    "with_theta",
    "disguise",
    "random_exact_free",
    "random_divisible",
    "random_valid_target",
]


def witness_module(p=2, modulus=1):
    """M_0 = M_1 = Z, α01 = 1, α10 = p: valid, exact only when p is a unit."""
    Z = GradedGroup.free(1, 0, modulus)
    return KGModule((p,), {(0,): Z, (1,): Z},
                    {(0, (0, 1), (1,)): IntMatrix([[1]]), (0, (1, 0), (0,)): IntMatrix([[p]])}, modulus)


def standard_module(p, modulus=None, ranks=(1, 1, 1)):
    """Q^(p) with free pieces of the given ranks over Z[1/m] and Z[1/m][θ_p]."""
    m = p if modulus is None else modulus
    rx, ry, rz = ranks
    return build_standard_module(StandardTriple(
        p, trivial_piece(GradedGroup.free(rx, 0, m)), cyclotomic_free(p, ry, m), cyclotomic_free(p, rz, m, 1)))


def with_theta(M, q, scalar):
    """Attach θ_q = scalar·id (scalar must be a root of Φ_q on M)."""
    T = ModuleMap(M, M, {(v, v): IntMatrix.scalar(M.size(v), scalar, M.modulus) for v in M.vertices}, 0, False)
    return CyclotomicModule(M, {q: T})


def six_module(modulus=6):
    """A 𝔎_6-module over Z[1/6] with all nine pieces non-zero."""
    Q3 = standard_module(3, modulus).module
    return build_standard_module(StandardTriple(
        2, CyclotomicModule(Q3), with_theta(Q3, 2, -1), with_theta(Q3, 2, -1)))


def disguise(M, rng):
    """``(M', f)`` with ``f: M -> M'`` an isomorphism given by random
    unimodular changes of basis (free components only)."""
    if not all(g.is_free for g in M.components.values()):
        return M, ModuleMap.identity(M)
    P = {v: _random_unimodular(rng, M.components[v]) for v in M.vertices}
    acts = {}
    for (j, ab, v), A in M.actions.items():
        w = _moved(v, j, ab[0])
        acts[(j, ab, v)] = P[w][0] @ A @ P[v][1]
    N = KGModule(M.primes, M.components, acts, M.modulus)
    return N, ModuleMap(M, N, {(v, v): P[v][0] for v in M.vertices}, 0, check=False)


def _exact_free_pieces(primes, m):
    """Small exact modules with free components."""
    out = []
    if len(primes) == 1:
        p = primes[0]
        out.append(standard_module(p, m, (1, 0, 0)).module)
        out.append(standard_module(p, m, (0, 1, 0)).module)
        out.append(standard_module(p, m, (0, 0, 1)).module)
        for v in range(3):
            out.append(free_module(primes, (v,), m))
        return out
    p, rest = primes[0], primes[1:]
    for v in [(a, b) for a in range(3) for b in range(2)]:
        out.append(free_module(primes, v, m))
    if p != 2:
        return out
    zero = CyclotomicModule(KGModule(rest, {}, {}, m))
    for A in _exact_free_pieces(rest, m)[:3]:
        for triple in ((CyclotomicModule(A), zero, zero),
                       (zero, with_theta(A, 2, -1), zero),
                       (zero, zero, with_theta(A, 2, -1))):
            out.append(build_standard_module(StandardTriple(2, *triple)).module)
    return out


_PIECE_CACHE = {}


def _pieces(primes, m):
    key = (tuple(primes), m)
    if key not in _PIECE_CACHE:
        _PIECE_CACHE[key] = _exact_free_pieces(tuple(primes), m)
    return _PIECE_CACHE[key]


def random_exact_free(rng, primes=(2, 3), modulus=6, max_rank=6, max_terms=3, disguised=True):
    """Random direct sum of small exact free modules, optionally disguised."""
    pieces = _pieces(primes, modulus)
    while True:
        n = rng.randint(1, max_terms)
        M = direct_sum(*[rng.choice(pieces) for _ in range(n)])
        if max(g.size for g in M.components.values()) <= max_rank:
            break
    return disguise(M, rng)[0] if disguised else M


def random_valid_target(rng, primes=(2, 3), modulus=6, max_rank=6):
    """Random valid module mixing exact free pieces with torsion copies
    of them (orders prime to the modulus)."""
    choices = []
    choices.extend(_pieces(primes, modulus))
    # torsion coprime to the modulus
    for d in (5, 7, 25):
        for M in _pieces(primes, modulus)[:4]:
            comps = {v: GradedGroup(modulus, (0, (d,) * g.even[0]), (0, (d,) * g.odd[0]))
                     for v, g in M.components.items()}
            choices.append(KGModule(M.primes, comps, M.actions, modulus))
    while True:
        n = rng.randint(1, 2)
        M = direct_sum(*[rng.choice(choices) for _ in range(n)])
        if max(g.size for g in M.components.values()) <= max_rank:
            return M


def random_divisible(rng, modulus=6, max_rank=3):
    """Random uniquely divisible 𝔎_6-module as a disguised standard module
    built from random free and torsion pieces."""
    def piece(q_thetas):
        kind = rng.choice(("free", "free", "torsion"))
        r = rng.randint(0, max_rank)
        if kind == "free":
            base = cyclotomic_free(3, r, modulus) if 3 in q_thetas else trivial_piece(GradedGroup.free(r, 0, modulus))
        else:
            d = rng.choice((7, 13))
            u = 2 if d == 7 else 3  # primitive cube roots of unity mod 7 and mod 13
            G = GradedGroup(modulus, (0, (d,) * r), (0, ()))
            base = trivial_piece(G)
            if 3 in q_thetas:
                base = CyclotomicModule(base.module, {3: ModuleMap(base.module, base.module, {
                    ((), ()): IntMatrix.scalar(G.size, u, modulus)}, 0, False)})
        return base

    def inner(theta2):
        X, Y, Z = piece(()), piece((3,)), piece((3,))
        Q = build_standard_module(StandardTriple(3, X, Y, Z)).module
        return with_theta(Q, 2, -1) if theta2 else CyclotomicModule(Q)

    Q = build_standard_module(StandardTriple(2, inner(False), inner(True), inner(True))).module
    return disguise(Q, rng)[0]

