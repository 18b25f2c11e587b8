"""Constructive splitting of extensions ``0 -> Q' -> Q'' -> Q -> 0`` of
𝔎_G-modules whose quotient ``Q`` is exact with free components.

A section that is linear over every prime but one (index j) is upgraded to a
𝔎_{p_j}-linear map in three steps (diagonalize, average, intertwine) at the
cost of multiplying its defect by p_j^2.  Two such upgrades for coprime
defects are combined by a Bezout identity.
"""

import random
from dataclasses import dataclass, field

from kgring.intlinalg import IntMatrix, LinearSolver
from kgring.modules import Extension, KGModule, ModuleMap, _moved, direct_sum_with_maps, map_system
from kgring.ring import ARROWS

__all__ = [
    "SectionCandidate",
    "SectionError",
    "SplitResult",
    "diagonalize",
    "average",
    "intertwine",
    "upgrade_section",
    "find_subring_section",
    "split_extension",
    "bezout",
    "perturb_section",
    "random_extension",
]


class SectionError(RuntimeError):
    """A section candidate failed a required check, or none exists."""


@dataclass
class SectionCandidate:
    """``gamma: Q -> Q''`` with ``beta ∘ gamma = defect · id``.

    ``linear_over`` holds the prime indices over which gamma has been
    verified to be linear (idempotents and arrows).
    """

    gamma: ModuleMap
    defect: int
    linear_over: frozenset
    trace: list = field(default_factory=list)


def _beta_defect(sigma, gamma):
    """The scalar c with beta ∘ gamma = c · id, or None."""
    comp = sigma.beta @ gamma
    Q = sigma.quotient
    for v in Q.vertices:
        if Q.size(v):
            break
    else:
        return 0
    for (w, u) in comp.blocks:
        if w != u:
            return None
    blk = comp.block(v, v)
    c = blk.data[0][0]
    if not isinstance(c, int):
        return None
    ident = ModuleMap.identity(Q)
    return c if (comp - ident * c).is_zero() else None


def _checked(sigma, gamma, expected_defect, linear_over, trace, step):
    c = _beta_defect(sigma, gamma)
    if c != expected_defect:
        raise SectionError(f"{step}: beta∘gamma is not {expected_defect}·id (got {c})")
    for j in linear_over:
        if not gamma.is_linear([j]):
            raise SectionError(f"{step}: result is not linear over prime index {j}")
    return SectionCandidate(gamma, c, frozenset(linear_over), trace + [(step, c)])


def _elem(M, x):
    return M.element_map(x)


def _power(f, n, M):
    out = ModuleMap.identity(M)
    for _ in range(n):
        out = f @ out
    return out


def _restrict_source(g, j, digit):
    return g.restrict_blocks(lambda w, v: v[j] == digit)


def diagonalize(sigma, cand, j):
    """Keep only the blocks of gamma that preserve the j-th digit."""
    if cand.defect != 1:
        raise SectionError("diagonalize expects an honest section (defect 1)")
    others = set(cand.linear_over) - {j}
    g = cand.gamma.restrict_blocks(lambda w, v: w[j] == v[j])
    out = _checked(sigma, g, 1, others, cand.trace, "diagonalize")
    if not g.respects_idempotents(j):
        raise SectionError("diagonalize: result still mixes idempotents")
    return out


def average(sigma, cand, j):
    """Average over the cyclic groups generated by t0 and s1 of prime j."""
    if not cand.gamma.respects_idempotents(j):
        raise SectionError("average expects a diagonal section")
    Q, Qm = sigma.quotient, sigma.middle
    R = Q.ring
    p = Q.primes[j]
    g = cand.gamma
    total = ModuleMap.zero(Q, Qm)
    for name, digit in (("t0", 0), ("s1", 1)):
        x = R.named(j, name)
        T, Tm = _elem(Q, x), _elem(Qm, x)
        gd = _restrict_source(g, j, digit)
        for i in range(p):
            total = total + _power(Tm, i, Qm) @ gd @ _power(T, p - i, Q)
    total = total + _restrict_source(g, j, 2) * p
    out = _checked(sigma, total, cand.defect * p, set(cand.linear_over) - {j}, cand.trace, "average")
    for name in ("t0", "s1"):
        x = R.named(j, name)
        for y in (x, R.norm(j, x)):
            if not (total @ _elem(Q, y) - _elem(Qm, y) @ total).is_zero():
                raise SectionError(f"average: result does not commute with {name}")
    return out


def intertwine(sigma, cand, j):
    """Make the averaged section commute with every arrow of prime j."""
    Q, Qm = sigma.quotient, sigma.middle
    R = Q.ring
    p = Q.primes[j]
    g = cand.gamma
    A = {ab: _elem(Q, R.arrow(j, *ab)) for ab in ARROWS}
    Am = {ab: _elem(Qm, R.arrow(j, *ab)) for ab in ARROWS}
    g0 = _restrict_source(g, j, 0)
    g1 = _restrict_source(g, j, 1)
    one1 = _elem(Qm, _digit_idempotent(R, j, 1))
    T = _elem(Q, R.named(j, "t0"))
    S = _elem(Q, R.named(j, "s1"))

    def weighted(X):
        out = ModuleMap.zero(Q, Q)
        for i in range(p - 1):
            out = out + _power(X, i, Q) * (p - i - 1)
        return out

    new0 = g0 * p
    new1 = Am[1, 0] @ g0 @ A[0, 1] + (one1 * p - Am[1, 0] @ Am[0, 1]) @ g1
    new2 = Am[2, 0] @ g0 @ weighted(T) @ A[0, 2] + Am[2, 1] @ g1 @ weighted(S) @ A[1, 2]
    gamma = new0 + new1 + new2
    return _checked(sigma, gamma, cand.defect * p, set(cand.linear_over) | {j}, cand.trace, "intertwine")


def _digit_idempotent(R, j, digit):
    out = R.zero()
    for v in R.vertices():
        if v[j] == digit:
            out = out + R.idempotent(v)
    return out


def upgrade_section(sigma, cand, j):
    """diagonalize, average and intertwine in turn (defect 1 -> p^2)."""
    return intertwine(sigma, average(sigma, diagonalize(sigma, cand, j), j), j)


def find_subring_section(sigma, j=None):
    """A section linear over every prime except index ``j`` (all primes when
    ``j`` is None), found by solving the linear system exactly.

    The section is sought vertexwise, so the system splits by the j-th
    digit.  Raises :class:`SectionError` if no section exists.
    """
    Q, Qm, beta = sigma.quotient, sigma.middle, sigma.beta
    k = Q.k
    others = [i for i in range(k) if i != j]
    if j is None:
        groups = [Q.vertices]
    else:
        groups = [[v for v in Q.vertices if v[j] == d] for d in range(3)]
    blocks = {}
    for verts in groups:
        unknowns, index, sysb = map_system(Q, Qm, 0, verts, others)
        # beta_v X_v = id_v
        for v in verts:
            Bv = beta.block(v, v)
            orders = Q.components[v].orders
            for r in range(Q.size(v)):
                for c in range(Q.size(v)):
                    coeffs = {}
                    for t in range(Qm.size(v)):
                        y = Bv.data[r][t]
                        if y:
                            i = index.get((v, t, c))
                            if i is not None:
                                coeffs[i] = coeffs.get(i, 0) + y
                    sysb.add(coeffs, orders[r], rhs=int(r == c))
        if not unknowns:
            continue
        A = sysb.matrix()
        sol = LinearSolver(A, tuple(sysb.orders)).solve(sysb.rhs) if sysb.rows else \
            IntMatrix.zeros(len(unknowns), 1, A.modulus)
        if sol is None:
            raise SectionError(
                "no section found over the subring; the quotient is not projective there "
                "(is it exact with free components?)")
        x = sol.column(0)
        for v in verts:
            mat = [[0] * Q.size(v) for _ in range(Qm.size(v))]
            for (u, r, c), i in index.items():
                if u == v:
                    mat[r][c] = x[i]
            blocks[(v, v)] = IntMatrix(mat, Qm.size(v), Q.size(v), A.modulus)
    gamma = ModuleMap(Q, Qm, blocks, 0, check=False)
    lin = others if j is not None else list(range(k))
    return _checked(sigma, gamma, 1, lin, [], "solve")


def perturb_section(sigma, cand, j, arrow):
    """``gamma + (gamma∘g - g''∘gamma)`` for an arrow g of prime j: still a
    section, still linear over the other primes, no longer diagonal."""
    Q, Qm = sigma.quotient, sigma.middle
    R = Q.ring
    g = R.arrow(j, *arrow)
    gamma = cand.gamma + (cand.gamma @ _elem(Q, g) - _elem(Qm, g) @ cand.gamma)
    return _checked(sigma, gamma, cand.defect, set(cand.linear_over) - {j}, cand.trace, "perturb")


def bezout(a, b):
    """``(m, n)`` with ``m·a + n·b = gcd(a, b)``, from the extended Euclid."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return x0, y0


@dataclass
class SplitResult:
    section: ModuleMap
    primes: tuple
    coefficients: tuple
    upgrades: list


def _require_exact_free(Q):
    from kgring.exactness import is_exact

    if not all(g.is_free for g in Q.components.values()):
        raise SectionError("quotient has torsion; it is not free over the coefficients")
    if not is_exact(Q).exact:
        raise SectionError("quotient is not exact")


def split_extension(sigma, check_quotient=True):
    """A fully 𝔎_G-linear section built from the two smallest primes."""
    Q = sigma.quotient
    if Q.k < 2:
        raise SectionError("split_extension needs at least two primes; "
                           "use find_subring_section for a single prime")
    if check_quotient:
        _require_exact_free(Q)
    ups = []
    for j in (0, 1):
        start = find_subring_section(sigma, j)
        ups.append(upgrade_section(sigma, start, j))
    p, q = Q.primes[0], Q.primes[1]
    m, n = bezout(p * p, q * q)
    if m * p * p + n * q * q != 1:
        raise SectionError("defects are not coprime")
    gamma = ups[0].gamma * m + ups[1].gamma * n
    final = _checked(sigma, gamma, 1, range(Q.k), [], "bezout")
    return SplitResult(final.gamma, (p, q), (m, n), ups)


def _random_graded(rng, tgt, src, scale):
    rows = [[rng.randint(-scale, scale) if tgt.parities[r] == src.parities[c] else 0
             for c in range(src.size)] for r in range(tgt.size)]
    return IntMatrix(rows, tgt.size, src.size, tgt.modulus)


def _random_unimodular(rng, g, steps=None):
    n = g.size
    rows = [[int(r == c) for c in range(n)] for r in range(n)]
    inv = [[int(r == c) for c in range(n)] for r in range(n)]
    par = g.parities
    for _ in range(steps if steps is not None else 3 * n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j or par[i] != par[j]:
            continue
        k = rng.choice((-2, -1, 1, 2))
        # rows_i += k rows_j ; inverse gets column op col_j -= k col_i
        rows[i] = [a + k * b for a, b in zip(rows[i], rows[j])]
        for r in range(n):
            inv[r][j] -= k * inv[r][i]
    return IntMatrix(rows, n, n, g.modulus), IntMatrix(inv, n, n, g.modulus)


def random_extension(sub, quotient, seed=0, scale=3, disguise=True):
    """A random extension ``0 -> sub -> E -> quotient -> 0``.

    The middle term is ``sub ⊕ quotient`` twisted by the coboundary of a
    random vertexwise map ``h: quotient -> sub``; when every component is
    free it is then hidden behind a random unimodular change of basis.
    """
    if not all(g.is_free for g in quotient.components.values()):
        raise ValueError("random_extension needs a quotient with free components")
    rng = random.Random(seed)
    S, (i1, i2), (p1, p2) = direct_sum_with_maps([sub, quotient])
    h = {v: _random_graded(rng, sub.components[v], quotient.components[v], scale) for v in S.vertices}
    acts = {}
    for key, A in S.actions.items():
        j, ab, v = key
        w = _moved(v, j, ab[0])
        c = sub.actions[key] @ h[v] - h[w] @ quotient.actions[key]
        acts[key] = A + i1.block(w, w) @ c @ p2.block(v, v)
    if disguise and all(g.is_free for g in S.components.values()):
        P = {v: _random_unimodular(rng, S.components[v]) for v in S.vertices}
    else:
        P = {v: (S.identity_matrix(v), S.identity_matrix(v)) for v in S.vertices}
    for key in acts:
        j, ab, v = key
        w = _moved(v, j, ab[0])
        acts[key] = P[w][0] @ acts[key] @ P[v][1]
    E = KGModule(S.primes, S.components, acts, S.modulus)
    iota = ModuleMap(sub, E, {(v, v): P[v][0] @ i1.block(v, v) for v in S.vertices}, 0)
    beta = ModuleMap(E, quotient, {(v, v): p2.block(v, v) @ P[v][1] for v in S.vertices}, 0)
    return Extension(iota, beta)
