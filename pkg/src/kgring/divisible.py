"""Uniquely divisible 𝔎_G-modules: the central idempotents E_X, E_Y, E_Z,
the standard modules Q^(p)(A_X, A_Y, A_Z), their full decomposition over a
set of primes, and Hensel lifting of roots of unity for p-adic modules.

A *piece* is a :class:`CyclotomicModule`: a module over the primes that are
not being decomposed, together with commuting endomorphisms θ_q (one per
decomposed prime q whose index was Y or Z) satisfying Φ_q(θ_q) = 0.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from kgring.intlinalg import (
    GradedGroup,
    IntMatrix,
    Quotient,
    graded_direct_sum,
    reduce_into,
    suspension_matrix,
)
from kgring.modules import (
    KGModule,
    ModuleMap,
    find_isomorphism,
    is_isomorphism,
    suspend,
    validate,
)
from kgring.ring import ARROWS, is_prime

__all__ = [
    "CyclotomicModule",
    "StandardTriple",
    "StandardModule",
    "IdempotentTriple",
    "PrimeDecomposition",
    "FullDecomposition",
    "DivisibilityError",
    "is_uniquely_p_divisible",
    "divisibility_report",
    "central_idempotents",
    "build_standard_module",
    "decompose",
    "full_decompose",
    "reconstruct",
    "hensel_root",
    "adic_structure",
    "cyclotomic_companion",
    "cyclotomic_free",
    "trivial_piece",
]


class DivisibilityError(ValueError):
    """Multiplication by p is not invertible where it has to be."""


def _lcm(a, b):
    from math import gcd
    return a // gcd(a, b) * b


def _moved(v, j, a):
    return v[:j] + (a,) + v[j + 1:]


# ---------------------------------------------------------------------------
# pieces


@dataclass
class CyclotomicModule:
    """A module with extra commuting scalars θ_q, each a root of Φ_q."""

    module: KGModule
    theta: dict = field(default_factory=dict)

    @property
    def primes(self):
        return self.module.primes

    @property
    def modulus(self):
        return self.module.modulus

    def is_zero(self):
        return self.module.is_zero()

    def check(self):
        """List of violated invariants (empty when valid)."""
        issues = []
        M = self.module
        if not validate(M).ok:
            issues.append("underlying module is invalid")
        ident = ModuleMap.identity(M)
        for q, T in self.theta.items():
            acc = ModuleMap.zero(M, M)
            power = ident
            for _ in range(q):
                acc = acc + power
                power = T @ power
            if not acc.is_zero():
                issues.append(f"Phi_{q}(theta_{q}) != 0")
            if not (power - ident).is_zero():
                issues.append(f"theta_{q}^{q} != 1")
            if not T.is_linear():
                issues.append(f"theta_{q} does not commute with the ring action")
            if any(w != v for (w, v) in T.blocks):
                issues.append(f"theta_{q} is not vertexwise")
        for (q1, T1), (q2, T2) in itertools.combinations(self.theta.items(), 2):
            if not (T1 @ T2 - T2 @ T1).is_zero():
                issues.append(f"theta_{q1} and theta_{q2} do not commute")
        return issues

    def ring_name(self):
        ring = "Z" if self.modulus == 1 else f"Z[1/{self.modulus}]"
        if self.theta:
            ring += "[" + ", ".join(f"theta_{q}" for q in sorted(self.theta)) + "]"
        return ring

    def suspend(self):
        S = suspend(self.module)
        perm = {v: suspension_matrix(g) for v, g in self.module.components.items()}
        theta = {q: ModuleMap(S, S, {(w, v): perm[w] @ m @ perm[v].T for (w, v), m in T.blocks.items()}, 0, False)
                 for q, T in self.theta.items()}
        return CyclotomicModule(S, theta)


def trivial_piece(group, primes=()):
    """A graded group regarded as a piece with no ring action (primes=())."""
    if primes:
        raise ValueError("trivial_piece only covers the case without primes")
    return CyclotomicModule(KGModule((), {(): group}, {}, group.modulus))


def cyclotomic_companion(q):
    """Companion matrix of Φ_q = 1 + x + ... + x^{q-1} (size q-1)."""
    n = q - 1
    rows = [[0] * n for _ in range(n)]
    for i in range(n - 1):
        rows[i + 1][i] = 1
    for i in range(n):
        rows[i][n - 1] = -1
    return IntMatrix(rows, n, n)


def cyclotomic_free(q, rank, modulus, parity=0):
    """Z[1/m][θ_q]^rank as a piece without ring action."""
    n = (q - 1) * rank
    G = GradedGroup.free(n, 0, modulus) if parity == 0 else GradedGroup.free(0, n, modulus)
    M = KGModule((), {(): G}, {}, modulus)
    C = cyclotomic_companion(q).with_modulus(modulus)
    T = IntMatrix.block_diag([C] * rank) if rank else IntMatrix.zeros(0, 0, modulus)
    return CyclotomicModule(M, {q: ModuleMap(M, M, {((), ()): T}, 0, check=False)})


def _as_piece(x, modulus=None):
    if isinstance(x, CyclotomicModule):
        return x
    if isinstance(x, KGModule):
        return CyclotomicModule(x)
    if isinstance(x, GradedGroup):
        return trivial_piece(x)
    raise TypeError(f"cannot use {type(x).__name__} as a piece")


# ---------------------------------------------------------------------------
# divisibility and idempotents


def _p_invertible_on(G, p):
    if (G.even[0] or G.odd[0]) and G.modulus % p:
        return False
    return all(d % p for d in G.even[1] + G.odd[1])


def is_uniquely_p_divisible(M, p, component):
    """Is multiplication by p bijective on ``M_i^(p)`` (i = component)?"""
    if isinstance(M, CyclotomicModule):
        M = M.module
    j = M.primes.index(p)
    return all(_p_invertible_on(g, p) for v, g in M.components.items() if v[j] == component)


def divisibility_report(M, p):
    return {i: is_uniquely_p_divisible(M, p, i) for i in range(3)}


def _div_p(f, p):
    """(1/p)·f, using p^{-1} mod d on torsion rows."""
    N = f.target
    m = N.modulus
    out = {}
    for (w, v), mat in f.blocks.items():
        orders = N.components[w].orders
        rows = []
        for r, row in enumerate(mat.data):
            d = orders[r]
            if d == 0:
                if m % p:
                    raise DivisibilityError(f"p = {p} is not invertible in Z[1/{m}]")
                rows.append([Fraction(x, p) for x in row])
            else:
                if d % p == 0:
                    raise DivisibilityError(f"p = {p} is not invertible on Z/{d}")
                inv = pow(p, -1, d)
                rows.append([x * inv for x in row])
        out[(w, v)] = IntMatrix(rows, mat.rows, mat.cols, m)
    return ModuleMap(f.source, N, out, f.parity, check=False)


@dataclass
class IdempotentTriple:
    p: int
    E_X: ModuleMap
    E_Y: ModuleMap
    E_Z: ModuleMap

    def as_dict(self):
        return {"X": self.E_X, "Y": self.E_Y, "Z": self.E_Z}

    def verify(self):
        """Names of violated invariants (empty when all hold)."""
        issues = []
        E = self.as_dict()
        M = self.E_X.source
        for name, e in E.items():
            if not (e @ e - e).is_zero():
                issues.append(f"E_{name} is not idempotent")
            if not e.is_linear():
                issues.append(f"E_{name} does not commute with the ring action")
        for (a, e), (b, f) in itertools.combinations(E.items(), 2):
            if not (e @ f).is_zero() or not (f @ e).is_zero():
                issues.append(f"E_{a} E_{b} != 0")
        if not (self.E_X + self.E_Y + self.E_Z - ModuleMap.identity(M)).is_zero():
            issues.append("E_X + E_Y + E_Z != 1")
        return issues


def central_idempotents(M, p):
    """E_X, E_Y, E_Z for the prime p; every invariant is checked."""
    if isinstance(M, CyclotomicModule):
        M = M.module
    rep = divisibility_report(M, p)
    if not all(rep.values()):
        bad = [i for i, ok in rep.items() if not ok]
        raise DivisibilityError(f"multiplication by {p} is not invertible on components {bad}")
    j = M.primes.index(p)
    R = M.ring

    def N(name):
        return M.element_map(R.norm(j, R.named(j, name)))

    def one(d):
        x = R.zero()
        for v in R.vertices():
            if v[j] == d:
                x = x + R.idempotent(v)
        return M.element_map(x)

    Nt0, Ns1, Nt2, Ns2 = N("t0"), N("s1"), N("t2"), N("s2")
    EX = _div_p(Nt0 + Ns1, p)
    EY = one(0) - _div_p(Nt0, p) + _div_p(Ns2, p)
    EZ = one(1) - _div_p(Ns1, p) + _div_p(Nt2, p)
    trip = IdempotentTriple(p, EX, EY, EZ)
    issues = trip.verify()
    if issues:
        raise RuntimeError("central idempotents fail: " + "; ".join(issues))
    return trip


# ---------------------------------------------------------------------------
# standard modules


@dataclass
class StandardTriple:
    p: int
    X: object
    Y: object
    Z: object

    def pieces(self):
        return _as_piece(self.X), _as_piece(self.Y), _as_piece(self.Z)


@dataclass
class StandardModule:
    """The module together with its slot bookkeeping.

    ``slots[v][name] = (inj, proj)`` for the slot ``name`` in component
    ``v``: names are "X", "Y", "Z" and "SZ" (the suspended Z slot).
    """

    p: int
    pieces: tuple
    module: KGModule
    theta: dict
    slots: dict
    j: int

    @property
    def cyclotomic(self):
        return CyclotomicModule(self.module, self.theta)

    def slot_map(self, maps):
        """Map ``standard(pieces) -> standard(other pieces)`` induced by piece
        maps ``{"X": f, "Y": g, "Z": h}``; all targets must be assembled
        into the StandardModule given as ``maps["target"]``."""
        tgt = maps["target"]
        blocks = {}
        for v in self.module.vertices:
            total = IntMatrix.zeros(tgt.module.size(v), self.module.size(v), self.module.modulus)
            u = v[:self.j] + v[self.j + 1:]
            for name, (inj, proj) in self.slots[v].items():
                base = "Z" if name == "SZ" else name
                f = maps.get(base)
                if f is None:
                    continue
                mat = f.block(u, u)
                if name == "SZ":
                    G = f.source.components[u]
                    H = f.target.components[u]
                    mat = suspension_matrix(H) @ mat @ suspension_matrix(G).T
                t_inj, _ = tgt.slots[v][name]
                total = total + t_inj @ mat @ proj
            blocks[(v, v)] = total
        return ModuleMap(self.module, tgt.module, blocks, 0, check=False)


SLOTS = {0: ("X", "Y"), 1: ("X", "Z"), 2: ("Y", "SZ")}


def build_standard_module(triple, check=True):
    """Q^(p)(A_X, A_Y, A_Z).

    Components: Q_0 = A_X ⊕ A_Y, Q_1 = A_X ⊕ A_Z, Q_2 = A_Y ⊕ ΣA_Z.  Arrows:
    α01 = 1 and α10 = p on the X slots, α20 = 1 and α02 = 1 - θ on the Y
    slots, α21 = 1 (A_Z -> ΣA_Z) and α12 = 1 - θ on the Z slots.  Other primes
    and carried θ's act slotwise.
    """
    p = triple.p
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    X, Y, Z = triple.pieces()
    rest = X.primes
    m = X.modulus
    for piece in (Y, Z):
        if piece.primes != rest or piece.modulus != m:
            raise ValueError("pieces must live over the same primes and coefficients")
    if p in rest:
        raise ValueError(f"prime {p} already acts on the pieces")
    if m % p and not all(_p_invertible_on(g, p) for pc in (X, Y, Z) for g in pc.module.components.values()):
        raise ValueError(f"p = {p} must act invertibly on the pieces")
    for name, piece in (("Y", Y), ("Z", Z)):
        if not piece.is_zero() and p not in piece.theta:
            raise ValueError(f"piece {name} needs theta_{p}")
    carried = set()
    for piece in (X, Y, Z):
        carried |= set(q for q in piece.theta if q != p)
    for q in carried:
        for name, piece in (("X", X), ("Y", Y), ("Z", Z)):
            if not piece.is_zero() and q not in piece.theta:
                raise ValueError(f"piece {name} lacks the carried theta_{q}")
    primes = tuple(sorted(rest + (p,)))
    j = primes.index(p)
    SZ = Z.suspend()
    src = {"X": X, "Y": Y, "Z": Z, "SZ": SZ}

    def split(v):
        return v[:j] + v[j + 1:]

    verts = list(itertools.product(range(3), repeat=len(primes)))
    comps = {}
    slots = {}
    for v in verts:
        u = split(v)
        names = SLOTS[v[j]]
        G, inj, prj = graded_direct_sum([src[n].module.components[u] for n in names], m)
        comps[v] = G
        slots[v] = {n: (inj[i], prj[i]) for i, n in enumerate(names)}

    def theta_block(piece, q, u):
        T = piece.theta.get(q)
        if T is None:
            return IntMatrix.zeros(piece.module.size(u), piece.module.size(u), m)
        return T.block(u, u)

    acts = {}
    for v in verts:
        u = split(v)
        for i, q in enumerate(primes):
            for a, b in ARROWS:
                if v[i] != b:
                    continue
                w = _moved(v, i, a)
                total = IntMatrix.zeros(comps[w].size, comps[v].size, m)
                if i != j:
                    ii = rest.index(q)
                    for n, (inj_v, prj_v) in slots[v].items():
                        inj_w = slots[w][n][0]
                        A = src[n].module.actions[(ii, (a, b), u)]
                        total = total + inj_w @ A @ prj_v
                else:
                    def put(s_from, s_to, mat):
                        return slots[w][s_to][0] @ mat @ slots[v][s_from][1]

                    ident = lambda n: IntMatrix.identity(src[n].module.size(u), m)  # noqa: E731
                    if (a, b) == (0, 1):
                        total = put("X", "X", ident("X"))
                    elif (a, b) == (1, 0):
                        total = put("X", "X", ident("X") * p)
                    elif (a, b) == (2, 0):
                        total = put("Y", "Y", ident("Y"))
                    elif (a, b) == (0, 2):
                        total = put("Y", "Y", ident("Y") - theta_block(Y, p, u))
                    elif (a, b) == (2, 1):
                        total = put("Z", "SZ", suspension_matrix(Z.module.components[u]))
                    elif (a, b) == (1, 2):
                        desusp = suspension_matrix(Z.module.components[u]).T
                        total = put("SZ", "Z", (ident("Z") - theta_block(Z, p, u)) @ desusp)
                acts[(i, (a, b), v)] = total
    Q = KGModule(primes, comps, acts, m, check=check)
    theta = {}
    for q in carried:
        blocks = {}
        for v in verts:
            u = split(v)
            total = IntMatrix.zeros(comps[v].size, comps[v].size, m)
            for n, (inj, prj) in slots[v].items():
                total = total + inj @ theta_block(src[n], q, u) @ prj
            blocks[(v, v)] = total
        theta[q] = ModuleMap(Q, Q, blocks, 0, check=False)
    return StandardModule(p, (X, Y, Z), Q, theta, slots, j)


# ---------------------------------------------------------------------------
# decomposition


def _idempotent_image(e, G):
    """Image of an even idempotent endomorphism of a graded group.

    Returns ``(H, incl, retr)`` with ``retr @ incl == 1`` on H and
    ``incl @ retr == e`` on G.
    """
    m = G.modulus
    parts = []
    for par in (0, 1):
        idx = [i for i, x in enumerate(G.parities) if x == par]
        n = len(idx)
        sub = e.take(rows=idx, cols=idx)
        orders = [G.orders[i] for i in idx]
        rel = IntMatrix.identity(n, m) - sub
        diag = IntMatrix.diag([d for d in orders], m) if n else IntMatrix.zeros(0, 0, m)
        q = Quotient(IntMatrix.hstack([rel, diag], rows=n), n, m)
        parts.append((idx, q))
    (ie, qe), (io, qo) = parts
    re_, fe = qe.invariants()
    ro, fo = qo.invariants()
    H = GradedGroup(m, (re_, fe), (ro, fo))
    incl = [[0] * H.size for _ in range(G.size)]
    retr = [[0] * G.size for _ in range(H.size)]
    off = 0
    for idx, q in parts:
        gens = e.take(rows=idx, cols=idx) @ q.gens
        for c in range(q.gens.cols):
            for r, i in enumerate(idx):
                incl[i][off + c] = gens.data[r][c]
            for r, i in enumerate(idx):
                retr[off + c][i] = q.proj.data[c][r]
        off += q.gens.cols
    incl = reduce_into(IntMatrix(incl, G.size, H.size, m), G.orders)
    retr = reduce_into(IntMatrix(retr, H.size, G.size, m), H.orders)
    return H, incl, retr


@dataclass
class PrimeDecomposition:
    """Pieces of a module for one prime, with the isomorphism
    ``standard(X, Y, Z) -> M`` as ``phi``."""

    p: int
    source: CyclotomicModule
    idempotents: IdempotentTriple
    X: CyclotomicModule
    Y: CyclotomicModule
    Z: CyclotomicModule
    standard: StandardModule
    phi: ModuleMap


def decompose(M, p):
    """Split ``M`` into A_X = 1_0 E_X M, A_Y = 1_0 E_Y M, A_Z = 1_1 E_Z M."""
    piece = _as_piece(M)
    M = piece.module
    E = central_idempotents(M, p)
    j = M.primes.index(p)
    rest = M.primes[:j] + M.primes[j + 1:]
    m = M.modulus
    R = M.ring
    rverts = list(itertools.product(range(3), repeat=len(rest)))

    def full(u, d):
        return u[:j] + (d,) + u[j:]

    def extract(e, digit, theta_name):
        comps, incl, retr = {}, {}, {}
        for u in rverts:
            v = full(u, digit)
            H, i_, r_ = _idempotent_image(e.block(v, v), M.components[v])
            comps[u], incl[u], retr[u] = H, i_, r_
        acts = {}
        for (i, ab, v), A in M.actions.items():
            if i == j or v[j] != digit:
                continue
            u = v[:j] + v[j + 1:]
            w = _moved(v, i, ab[0])
            uw = w[:j] + w[j + 1:]
            ii = i if i < j else i - 1
            acts[(ii, ab, u)] = retr[uw] @ A @ incl[u]
        P = KGModule(rest, comps, acts, m, check=False)
        theta = {}
        for q, T in piece.theta.items():
            theta[q] = ModuleMap(P, P, {(u, u): retr[u] @ T.block(full(u, digit), full(u, digit)) @ incl[u]
                                        for u in rverts}, 0, check=False)
        if theta_name is not None:
            t = M.element_map(R.named(j, theta_name))
            theta[p] = ModuleMap(P, P, {(u, u): retr[u] @ t.block(full(u, digit), full(u, digit)) @ incl[u]
                                        for u in rverts}, 0, check=False)
        return CyclotomicModule(P, theta), incl

    X, iX = extract(E.E_X, 0, None)
    Y, iY = extract(E.E_Y, 0, "t0")
    Z, iZ = extract(E.E_Z, 1, "s1")
    std = build_standard_module(StandardTriple(p, X, Y, Z))
    # phi: X -> (iota at 0, (1/p) α10 iota at 1); Y -> (iota, α20 iota); Z -> (iota, α21 iota)
    a10 = M.element_map(R.arrow(j, 1, 0))
    a20 = M.element_map(R.arrow(j, 2, 0))
    a21 = M.element_map(R.arrow(j, 2, 1))
    blocks = {}
    for v in M.vertices:
        u = v[:j] + v[j + 1:]
        total = IntMatrix.zeros(M.size(v), std.module.size(v), m)
        for name, (_, proj) in std.slots[v].items():
            if v[j] == 0 and name == "X":
                img = iX[u]
            elif v[j] == 0 and name == "Y":
                img = iY[u]
            elif v[j] == 1 and name == "Z":
                img = iZ[u]
            elif v[j] == 1 and name == "X":
                v0 = full(u, 0)
                img = _div_rows(a10.block(v, v0) @ iX[u], p, M.components[v])
            elif v[j] == 2 and name == "Y":
                img = a20.block(v, full(u, 0)) @ iY[u]
            else:  # SZ at digit 2
                img = a21.block(v, full(u, 1)) @ iZ[u] @ suspension_matrix(Z.module.components[u]).T
            total = total + img @ proj
        blocks[(v, v)] = total
    phi = ModuleMap(std.module, M, blocks, 0, check=False)
    return PrimeDecomposition(p, piece, E, X, Y, Z, std, phi)


def _div_rows(mat, p, G):
    rows = []
    for r, row in enumerate(mat.data):
        d = G.orders[r]
        if d == 0:
            rows.append([Fraction(x, p) for x in row])
        else:
            inv = pow(p, -1, d)
            rows.append([x * inv for x in row])
    return reduce_into(IntMatrix(rows, mat.rows, mat.cols, G.modulus), G.orders)


@dataclass
class FullDecomposition:
    """Pieces ``A_I`` for ``I`` in {X,Y,Z}^|S| with their coefficient rings."""

    primes: tuple
    pieces: dict
    rings: dict
    tree: object
    original: KGModule

    def nonzero(self):
        return {I: P for I, P in self.pieces.items() if not P.is_zero()}


def full_decompose(M, primes=None):
    """Iterated :func:`decompose` over the primes in ``primes`` (ascending)."""
    piece = _as_piece(M)
    S = tuple(sorted(piece.primes if primes is None else primes))
    for p in S:
        if p not in piece.primes:
            raise ValueError(f"{p} does not act on the module")

    def rec(pc, todo):
        if not todo:
            return pc
        d = decompose(pc, todo[0])
        return (d, {n: rec(getattr(d, n), todo[1:]) for n in "XYZ"})

    tree = rec(piece, S)
    pieces = {}

    def collect(node, prefix):
        if isinstance(node, CyclotomicModule):
            pieces[prefix] = node
            return
        _, kids = node
        for n in "XYZ":
            collect(kids[n], prefix + (n,))

    collect(tree, ())
    rings = {I: P.ring_name() for I, P in pieces.items()}
    return FullDecomposition(S, pieces, rings, tree, piece.module)


def reconstruct(decomp, verify=True):
    """Rebuild the module from its pieces and return ``(module, iso)`` with
    ``iso`` an explicit isomorphism onto the original module."""

    def rec(node):
        if isinstance(node, CyclotomicModule):
            return node, ModuleMap.identity(node.module), None
        d, kids = node
        built = {n: rec(kids[n]) for n in "XYZ"}
        std = build_standard_module(StandardTriple(d.p, *(built[n][0] for n in "XYZ")))
        # std(built pieces) -> std(decomposed pieces) -> module
        inner = std.slot_map({"target": d.standard, **{n: built[n][1] for n in "XYZ"}})
        return std.cyclotomic, d.phi @ inner, std

    piece, iso, _ = rec(decomp.tree)
    Q = piece.module
    if verify and not is_isomorphism(iso):
        iso = find_isomorphism(Q, decomp.original)
        if iso is None:
            raise RuntimeError("no isomorphism between the reconstruction and the original")
    return Q, iso


# ---------------------------------------------------------------------------
# p-adic modules


def _generator_mod(p):
    phi = p - 1
    fac = [q for q in range(2, phi + 1) if phi % q == 0 and is_prime(q)]
    for g in range(2, p):
        if all(pow(g, phi // q, p) != 1 for q in fac):
            return g
    return 1  # p = 2


def hensel_root(p, q, k):
    """A primitive q-th root of unity modulo p^k (q | p - 1)."""
    if not (is_prime(p) and is_prime(q)) or p == q:
        raise ValueError("p and q must be distinct primes")
    if k < 1:
        raise ValueError("k must be positive")
    if (p - 1) % q:
        raise ValueError(f"{q} does not divide {p} - 1; no primitive {q}-th root of unity exists mod {p}")
    u = pow(_generator_mod(p), (p - 1) // q, p)
    mod = p
    for _ in range(1, k):
        mod *= p
        f = (pow(u, q, mod) - 1) % mod
        df = q * pow(u, q - 1, mod) % mod
        u = (u - f * pow(df, -1, mod)) % mod
    mod = p ** k
    if pow(u, q, mod) != 1 or u % p == 1:
        raise RuntimeError("Hensel lifting failed verification")
    return u


def adic_structure(M, q):
    """Make a p-power torsion 𝔎_p-module a module over Z[1/q, θ_q]."""
    if isinstance(M, CyclotomicModule):
        M = M.module
    if M.k != 1:
        raise ValueError("adic_structure expects a module over a single prime")
    p = M.primes[0]
    exp = 0
    for g in M.components.values():
        if g.even[0] or g.odd[0]:
            raise ValueError("module has free part; it is not p-power torsion")
        for d in g.even[1] + g.odd[1]:
            e = 0
            while d % p == 0:
                d //= p
                e += 1
            if d != 1:
                raise ValueError("module has torsion prime to p")
            exp = max(exp, e)
    if exp == 0:
        exp = 1
    u = hensel_root(p, q, exp)
    m = _lcm(M.modulus, q)
    comps = {v: GradedGroup(m, g.even, g.odd) for v, g in M.components.items()}
    acts = {key: mat.with_modulus(m) for key, mat in M.actions.items()}
    N = KGModule(M.primes, comps, acts, m)
    theta = ModuleMap(N, N, {(v, v): IntMatrix.scalar(N.size(v), u, m) for v in N.vertices}, 0, check=False)
    return CyclotomicModule(N, {q: theta})
