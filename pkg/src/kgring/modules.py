"""Finitely generated Z/2-graded modules over 𝔎_G with coefficients in Z[1/m].

A :class:`KGModule` has one :class:`GradedGroup` per vertex ``v`` in
{0,1,2}^k and one matrix per (prime index j, arrow α_ab, source vertex v)
with ``v[j] == b``; the matrix maps the coordinates of ``M_v`` to those of
``M_w`` where ``w`` is ``v`` with the j-th digit replaced by ``a``.  Matrices
act on full coordinates (even generators first), so odd arrows are
block-antidiagonal.

Odd maps and odd arrows are handled without Koszul signs throughout.
"""

import itertools
import os
from dataclasses import dataclass, field

from kgring.intlinalg import (
    GradedGroup,
    IntMatrix,
    LinearSolver,
    Quotient,
    cyclic_sum,
    graded_direct_sum,
    inverse,
    is_zero_into,
    kernel_mod,
    reduce_into,
    suspension_matrix,
)
from kgring.ring import ARROWS, KGRing, build_presentation, word_degree

__all__ = [
    "KGModule",
    "ModuleMap",
    "Extension",
    "ValidationReport",
    "HomSpace",
    "ExtResult",
    "validate",
    "restrict_to_prime",
    "suspend",
    "direct_sum",
    "direct_sum_with_maps",
    "free_module",
    "free_cover",
    "hom",
    "hom_space",
    "ext1",
    "ext1_details",
    "is_isomorphism",
    "find_isomorphism",
    "max_rank",
    "map_system",
    "external_tensor",
]


def max_rank():
    """Cap on component sizes (``KGRING_MAX_RANK``, default 512)."""
    return int(os.environ.get("KGRING_MAX_RANK", "512"))


def _vertices(k):
    return list(itertools.product(range(3), repeat=k))


def _moved(v, j, a):
    return v[:j] + (a,) + v[j + 1:]


def _parity_ok(mat, src, tgt, parity):
    """True if ``mat`` (tgt x src coordinates) has the block shape of a map
    of the given parity."""
    tp = tgt.parities
    sp = src.parities
    for r, row in enumerate(mat.data):
        for c, x in enumerate(row):
            if x and (tp[r] ^ sp[c]) != parity:
                return False
    return True


class KGModule:
    """A Z/2-graded 𝔎_G-module given by components and arrow matrices."""

    def __init__(self, primes, components, actions=None, modulus=1, check=True):
        self.ring = KGRing(tuple(primes))
        self.primes = self.ring.primes
        self.modulus = modulus
        k = len(self.primes)
        self.vertices = _vertices(k)
        comps = {}
        cap = max_rank()
        for v in self.vertices:
            g = components.get(v, GradedGroup(modulus))
            if g.modulus != modulus:
                raise ValueError(f"component {v} has modulus {g.modulus}, expected {modulus}")
            if g.size > cap:
                raise ValueError(f"component {v} has {g.size} generators, above KGRING_MAX_RANK={cap}")
            comps[v] = g
        extra = set(components) - set(self.vertices)
        if extra:
            raise ValueError(f"unknown vertices {sorted(extra)}")
        self.components = comps
        acts = {}
        actions = actions or {}
        for key in actions:
            j, ab, v = key
            if not (0 <= j < k) or ab not in ARROWS or v not in comps or v[j] != ab[1]:
                raise ValueError(f"bad action key {key}")
        for j in range(k):
            for a, b in ARROWS:
                parity = 1 if (a, b) in ((1, 2), (2, 1)) else 0
                for v in self.vertices:
                    if v[j] != b:
                        continue
                    w = _moved(v, j, a)
                    src, tgt = comps[v], comps[w]
                    mat = actions.get((j, (a, b), v))
                    if mat is None:
                        mat = IntMatrix.zeros(tgt.size, src.size, modulus)
                    if mat.shape != (tgt.size, src.size):
                        raise ValueError(f"action {key_name(j, (a, b), v)} has shape {mat.shape}, "
                                         f"expected {(tgt.size, src.size)}")
                    if mat.modulus != modulus:
                        mat = mat.with_modulus(modulus)
                    if check and not _parity_ok(mat, src, tgt, parity):
                        raise ValueError(f"action {key_name(j, (a, b), v)} does not respect parity")
                    acts[(j, (a, b), v)] = reduce_into(mat, tgt.orders)
        self.actions = acts
        self._mono_cache = {}

    # --------------------------------------------------------------------

    @property
    def k(self):
        return len(self.primes)

    def action(self, j, a, b, v):
        return self.actions[(j, (a, b), v)]

    def size(self, v):
        return self.components[v].size

    def total_size(self):
        return sum(g.size for g in self.components.values())

    def is_zero(self):
        return all(g.is_zero for g in self.components.values())

    def identity_matrix(self, v):
        return IntMatrix.identity(self.size(v), self.modulus)

    def monomial_matrix(self, key):
        """Matrix of a tensor monomial (one per-prime monomial per factor)."""
        out = self._mono_cache.get(key)
        if out is not None:
            return out
        v = tuple(m[1] for m in key)
        mat = self.identity_matrix(v)
        for j, (_, _, word) in enumerate(key):
            for letter in reversed(word):
                a, b = ARROWS[letter]
                mat = self.actions[(j, (a, b), v)] @ mat
                v = _moved(v, j, a)
        mat = reduce_into(mat, self.components[v].orders)
        self._mono_cache[key] = mat
        return mat

    def element_blocks(self, x):
        """Action of a ring element as blocks ``{(w, v): matrix}``."""
        out = {}
        for key, c in x.terms.items():
            v = tuple(m[1] for m in key)
            w = tuple(m[0] for m in key)
            mat = self.monomial_matrix(key) * c
            out[(w, v)] = out[(w, v)] + mat if (w, v) in out else mat
        return {wv: reduce_into(m, self.components[wv[0]].orders) for wv, m in out.items()}

    def element_map(self, x, parity=0):
        """Ring element as a :class:`ModuleMap` ``M -> M`` (only meaningful as
        a module map when ``x`` is central)."""
        return ModuleMap(self, self, self.element_blocks(x), parity, check=False)

    def __eq__(self, other):
        if not isinstance(other, KGModule):
            return NotImplemented
        return (self.primes == other.primes and self.modulus == other.modulus
                and self.components == other.components and self.actions == other.actions)

    def __hash__(self):
        return hash((self.primes, self.modulus, tuple(self.components.items())))

    def __repr__(self):
        comps = ", ".join(f"{''.join(map(str, v))}: {g}" for v, g in self.components.items() if not g.is_zero)
        return f"KGModule(primes={self.primes}, m={self.modulus}, {{{comps}}})"


def key_name(j, ab, v, primes=None):
    p = f"p={primes[j]}" if primes else f"j={j}"
    return f"{p}:alpha{ab[0]}{ab[1]} at {''.join(map(str, v))}"


# ---------------------------------------------------------------------------
# maps


class ModuleMap:
    """Parity-homogeneous additive map given by blocks ``(w, v) -> matrix``
    from ``source`` component ``v`` to ``target`` component ``w``.

    Missing blocks are zero.
    """

    def __init__(self, source, target, blocks, parity=0, check=True):
        self.source = source
        self.target = target
        self.parity = parity
        out = {}
        for (w, v), mat in blocks.items():
            src, tgt = source.components[v], target.components[w]
            if mat.shape != (tgt.size, src.size):
                raise ValueError(f"block {(w, v)} has shape {mat.shape}, expected {(tgt.size, src.size)}")
            if check and not _parity_ok(reduce_into(mat, tgt.orders), src, tgt, parity):
                raise ValueError(f"block {(w, v)} does not have parity {parity}")
            mat = reduce_into(mat, tgt.orders)
            if not mat.is_zero():
                out[(w, v)] = mat
        self.blocks = out

    @classmethod
    def identity(cls, M):
        return cls(M, M, {(v, v): M.identity_matrix(v) for v in M.vertices}, 0, check=False)

    @classmethod
    def zero(cls, M, N, parity=0):
        return cls(M, N, {}, parity, check=False)

    @classmethod
    def diagonal(cls, M, N, mats, parity=0, check=True):
        return cls(M, N, {(v, v): m for v, m in mats.items()}, parity, check)

    def block(self, w, v):
        b = self.blocks.get((w, v))
        if b is None:
            return IntMatrix.zeros(self.target.size(w), self.source.size(v), self.target.modulus)
        return b

    def __matmul__(self, other):
        """Composition ``self ∘ other``."""
        if other.target is not self.source and not _same_shape(other.target, self.source):
            raise ValueError("composition of incompatible maps")
        out = {}
        for (u, v), b in other.blocks.items():
            for (w, u2), a in self.blocks.items():
                if u2 != u:
                    continue
                m = a @ b
                out[(w, v)] = out[(w, v)] + m if (w, v) in out else m
        return ModuleMap(other.source, self.target, out, self.parity ^ other.parity, check=False)

    def _combine(self, other, sign):
        if self.parity != other.parity and self.blocks and other.blocks:
            raise ValueError("adding maps of different parity")
        out = dict(self.blocks)
        for wv, m in other.blocks.items():
            m = m if sign == 1 else -m
            out[wv] = out[wv] + m if wv in out else m
        parity = self.parity if self.blocks else other.parity
        return ModuleMap(self.source, self.target, out, parity, check=False)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return ModuleMap(self.source, self.target, {wv: -m for wv, m in self.blocks.items()}, self.parity, False)

    def __mul__(self, c):
        return ModuleMap(self.source, self.target, {wv: m * c for wv, m in self.blocks.items()}, self.parity, False)

    __rmul__ = __mul__

    def is_zero(self):
        return all(is_zero_into(m, self.target.components[w].orders) for (w, _), m in self.blocks.items())

    def __eq__(self, other):
        if not isinstance(other, ModuleMap):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def restrict_blocks(self, pred):
        return ModuleMap(self.source, self.target,
                         {wv: m for wv, m in self.blocks.items() if pred(*wv)}, self.parity, False)

    def commutes_with(self, j, a, b):
        """``f ∘ α = α ∘ f`` for the arrow α_ab of prime index j."""
        M, N = self.source, self.target
        lhs = {}
        rhs = {}
        for (w, v), f in self.blocks.items():
            # f ∘ α: α from u to v, needs v[j] == a
            if v[j] == a:
                u = _moved(v, j, b)
                m = f @ M.actions[(j, (a, b), u)]
                lhs[(w, u)] = lhs[(w, u)] + m if (w, u) in lhs else m
            # α ∘ f: needs w[j] == b
            if w[j] == b:
                w2 = _moved(w, j, a)
                m = N.actions[(j, (a, b), w)] @ f
                rhs[(w2, v)] = rhs[(w2, v)] + m if (w2, v) in rhs else m
        for key in set(lhs) | set(rhs):
            w = key[0]
            d = lhs.get(key)
            e = rhs.get(key)
            if d is None:
                diff = e
            elif e is None:
                diff = d
            else:
                diff = d - e
            if not is_zero_into(diff, N.components[w].orders):
                return False
        return True

    def respects_idempotents(self, j):
        return all(w[j] == v[j] for (w, v) in self.blocks)

    def is_linear(self, primes=None):
        """Check linearity over the factors with the given prime indices
        (default: all of them)."""
        idx = range(self.source.k) if primes is None else primes
        for j in idx:
            if not self.respects_idempotents(j):
                return False
            for a, b in ARROWS:
                if not self.commutes_with(j, a, b):
                    return False
        return True

    def is_well_defined(self):
        """Torsion generators go to elements killed by their order."""
        for (w, v), m in self.blocks.items():
            orders = self.source.components[v].orders
            scaled = IntMatrix([[x * orders[c] for c, x in enumerate(r)] for r in m.data], m.rows, m.cols,
                               m.modulus, check=False)
            if not is_zero_into(scaled, self.target.components[w].orders):
                return False
        return True

    def __repr__(self):
        return f"ModuleMap(parity={self.parity}, blocks={sorted(self.blocks)})"


def _same_shape(M, N):
    return M.primes == N.primes and M.components == N.components


@dataclass
class Extension:
    """Short exact sequence ``0 -> Q' --iota--> Q'' --beta--> Q -> 0``."""

    iota: ModuleMap
    beta: ModuleMap

    @property
    def sub(self):
        return self.iota.source

    @property
    def middle(self):
        return self.iota.target

    @property
    def quotient(self):
        return self.beta.target

    def check(self):
        """Exactness at all three places, per vertex; returns list of issues."""
        from kgring.intlinalg import exactness_witness

        issues = []
        Qp, Qm, Q = self.sub, self.middle, self.quotient
        for v in Qm.vertices:
            i_v = self.iota.block(v, v)
            b_v = self.beta.block(v, v)
            zero_in = IntMatrix.zeros(Qp.size(v), 0, Qp.modulus)
            if exactness_witness(zero_in, i_v, Qp.components[v], Qm.components[v]) is not None:
                issues.append(f"iota not injective at {v}")
            if exactness_witness(i_v, b_v, Qm.components[v], Q.components[v]) is not None:
                issues.append(f"image of iota differs from kernel of beta at {v}")
            zero_out = IntMatrix.zeros(0, Q.size(v), Q.modulus)
            if exactness_witness(b_v, zero_out, Q.components[v], ()) is not None:
                issues.append(f"beta not surjective at {v}")
        for f, name in ((self.iota, "iota"), (self.beta, "beta")):
            if any(w != v for (w, v) in f.blocks):
                issues.append(f"{name} is not vertexwise")
            if not f.is_linear():
                issues.append(f"{name} is not linear")
        return issues


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    failures: list = field(default_factory=list)
    checked: int = 0

    @property
    def ok(self):
        return not self.failures

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return f"valid ({self.checked} relation instances checked)"
        lines = [f"invalid: {len(self.failures)} of {self.checked} relation instances fail"]
        lines += [f"  {name} at vertex {''.join(map(str, v))}" for name, v in self.failures]
        return "\n".join(lines)


def _poly_blocks(M, j, poly, v):
    """Action of a one-factor polynomial (in factor j) starting at vertex v."""
    out = {}
    for (t, s, word), c in poly.items():
        if v[j] != s:
            continue
        key = tuple((t, s, word) if i == j else (d, d, ()) for i, d in enumerate(v))
        w = _moved(v, j, t)
        m = M.monomial_matrix(key) * c
        out[w] = out[w] + m if w in out else m
    return out


def validate(M):
    """Check every relation instance, well-definedness and commutation."""
    rep = ValidationReport()
    for (j, ab, v), mat in M.actions.items():
        rep.checked += 1
        w = _moved(v, j, ab[0])
        f = ModuleMap(M, M, {(w, v): mat}, check=False)
        # the source presentation's relations must map to relations
        if not f.is_well_defined():
            rep.failures.append((f"well-defined {key_name(j, ab, v, M.primes)}", v))
    for j, p in enumerate(M.primes):
        pres = build_presentation(p)
        for name, poly in pres.relations:
            s = next(iter(poly))[1]
            for v in M.vertices:
                if v[j] != s:
                    continue
                rep.checked += 1
                for w, mat in _poly_blocks(M, j, poly, v).items():
                    if not is_zero_into(mat, M.components[w].orders):
                        rep.failures.append((f"p={p}: {name}", v))
                        break
    for i, j in itertools.combinations(range(M.k), 2):
        for ab in ARROWS:
            for cd in ARROWS:
                for v in M.vertices:
                    if v[i] != ab[1] or v[j] != cd[1]:
                        continue
                    rep.checked += 1
                    u1 = _moved(v, j, cd[0])
                    u2 = _moved(v, i, ab[0])
                    w = _moved(u1, i, ab[0])
                    x = M.actions[(i, ab, u1)] @ M.actions[(j, cd, v)]
                    y = M.actions[(j, cd, u2)] @ M.actions[(i, ab, v)]
                    if not is_zero_into(x - y, M.components[w].orders):
                        rep.failures.append(
                            (f"commute p={M.primes[i]}:alpha{ab[0]}{ab[1]} with p={M.primes[j]}:alpha{cd[0]}{cd[1]}", v))
    return rep


# ---------------------------------------------------------------------------
# constructions


def suspend(M):
    """Swap even and odd in every component."""
    comps = {v: g.suspend() for v, g in M.components.items()}
    perms = {v: suspension_matrix(g) for v, g in M.components.items()}
    acts = {}
    for (j, ab, v), mat in M.actions.items():
        w = _moved(v, j, ab[0])
        acts[(j, ab, v)] = perms[w] @ mat @ perms[v].T
    return KGModule(M.primes, comps, acts, M.modulus, check=False)


def suspension_map(M):
    """The odd identity ``M -> ΣM``."""
    S = suspend(M)
    return ModuleMap(M, S, {(v, v): suspension_matrix(g) for v, g in M.components.items()}, 1, check=False)


def direct_sum_with_maps(modules, primes=None, modulus=None):
    """Direct sum with injection and projection maps."""
    modules = list(modules)
    if not modules:
        if primes is None:
            raise ValueError("empty direct sum needs primes")
        Z = KGModule(primes, {}, {}, modulus or 1)
        return Z, [], []
    primes = modules[0].primes
    m = modules[0].modulus
    for M in modules:
        if M.primes != primes or M.modulus != m:
            raise ValueError("direct sum of modules over different rings or coefficients")
    verts = modules[0].vertices
    comps = {}
    injs = {}
    prjs = {}
    for v in verts:
        G, inj, prj = graded_direct_sum([M.components[v] for M in modules], m)
        comps[v] = G
        injs[v] = inj
        prjs[v] = prj
    acts = {}
    for key in modules[0].actions:
        j, ab, v = key
        w = _moved(v, j, ab[0])
        total = None
        for i, M in enumerate(modules):
            t = injs[w][i] @ M.actions[key] @ prjs[v][i]
            total = t if total is None else total + t
        acts[key] = total
    S = KGModule(primes, comps, acts, m, check=False)
    inj_maps = [ModuleMap(M, S, {(v, v): injs[v][i] for v in verts}, 0, check=False) for i, M in enumerate(modules)]
    prj_maps = [ModuleMap(S, M, {(v, v): prjs[v][i] for v in verts}, 0, check=False) for i, M in enumerate(modules)]
    return S, inj_maps, prj_maps


def direct_sum(*modules):
    return direct_sum_with_maps(modules)[0]


def _kron(a, b):
    rows = []
    for ra in a.data:
        for rb in b.data:
            rows.append([x * y for x in ra for y in rb])
    return IntMatrix(rows, a.rows * b.rows, a.cols * b.cols, _lcm(a.modulus, b.modulus), check=False)


def external_tensor(M, N):
    """``M ⊗ N`` over 𝔎_{G} ⊗ 𝔎_{H} for disjoint prime lists (sign-free).

    The primes of the result are sorted, so the factors may interleave.
    """
    if set(M.primes) & set(N.primes):
        raise ValueError("external tensor product needs disjoint prime lists")
    m = _lcm(M.modulus, N.modulus)
    primes = tuple(sorted(M.primes + N.primes))
    pos_m = [primes.index(p) for p in M.primes]
    pos_n = [primes.index(p) for p in N.primes]

    def split(v):
        return tuple(v[i] for i in pos_m), tuple(v[i] for i in pos_n)

    comps = {}
    conv = {}
    for v in _vertices(len(primes)):
        vm, vn = split(v)
        A, B = M.components[vm], N.components[vn]
        orders = []
        pars = []
        for da, pa in zip(A.orders, A.parities):
            for db, pb in zip(B.orders, B.parities):
                orders.append(_gcd(da, db))
                pars.append(pa ^ pb)
        G, to_g, from_g = cyclic_sum(orders, pars, m)
        comps[v] = G
        conv[v] = (to_g, from_g)
    acts = {}
    for v in _vertices(len(primes)):
        vm, vn = split(v)
        for j, p in enumerate(primes):
            for a, b in ARROWS:
                if v[j] != b:
                    continue
                w = _moved(v, j, a)
                if p in M.primes:
                    jm = M.primes.index(p)
                    big = _kron(M.actions[(jm, (a, b), vm)], IntMatrix.identity(N.size(vn), m))
                else:
                    jn = N.primes.index(p)
                    big = _kron(IntMatrix.identity(M.size(vm), m), N.actions[(jn, (a, b), vn)])
                acts[(j, (a, b), v)] = conv[w][0] @ big @ conv[v][1]
    return KGModule(primes, comps, acts, m, check=False)


def _gcd(a, b):
    from math import gcd
    return gcd(a, b)


def restrict_to_prime(M, j):
    """Regard ``M`` as a 𝔎_{p_j}-module: component ``i`` is the sum of the
    ``M_v`` with ``v[j] == i``."""
    if not 0 <= j < M.k:
        raise IndexError(f"prime index {j} out of range for {M.k} primes")
    if M.k == 1:
        return M
    groups = {}
    for i in range(3):
        vs = [v for v in M.vertices if v[j] == i]
        groups[i] = (vs,) + graded_direct_sum([M.components[v] for v in vs], M.modulus)
    acts = {}
    for a, b in ARROWS:
        vs_b, Gb, _, prj_b = groups[b]
        vs_a, Ga, inj_a, _ = groups[a]
        total = IntMatrix.zeros(Ga.size, Gb.size, M.modulus)
        for idx, v in enumerate(vs_b):
            w = _moved(v, j, a)
            total = total + inj_a[vs_a.index(w)] @ M.actions[(j, (a, b), v)] @ prj_b[idx]
        acts[(0, (a, b), (b,))] = total
    return KGModule((M.primes[j],), {(i,): groups[i][1] for i in range(3)}, acts, M.modulus, check=False)


def _free_labels(ring, v, parity=0):
    """Basis labels of 𝔎_G·1_v at each vertex, even labels first."""
    basis = ring.basis()
    out = {}
    for w in ring.vertices():
        keys = basis[(w, v)]
        deg = [(sum(word_degree(m[2]) for m in key) + parity) % 2 for key in keys]
        even = [key for key, d in zip(keys, deg) if d == 0]
        odd = [key for key, d in zip(keys, deg) if d == 1]
        out[w] = (even, odd)
    return out


def _free_from_labels(ring, labels, modulus):
    """Free module whose component ``w`` has basis ``labels[w]`` (pairs of
    (summand, tensor monomial)); arrows act by left multiplication."""
    comps = {}
    index = {}
    for w, (even, odd) in labels.items():
        comps[w] = GradedGroup.free(len(even), len(odd), modulus)
        index[w] = {lab: i for i, lab in enumerate(even + odd)}
    acts = {}
    for j in range(ring.k):
        for a, b in ARROWS:
            for v in ring.vertices():
                if v[j] != b:
                    continue
                w = _moved(v, j, a)
                mat = [[0] * len(index[v]) for _ in range(len(index[w]))]
                letter_key = tuple((a, b, (ARROWS.index((a, b)),)) if i == j else (d, d, ())
                                   for i, d in enumerate(v))
                for (g, key), c in index[v].items():
                    for key2, coef in ring.mul_keys(letter_key, key).items():
                        mat[index[w][(g, key2)]][c] += coef
                acts[(j, (a, b), v)] = IntMatrix(mat, len(index[w]), len(index[v]), modulus, check=False)
    return KGModule(ring.primes, comps, acts, modulus, check=False)


def free_module(primes, v, modulus=1, parity=0):
    """The free module 𝔎_G·1_v (suspended when ``parity`` is 1)."""
    ring = KGRing(tuple(primes))
    v = tuple(v)
    labels = {w: ([(0, k) for k in e], [(0, k) for k in o]) for w, (e, o) in _free_labels(ring, v, parity).items()}
    return _free_from_labels(ring, labels, modulus)


@dataclass
class FreeCover:
    """``F0 -> M`` with one free summand per generator of each component."""

    module: KGModule
    cover: KGModule
    projection: ModuleMap
    generators: list  # (vertex, coordinate, parity)
    labels: dict  # vertex -> list of (generator index, tensor monomial) in coordinate order


def _generator_images(M, v, c):
    par = M.components[v].parities[c]
    out = {}
    for w, (even, odd) in _free_labels(M.ring, v, par).items():
        out[w] = [M.monomial_matrix(key).column(c) for key in even + odd]
    return out


def _spans(M, w, cols):
    g = M.components[w]
    if not g.size:
        return True
    mats = [IntMatrix.from_columns(cols, g.size, M.modulus)] if cols else []
    mats.append(IntMatrix.diag(list(g.orders), M.modulus))
    return not Quotient(IntMatrix.hstack(mats, rows=g.size), g.size, M.modulus).orders


def minimal_generators(M):
    """Coordinates ``(vertex, index)`` generating ``M`` as a module, chosen
    greedily and then pruned (minimal, not necessarily minimum)."""
    images = {}
    chosen = []
    for v in M.vertices:
        g = M.components[v]
        for c in range(g.size):
            cols = [col for x in chosen for col in images[x][v]]
            if cols:
                A = IntMatrix.from_columns(cols, g.size, M.modulus)
                e = IntMatrix.column_vector([int(r == c) for r in range(g.size)], M.modulus)
                if LinearSolver(A, g.orders).solve(e) is not None:
                    continue
            images[(v, c)] = _generator_images(M, v, c)
            chosen.append((v, c))
    for x in list(reversed(chosen)):
        rest = [y for y in chosen if y != x]
        if all(_spans(M, w, [col for y in rest for col in images[y][w]]) for w in M.vertices):
            chosen = rest
    return chosen


def free_cover(M, generators=None):
    """Free module on ``generators`` ((vertex, coordinate) pairs; default:
    :func:`minimal_generators`) mapping onto them in ``M``."""
    ring = M.ring
    gens = []
    if generators is None:
        generators = minimal_generators(M)
    for v, c in generators:
        gens.append((v, c, M.components[v].parities[c]))
    labels = {w: ([], []) for w in M.vertices}
    for gi, (v, _, par) in enumerate(gens):
        for w, (even, odd) in _free_labels(ring, v, par).items():
            labels[w][0].extend((gi, key) for key in even)
            labels[w][1].extend((gi, key) for key in odd)
    F = _free_from_labels(ring, labels, M.modulus)
    blocks = {}
    flat = {}
    for w in M.vertices:
        order = labels[w][0] + labels[w][1]
        flat[w] = order
        cols = []
        for gi, key in order:
            v, c, _ = gens[gi]
            cols.append(M.monomial_matrix(key).column(c))
        mat = IntMatrix.from_columns(cols, M.size(w), M.modulus) if cols else IntMatrix.zeros(M.size(w), 0, M.modulus)
        blocks[(w, w)] = mat
    pi = ModuleMap(F, M, blocks, 0, check=False)
    return FreeCover(M, F, pi, gens, flat)


# ---------------------------------------------------------------------------
# Hom


class _SystemBuilder:
    """Rows of a linear system over a fixed list of unknowns."""

    def __init__(self, nvars, modulus):
        self.nvars = nvars
        self.modulus = modulus
        self.rows = []
        self.orders = []
        self.rhs = []

    def add(self, coeffs, order, rhs=0):
        coeffs = {i: c for i, c in coeffs.items() if c}
        if (not coeffs and not rhs) or order == 1:
            return
        self.rhs.append(rhs)
        row = [0] * self.nvars
        for i, c in coeffs.items():
            row[i] = c
        self.rows.append(row)
        self.orders.append(order)

    def matrix(self):
        if not self.rows:
            return IntMatrix.zeros(0, self.nvars, self.modulus)
        return IntMatrix(self.rows, len(self.rows), self.nvars, self.modulus)


def map_system(M, N, parity=0, vertices=None, prime_indices=None):
    """Linear system for vertexwise maps ``X_v: M_v -> N_v`` of the given
    parity that are well defined and commute with the arrows of the given
    prime indices (default all); only vertices in ``vertices`` carry
    unknowns and only arrows between such vertices give equations.

    Returns ``(unknowns, index, builder)``; unknowns are ``(v, row, col)``.
    """
    m = _lcm(M.modulus, N.modulus)
    verts = list(M.vertices if vertices is None else vertices)
    vset = set(verts)
    primes_idx = set(range(M.k) if prime_indices is None else prime_indices)
    unknowns = []
    index = {}
    for v in verts:
        sp = M.components[v].parities
        tp = N.components[v].parities
        for r in range(len(tp)):
            for c in range(len(sp)):
                if tp[r] ^ sp[c] == parity:
                    index[(v, r, c)] = len(unknowns)
                    unknowns.append((v, r, c))
    sysb = _SystemBuilder(len(unknowns), m)
    for v in verts:
        src_orders = M.components[v].orders
        tgt_orders = N.components[v].orders
        for c, d in enumerate(src_orders):
            if d == 0:
                continue
            for r, dn in enumerate(tgt_orders):
                i = index.get((v, r, c))
                if i is not None:
                    sysb.add({i: d}, dn)
    for (j, (a, b), v), A in M.actions.items():
        if j not in primes_idx or v not in vset:
            continue
        w = _moved(v, j, a)
        if w not in vset:
            continue
        B = N.actions[(j, (a, b), v)]
        tgt_orders = N.components[w].orders
        for r in range(N.size(w)):
            for c in range(M.size(v)):
                coeffs = {}
                # (X_w A)[r, c]
                for s_ in range(M.size(w)):
                    x = A.data[s_][c]
                    if x:
                        i = index.get((w, r, s_))
                        if i is not None:
                            coeffs[i] = coeffs.get(i, 0) + x
                # (B X_v)[r, c]
                for t in range(N.size(v)):
                    y = B.data[r][t]
                    if y:
                        i = index.get((v, t, c))
                        if i is not None:
                            coeffs[i] = coeffs.get(i, 0) - y
                sysb.add(coeffs, tgt_orders[r])
    return unknowns, index, sysb


class HomSpace:
    """Linear maps ``M -> N`` of one parity, as a finitely generated group.

    ``basis`` spans the solution lattice in the unknown coordinates; maps
    whose torsion-row entries are multiples of the row order are zero and
    are divided out by ``quotient``.
    """

    def __init__(self, M, N, parity=0):
        if M.primes != N.primes:
            raise ValueError("Hom between modules over different rings")
        m = _lcm(M.modulus, N.modulus)
        self.source, self.target, self.parity, self.modulus = M, N, parity, m
        unknowns, index, sysb = map_system(M, N, parity)
        self.unknowns = unknowns
        self.index = index
        self.system = sysb.matrix()
        self.system_orders = tuple(sysb.orders)
        self.basis = kernel_mod(self.system, self.system_orders) if unknowns else IntMatrix.zeros(0, 0, m)
        self._basis_solver = LinearSolver(self.basis) if self.basis.cols else None
        zero_gens = []
        for i, (v, r, c) in enumerate(unknowns):
            d = N.components[v].orders[r]
            if d:
                g = [0] * len(unknowns)
                g[i] = d
                zero_gens.append(g)
        rank = self.basis.cols
        ys = []
        for g in zero_gens:
            y = self._basis_solver.solve(g)
            if y is None:
                raise AssertionError("zero map outside the solution lattice")
            ys.append(y.column(0))
        Y = IntMatrix.from_columns(ys, rank, m) if ys else IntMatrix.zeros(rank, 0, m)
        self.quotient = Quotient(Y, rank, m)
        self._aug_solver = None

    @property
    def invariants(self):
        return self.quotient.invariants()

    def group_part(self):
        return self.invariants

    def map_from_vector(self, x):
        """ModuleMap for a vector in unknown coordinates."""
        M, N = self.source, self.target
        mats = {v: [[0] * M.size(v) for _ in range(N.size(v))] for v in M.vertices}
        for i, (v, r, c) in enumerate(self.unknowns):
            if x[i]:
                mats[v][r][c] = x[i]
        return ModuleMap(M, N, {(v, v): IntMatrix(mats[v], N.size(v), M.size(v), self.modulus)
                                for v in M.vertices}, self.parity, check=False)

    def vector_of(self, f):
        x = [0] * len(self.unknowns)
        for i, (v, r, c) in enumerate(self.unknowns):
            x[i] = f.block(v, v).data[r][c]
        return x

    def generators(self):
        """One map per generator of the group (free ones first)."""
        gens = self.basis @ self.quotient.gens
        return [self.map_from_vector(gens.column(i)) for i in range(gens.cols)]

    def coords(self, f):
        """Coordinates of a linear map in :meth:`generators`, or None if
        ``f`` is not a vertexwise linear map of this parity."""
        if any(w != v for (w, v) in f.blocks):
            return None
        x = self.vector_of(f)
        if any(f.block(v, v).data[r][c] for v in self.source.vertices
               for r in range(self.target.size(v)) for c in range(self.source.size(v))
               if (v, r, c) not in self.index):
            return None
        if self._aug_solver is None:
            self._aug_solver = LinearSolver(IntMatrix.hstack([self.basis, _zero_gen_matrix(self)],
                                                             rows=len(self.unknowns)))
        sol = self._aug_solver.solve(x)
        if sol is None:
            return None
        if self.basis.cols == 0:
            return []
        y = sol.take(rows=range(self.basis.cols))
        return self.quotient.coords(y).column(0)


def _zero_gen_matrix(hs):
    cols = []
    for i, (v, r, c) in enumerate(hs.unknowns):
        d = hs.target.components[v].orders[r]
        if d:
            g = [0] * len(hs.unknowns)
            g[i] = d
            cols.append(g)
    if not cols:
        return IntMatrix.zeros(len(hs.unknowns), 0, hs.modulus)
    return IntMatrix.from_columns(cols, len(hs.unknowns), hs.modulus)


def _lcm(a, b):
    from math import gcd
    return a // gcd(a, b) * b


def hom_space(M, N, parity=0):
    return HomSpace(M, N, parity)


def hom(M, N):
    """Graded group of 𝔎_G-linear maps: even part from even maps, odd part
    from odd maps (equivalently even maps into the suspension)."""
    even = HomSpace(M, N, 0).invariants
    odd = HomSpace(M, N, 1).invariants
    return GradedGroup(_lcm(M.modulus, N.modulus), even, odd)


# ---------------------------------------------------------------------------
# Ext^1


class ResolutionError(RuntimeError):
    """The kernel of a free cover is not an exact module with free components."""


@dataclass
class ExtResult:
    group: GradedGroup
    cover: FreeCover
    kernel: KGModule
    inclusion: ModuleMap
    certificate: dict


def _kernel_module(cover):
    """``K = ker(F0 -> M)`` with the induced action, plus the inclusion."""
    F, M, pi = cover.cover, cover.module, cover.projection
    m = F.modulus
    bases = {}
    comps = {}
    for w in F.vertices:
        Fg = F.components[w]
        Mg = M.components[w]
        pw = pi.block(w, w)
        cols = []
        counts = []
        for par in (0, 1):
            fidx = [i for i, x in enumerate(Fg.parities) if x == par]
            midx = [i for i, x in enumerate(Mg.parities) if x == par]
            sub = pw.take(rows=midx, cols=fidx)
            ker = kernel_mod(sub, [Mg.orders[i] for i in midx])
            counts.append(ker.cols)
            for col in ker.columns():
                full = [0] * Fg.size
                for i, x in zip(fidx, col):
                    full[i] = x
                cols.append(full)
        comps[w] = GradedGroup.free(counts[0], counts[1], m)
        bases[w] = IntMatrix.from_columns(cols, Fg.size, m) if cols else IntMatrix.zeros(Fg.size, 0, m)
    solvers = {w: LinearSolver(bases[w]) for w in F.vertices if bases[w].cols}
    acts = {}
    for (j, (a, b), v), A in F.actions.items():
        w = _moved(v, j, a)
        img = A @ bases[v]
        cols = []
        for c in range(img.cols):
            y = solvers[w].solve(img.take(cols=[c])) if w in solvers else None
            if y is None:
                if any(img.column(c)):
                    raise ResolutionError(f"kernel not closed under the action at {w}")
                y = IntMatrix.zeros(bases[w].cols, 1, m)
            cols.append(y.column(0))
        acts[(j, (a, b), v)] = (IntMatrix.from_columns(cols, bases[w].cols, m) if cols
                                else IntMatrix.zeros(bases[w].cols, 0, m))
    K = KGModule(F.primes, comps, acts, m, check=True)
    inc = ModuleMap(K, F, {(w, w): bases[w] for w in F.vertices}, 0, check=False)
    return K, inc


def ext1_details(M, N, parity=0, check_kernel=True):
    """Ext^1 of one parity via a free cover, with the resolution data."""
    from kgring.exactness import is_exact
    from kgring.intlinalg import exactness_witness

    if M.primes != N.primes:
        raise ValueError("Ext between modules over different rings")
    cov = free_cover(M)
    K, inc = _kernel_module(cov)
    cert = {}
    if check_kernel:
        rep = validate(K)
        cert["kernel_valid"] = rep.ok
        exact = is_exact(K)
        cert["kernel_exact"] = exact.exact
        if not (rep.ok and exact.exact):
            raise ResolutionError("kernel of the free cover is not an exact module; "
                                  "the module is probably not exact")
    surj = all(
        exactness_witness(cov.projection.block(w, w), IntMatrix.zeros(0, M.size(w), M.modulus),
                          M.components[w], ()) is None
        for w in M.vertices)
    cert["cover_surjective"] = surj
    comp = cov.projection @ inc
    cert["composite_zero"] = comp.is_zero()
    if not (surj and cert["composite_zero"]):
        raise ResolutionError("free cover data is inconsistent")
    HK = HomSpace(K, N, parity)
    # restrictions of maps F0 -> N, one per generator of the image group
    images = []
    for gi, (v, c, par) in enumerate(cov.generators):
        Ng = N.components[v]
        for r, npar in enumerate(Ng.parities):
            if npar != par ^ parity:
                continue
            blocks = {}
            for w in M.vertices:
                labels = cov.labels[w]
                cols = []
                for g2, key in labels:
                    if g2 == gi:
                        cols.append(N.monomial_matrix(key).column(r))
                    else:
                        cols.append([0] * N.size(w))
                fw = (IntMatrix.from_columns(cols, N.size(w), N.modulus) if cols
                      else IntMatrix.zeros(N.size(w), 0, N.modulus))
                blocks[(w, w)] = fw @ inc.block(w, w)
            f = ModuleMap(K, N, blocks, parity, check=False)
            y = HK.coords(f)
            if y is None:
                raise ResolutionError("restriction of a cover map is not linear")
            images.append(y)
    orders = HK.quotient.orders
    n = len(orders)
    cols = images + [[d if i == t else 0 for i in range(n)] for t, d in enumerate(orders) if d]
    m = HK.modulus
    C = IntMatrix.from_columns(cols, n, m) if cols else IntMatrix.zeros(n, 0, m)
    rank, factors = Quotient(C, n, m).invariants()
    return (rank, factors), cov, K, inc, cert


def ext1(M, N, check_kernel=True):
    """Graded Ext^1 over 𝔎_G (even part: even extensions, odd part: via the
    suspension of ``N``)."""
    even, cov, K, inc, cert = ext1_details(M, N, 0, check_kernel)
    odd = ext1_details(M, N, 1, check_kernel=False)[0]
    return GradedGroup(_lcm(M.modulus, N.modulus), even, odd)


# ---------------------------------------------------------------------------
# isomorphisms


def is_isomorphism(f):
    """Vertexwise bijective, linear and well defined."""
    from kgring.intlinalg import exactness_witness

    if any(w != v for (w, v) in f.blocks):
        return False
    if not (f.is_well_defined() and f.is_linear()):
        return False
    for v in f.source.vertices:
        A = f.block(v, v)
        src, tgt = f.source.components[v], f.target.components[v]
        zero_in = IntMatrix.zeros(src.size, 0, src.modulus)
        if exactness_witness(zero_in, A, src, tgt) is not None:
            return False
        zero_out = IntMatrix.zeros(0, tgt.size, tgt.modulus)
        if exactness_witness(A, zero_out, tgt, ()) is not None:
            return False
    return True


def inverse_map(f):
    """Inverse of a vertexwise isomorphism."""
    blocks = {}
    M, N = f.source, f.target
    for v in M.vertices:
        A = f.block(v, v)
        if A.rows == 0:
            blocks[(v, v)] = IntMatrix.zeros(M.size(v), 0, M.modulus)
            continue
        src_o = N.components[v].orders
        tgt_o = M.components[v].orders
        if not any(src_o) and not any(tgt_o):
            blocks[(v, v)] = inverse(A)
            continue
        # solve A x = e_i modulo the torsion of N_v
        solver = LinearSolver(A, src_o)
        cols = []
        for i in range(A.rows):
            e = [int(i == t) for t in range(A.rows)]
            x = solver.solve(e)
            if x is None:
                raise ValueError("map is not surjective")
            cols.append(x.column(0))
        blocks[(v, v)] = IntMatrix.from_columns(cols, A.cols, A.modulus)
    return ModuleMap(N, M, blocks, f.parity, check=False)


def find_isomorphism(M, N, attempts=400, seed=0):
    """Search for an even isomorphism ``M -> N``; None if the search fails.

    Tries the Hom generators, then sparse random combinations with
    coefficients in {-1, 0, 1}.
    """
    import random

    if M.primes != N.primes:
        return None
    if any(M.components[v] != N.components[v] for v in M.vertices):
        return None
    hs = HomSpace(M, N, 0)
    gens = hs.generators()
    if not gens:
        return ModuleMap.zero(M, N) if M.is_zero() and N.is_zero() else None
    rng = random.Random(seed)

    def candidates():
        yield from gens
        for _ in range(attempts):
            f = ModuleMap.zero(M, N)
            for g in gens:
                c = rng.choice((0, 0, 1, -1))
                if c:
                    f = f + g * c
            yield f

    return next((f for f in candidates() if is_isomorphism(f)), None)
