"""Exactness of 𝔎_G-modules: for every prime the clockwise sequence
M0 -> M1 -> M2 -> M0 (via α10, α21, α02) and the counterclockwise sequence
M1 -> M0 -> M2 -> M1 (via α01, α20, α12) must be exact at each node."""

import itertools
from dataclasses import dataclass, field

from kgring.intlinalg import exactness_witness, reduce_into
from kgring.modules import restrict_to_prime, validate

__all__ = ["ExactnessReport", "NodeCheck", "is_exact", "brute_force_exactness", "ORIENTATIONS"]

# each orientation lists (incoming arrow, node, outgoing arrow) triples
ORIENTATIONS = {
    "clockwise": [((1, 0), 1, (2, 1)), ((2, 1), 2, (0, 2)), ((0, 2), 0, (1, 0))],
    "counterclockwise": [((0, 1), 0, (2, 0)), ((2, 0), 2, (1, 2)), ((1, 2), 1, (0, 1))],
}


@dataclass
class NodeCheck:
    prime: int
    orientation: str
    node: int
    passed: bool
    kind: str = ""
    witness: list = field(default_factory=list)


@dataclass
class ExactnessReport:
    checks: list

    @property
    def exact(self):
        return all(c.passed for c in self.checks)

    def __bool__(self):
        return self.exact

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def __str__(self):
        lines = ["exact" if self.exact else "NOT exact"]
        for c in self.checks:
            status = "ok" if c.passed else f"FAIL ({c.kind}, witness {c.witness})"
            lines.append(f"  p={c.prime} {c.orientation:16s} node {c.node}: {status}")
        return "\n".join(lines)


def _check_prime(R, p):
    out = []
    comps = {i: R.components[(i,)] for i in range(3)}
    for name, triples in ORIENTATIONS.items():
        for (a_in, node, a_out) in triples:
            f = R.actions[(0, a_in, (a_in[1],))]
            g = R.actions[(0, a_out, (node,))]
            w = exactness_witness(f, g, comps[node], comps[a_out[0]])
            if w is None:
                out.append(NodeCheck(p, name, node, True))
            else:
                out.append(NodeCheck(p, name, node, False, w[0], w[1].column(0)))
    return out


def is_exact(M, check_valid=True):
    """Exactness report over every prime factor."""
    if check_valid:
        rep = validate(M)
        if not rep.ok:
            raise ValueError(f"module is not valid:\n{rep}")
    checks = []
    for j, p in enumerate(M.primes):
        checks.extend(_check_prime(restrict_to_prime(M, j), p))
    return ExactnessReport(checks)


def _elements(orders, bound):
    size = 1
    for d in orders:
        if d == 0:
            raise ValueError("brute force needs finite components")
        size *= d
        if size > bound:
            raise ValueError(f"component of order {size} exceeds the bound {bound}")
    return list(itertools.product(*[range(d) for d in orders]))


def _apply(mat, x, orders):
    col = [[v] for v in x]
    from kgring.intlinalg import IntMatrix

    if mat.cols == 0:
        return tuple(0 for _ in orders)
    y = reduce_into(mat @ IntMatrix(col, len(x), 1, mat.modulus), orders)
    return tuple(r[0] for r in y.data)


def brute_force_exactness(M, bound=4096):
    """Decide exactness by listing every element of the finite components."""
    for j in range(M.k):
        R = restrict_to_prime(M, j)
        comps = {i: R.components[(i,)] for i in range(3)}
        elems = {i: _elements(comps[i].orders, bound) for i in range(3)}
        for triples in ORIENTATIONS.values():
            for (a_in, node, a_out) in triples:
                f = R.actions[(0, a_in, (a_in[1],))]
                g = R.actions[(0, a_out, (node,))]
                src = a_in[1]
                image = {_apply(f, x, comps[node].orders) for x in elems[src]}
                zero = tuple(0 for _ in comps[a_out[0]].orders)
                kern = {x for x in elems[node] if _apply(g, x, comps[a_out[0]].orders) == zero}
                if image != kern:
                    return False
    return True
