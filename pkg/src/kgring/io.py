"""JSON files for modules and extensions.

Module file::

    {
      "primes": [2, 3],
      "modulus": 6,
      "components": {"0,1": {"even": {"rank": 1, "torsion": []},
                             "odd": {"rank": 0, "torsion": [5]}}, ...},
      "maps": {"p=2:alpha10": {"0,1": [["1", "0"], ...]}, ...}
    }

Vertices are comma-separated digits in the order of ``primes``; the map
``p=P:alphaAB`` holds the matrix of α_AB of the prime P out of each source
vertex.  Matrix entries are strings like ``"-3"`` or ``"1/6"``.  Missing
components are zero and missing matrices are zero.

Extension file: ``{"sub": module, "middle": module, "quotient": module,
"iota": {vertex: matrix}, "beta": {vertex: matrix}}``.
"""

import json
from fractions import Fraction

from kgring.intlinalg import GradedGroup, IntMatrix
from kgring.modules import Extension, KGModule, ModuleMap
from kgring.ring import ARROWS

__all__ = [
    "module_to_dict",
    "module_from_dict",
    "extension_to_dict",
    "extension_from_dict",
    "load_module",
    "load_extension",
    "dump",
    "dumps",
    "vertex_name",
    "parse_vertex",
]


def vertex_name(v):
    return ",".join(str(d) for d in v)


def parse_vertex(s, k):
    v = tuple(int(x) for x in s.split(",")) if s.strip() else ()
    if len(v) != k or any(d not in (0, 1, 2) for d in v):
        raise ValueError(f"bad vertex {s!r} for {k} primes")
    return v


def _entry(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _parse_entry(s):
    if isinstance(s, bool):
        raise ValueError("boolean matrix entry")
    if isinstance(s, int):
        return s
    x = Fraction(s)
    return x.numerator if x.denominator == 1 else x


def matrix_to_list(mat):
    return [[_entry(x) for x in row] for row in mat.data]


def matrix_from_list(rows, nrows, ncols, modulus):
    if len(rows) != nrows or any(len(r) != ncols for r in rows):
        raise ValueError(f"matrix must be {nrows} x {ncols}")
    return IntMatrix([[_parse_entry(x) for x in r] for r in rows], nrows, ncols, modulus)


def _part(rank, torsion):
    return {"rank": rank, "torsion": list(torsion)}


def group_to_dict(g):
    return {"even": _part(*g.even), "odd": _part(*g.odd)}


def group_from_dict(d, modulus):
    parts = []
    for par in ("even", "odd"):
        p = d.get(par, {})
        parts.append((int(p.get("rank", 0)), tuple(int(t) for t in p.get("torsion", []))))
    return GradedGroup(modulus, parts[0], parts[1])


def module_to_dict(M):
    comps = {vertex_name(v): group_to_dict(g) for v, g in sorted(M.components.items()) if g.size}
    maps = {}
    for j, p in enumerate(M.primes):
        for a, b in ARROWS:
            entry = {}
            for v in M.vertices:
                if v[j] != b:
                    continue
                mat = M.actions[(j, (a, b), v)]
                if mat.rows and mat.cols and not mat.is_zero():
                    entry[vertex_name(v)] = matrix_to_list(mat)
            if entry:
                maps[f"p={p}:alpha{a}{b}"] = entry
    return {"primes": list(M.primes), "modulus": M.modulus, "components": comps, "maps": maps}


def module_from_dict(d, check=True):
    primes = tuple(int(p) for p in d["primes"])
    m = int(d.get("modulus", 1))
    k = len(primes)
    comps = {parse_vertex(s, k): group_from_dict(g, m) for s, g in d.get("components", {}).items()}
    zero = GradedGroup(m)
    acts = {}
    for key, entry in d.get("maps", {}).items():
        try:
            pstr, arrow = key.split(":")
            p = int(pstr.removeprefix("p="))
            a, b = int(arrow[-2]), int(arrow[-1])
            if not arrow.startswith("alpha") or len(arrow) != 7:
                raise ValueError
        except ValueError:
            raise ValueError(f"bad map key {key!r}; expected 'p=<prime>:alpha<a><b>'") from None
        if p not in primes:
            raise ValueError(f"map {key!r} uses a prime outside {list(primes)}")
        if (a, b) not in ARROWS:
            raise ValueError(f"map {key!r}: alpha{a}{b} is not an arrow")
        j = primes.index(p)
        for s, rows in entry.items():
            v = parse_vertex(s, k)
            w = v[:j] + (a,) + v[j + 1:]
            src, tgt = comps.get(v, zero), comps.get(w, zero)
            acts[(j, (a, b), v)] = matrix_from_list(rows, tgt.size, src.size, m)
    return KGModule(primes, comps, acts, m, check=check)


def _blocks_to_dict(f):
    return {vertex_name(w): matrix_to_list(f.block(w, w)) for w in f.source.vertices
            if f.target.size(w) and f.source.size(w)}


def _blocks_from_dict(d, M, N):
    blocks = {}
    for s, rows in d.items():
        v = parse_vertex(s, M.k)
        blocks[(v, v)] = matrix_from_list(rows, N.size(v), M.size(v), N.modulus)
    return ModuleMap(M, N, blocks, 0)


def extension_to_dict(sigma):
    return {
        "sub": module_to_dict(sigma.sub),
        "middle": module_to_dict(sigma.middle),
        "quotient": module_to_dict(sigma.quotient),
        "iota": _blocks_to_dict(sigma.iota),
        "beta": _blocks_to_dict(sigma.beta),
    }


def extension_from_dict(d):
    A = module_from_dict(d["sub"])
    B = module_from_dict(d["middle"])
    C = module_from_dict(d["quotient"])
    return Extension(_blocks_from_dict(d["iota"], A, B), _blocks_from_dict(d["beta"], B, C))


def dumps(obj):
    """Deterministic JSON text."""
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def dump(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))


def _load(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def load_module(path):
    return module_from_dict(_load(path))


def load_extension(path):
    return extension_from_dict(_load(path))
