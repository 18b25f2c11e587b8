"""Command-line front end.

Exit status: 0 when the check passes, 1 when it fails, 2 for usage or input
errors.
"""

import argparse
import json
import sys

from kgring import __version__
from kgring.io import dumps, load_extension, load_module, matrix_to_list, vertex_name

__all__ = ["main", "build_parser"]


class _Report:
    """Collects lines for text output and a dict for JSON output."""

    def __init__(self, fmt):
        self.fmt = fmt
        self.lines = []
        self.data = {}

    def line(self, s=""):
        self.lines.append(s)

    def emit(self, out):
        if self.fmt == "json":
            out.write(dumps(self.data))
        else:
            out.write("\n".join(self.lines) + "\n")


def _group_json(g):
    return {"even": {"rank": g.even[0], "torsion": list(g.even[1])},
            "odd": {"rank": g.odd[0], "torsion": list(g.odd[1])},
            "text": str(g)}


def _prime(s):
    from kgring.ring import is_prime

    try:
        p = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{s!r} is not an integer") from None
    if not is_prime(p):
        raise argparse.ArgumentTypeError(f"{p} is not prime")
    return p


def _prime_list(s):
    out = sorted({_prime(x) for x in s.split(",") if x.strip()})
    if not out:
        raise argparse.ArgumentTypeError("empty prime list")
    return tuple(out)


# ---------------------------------------------------------------------------


def cmd_check_ring(args, rep):
    from kgring.ring import rewrite_system, verify_derived_relations

    p = args.prime
    rs = rewrite_system(p)
    confluent = rs.is_confluent()
    derived = verify_derived_relations(p)
    rep.line(f"ring K_{p}: {len(rs.rules)} rewrite rules, confluent: {'yes' if confluent else 'NO'}")
    for name, passed in derived.entries:
        rep.line(f"  {'pass' if passed else 'FAIL'}  {name}")
    ok = confluent and derived.all_passed
    rep.line("all checks passed" if ok else "some checks FAILED")
    rep.data = {
        "prime": p,
        "rules": len(rs.rules),
        "confluent": confluent,
        "derived": [{"name": name, "passed": passed} for name, passed in derived.entries],
        "passed": ok,
    }
    return 0 if ok else 1


def cmd_validate(args, rep):
    from kgring.modules import validate

    M = load_module(args.file)
    r = validate(M)
    rep.line(f"primes {list(M.primes)}, coefficients Z[1/{M.modulus}], {r.checked} checks")
    for name, v in r.failures:
        rep.line(f"  FAIL {name} at vertex {vertex_name(v)}")
    rep.line("valid" if r.ok else f"INVALID ({len(r.failures)} failures)")
    rep.data = {"checked": r.checked, "valid": r.ok,
                "failures": [{"relation": n, "vertex": vertex_name(v)} for n, v in r.failures]}
    return 0 if r.ok else 1


def cmd_exact(args, rep):
    from kgring.exactness import is_exact
    from kgring.modules import validate

    M = load_module(args.file)
    r = validate(M)
    if not r.ok:
        for name, v in r.failures:
            rep.line(f"  FAIL {name} at vertex {vertex_name(v)}")
        rep.line("INVALID module; exactness not checked")
        rep.data = {"valid": False, "exact": False,
                    "failures": [{"relation": n, "vertex": vertex_name(v)} for n, v in r.failures]}
        return 1
    e = is_exact(M, check_valid=False)
    rep.line(str(e))
    rep.data = {"valid": True, "exact": e.exact, "nodes": [
        {"prime": c.prime, "orientation": c.orientation, "node": c.node, "passed": c.passed,
         "kind": c.kind, "witness": [str(x) for x in c.witness]} for c in e.checks]}
    return 0 if e.exact else 1


def cmd_split(args, rep):
    from kgring.exactness import is_exact
    from kgring.modules import ModuleMap
    from kgring.splitting import SectionError, find_subring_section, split_extension

    sigma = load_extension(args.file)
    issues = sigma.check()
    if issues:
        for s in issues:
            rep.line(f"  {s}")
        rep.line("not a short exact sequence of modules")
        rep.data = {"split": False, "error": "not an extension", "issues": issues}
        return 1
    Q = sigma.quotient
    try:
        if args.method == "solve":
            gamma = find_subring_section(sigma, None).gamma
            trace = []
        else:
            if Q.k < 2:
                raise SectionError(
                    "the averaging pipeline needs at least two primes (coprime defects p^2 and q^2); "
                    "use --method solve for a single prime")
            res = split_extension(sigma)
            gamma = res.section
            trace = [[list(s) for s in u.trace] for u in res.upgrades]
    except SectionError as err:
        rep.line(f"no section: {err}")
        rep.data = {"split": False, "error": str(err)}
        if all(g.is_free for g in Q.components.values()):
            ex = is_exact(Q)
            bad = ex.failures()
            if bad:
                c = bad[0]
                rep.line(f"certificate: quotient not exact at p={c.prime} {c.orientation} node {c.node} "
                         f"({c.kind}, witness {[str(x) for x in c.witness]})")
                rep.data["certificate"] = {"prime": c.prime, "orientation": c.orientation, "node": c.node,
                                           "kind": c.kind, "witness": [str(x) for x in c.witness]}
        return 1
    verified = (sigma.beta @ gamma - ModuleMap.identity(Q)).is_zero() and gamma.is_linear()
    if args.method != "solve":
        for t in trace:
            rep.line("defect trace: " + " -> ".join(f"{name} {c}" for name, c in t))
        rep.line(f"bezout coefficients: {list(res.coefficients)}")
    rep.line(f"section re-verified: {'yes' if verified else 'NO'}")
    blocks = {vertex_name(v): matrix_to_list(gamma.block(v, v)) for v in Q.vertices
              if Q.size(v) and sigma.middle.size(v)}
    for name in sorted(blocks):
        rep.line(f"  gamma[{name}] = {json.dumps(blocks[name])}")
    rep.data = {"split": True, "verified": verified, "section": blocks, "method": args.method}
    if args.method != "solve":
        rep.data["trace"] = trace
        rep.data["bezout"] = list(res.coefficients)
    return 0 if verified else 1


def cmd_decompose(args, rep):
    from kgring.divisible import DivisibilityError, divisibility_report, full_decompose, reconstruct
    from kgring.modules import is_isomorphism

    M = load_module(args.file)
    primes = args.primes or M.primes
    for p in primes:
        if p not in M.primes:
            raise _UsageError(f"prime {p} does not act on the module (primes {list(M.primes)})")
    div = {p: divisibility_report(M, p) for p in primes}
    for p in primes:
        rep.line(f"uniquely {p}-divisible components: "
                 + ", ".join(f"{i}: {'yes' if ok else 'no'}" for i, ok in div[p].items()))
    rep.data["divisible"] = {str(p): {str(i): ok for i, ok in d.items()} for p, d in div.items()}
    try:
        fd = full_decompose(M, primes)
    except DivisibilityError as err:
        rep.line(f"cannot decompose: {err}")
        rep.data["error"] = str(err)
        return 1
    pieces = {}
    nz = fd.nonzero()
    rep.line(f"{len(nz)} non-zero pieces out of {len(fd.pieces)}")
    for I in sorted(fd.pieces):
        P = fd.pieces[I]
        label = "".join(I)
        comps = {vertex_name(v): _group_json(g) for v, g in sorted(P.module.components.items()) if g.size}
        pieces[label] = {"ring": fd.rings[I], "zero": P.is_zero(), "components": comps}
        if P.is_zero():
            rep.line(f"  A_{label}: 0")
        else:
            desc = "; ".join(f"[{v}] {c['text']}" if v else c["text"] for v, c in comps.items())
            rep.line(f"  A_{label} over {fd.rings[I]}: {desc}")
    _, iso = reconstruct(fd)
    ok = is_isomorphism(iso)
    rep.line(f"reconstruction isomorphic to the input: {'yes' if ok else 'NO'}")
    rep.data.update({"primes": list(primes), "pieces": pieces, "reconstructed": ok})
    return 0 if ok else 1


def _two_modules(args):
    return load_module(args.source), load_module(args.target)


def cmd_hom(args, rep):
    from kgring.modules import hom

    M, N = _two_modules(args)
    G = hom(M, N)
    rep.line(f"Hom: {G}")
    rep.data = {"hom": _group_json(G)}
    return 0


def cmd_ext1(args, rep):
    from kgring.modules import ResolutionError, ext1

    M, N = _two_modules(args)
    try:
        G = ext1(M, N)
    except ResolutionError as err:
        rep.line(f"resolution failed: {err}")
        rep.data = {"error": str(err)}
        return 1
    rep.line(f"Ext^1: {G}")
    rep.data = {"ext1": _group_json(G)}
    return 0


def cmd_hensel(args, rep):
    from kgring.divisible import hensel_root

    p, q, k = args.prime, args.q, args.k
    try:
        u = hensel_root(p, q, k)
    except ValueError as err:
        rep.line(f"error: {err}")
        rep.data = {"error": str(err)}
        return 1
    mod = p ** k
    ok = pow(u, q, mod) == 1 and u % p != 1
    rep.line(f"root of unity of order {q} mod {p}^{k} = {mod}: {u}")
    rep.line(f"check: {u}^{q} mod {mod} = {pow(u, q, mod)}")
    rep.data = {"p": p, "q": q, "k": k, "modulus": mod, "root": u, "verified": ok}
    return 0 if ok else 1


# ---------------------------------------------------------------------------


class _UsageError(Exception):
    pass


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text", help="report format")
    parser = argparse.ArgumentParser(prog="kgring", description="Computations with Z/2-graded K_G-modules.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-ring", parents=[common], help="complete and self-test the ring K_p")
    s.add_argument("--prime", "-p", type=_prime, required=True)
    s.set_defaults(func=cmd_check_ring)

    s = sub.add_parser("validate", parents=[common], help="check every relation on a module file")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("exact", parents=[common], help="exactness report for a module file")
    s.add_argument("file")
    s.set_defaults(func=cmd_exact)

    s = sub.add_parser("split", parents=[common], help="find a linear section of an extension file")
    s.add_argument("file")
    s.add_argument("--method", choices=("pipeline", "solve"), default="pipeline",
                   help="averaging pipeline (two or more primes) or one direct linear solve")
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("decompose", parents=[common], help="idempotent decomposition of a divisible module")
    s.add_argument("file")
    s.add_argument("--primes", type=_prime_list, default=None, help="comma-separated primes (default: all)")
    s.set_defaults(func=cmd_decompose)

    s = sub.add_parser("hom", parents=[common], help="graded Hom group between two module files")
    s.add_argument("source")
    s.add_argument("target")
    s.set_defaults(func=cmd_hom)

    s = sub.add_parser("ext1", parents=[common], help="graded Ext^1 group between two module files")
    s.add_argument("source")
    s.add_argument("target")
    s.set_defaults(func=cmd_ext1)

    s = sub.add_parser("hensel", parents=[common], help="primitive q-th root of unity mod p^k")
    s.add_argument("--prime", "-p", type=_prime, required=True)
    s.add_argument("-q", type=_prime, required=True)
    s.add_argument("-k", type=int, default=1)
    s.set_defaults(func=cmd_hensel)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    rep = _Report(args.format)
    try:
        code = args.func(args, rep)
    except (OSError, ValueError, KeyError, TypeError, _UsageError) as err:
        if isinstance(err, json.JSONDecodeError):
            msg = f"malformed JSON: {err}"
        elif isinstance(err, KeyError):
            msg = f"missing field {err}"
        else:
            msg = str(err)
        print(f"kgring {args.command}: error: {msg}", file=sys.stderr)
        return 2
    rep.emit(out)
    return code


if __name__ == "__main__":
    sys.exit(main())

