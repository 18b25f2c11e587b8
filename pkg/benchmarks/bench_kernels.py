"""Compare the compiled and pure-Python integer kernels.

    python benchmarks/bench_kernels.py [--sizes 8 16 32] [--repeat 5]

Each kernel runs on the same random sparse integer matrices in both
backends; the results are checked for equality before timings are reported.
Dense random matrices make the unimodular transforms of Smith and echelon
forms overflow 64 bits almost at once, and the compiled kernels then hand
over to Python.  The "fits64" column says whether the result fits in 64
bits; intermediate values can still overflow, as for large sparse inputs.  The last
section times an end-to-end computation (Hom of a standard 𝔎_6-module with
itself, and twenty random splittings over 𝔎_6) with each backend in a fresh
interpreter.
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from kgring import _kernels_py as py
from kgring.kernels import compiled_kernels as cy

END_TO_END = (
    "import time;"
    "from kgring.examples import six_module;"
    "from kgring.modules import hom;"
    "from kgring.kernels import BACKEND;"
    "M = six_module().module;"
    "t = time.perf_counter(); G = hom(M, M); dt = time.perf_counter() - t;"
    "print(BACKEND, dt, G)"
)

SPLITS = (
    "import random, time;"
    "from kgring.examples import random_exact_free;"
    "from kgring.kernels import BACKEND;"
    "from kgring.splitting import random_extension, split_extension;"
    "t = time.perf_counter();"
    "[split_extension(random_extension(random_exact_free(random.Random(s)),"
    " random_exact_free(random.Random(s + 1000), max_terms=2), seed=s)) for s in range(20)];"
    "print(BACKEND, time.perf_counter() - t, 20)"
)


def random_matrix(rng, n, m, bound, density):
    return [[rng.randint(-bound, bound) if rng.random() < density else 0 for _ in range(m)] for _ in range(n)]


def _fits(result):
    def walk(x):
        if isinstance(x, int):
            yield x
        elif isinstance(x, (list, tuple)):
            for y in x:
                yield from walk(y)
    return all(abs(x) < 2 ** 62 for x in walk(result))


def cases(rng, n, bound, density):
    a = random_matrix(rng, n, n, bound, density)
    b = random_matrix(rng, n, n, bound, density)
    return {
        "matmul": (lambda k: k.matmul(a, b, n)),
        "col_echelon": (lambda k: k.col_echelon([list(c) for c in zip(*a)], n)),
        "smith": (lambda k: k.smith(a, n, n)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32])
    ap.add_argument("--bound", type=int, default=1, help="entries drawn from [-bound, bound]")
    ap.add_argument("--density", type=float, default=0.2, help="fraction of non-zero entries")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-end-to-end", action="store_true")
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled kernels are not built; only the Python backend is available")
        return 1
    rng = random.Random(args.seed)
    print(f"{'kernel':12s} {'n':>4s} {'python (ms)':>12s} {'cython (ms)':>12s} {'speedup':>8s} {'fits64':>7s}")
    for n in args.sizes:
        for name, run in cases(rng, n, args.bound, args.density).items():
            ref = run(py)
            if ref != run(cy):
                print(f"{name} n={n}: backends disagree")
                return 1
            tp = min(timeit.repeat(lambda: run(py), number=1, repeat=args.repeat)) * 1e3
            tc = min(timeit.repeat(lambda: run(cy), number=1, repeat=args.repeat)) * 1e3
            fast = "yes" if _fits(ref) else "no"
            print(f"{name:12s} {n:4d} {tp:12.3f} {tc:12.3f} {tp / tc:7.1f}x {fast:>7s}")
    if not args.no_end_to_end:
        print()
        for pure in ("1", ""):
            env = dict(os.environ, KGRING_PURE_PYTHON=pure)
            out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True,
                                 text=True, check=True).stdout.split(maxsplit=2)
            print(f"end to end, Hom(M, M) for a 𝔎_6-module, {out[0]:7s}: {float(out[1]):.3f} s  ({out[2].strip()})")
        for pure in ("1", ""):
            env = dict(os.environ, KGRING_PURE_PYTHON=pure)
            out = subprocess.run([sys.executable, "-c", SPLITS], env=env, capture_output=True,
                                 text=True, check=True).stdout.split()
            print(f"end to end, {out[2]} splittings over 𝔎_6,    {out[0]:7s}: {float(out[1]):.3f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
