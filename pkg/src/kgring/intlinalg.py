"""Exact linear algebra over Z and its localizations Z[1/m].

Scalars are Python ints or :class:`fractions.Fraction` whose denominators
only involve primes dividing ``m``.  A finitely generated Z[1/m]-module is
handled through an *orders* tuple: generator ``i`` has order ``orders[i]``
(0 means free), so the module is ``Z[1/m]^n`` modulo the diagonal relations.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from kgring import kernels

__all__ = [
    "IntMatrix",
    "GradedGroup",
    "Quotient",
    "LinearSolver",
    "prime_factors",
    "strip_units",
    "is_local",
    "reduce_into",
    "is_zero_into",
    "smith_normal_form",
    "kernel",
    "kernel_mod",
    "solve",
    "solve_mod",
    "unsolvability_certificate",
    "inverse",
    "image_equals_kernel",
    "exactness_witness",
    "graded_direct_sum",
    "suspension_matrix",
    "cyclic_sum",
]


@lru_cache(maxsize=None)
def prime_factors(n):
    """Distinct prime factors of ``|n|`` in increasing order."""
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return tuple(out)


def strip_units(n, m):
    """Remove from ``|n|`` every prime dividing ``m`` (0 stays 0)."""
    n = abs(n)
    if n == 0:
        return 0
    for p in prime_factors(m):
        while n % p == 0:
            n //= p
    return n


def is_local(x, m):
    """True if ``x`` lies in Z[1/m]."""
    if isinstance(x, int):
        return True
    return strip_units(x.denominator, m) == 1


def _norm(x):
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, str):
        return _norm(Fraction(x))
    if hasattr(x, "__index__"):
        return int(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def _lcm(a, b):
    return a // gcd(a, b) * b


def _den(x):
    return 1 if isinstance(x, int) else x.denominator


class IntMatrix:
    """Immutable matrix over Z[1/m].

    >>> IntMatrix([[1, 2], [3, 4]]) @ IntMatrix([[1], [1]])
    IntMatrix([[3], [7]])
    """

    __slots__ = ("rows", "cols", "data", "modulus")

    def __init__(self, data, rows=None, cols=None, modulus=1, check=True):
        data = tuple(tuple(_norm(x) for x in r) for r in data)
        if rows is None:
            rows = len(data)
        if cols is None:
            cols = len(data[0]) if data else 0
        if len(data) != rows or any(len(r) != cols for r in data):
            raise ValueError("inconsistent matrix dimensions")
        if modulus < 1:
            raise ValueError("modulus must be a positive integer")
        if check:
            for r in data:
                for x in r:
                    if not isinstance(x, int) and not is_local(x, modulus):
                        raise ValueError(f"entry {x} is not in Z[1/{modulus}]")
        self.rows = rows
        self.cols = cols
        self.data = data
        self.modulus = modulus

    # construction helpers -------------------------------------------------

    @classmethod
    def zeros(cls, rows, cols, modulus=1):
        return cls([[0] * cols for _ in range(rows)], rows, cols, modulus, check=False)

    @classmethod
    def identity(cls, n, modulus=1):
        return cls.scalar(n, 1, modulus)

    @classmethod
    def scalar(cls, n, c, modulus=1):
        c = _norm(c)
        return cls([[c if i == j else 0 for j in range(n)] for i in range(n)], n, n, modulus)

    @classmethod
    def diag(cls, entries, modulus=1):
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)], n, n, modulus)

    @classmethod
    def from_columns(cls, columns, rows, modulus=1):
        columns = list(columns)
        return cls([[c[i] for c in columns] for i in range(rows)], rows, len(columns), modulus)

    @classmethod
    def column_vector(cls, entries, modulus=1):
        return cls([[x] for x in entries], len(entries), 1, modulus)

    @staticmethod
    def hstack(mats, rows=None):
        mats = list(mats)
        if rows is None:
            rows = mats[0].rows
        m = 1
        for a in mats:
            if a.rows != rows:
                raise ValueError("hstack: row mismatch")
            m = _lcm(m, a.modulus)
        data = [sum((a.data[i] for a in mats), ()) for i in range(rows)]
        return IntMatrix(data, rows, sum(a.cols for a in mats), m, check=False)

    @staticmethod
    def vstack(mats, cols=None):
        mats = list(mats)
        if cols is None:
            cols = mats[0].cols
        m = 1
        data = []
        for a in mats:
            if a.cols != cols:
                raise ValueError("vstack: column mismatch")
            m = _lcm(m, a.modulus)
            data.extend(a.data)
        return IntMatrix(data, len(data), cols, m, check=False)

    @staticmethod
    def block_diag(mats):
        mats = list(mats)
        rows = sum(a.rows for a in mats)
        cols = sum(a.cols for a in mats)
        out = [[0] * cols for _ in range(rows)]
        m = 1
        r0 = c0 = 0
        for a in mats:
            m = _lcm(m, a.modulus)
            for i, row in enumerate(a.data):
                out[r0 + i][c0:c0 + a.cols] = row
            r0 += a.rows
            c0 += a.cols
        return IntMatrix(out, rows, cols, m, check=False)

    # access ------------------------------------------------------------------

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def tolist(self):
        return [list(r) for r in self.data]

    def column(self, j):
        return [r[j] for r in self.data]

    def columns(self):
        return [list(c) for c in zip(*self.data)] if self.rows else [[] for _ in range(self.cols)]

    def take(self, rows=None, cols=None):
        rows = range(self.rows) if rows is None else list(rows)
        cols = range(self.cols) if cols is None else list(cols)
        return IntMatrix([[self.data[i][j] for j in cols] for i in rows],
                         len(rows), len(cols), self.modulus, check=False)

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def T(self):
        return IntMatrix([list(c) for c in zip(*self.data)] if self.rows else [[] for _ in range(self.cols)],
                         self.cols, self.rows, self.modulus, check=False)

    def is_zero(self):
        return not any(any(r) for r in self.data)

    def is_integral(self):
        return all(isinstance(x, int) for r in self.data for x in r)

    def with_modulus(self, modulus):
        return IntMatrix(self.data, self.rows, self.cols, modulus)

    # arithmetic -------------------------------------------------------------

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError(f"matmul shape mismatch {self.shape} @ {other.shape}")
        m = _lcm(self.modulus, other.modulus)
        if self.cols == 0 or other.cols == 0 or self.rows == 0:
            return IntMatrix.zeros(self.rows, other.cols, m)
        prod = kernels.matmul([list(r) for r in self.data], [list(r) for r in other.data], self.cols)
        return IntMatrix([[_norm(x) for x in r] for r in prod], self.rows, other.cols, m, check=False)

    def __add__(self, other):
        if self.shape != other.shape:
            raise ValueError("add shape mismatch")
        return IntMatrix([[_norm(x + y) for x, y in zip(r, s)] for r, s in zip(self.data, other.data)],
                         self.rows, self.cols, _lcm(self.modulus, other.modulus), check=False)

    def __sub__(self, other):
        if self.shape != other.shape:
            raise ValueError("sub shape mismatch")
        return IntMatrix([[_norm(x - y) for x, y in zip(r, s)] for r, s in zip(self.data, other.data)],
                         self.rows, self.cols, _lcm(self.modulus, other.modulus), check=False)

    def __neg__(self):
        return IntMatrix([[-x for x in r] for r in self.data], self.rows, self.cols, self.modulus, check=False)

    def __mul__(self, c):
        if isinstance(c, IntMatrix):
            return NotImplemented
        c = _norm(c)
        m = self.modulus
        if not isinstance(c, int):
            m = _lcm(m, _smooth_modulus(c.denominator))
        return IntMatrix([[_norm(x * c) for x in r] for r in self.data], self.rows, self.cols, m, check=False)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self.data == other.data

    def __hash__(self):
        return hash((self.rows, self.cols, self.data))

    def __repr__(self):
        return f"IntMatrix({[list(map(_show, r)) for r in self.data]})".replace("'", "")

    def row_denominators(self):
        out = []
        for r in self.data:
            d = 1
            for x in r:
                if not isinstance(x, int):
                    d = _lcm(d, x.denominator)
            out.append(d)
        return out


def _smooth_modulus(n):
    out = 1
    for p in prime_factors(n):
        out *= p
    return out


def _show(x):
    return str(x)


def _as_column(b):
    if isinstance(b, IntMatrix):
        if b.cols != 1:
            raise ValueError("expected a column vector")
        return [r[0] for r in b.data]
    return [_norm(x) for x in b]


def _inv_mod(a, d):
    return pow(a, -1, d)


def _reduce_scalar(x, d):
    if d == 1:
        return 0
    if isinstance(x, int):
        return x % d
    return (x.numerator * _inv_mod(x.denominator % d, d)) % d


def reduce_into(a, orders):
    """Canonical representative of a map into ``Z[1/m]^n / diag(orders)``:
    torsion rows are reduced into ``[0, d)``, free rows are left alone."""
    if len(orders) != a.rows:
        raise ValueError("orders do not match the target dimension")
    if not any(orders):
        return a
    data = [r if d == 0 else tuple(_reduce_scalar(x, d) for x in r) for r, d in zip(a.data, orders)]
    return IntMatrix(data, a.rows, a.cols, a.modulus, check=False)


def is_zero_into(a, orders):
    """True if every column of ``a`` vanishes in ``Z[1/m]^n / diag(orders)``."""
    for r, d in zip(a.data, orders):
        if d == 0:
            if any(r):
                return False
        elif d != 1 and any(_reduce_scalar(x, d) for x in r):
            return False
    return True


def smith_normal_form(a):
    """``(U, D, V)`` with ``U @ a @ V == D`` for an integer matrix ``a``."""
    if not a.is_integral():
        raise ValueError("smith_normal_form needs integer entries")
    u, d, v = kernels.smith(a.tolist(), a.rows, a.cols)
    return (IntMatrix(u, a.rows, a.rows), IntMatrix(d, a.rows, a.cols), IntMatrix(v, a.cols, a.cols))


def _integer_rows(a):
    """Rows of ``a`` scaled by their (unit) denominators, plus the scales."""
    scales = a.row_denominators()
    rows = [[_norm(x * s) if s != 1 else x for x in r] for r, s in zip(a.data, scales)]
    return rows, scales


def _content_unit(col, m):
    """The largest m-smooth positive integer dividing every entry."""
    g = 0
    for x in col:
        g = gcd(g, x)
        if g == 1:
            return 1
    if g == 0:
        return 1
    return g // strip_units(g, m)


class LinearSolver:
    """Column echelon of a fixed matrix over Z[1/m], reused for many
    right-hand sides and for the kernel.

    If ``orders`` is given, equations are read modulo the diagonal relations
    (row ``i`` only has to hold modulo ``orders[i]``).
    """

    def __init__(self, a, orders=None, modulus=None):
        self.modulus = a.modulus if modulus is None else modulus
        self.ncols = a.cols
        m = self.modulus
        rows, scales = _integer_rows(a)
        self.scales = scales
        n = a.cols
        slack = []
        if orders is not None:
            if len(orders) != a.rows:
                raise ValueError("orders do not match the number of equations")
            for i, d in enumerate(orders):
                d = strip_units(d, m)
                if d > 1:
                    slack.append((i, d))
                elif d == 1:
                    rows[i] = [0] * n
        self.nvars = n + len(slack)
        # eliminating the sparsest equations first keeps the entries small
        weight = [sum(1 for x in r if x) for r in rows]
        for i, _ in slack:
            weight[i] += 1
        self.perm = sorted(range(a.rows), key=lambda i: weight[i])
        rows = [rows[i] for i in self.perm]
        where = {i: t for t, i in enumerate(self.perm)}
        cols = [[r[j] for r in rows] for j in range(n)]
        for i, d in slack:
            c = [0] * a.rows
            c[where[i]] = d
            cols.append(c)
        self.nrows = a.rows
        self._orders = orders
        h, v, piv = kernels.col_echelon(cols, a.rows)
        self.h = h
        self.v = v
        self.pivots = piv
        self.rank = len(piv)

    def kernel_generators(self):
        """Generators (columns, first ``ncols`` coordinates) of the solution
        lattice of the homogeneous system."""
        return [c[: self.ncols] for c in self.v[self.rank:]]

    def solve(self, b):
        m = self.modulus
        b = _as_column(b)
        if len(b) != self.nrows:
            raise ValueError("right-hand side has the wrong length")
        rhs = []
        for x, s, i in zip(b, self.scales, range(self.nrows)):
            x = x * s if s != 1 else x
            if self._orders is not None and strip_units(self._orders[i], m) == 1:
                x = 0
            rhs.append(x)
        rhs = [rhs[i] for i in self.perm]
        h = self.h
        y = []
        for k, r in enumerate(self.pivots):
            s = rhs[r]
            for l in range(k):
                hl = h[l][r]
                if hl:
                    s -= hl * y[l]
            q = _norm(Fraction(s) / h[k][r]) if not isinstance(s, int) or s % h[k][r] else s // h[k][r]
            if not is_local(q, m):
                return None
            y.append(q)
        for r in range(self.nrows):
            s = 0
            for k in range(self.rank):
                hk = h[k][r]
                if hk:
                    s += hk * y[k]
            if s != rhs[r]:
                return None
        x = [0] * self.ncols
        for k, yk in enumerate(y):
            if yk:
                vk = self.v[k]
                for t in range(self.ncols):
                    if vk[t]:
                        x[t] += yk * vk[t]
        return IntMatrix.column_vector([_norm(t) for t in x], m)


def kernel(a):
    """Saturated basis (as columns) of ``{x : a @ x = 0}`` over Z[1/m]."""
    solver = LinearSolver(a)
    gens = solver.kernel_generators()
    return _basis_from_generators(gens, a.cols, a.modulus)


def kernel_mod(a, orders):
    """Basis of ``{x : a @ x == 0 modulo diag(orders)}`` over Z[1/m]."""
    solver = LinearSolver(a, orders)
    gens = solver.kernel_generators()
    return _basis_from_generators(gens, a.cols, a.modulus)


def _basis_from_generators(gens, n, m):
    gens = [g for g in gens if any(g)]
    if not gens:
        return IntMatrix.zeros(n, 0, m)
    h, _, piv = kernels.col_echelon(gens, n)
    basis = []
    for c in h[: len(piv)]:
        u = _content_unit(c, m)
        basis.append([x // u for x in c] if u != 1 else c)
    return IntMatrix.from_columns(basis, n, m)


def solve(a, b):
    """Some ``x`` over Z[1/m] with ``a @ x == b``, or None."""
    return LinearSolver(a).solve(b)


def solve_mod(a, b, orders):
    """Some ``x`` with ``a @ x == b`` modulo ``diag(orders)``, or None."""
    return LinearSolver(a, orders).solve(b)


def _first_prime_not_dividing(m):
    p = 2
    while m % p == 0:
        p += 1
        while any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
            p += 1
    return p


def unsolvability_certificate(a, b):
    """A row vector ``y`` with ``y @ a`` in Z[1/m] but ``y @ b`` not, proving
    ``a @ x = b`` has no solution; None if the system is solvable."""
    m = a.modulus
    b = _as_column(b)
    rows, scales = _integer_rows(a)
    bb = [x * s for x, s in zip(b, scales)]
    den = 1
    for x in bb:
        den = _lcm(den, _den(x))
    # scaling by a non-unit denominator would change solvability, so move it
    # into the certificate instead
    ib = [_norm(x * den) for x in bb]
    u, d, _ = kernels.smith(rows, a.rows, a.cols)
    c = [sum(uij * bj for uij, bj in zip(row, ib)) for row in u]
    ell = _first_prime_not_dividing(m)
    for i in range(a.rows):
        di = d[i][i] if i < a.cols else 0
        if di:
            q = Fraction(c[i], di * den)
            if not is_local(q, m):
                y = [Fraction(x, di) for x in u[i]]
                break
        elif c[i]:
            y = [Fraction(x * den, c[i] * ell) for x in u[i]]
            break
    else:
        return None
    return [_norm(yi * s) for yi, s in zip(y, scales)]


def inverse(a):
    """Exact inverse over Z[1/m]; ValueError if singular or not invertible
    over the localization."""
    n = a.rows
    if a.cols != n:
        raise ValueError("inverse of a non-square matrix")
    aug = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(a.data)]
    for c in range(n):
        piv = next((r for r in range(c, n) if aug[r][c]), None)
        if piv is None:
            raise ValueError("singular matrix")
        aug[c], aug[piv] = aug[piv], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c]:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    inv = [[_norm(x) for x in r[n:]] for r in aug]
    for r in inv:
        for x in r:
            if not is_local(x, a.modulus):
                raise ValueError("matrix is not invertible over Z[1/m]")
    return IntMatrix(inv, n, n, a.modulus, check=False)


def unimodular_inverse(u, n):
    """Integer inverse of a unimodular ``n x n`` matrix given as rows.

    Column reduction gives ``U V = H`` with ``H`` lower unitriangular, so
    ``U^{-1} = V H^{-1}`` and ``H^{-1}`` comes from forward substitution.
    """
    if n == 0:
        return []
    h, v, piv = kernels.col_echelon([[u[r][c] for r in range(n)] for c in range(n)], n)
    if list(piv) != list(range(n)) or any(h[k][k] != 1 for k in range(n)):
        raise ValueError("matrix is not unimodular")
    x = [[0] * n for _ in range(n)]
    for j in range(n):
        x[j][j] = 1
        for i in range(j + 1, n):
            s = 0
            for k in range(j, i):
                y = h[k][i]
                if y:
                    s += y * x[k][j]
            x[i][j] = -s
    vr = [[v[c][r] for c in range(n)] for r in range(n)]
    return kernels.matmul(vr, x, n)


class Quotient:
    """``Z[1/m]^n`` modulo the column span of ``c``, in invariant-factor form.

    ``orders`` lists the new generators (free ones first, then torsion in a
    divisibility chain).  ``gens`` holds them as columns in the old
    coordinates; ``proj`` sends old coordinates to new ones.
    """

    def __init__(self, c, n=None, modulus=None):
        m = c.modulus if modulus is None else modulus
        n = c.rows if n is None else n
        cols = []
        for col in c.columns():
            d = 1
            for x in col:
                d = _lcm(d, _den(x))
            col = [_norm(x * d) for x in col]
            if any(col):
                cols.append(col)
        self.modulus = m
        self.n = n
        if not cols:
            eye = IntMatrix.identity(n, m)
            self.orders = (0,) * n
            self.gens = eye
            self.proj = eye
            return
        rows = [[col[i] for col in cols] for i in range(n)]
        u, d, _ = kernels.smith(rows, n, len(cols))
        diag = [d[i][i] if i < len(cols) else 0 for i in range(n)]
        uinv = unimodular_inverse(u, n)
        free = [i for i in range(n) if diag[i] == 0]
        tors = [(i, strip_units(diag[i], m)) for i in range(n) if diag[i] != 0]
        tors = [(i, t) for i, t in tors if t > 1]
        keep = free + [i for i, _ in tors]
        self.orders = (0,) * len(free) + tuple(t for _, t in tors)
        self.gens = IntMatrix([[uinv[r][i] for i in keep] for r in range(n)], n, len(keep), m)
        self.proj = IntMatrix([u[i] for i in keep], len(keep), n, m)

    def coords(self, x):
        """New coordinates of the columns of ``x`` (reduced)."""
        return reduce_into(self.proj @ x, self.orders)

    def invariants(self):
        rank = sum(1 for d in self.orders if d == 0)
        return rank, tuple(d for d in self.orders if d)


@dataclass(frozen=True)
class GradedGroup:
    """Finitely generated Z/2-graded Z[1/m]-module in invariant-factor form.

    Each parity is ``(rank, factors)``; generators are laid out as even free,
    even torsion, odd free, odd torsion.
    """

    modulus: int = 1
    even: tuple = (0, ())
    odd: tuple = (0, ())

    def __post_init__(self):
        object.__setattr__(self, "even", (int(self.even[0]), tuple(self.even[1])))
        object.__setattr__(self, "odd", (int(self.odd[0]), tuple(self.odd[1])))
        for rank, factors in (self.even, self.odd):
            if rank < 0:
                raise ValueError("negative rank")
            for i, d in enumerate(factors):
                if d < 2:
                    raise ValueError(f"invariant factor {d} must be at least 2")
                if gcd(d, self.modulus) != 1:
                    raise ValueError(f"invariant factor {d} is not coprime to the modulus {self.modulus}")
                if i and d % factors[i - 1]:
                    raise ValueError("invariant factors must form a divisibility chain")

    @classmethod
    def free(cls, even_rank, odd_rank=0, modulus=1):
        return cls(modulus, (even_rank, ()), (odd_rank, ()))

    @property
    def orders(self):
        (re, fe), (ro, fo) = self.even, self.odd
        return (0,) * re + fe + (0,) * ro + fo

    @property
    def parities(self):
        return (0,) * self.even_size + (1,) * self.odd_size

    @property
    def even_size(self):
        return self.even[0] + len(self.even[1])

    @property
    def odd_size(self):
        return self.odd[0] + len(self.odd[1])

    @property
    def size(self):
        return self.even_size + self.odd_size

    @property
    def is_zero(self):
        return self.size == 0

    @property
    def is_free(self):
        return not self.even[1] and not self.odd[1]

    def order(self):
        """Cardinality if finite, else None."""
        if self.even[0] or self.odd[0]:
            return None
        out = 1
        for d in self.even[1] + self.odd[1]:
            out *= d
        return out

    def suspend(self):
        return GradedGroup(self.modulus, self.odd, self.even)

    def parity_part(self, parity):
        return self.odd if parity else self.even

    def __str__(self):
        def part(rank, factors):
            bits = []
            ring = "Z" if self.modulus == 1 else f"Z[1/{self.modulus}]"
            if rank:
                bits.append(ring if rank == 1 else f"{ring}^{rank}")
            bits.extend(f"Z/{d}" for d in factors)
            return " + ".join(bits) if bits else "0"

        return f"even: {part(*self.even)}; odd: {part(*self.odd)}"


def _normalize_part(orders, m):
    """Invariant-factor form of one parity of a diagonal presentation.

    Returns ``(rank, factors, gens, proj)`` with ``gens``/``proj`` as lists of
    rows (old x new and new x old)."""
    n = len(orders)
    free = [i for i, d in enumerate(orders) if strip_units(d, m) == 0]
    tors = [i for i, d in enumerate(orders) if strip_units(d, m) > 1]
    factors = ()
    tgens = []
    tproj = []
    if tors:
        q = Quotient(IntMatrix.diag([orders[i] for i in tors]), len(tors), m)
        factors = q.orders
        tgens = q.gens.tolist()
        tproj = q.proj.tolist()
    k = len(free) + len(factors)
    gens = [[0] * k for _ in range(n)]
    proj = [[0] * n for _ in range(k)]
    for c, i in enumerate(free):
        gens[i][c] = 1
        proj[c][i] = 1
    for a, i in enumerate(tors):
        for c in range(len(factors)):
            gens[i][len(free) + c] = tgens[a][c]
            proj[len(free) + c][i] = tproj[c][a]
    return len(free), tuple(factors), gens, proj


def graded_direct_sum(groups, modulus=None):
    """Direct sum of graded groups brought back into invariant-factor form.

    Returns ``(G, injections, projections)``: ``injections[i]`` maps the
    coordinates of ``groups[i]`` into ``G``; ``projections[i]`` goes back.
    """
    groups = list(groups)
    m = modulus if modulus is not None else (groups[0].modulus if groups else 1)
    parts = []
    for parity in (0, 1):
        orders = []
        where = []
        for gi, g in enumerate(groups):
            rank, factors = g.parity_part(parity)
            offset = g.even_size if parity else 0
            for c, d in enumerate((0,) * rank + factors):
                orders.append(d)
                where.append((gi, offset + c))
        parts.append((orders, where, _normalize_part(orders, m)))
    (_, _, (re, fe, ge, pe)), (_, _, (ro, fo, go, po)) = parts
    total = GradedGroup(m, (re, fe), (ro, fo))
    ne = re + len(fe)
    injections = []
    projections = []
    for gi, g in enumerate(groups):
        inj = [[0] * g.size for _ in range(total.size)]
        prj = [[0] * total.size for _ in range(g.size)]
        for parity, (orders, where, (_, _, gens, proj)) in enumerate(parts):
            off = ne if parity else 0
            for a, (gj, c) in enumerate(where):
                if gj != gi:
                    continue
                for r in range(len(proj)):
                    inj[off + r][c] = proj[r][a]
                for r in range(len(gens[a])):
                    prj[c][off + r] = gens[a][r]
        injections.append(IntMatrix(inj, total.size, g.size, m, check=False))
        projections.append(reduce_into(IntMatrix(prj, g.size, total.size, m, check=False), g.orders))
    return total, injections, projections


def cyclic_sum(orders, parities, modulus=1):
    """Normalize a direct sum of cyclic groups ``Z[1/m]/d`` (d = 0 free) with
    the given parities.

    Returns ``(G, to_g, from_g)``: ``to_g`` (G x n) sends the old generators
    into ``G`` and ``from_g`` (n x G) goes back.
    """
    parts = []
    for d, par in zip(orders, parities):
        d = strip_units(d, modulus)
        part = (0, ()) if d == 1 else ((1, ()) if d == 0 else (0, (d,)))
        g = GradedGroup(modulus, part, (0, ())) if par == 0 else GradedGroup(modulus, (0, ()), part)
        parts.append(g)
    G, inj, prj = graded_direct_sum(parts, modulus)
    n = len(orders)
    to_g = [[0] * n for _ in range(G.size)]
    from_g = [[0] * G.size for _ in range(n)]
    for i in range(n):
        if parts[i].size:
            for r in range(G.size):
                to_g[r][i] = inj[i].data[r][0]
                from_g[i][r] = prj[i].data[0][r]
    return G, IntMatrix(to_g, G.size, n, modulus, check=False), IntMatrix(from_g, n, G.size, modulus, check=False)


def suspension_matrix(g):
    """Coordinates of ``g`` to coordinates of ``g.suspend()`` (a permutation)."""
    ne, no = g.even_size, g.odd_size
    out = [[0] * g.size for _ in range(g.size)]
    for c in range(ne):
        out[no + c][c] = 1
    for c in range(no):
        out[c][ne + c] = 1
    return IntMatrix(out, g.size, g.size, g.modulus, check=False)


def _orders_of(x):
    return x.orders if isinstance(x, GradedGroup) else tuple(x)


def exactness_witness(f, g, mid, codomain):
    """Check ``im f == ker g`` inside ``mid``.

    Returns None when exact, otherwise ``(kind, vector)`` where kind is
    ``"image_not_in_kernel"`` or ``"kernel_not_in_image"``.
    """
    mid_o = _orders_of(mid)
    cod_o = _orders_of(codomain)
    if f.rows != len(mid_o) or g.cols != len(mid_o) or g.rows != len(cod_o):
        raise ValueError("dimension mismatch between maps and groups")
    comp = g @ f
    if not is_zero_into(comp, cod_o):
        for j in range(f.cols):
            if not is_zero_into(comp.take(cols=[j]), cod_o):
                return "image_not_in_kernel", reduce_into(f.take(cols=[j]), mid_o)
    ker = kernel_mod(g, cod_o)
    if ker.cols == 0:
        return None
    solver = LinearSolver(f, mid_o, modulus=_lcm(f.modulus, g.modulus))
    for j in range(ker.cols):
        col = ker.take(cols=[j])
        if is_zero_into(col, mid_o):
            continue
        if solver.solve(col) is None:
            return "kernel_not_in_image", reduce_into(col, mid_o)
    return None


def image_equals_kernel(f, g, domain, mid, codomain):
    """True iff the image of ``f: domain -> mid`` equals the kernel of
    ``g: mid -> codomain``; the groups are GradedGroups or orders tuples."""
    if f.cols != len(_orders_of(domain)):
        raise ValueError("dimension mismatch between f and its domain")
    return exactness_witness(f, g, mid, codomain) is None
