"""Pure-Python reference versions of the integer kernels.

Matrices are plain lists of lists of Python ints (row-major unless a
function says columns).  The compiled module ``kgring._kernels`` exposes the
same three functions with identical results; :mod:`kgring.kernels` picks one
at import time.
"""


def matmul(a, b, inner):
    """Product of ``a`` (r x inner) and ``b`` (inner x c), entries of any
    exact numeric type.  ``inner`` is passed so empty shapes are unambiguous.
    """
    if not a:
        return []
    if inner == 0:
        ncols = len(b[0]) if b else 0
        return [[0] * ncols for _ in a]
    ncols = len(b[0])
    out = []
    for row in a:
        acc = [0] * ncols
        for k, x in enumerate(row):
            if x:
                brow = b[k]
                for j in range(ncols):
                    y = brow[j]
                    if y:
                        acc[j] += x * y
        out.append(acc)
    return out


def col_echelon(cols, nrows):
    """Column-style Hermite reduction of an integer matrix given by columns.

    Returns ``(h, v, pivots)`` where ``h`` and ``v`` are lists of columns with
    ``A @ V = H``, ``V`` unimodular, and ``H`` lower echelon: column ``k`` has
    its first nonzero entry (positive) at row ``pivots[k]`` and the pivot rows
    increase strictly.  Columns past ``len(pivots)`` are zero, so the matching
    columns of ``V`` span the integer kernel.
    """
    n = len(cols)
    width = nrows + n
    aug = []
    for j, col in enumerate(cols):
        c = list(col)
        e = [0] * n
        e[j] = 1
        aug.append(c + e)
    pivots = []
    k = 0
    for r in range(nrows):
        if k == n:
            break
        nz = [j for j in range(k, n) if aug[j][r]]
        if not nz:
            continue
        while len(nz) > 1:
            piv = min(nz, key=lambda j: abs(aug[j][r]))
            pc = aug[piv]
            a = pc[r]
            for j in nz:
                if j == piv:
                    continue
                cj = aug[j]
                q, rem = divmod(cj[r], a)
                if 2 * abs(rem) > abs(a):
                    q += 1  # nearest quotient: smaller remainders, slower growth
                if q:
                    for t in range(r, width):
                        y = pc[t]
                        if y:
                            cj[t] -= q * y
            nz = [j for j in nz if aug[j][r]]
        j = nz[0]
        if j != k:
            aug[j], aug[k] = aug[k], aug[j]
        pc = aug[k]
        if pc[r] < 0:
            for t in range(r, width):
                pc[t] = -pc[t]
        a = pc[r]
        # keep entries left of the pivot in [0, a)
        for left in range(k):
            cl = aug[left]
            q = cl[r] // a
            if q:
                for t in range(r, width):
                    y = pc[t]
                    if y:
                        cl[t] -= q * y
        pivots.append(r)
        k += 1
    h = [c[:nrows] for c in aug]
    v = [c[nrows:] for c in aug]
    return h, v, pivots


def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def smith(rows, nrows, ncols):
    """Smith normal form of an integer matrix.

    Returns ``(u, d, v)`` (row-major lists) with ``u @ a @ v == d``, ``u`` and
    ``v`` unimodular, ``d`` diagonal with nonnegative entries forming a
    divisibility chain (zeros last).
    """
    a = [list(r) for r in rows]
    u = [[int(i == j) for j in range(nrows)] for i in range(nrows)]
    v = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def row_comb(mat, i, j, p, q, r, s):
        # (row_i, row_j) <- (p row_i + q row_j, r row_i + s row_j)
        ri, rj = mat[i], mat[j]
        mat[i] = [p * x + q * y for x, y in zip(ri, rj)]
        mat[j] = [r * x + s * y for x, y in zip(ri, rj)]

    def col_comb(mat, i, j, p, q, r, s):
        # (col_i, col_j) <- (p col_i + q col_j, r col_i + s col_j)
        for row in mat:
            x, y = row[i], row[j]
            row[i] = p * x + q * y
            row[j] = r * x + s * y

    t = 0
    while t < min(nrows, ncols):
        # pivot: smallest nonzero entry in the trailing block
        best = None
        for i in range(t, nrows):
            ri = a[i]
            for j in range(t, ncols):
                x = ri[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
        if best is None:
            break
        _, i, j = best
        if i != t:
            a[i], a[t] = a[t], a[i]
            u[i], u[t] = u[t], u[i]
        if j != t:
            for mat in (a, v):
                for row in mat:
                    row[j], row[t] = row[t], row[j]
        while True:
            done = True
            # clear column t below the pivot
            for i in range(t + 1, nrows):
                x = a[i][t]
                if x:
                    if x % a[t][t] == 0:
                        p, q, ax, at = 1, 0, x // a[t][t], 1
                    else:
                        g, p, q = _xgcd(a[t][t], x)
                        at, ax = a[t][t] // g, x // g
                    row_comb(a, t, i, p, q, -ax, at)
                    row_comb(u, t, i, p, q, -ax, at)
            # clear row t right of the pivot
            for j in range(t + 1, ncols):
                x = a[t][j]
                if x:
                    if x % a[t][t] == 0:
                        p, q, ax, at = 1, 0, x // a[t][t], 1
                    else:
                        g, p, q = _xgcd(a[t][t], x)
                        at, ax = a[t][t] // g, x // g
                    col_comb(a, t, j, p, q, -ax, at)
                    col_comb(v, t, j, p, q, -ax, at)
            if any(a[i][t] for i in range(t + 1, nrows)):
                done = False
            if done:
                # divisibility: pivot must divide the trailing block
                piv = a[t][t]
                bad = None
                for i in range(t + 1, nrows):
                    for j in range(t + 1, ncols):
                        if a[i][j] % piv:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                # fold the offending row into row t and redo
                a[t] = [x + y for x, y in zip(a[t], a[bad])]
                u[t] = [x + y for x, y in zip(u[t], u[bad])]
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return u, a, v
