# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integer kernels.

Each function first tries a fixed-width int64 path with checked arithmetic.
Any non-int entry, any entry outside int64, or any intermediate overflow
sends the call to the arbitrary-precision versions in ``_kernels_py``, so
results always match the pure-Python backend exactly.
"""

from libc.stdlib cimport malloc, free

from kgring import _kernels_py as _py

cdef extern from *:
    """
    static inline int ck_mul(long long a, long long b, long long *r) {
        return __builtin_mul_overflow(a, b, r);
    }
    static inline int ck_sub(long long a, long long b, long long *r) {
        return __builtin_sub_overflow(a, b, r);
    }
    static inline int ck_add(long long a, long long b, long long *r) {
        return __builtin_add_overflow(a, b, r);
    }
    """
    int ck_mul(long long a, long long b, long long *r) nogil
    int ck_sub(long long a, long long b, long long *r) nogil
    int ck_add(long long a, long long b, long long *r) nogil

cdef long long INT64_MAX_ = 9223372036854775807
cdef long long INT64_MIN_ = -9223372036854775807 - 1


cdef inline long long floordiv(long long a, long long b) nogil:
    # Python semantics (round toward minus infinity); b != 0
    cdef long long q = a / b
    if (a % b != 0) and ((a < 0) != (b < 0)):
        q -= 1
    return q


cdef inline long long llabs_(long long a) nogil:
    return -a if a < 0 else a


cdef int _fill(long long *dst, object rows, Py_ssize_t nr, Py_ssize_t nc) except -1:
    """Copy a list of lists into a C buffer; returns 1 if some entry is not a
    small int (caller falls back)."""
    cdef Py_ssize_t i, j
    cdef object x
    for i in range(nr):
        row = rows[i]
        for j in range(nc):
            x = row[j]
            if type(x) is not int:
                return 1
            if x > INT64_MAX_ or x < -INT64_MAX_:
                return 1
            dst[i * nc + j] = x
    return 0


cdef list _to_rows(long long *src, Py_ssize_t nr, Py_ssize_t nc):
    cdef Py_ssize_t i, j
    cdef list out = []
    for i in range(nr):
        out.append([src[i * nc + j] for j in range(nc)])
    return out


def matmul(a, b, inner):
    cdef Py_ssize_t r = len(a)
    cdef Py_ssize_t n = inner
    cdef Py_ssize_t c
    if r == 0 or n == 0:
        return _py.matmul(a, b, inner)
    c = len(b[0])
    cdef long long *A = <long long *> malloc(max(r * n, 1) * sizeof(long long))
    cdef long long *B = <long long *> malloc(max(n * c, 1) * sizeof(long long))
    cdef long long *C = <long long *> malloc(max(r * c, 1) * sizeof(long long))
    cdef Py_ssize_t i, j, k
    cdef long long x, t, s
    cdef int bad = 0
    try:
        if _fill(A, a, r, n) or _fill(B, b, n, c):
            return _py.matmul(a, b, inner)
        for i in range(r * c):
            C[i] = 0
        with nogil:
            for i in range(r):
                for k in range(n):
                    x = A[i * n + k]
                    if x == 0:
                        continue
                    for j in range(c):
                        if B[k * c + j] == 0:
                            continue
                        if ck_mul(x, B[k * c + j], &t) or ck_add(C[i * c + j], t, &s):
                            bad = 1
                            break
                        C[i * c + j] = s
                    if bad:
                        break
                if bad:
                    break
        if bad:
            return _py.matmul(a, b, inner)
        return _to_rows(C, r, c)
    finally:
        free(A)
        free(B)
        free(C)


cdef int _axpy(long long *dst, long long *src, long long q, Py_ssize_t start, Py_ssize_t stop) nogil:
    """dst[t] -= q * src[t] over [start, stop); 1 on overflow."""
    cdef Py_ssize_t t
    cdef long long prod, res
    for t in range(start, stop):
        if src[t] == 0:
            continue
        if ck_mul(q, src[t], &prod) or ck_sub(dst[t], prod, &res):
            return 1
        dst[t] = res
    return 0


cdef int _echelon64(long long *aug, Py_ssize_t n, Py_ssize_t nrows, Py_ssize_t *pivots, Py_ssize_t *npiv) nogil:
    """In-place echelon on n augmented columns of length nrows + n (stored
    column-major).  Mirrors _kernels_py.col_echelon step for step."""
    cdef Py_ssize_t width = nrows + n
    cdef Py_ssize_t k = 0, r, j, piv, t, left
    cdef long long a, q, best, tmp, rem
    cdef int any_other
    for r in range(nrows):
        if k == n:
            break
        # is there a nonzero entry at row r among columns k..n-1?
        piv = -1
        for j in range(k, n):
            if aug[j * width + r] != 0:
                piv = j
                break
        if piv < 0:
            continue
        while True:
            # smallest |entry| among nonzero, first occurrence wins
            piv = -1
            best = 0
            for j in range(k, n):
                tmp = aug[j * width + r]
                if tmp != 0:
                    if tmp == INT64_MIN_:
                        return 1
                    if piv < 0 or llabs_(tmp) < best:
                        piv = j
                        best = llabs_(tmp)
            any_other = 0
            a = aug[piv * width + r]
            for j in range(k, n):
                if j == piv or aug[j * width + r] == 0:
                    continue
                q = floordiv(aug[j * width + r], a)
                rem = aug[j * width + r] - q * a
                if llabs_(rem) > llabs_(a) - llabs_(rem):
                    q += 1
                if q != 0:
                    if _axpy(aug + j * width, aug + piv * width, q, r, width):
                        return 1
            for j in range(k, n):
                if j != piv and aug[j * width + r] != 0:
                    any_other = 1
                    break
            if not any_other:
                break
        # the remaining nonzero column: the first in k..n-1
        for j in range(k, n):
            if aug[j * width + r] != 0:
                piv = j
                break
        if piv != k:
            for t in range(width):
                tmp = aug[piv * width + t]
                aug[piv * width + t] = aug[k * width + t]
                aug[k * width + t] = tmp
        if aug[k * width + r] < 0:
            for t in range(r, width):
                if aug[k * width + t] == INT64_MIN_:
                    return 1
                aug[k * width + t] = -aug[k * width + t]
        a = aug[k * width + r]
        for left in range(k):
            q = floordiv(aug[left * width + r], a)
            if q != 0:
                if _axpy(aug + left * width, aug + k * width, q, r, width):
                    return 1
        pivots[k] = r
        k += 1
    npiv[0] = k
    return 0


def col_echelon(cols, nrows):
    cdef Py_ssize_t n = len(cols)
    cdef Py_ssize_t nr = nrows
    cdef Py_ssize_t width = nr + n
    cdef Py_ssize_t j, t, npiv = 0
    cdef int bad
    cdef object x
    if n == 0:
        return _py.col_echelon(cols, nrows)
    cdef long long *aug = <long long *> malloc(max(n * width, 1) * sizeof(long long))
    cdef Py_ssize_t *piv = <Py_ssize_t *> malloc(max(n, 1) * sizeof(Py_ssize_t))
    try:
        for j in range(n):
            col = cols[j]
            for t in range(nr):
                x = col[t]
                if type(x) is not int or x > INT64_MAX_ or x < -INT64_MAX_:
                    return _py.col_echelon(cols, nrows)
                aug[j * width + t] = x
            for t in range(n):
                aug[j * width + nr + t] = 1 if t == j else 0
        with nogil:
            bad = _echelon64(aug, n, nr, piv, &npiv)
        if bad:
            return _py.col_echelon(cols, nrows)
        h = [[aug[j * width + t] for t in range(nr)] for j in range(n)]
        v = [[aug[j * width + nr + t] for t in range(n)] for j in range(n)]
        return h, v, [piv[j] for j in range(npiv)]
    finally:
        free(aug)
        free(piv)


cdef int _xgcd64(long long a, long long b, long long *g, long long *x, long long *y) nogil:
    cdef long long x0 = 1, x1 = 0, y0 = 0, y1 = 1, q, r, t
    while b != 0:
        q = floordiv(a, b)
        r = a - q * b
        a = b
        b = r
        if ck_mul(q, x1, &t) or ck_sub(x0, t, &t):
            return 1
        x0, x1 = x1, t
        if ck_mul(q, y1, &t) or ck_sub(y0, t, &t):
            return 1
        y0, y1 = y1, t
    g[0] = a
    x[0] = x0
    y[0] = y0
    return 0


cdef int _comb(long long *u, long long *w, long long p, long long q, long long r, long long s) nogil:
    # (u, w) <- (p u + q w, r u + s w), one entry
    cdef long long a, b, c, d
    if ck_mul(p, u[0], &a) or ck_mul(q, w[0], &b) or ck_add(a, b, &a):
        return 1
    if ck_mul(r, u[0], &c) or ck_mul(s, w[0], &d) or ck_add(c, d, &c):
        return 1
    u[0] = a
    w[0] = c
    return 0


cdef int _rowcomb(long long *mat, Py_ssize_t nc, Py_ssize_t i, Py_ssize_t j,
                  long long p, long long q, long long r, long long s) nogil:
    cdef Py_ssize_t t
    for t in range(nc):
        if _comb(mat + i * nc + t, mat + j * nc + t, p, q, r, s):
            return 1
    return 0


cdef int _colcomb(long long *mat, Py_ssize_t nr, Py_ssize_t nc, Py_ssize_t i, Py_ssize_t j,
                  long long p, long long q, long long r, long long s) nogil:
    cdef Py_ssize_t t
    for t in range(nr):
        if _comb(mat + t * nc + i, mat + t * nc + j, p, q, r, s):
            return 1
    return 0


cdef int _smith64(long long *a, long long *u, long long *v, Py_ssize_t nr, Py_ssize_t nc) nogil:
    """Mirrors _kernels_py.smith step for step."""
    cdef Py_ssize_t t = 0, i, j, bi, bj, bad
    cdef long long best, x, g, p, q, at, ax, piv, tmp
    cdef Py_ssize_t lim = nr if nr < nc else nc
    cdef int done
    while t < lim:
        bi = -1
        best = 0
        for i in range(t, nr):
            for j in range(t, nc):
                x = a[i * nc + j]
                if x != 0:
                    if x == INT64_MIN_:
                        return 1
                    if bi < 0 or llabs_(x) < best:
                        best = llabs_(x)
                        bi = i
                        bj = j
        if bi < 0:
            break
        if bi != t:
            for j in range(nc):
                tmp = a[bi * nc + j]; a[bi * nc + j] = a[t * nc + j]; a[t * nc + j] = tmp
            for j in range(nr):
                tmp = u[bi * nr + j]; u[bi * nr + j] = u[t * nr + j]; u[t * nr + j] = tmp
        if bj != t:
            for i in range(nr):
                tmp = a[i * nc + bj]; a[i * nc + bj] = a[i * nc + t]; a[i * nc + t] = tmp
            for i in range(nc):
                tmp = v[i * nc + bj]; v[i * nc + bj] = v[i * nc + t]; v[i * nc + t] = tmp
        while True:
            done = 1
            for i in range(t + 1, nr):
                x = a[i * nc + t]
                if x != 0:
                    if x % a[t * nc + t] == 0:
                        p = 1; q = 0; at = 1
                        ax = x / a[t * nc + t]
                    else:
                        if _xgcd64(a[t * nc + t], x, &g, &p, &q):
                            return 1
                        at = a[t * nc + t] / g
                        ax = x / g
                    if _rowcomb(a, nc, t, i, p, q, -ax, at) or _rowcomb(u, nr, t, i, p, q, -ax, at):
                        return 1
            for j in range(t + 1, nc):
                x = a[t * nc + j]
                if x != 0:
                    if x % a[t * nc + t] == 0:
                        p = 1; q = 0; at = 1
                        ax = x / a[t * nc + t]
                    else:
                        if _xgcd64(a[t * nc + t], x, &g, &p, &q):
                            return 1
                        at = a[t * nc + t] / g
                        ax = x / g
                    if _colcomb(a, nr, nc, t, j, p, q, -ax, at) or _colcomb(v, nc, nc, t, j, p, q, -ax, at):
                        return 1
            for i in range(t + 1, nr):
                if a[i * nc + t] != 0:
                    done = 0
                    break
            if done:
                piv = a[t * nc + t]
                bad = -1
                for i in range(t + 1, nr):
                    for j in range(t + 1, nc):
                        if a[i * nc + j] % piv != 0:
                            bad = i
                            break
                    if bad >= 0:
                        break
                if bad < 0:
                    break
                for j in range(nc):
                    if ck_add(a[t * nc + j], a[bad * nc + j], &tmp):
                        return 1
                    a[t * nc + j] = tmp
                for j in range(nr):
                    if ck_add(u[t * nr + j], u[bad * nr + j], &tmp):
                        return 1
                    u[t * nr + j] = tmp
        if a[t * nc + t] < 0:
            for j in range(nc):
                a[t * nc + j] = -a[t * nc + j]
            for j in range(nr):
                u[t * nr + j] = -u[t * nr + j]
        t += 1
    return 0


def smith(rows, nrows, ncols):
    cdef Py_ssize_t nr = nrows, nc = ncols, i
    cdef int bad
    if nr == 0 or nc == 0:
        return _py.smith(rows, nrows, ncols)
    cdef long long *a = <long long *> malloc(nr * nc * sizeof(long long))
    cdef long long *u = <long long *> malloc(nr * nr * sizeof(long long))
    cdef long long *v = <long long *> malloc(nc * nc * sizeof(long long))
    try:
        if _fill(a, rows, nr, nc):
            return _py.smith(rows, nrows, ncols)
        for i in range(nr * nr):
            u[i] = 1 if i % (nr + 1) == 0 else 0
        for i in range(nc * nc):
            v[i] = 1 if i % (nc + 1) == 0 else 0
        with nogil:
            bad = _smith64(a, u, v, nr, nc)
        if bad:
            return _py.smith(rows, nrows, ncols)
        return _to_rows(u, nr, nr), _to_rows(a, nr, nc), _to_rows(v, nc, nc)
    finally:
        free(a)
        free(u)
        free(v)
