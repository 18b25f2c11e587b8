import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgring import _kernels_py as py
from kgring.kernels import BACKEND, compiled_kernels as cy

pytestmark = pytest.mark.skipif(cy is None, reason="compiled kernels not built")


def grids(bound):
    return st.tuples(st.integers(0, 7), st.integers(0, 7)).flatmap(
        lambda d: st.lists(st.lists(st.integers(-bound, bound), min_size=d[1], max_size=d[1]),
                           min_size=d[0], max_size=d[0]).map(lambda rows: (rows, d[0], d[1])))


SMALL = grids(5)
HUGE = grids(10 ** 30)


def test_backend_selected():
    assert BACKEND == "cython"


@settings(max_examples=300, deadline=None)
@given(st.one_of(SMALL, HUGE))
def test_smith_agrees(case):
    rows, n, m = case
    assert py.smith(rows, n, m) == cy.smith(rows, n, m)


@settings(max_examples=300, deadline=None)
@given(st.one_of(SMALL, HUGE))
def test_col_echelon_agrees(case):
    rows, n, m = case
    cols = [[rows[i][j] for i in range(n)] for j in range(m)]
    assert py.col_echelon(cols, n) == cy.col_echelon(cols, n)


@settings(max_examples=300, deadline=None)
@given(st.one_of(SMALL, HUGE), st.data())
def test_matmul_agrees(case, data):
    rows, n, m = case
    k = data.draw(st.integers(0, 5))
    b = data.draw(st.lists(st.lists(st.integers(-10 ** 12, 10 ** 12), min_size=k, max_size=k),
                           min_size=m, max_size=m))
    assert py.matmul(rows, b, m) == cy.matmul(rows, b, m)


def test_overflow_falls_back():
    big = 2 ** 62
    a = [[big, big], [big, -big]]
    assert cy.matmul(a, a, 2) == py.matmul(a, a, 2)
    assert cy.smith(a, 2, 2) == py.smith(a, 2, 2)


def test_fractions_fall_back():
    from fractions import Fraction

    a = [[Fraction(1, 2), 1], [0, 3]]
    assert cy.matmul(a, a, 2) == py.matmul(a, a, 2)
