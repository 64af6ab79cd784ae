from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from qtrunc.exact_lp import UnboundedLP, float_max, maximize, simplex_max


class TestSimplex:
    def test_textbook_problem(self):
        # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        r = simplex_max([3, 5], [[1, 0], [0, 2], [3, 2]], [4, 12, 18])
        assert r.value == 36
        assert r.x == (2, 6)
        assert r.exact and r.gap == 0

    def test_rational_optimum(self):
        r = simplex_max([1, 1], [[3, 1], [1, 3]], [1, 1])
        assert r.value == Fraction(1, 2)

    def test_unbounded(self):
        with pytest.raises(UnboundedLP):
            simplex_max([1, 0], [[0, 1]], [1])

    def test_requires_origin_feasible(self):
        with pytest.raises(ValueError):
            simplex_max([1], [[1]], [-1])

    def test_dispatch(self):
        assert maximize([1], [[2]], [1]).exact
        assert not maximize([1.0], [[2.0]], [1.0]).exact
        assert maximize([1.0], [[2.0]], [1.0]).value == pytest.approx(0.5)


@given(
    st.integers(1, 4).flatmap(
        lambda n: st.tuples(
            st.lists(st.integers(-4, 6), min_size=n, max_size=n),
            st.lists(st.lists(st.integers(0, 5), min_size=n, max_size=n), min_size=1, max_size=4),
            st.lists(st.integers(0, 9), min_size=4, max_size=4),
        )
    )
)
def test_exact_matches_highs(data):
    c, A, b = data
    b = b[: len(A)]
    # a box keeps every instance bounded
    n = len(c)
    A = A + [[int(i == j) for j in range(n)] for i in range(n)]
    b = b + [3] * n
    r = simplex_max(c, A, b)
    ref = linprog(-np.array(c, float), A_ub=np.array(A, float), b_ub=np.array(b, float), bounds=[(0, None)] * n, method="highs")
    assert float(r.value) == pytest.approx(-ref.fun, abs=1e-9)
    f = float_max(c, A, b)
    assert f.value == pytest.approx(float(r.value), abs=1e-7)
    assert f.gap < 1e-7
