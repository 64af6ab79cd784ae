import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtrunc.cyclotomic import Cyc, cyclotomic_polynomial


class TestCyclotomicPolynomial:
    @pytest.mark.parametrize(
        "n,coeffs",
        [(1, (-1, 1)), (2, (1, 1)), (3, (1, 1, 1)), (4, (1, 0, 1)), (6, (1, -1, 1)), (12, (1, 0, -1, 0, 1))],
    )
    def test_small_orders(self, n, coeffs):
        assert tuple(cyclotomic_polynomial(n)) == coeffs

    @pytest.mark.parametrize("n", range(1, 25))
    def test_roots_are_primitive(self, n):
        p = np.array(cyclotomic_polynomial(n)[::-1], dtype=float)
        z = cmath.exp(2j * cmath.pi / n)
        assert abs(np.polyval(p, z)) < 1e-9


class TestCyc:
    def test_zeta_power_is_one(self):
        z = Cyc.zeta(5)
        acc = Cyc.rational(5, 1)
        for _ in range(5):
            acc = acc * z
        assert acc == Cyc.rational(5, 1)

    def test_sum_of_roots_vanishes(self):
        s = sum((Cyc.zeta(6, k) for k in range(6)), Cyc.rational(6, 0))
        assert s == Cyc.rational(6, 0)
        assert not s

    def test_conjugate_and_rational(self):
        z = Cyc.zeta(3)
        w = z + z.conjugate()
        assert w.is_rational
        assert w.to_fraction() == Fraction(-1)

    def test_complex_value(self):
        z = Cyc.zeta(8, 3)
        assert abs(complex(z) - cmath.exp(2j * cmath.pi * 3 / 8)) < 1e-14

    def test_json_round_trip(self):
        z = Cyc.zeta(12, 5) * Fraction(3, 7) + Fraction(1, 2)
        assert Cyc.from_json(12, z.to_json()) == z


@given(st.integers(1, 12), st.lists(st.integers(-5, 5), min_size=1, max_size=6), st.lists(st.integers(-5, 5), min_size=1, max_size=6))
def test_product_matches_complex(order, a, b):
    x = sum((Cyc.zeta(order, k) * c for k, c in enumerate(a)), Cyc.rational(order, 0))
    y = sum((Cyc.zeta(order, k) * c for k, c in enumerate(b)), Cyc.rational(order, 0))
    assert abs(complex(x * y) - complex(x) * complex(y)) < 1e-9
    assert abs(complex(x - y) - (complex(x) - complex(y))) < 1e-9
