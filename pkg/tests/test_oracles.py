import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from scipy.integrate import trapezoid
from hypothesis import strategies as st

from qtrunc.oracles import circle_quadrature, fejer_density, fejer_weighted_l1


class TestFejerDensity:
    @pytest.mark.parametrize("n", [1, 2, 5, 9])
    def test_matches_fourier_series(self, n, rng):
        for t in rng.uniform(-math.pi, math.pi, size=10):
            ref = sum((1 - abs(k) / n) * math.cos(k * t) for k in range(-n + 1, n))
            assert fejer_density(n, t) == pytest.approx(ref, abs=1e-10)

    def test_peak(self):
        assert fejer_density(7, 0.0) == 7

    def test_normalized(self):
        t = np.linspace(-math.pi, math.pi, 20001)
        vals = np.array([fejer_density(6, x) for x in t])
        assert trapezoid(vals, t) / (2 * math.pi) == pytest.approx(1, abs=1e-8)


class TestCircleQuadrature:
    def test_n1_is_mean_distance(self):
        assert circle_quadrature(1) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_series_form(self):
        # the Fourier expansion of |theta| gives pi/2 - (4/pi) sum over odd k < n of (1 - k/n)/k^2
        for n in (2, 5, 16):
            ref = math.pi / 2 - 4 / math.pi * sum((1 - k / n) / k**2 for k in range(1, n, 2))
            assert circle_quadrature(n) == pytest.approx(ref, abs=1e-11)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            circle_quadrature(0)


@given(st.integers(1, 60))
def test_weighted_l1_oracle_is_reciprocal(n):
    assert fejer_weighted_l1(n) == Fraction(1, n)
