"""Exact arithmetic in the cyclotomic field Q(zeta_N).

Elements are stored as rational coordinates in the power basis
1, z, ..., z^(phi(N)-1) where z = exp(2 pi i / N). Only what the finite
group tables need is provided: ring operations, complex conjugation,
equality, and conversion to Python numbers.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from numbers import Rational


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, lowest degree first."""
    if n < 1:
        raise ValueError(f"cyclotomic order must be positive, got {n}")
    num = [-1] + [0] * (n - 1) + [1]  # x^n - 1
    for d in range(1, n):
        if n % d == 0:
            num = _exact_divide(num, list(cyclotomic_polynomial(d)))
    return tuple(num)


def _exact_divide(num: list[int], den: list[int]) -> list[int]:
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    lead = den[-1]
    for i in range(len(out) - 1, -1, -1):
        q, r = divmod(num[i + len(den) - 1], lead)
        assert r == 0
        out[i] = q
        for j, c in enumerate(den):
            num[i + j] -= q * c
    assert not any(num[: len(den) - 1])
    return out


class Cyc:
    """An element of Q(zeta_N)."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs):
        deg = len(cyclotomic_polynomial(order)) - 1
        coeffs = [Fraction(c) for c in coeffs]
        if len(coeffs) > deg:
            coeffs = _reduce(order, coeffs)
        coeffs += [Fraction(0)] * (deg - len(coeffs))
        self.order = order
        self.coeffs = tuple(coeffs)

    @classmethod
    def rational(cls, order: int, value) -> "Cyc":
        return cls(order, [Fraction(value)])

    @classmethod
    def zeta(cls, order: int, k: int = 1) -> "Cyc":
        """zeta_order ** k."""
        k %= order
        return cls(order, [0] * k + [1])

    def _coerce(self, other) -> "Cyc":
        if isinstance(other, Cyc):
            if other.order != self.order:
                raise ValueError(f"mixing Q(zeta_{self.order}) with Q(zeta_{other.order})")
            return other
        if isinstance(other, (int, Rational)):
            return Cyc.rational(self.order, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Cyc(self.order, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return Cyc(self.order, [-a for a in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Rational)):
            return Cyc(self.order, [a * other for a in self.coeffs])
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        prod = [Fraction(0)] * (2 * len(self.coeffs))
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        prod[i + j] += a * b
        return Cyc(self.order, prod)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            return Cyc(self.order, [a / other for a in self.coeffs])
        return NotImplemented

    def conjugate(self) -> "Cyc":
        # z^k -> z^(N-k)
        out = [Fraction(0)] * self.order
        for k, a in enumerate(self.coeffs):
            if a:
                out[(-k) % self.order] += a
        return Cyc(self.order, out)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return self.coeffs[0]

    def __complex__(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.order)
        return complex(sum(float(a) * z**k for k, a in enumerate(self.coeffs)))

    def __eq__(self, other):
        if isinstance(other, (int, Rational)):
            return self.is_rational() and self.coeffs[0] == other
        if isinstance(other, Cyc):
            return self.order == other.order and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        if self.is_rational():
            return hash(self.coeffs[0])
        return hash((self.order, self.coeffs))

    def __bool__(self):
        return any(self.coeffs)

    def __repr__(self):
        if self.is_rational():
            return f"Cyc({self.order}, {self.coeffs[0]})"
        terms = [f"{a}*z^{k}" for k, a in enumerate(self.coeffs) if a]
        return f"Cyc({self.order}, {' + '.join(terms)})"

    def to_json(self) -> list[list[int]]:
        return [[a.numerator, a.denominator] for a in self.coeffs]

    @classmethod
    def from_json(cls, order: int, data) -> "Cyc":
        return cls(order, [Fraction(p, q) for p, q in data])


def _reduce(order: int, coeffs: list[Fraction]) -> list[Fraction]:
    phi = cyclotomic_polynomial(order)
    deg = len(phi) - 1
    coeffs = list(coeffs)
    # Phi is monic: x^deg = -sum(phi[j] x^j)
    for i in range(len(coeffs) - 1, deg - 1, -1):
        c = coeffs[i]
        if c:
            coeffs[i] = Fraction(0)
            for j in range(deg):
                coeffs[i - deg + j] -= c * phi[j]
    return coeffs[:deg]
