"""Independent reference values used by the ``oracle`` command.

Each oracle computes its value along a route that shares no code with the
certificate it is compared against.
"""

from __future__ import annotations

import math
from fractions import Fraction

from scipy.integrate import quad


def fejer_density(n: int, theta: float) -> float:
    """F_n(theta) = (1/n) (sin(n theta / 2) / sin(theta / 2))^2, with F_n(0) = n."""
    s = math.sin(theta / 2)
    if abs(s) < 1e-12:
        return float(n)
    return (math.sin(n * theta / 2) / s) ** 2 / n


def circle_quadrature(n: int) -> float:
    """Integral of the geodesic distance |theta| against F_n d(theta) / 2 pi on [-pi, pi]."""
    if n < 1:
        raise ValueError(f"Fejer order must be >= 1, got {n}")
    # the integrand is even; split at the zeros of F_n so quad sees smooth pieces
    pts = [2 * math.pi * k / n for k in range(1, (n + 1) // 2 + 1) if 2 * math.pi * k / n < math.pi]
    val, err = quad(lambda t: t * fejer_density(n, t), 0.0, math.pi, points=pts or None, limit=400, epsabs=1e-13)
    return val / math.pi


def fejer_weighted_l1(n: int) -> Fraction:
    """sup over k of (1 - phi_n(k)) / |k| for phi_n(k) = (1 - |k|/n)_+, attained for every 1 <= k <= n."""
    if n < 1:
        raise ValueError(f"Fejer order must be >= 1, got {n}")
    # beyond k = n the ratio is 1/k, so scanning to n + 1 covers the sup
    return max((1 - max(Fraction(0), 1 - Fraction(k, n))) / k for k in range(1, n + 2))
