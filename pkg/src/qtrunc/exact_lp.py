"""Exact rational simplex for small LPs, with floating-point fallback.

Solves   maximize c.x  subject to  A x <= b,  x >= 0   with b >= 0,
so the slack basis is feasible from the start and no phase one is needed.
Bland's rule guarantees termination. The optimal dual y is read off the
final tableau and checked: y >= 0, A^T y >= c and b.y == c.x exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import ConvergenceError, PreconditionError

EXACT_DIMENSION_LIMIT = 64


class UnboundedLP(PreconditionError):
    pass


@dataclass(frozen=True)
class LPResult:
    value: Fraction | float
    x: tuple
    y: tuple
    exact: bool
    iterations: int = 0

    @property
    def gap(self):
        """Duality gap b.y - c.x (zero for exact solves)."""
        return 0 if self.exact else self._gap

    _gap: float = 0.0


def simplex_max(c: Sequence, A: Sequence[Sequence], b: Sequence, max_pivots: int = 100_000) -> LPResult:
    """Exact solve over the rationals."""
    c = [Fraction(v) for v in c]
    A = [[Fraction(v) for v in row] for row in A]
    b = [Fraction(v) for v in b]
    m, n = len(A), len(c)
    if any(len(row) != n for row in A) or len(b) != m:
        raise PreconditionError("inconsistent LP dimensions")
    if any(v < 0 for v in b):
        raise PreconditionError("simplex_max needs b >= 0 (origin feasible)")
    # tableau rows: [A | I | b]; objective row: [-c | 0 | 0]
    T = [A[i] + [Fraction(int(i == j)) for j in range(m)] + [b[i]] for i in range(m)]
    z = [-v for v in c] + [Fraction(0)] * m + [Fraction(0)]
    basis = [n + i for i in range(m)]
    pivots = 0
    while True:
        enter = next((j for j in range(n + m) if z[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            if T[i][enter] > 0:
                ratio = T[i][-1] / T[i][enter]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise UnboundedLP("LP is unbounded; the Lip-norm is degenerate on this system (see radius_estimate)")
        r = best[1]
        piv = T[r][enter]
        T[r] = [v / piv for v in T[r]]
        for i in range(m):
            if i != r and T[i][enter] != 0:
                f = T[i][enter]
                T[i] = [a - f * bb for a, bb in zip(T[i], T[r])]
        if z[enter] != 0:
            f = z[enter]
            z = [a - f * bb for a, bb in zip(z, T[r])]
        basis[r] = enter
        pivots += 1
        if pivots > max_pivots:
            raise ConvergenceError("simplex pivot limit reached")
    x = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            x[j] = T[i][-1]
    y = [z[n + i] for i in range(m)]
    value = z[-1]
    _check_certificate(c, A, b, x, y, value)
    return LPResult(value, tuple(x), tuple(y), True, pivots)


def _check_certificate(c, A, b, x, y, value) -> None:
    m, n = len(A), len(c)
    assert all(v >= 0 for v in x) and all(v >= 0 for v in y)
    assert all(sum(A[i][j] * x[j] for j in range(n)) <= b[i] for i in range(m))
    assert all(sum(A[i][j] * y[i] for i in range(m)) >= c[j] for j in range(n))
    assert sum(ci * xi for ci, xi in zip(c, x)) == value == sum(bi * yi for bi, yi in zip(b, y))


def float_max(c, A, b) -> LPResult:
    """HiGHS solve with an explicit dual-feasibility check."""
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    res = linprog(-c, A_ub=A, b_ub=b, bounds=[(0, None)] * len(c), method="highs")
    if res.status == 3:
        raise UnboundedLP("LP is unbounded; the Lip-norm is degenerate on this system (see radius_estimate)")
    if res.status != 0:
        raise ConvergenceError(f"LP solver failed: {res.message}")
    y = -np.asarray(res.ineqlin.marginals)
    y = np.maximum(y, 0.0)
    infeas = float(np.max(np.maximum(c - A.T @ y, 0.0), initial=0.0))
    if infeas > 1e-7 * max(1.0, float(np.abs(c).max(initial=0.0))):
        raise ConvergenceError(f"dual infeasibility {infeas:.3g} after LP solve")
    primal = float(c @ res.x)
    dual = float(b @ y)
    out = LPResult(primal, tuple(res.x), tuple(y), False)
    object.__setattr__(out, "_gap", max(0.0, dual - primal))
    return out


def maximize(c, A, b, *, exact: bool | None = None) -> LPResult:
    """Exact when all data are rational and the problem is small, HiGHS otherwise."""
    rational = all(isinstance(v, (int, Fraction)) for v in list(c) + list(b) + [a for row in A for a in row])
    if exact is None:
        exact = rational and len(c) <= EXACT_DIMENSION_LIMIT
    if exact:
        return simplex_max(c, A, b)
    return float_max(c, A, b)
