"""Finitely supported functions on a group, as elements of its group C*-algebra.

Products are convolutions, ``a*`` is ``x -> conj(a(x^-1))``, the Haar state
evaluates at the identity and the counit sums the coefficients. Operator
norms in the left regular representation are reported as two-sided
estimates: the lower end comes from compressing ``lambda(a)`` to
``l2(ball(window))``, the upper end from the l1 norm or a tighter certified
value (exact for finite groups, Fourier side for abelian ones).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.sparse as sp

from . import groups
from .errors import PreconditionError, StructuralError
from .groups import Element, GroupId

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000


class AlgebraElement:
    """Immutable sparse map group element -> complex coefficient, zeros dropped."""

    __slots__ = ("group", "_c")

    def __init__(self, group: GroupId, coeffs: Mapping[Element, complex] | None = None):
        c = {}
        for x, v in (coeffs or {}).items():
            group._check(x)
            v = complex(v)
            if v != 0:
                c[x] = v
        self.group = group
        self._c = c

    @classmethod
    def _trusted(cls, group: GroupId, c: dict) -> "AlgebraElement":
        obj = object.__new__(cls)
        obj.group = group
        obj._c = {x: v for x, v in c.items() if v != 0}
        return obj

    @classmethod
    def delta(cls, group: GroupId, x, coeff: complex = 1.0) -> "AlgebraElement":
        return cls(group, {group.element(x): coeff})

    @classmethod
    def unit(cls, group: GroupId) -> "AlgebraElement":
        return cls(group, {group.identity: 1.0})

    @classmethod
    def zero(cls, group: GroupId) -> "AlgebraElement":
        return cls(group, {})

    # -- access -------------------------------------------------------------------

    def __getitem__(self, x) -> complex:
        return self._c.get(x, 0j)

    @property
    def support(self) -> list[Element]:
        return sorted(self._c)

    def items(self) -> list[tuple[Element, complex]]:
        return sorted(self._c.items())

    def __len__(self):
        return len(self._c)

    def __bool__(self):
        return bool(self._c)

    @property
    def radius(self) -> int:
        """Largest word length in the support (0 for the zero element)."""
        return groups.support_radius(self.group, self._c)

    def l1(self) -> float:
        return math.fsum(abs(v) for v in self._c.values())

    def l2(self) -> float:
        return math.sqrt(math.fsum(abs(v) ** 2 for v in self._c.values()))

    # -- arithmetic -----------------------------------------------------------------

    def _same_group(self, other: "AlgebraElement") -> None:
        if other.group != self.group:
            raise StructuralError(f"elements of {self.group} and {other.group} cannot be combined")

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._same_group(other)
        c = dict(self._c)
        for x, v in other._c.items():
            c[x] = c.get(x, 0j) + v
        return AlgebraElement._trusted(self.group, c)

    def __neg__(self):
        return AlgebraElement._trusted(self.group, {x: -v for x, v in self._c.items()})

    def __sub__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return convolve(self, other)
        if isinstance(other, (int, float, complex, np.number)):
            return AlgebraElement._trusted(self.group, {x: v * other for x, v in self._c.items()})
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def star(self) -> "AlgebraElement":
        return involution(self)

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.group == other.group and self._c == other._c

    __hash__ = None

    def allclose(self, other: "AlgebraElement", atol: float = 1e-12) -> bool:
        self._same_group(other)
        keys = set(self._c) | set(other._c)
        return all(abs(self[x] - other[x]) <= atol for x in keys)

    def is_self_adjoint(self, atol: float = 0.0) -> bool:
        return self.allclose(self.star(), atol)

    def symmetrize(self) -> "AlgebraElement":
        """(a + a*) / 2."""
        return (self + self.star()) * 0.5

    def __repr__(self):
        terms = ", ".join(f"{x!r}: {v:.6g}" for x, v in self.items())
        return f"AlgebraElement({self.group}, {{{terms}}})"

    # -- serialization ----------------------------------------------------------------

    def to_json(self) -> list:
        """Lexicographically ordered (normal form, re, im) triples."""
        return [[_nf_json(x), v.real, v.imag] for x, v in self.items()]

    @classmethod
    def from_json(cls, group: GroupId, data: Iterable) -> "AlgebraElement":
        return cls(group, {group.element(x): complex(re, im) for x, re, im in data})


def _nf_json(x):
    return list(x) if isinstance(x, tuple) else x


def convolve(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """(a*b)(z) = sum over xy = z of a(x) b(y)."""
    a._same_group(b)
    g = a.group
    out: dict = {}
    for x, u in a._c.items():
        for y, v in b._c.items():
            z = g._mul(x, y)
            out[z] = out.get(z, 0j) + u * v
    return AlgebraElement._trusted(g, out)


def involution(a: AlgebraElement) -> AlgebraElement:
    g = a.group
    return AlgebraElement._trusted(g, {g._inv(x): v.conjugate() for x, v in a._c.items()})


def haar_state(a: AlgebraElement) -> complex:
    """Tracial state: the coefficient at the identity."""
    return a[a.group.identity]


def counit(a: AlgebraElement) -> complex:
    """Trivial representation: the sum of all coefficients."""
    return complex(math.fsum(v.real for v in a._c.values()), math.fsum(v.imag for v in a._c.values()))


def random_self_adjoint(
    g: GroupId,
    radius: int,
    rng: np.random.Generator,
    *,
    density: float = 1.0,
    complex_coeffs: bool = True,
) -> AlgebraElement:
    """Random a = a* supported in ball(radius); one draw per {x, x^-1} orbit."""
    c = {}
    for x in groups.enumerate_ball(g, radius):
        xi = g._inv(x)
        if xi < x:
            continue
        if density < 1.0 and rng.random() >= density:
            continue
        re = rng.standard_normal()
        if x == xi:
            c[x] = complex(re)
        else:
            im = rng.standard_normal() if complex_coeffs else 0.0
            c[x] = complex(re, im)
            c[xi] = complex(re, -im)
    return AlgebraElement._trusted(g, c)


# -- operator norms ------------------------------------------------------------------------


@dataclass(frozen=True)
class NormEstimate:
    lower: float
    upper: float
    window: int | None = None
    iterations: int = 0
    converged: bool = True
    method: str = ""

    def __post_init__(self):
        if self.lower > self.upper:
            raise AssertionError(f"lower {self.lower} exceeds upper {self.upper}")

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "window": self.window}


def ball_index(g: GroupId, window: int) -> tuple[list, dict]:
    ball = groups.enumerate_ball(g, window)
    return ball, {x: i for i, x in enumerate(ball)}


def window_matrix(a: AlgebraElement, window: int, weight=None) -> sp.csr_matrix:
    """Compression of lambda(a) to l2(ball(window)); entry (z, y) is a(z y^-1).

    ``weight(z, y)`` multiplies each entry when given (used for commutators).
    """
    g = a.group
    ball, index = ball_index(g, window)
    rows, cols, vals = [], [], []
    for j, y in enumerate(ball):
        for x, v in a._c.items():
            z = g._mul(x, y)
            i = index.get(z)
            if i is None:
                continue
            w = v if weight is None else v * weight(z, y)
            if w != 0:
                rows.append(i)
                cols.append(j)
                vals.append(w)
    n = len(ball)
    return sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=(n, n))


def largest_singular_value(
    A,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int = 0,
) -> tuple[float, int, bool]:
    """Power iteration on A^H A.

    Returns (sigma, iterations, converged). ``sigma = |A v|`` for a unit vector v,
    so it never exceeds the true largest singular value. Convergence is declared
    when the eigen-residual of A^H A is below ``tol * sigma^2``.
    """
    n = A.shape[1]
    if n == 0:
        return 0.0, 0, True
    v = np.random.default_rng(seed).standard_normal(n).astype(complex)
    v /= np.linalg.norm(v)
    AH = A.conj().T
    sigma = 0.0
    for k in range(1, max_iter + 1):
        w = A @ v
        sigma = float(np.linalg.norm(w))
        if sigma == 0.0:
            return 0.0, k, True
        u = AH @ w
        resid = np.linalg.norm(u - sigma**2 * v)
        if resid <= tol * sigma**2:
            return sigma, k, True
        v = u / np.linalg.norm(u)
    return sigma, max_iter, False


def max_column_norm(A) -> float:
    if sp.issparse(A):
        if A.shape[0] == 0:
            return 0.0
        return float(np.sqrt(np.asarray(abs(A).power(2).sum(axis=0)).max()))
    if A.size == 0:
        return 0.0
    return float(np.sqrt((np.abs(A) ** 2).sum(axis=0).max()))


def window_norm(A, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> tuple[float, int, bool]:
    """Certified lower bound on ||A||: best of power iteration and column norms."""
    sigma, it, ok = largest_singular_value(A, tol, max_iter)
    return max(sigma, max_column_norm(A)), it, ok


def operator_norm_window(
    a: AlgebraElement,
    window: int,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> NormEstimate:
    """Two-sided estimate of the reduced C*-norm of ``a``."""
    r = a.radius
    if window < r:
        raise PreconditionError(f"window {window} is smaller than the support radius {r}")
    A = window_matrix(a, window)
    lower, it, ok = window_norm(A, tol, max_iter)
    upper, method = norm_upper(a)
    lower = min(lower, upper)  # only rounding can invert them
    return NormEstimate(lower, upper, window, it, ok, method)


def norm_upper(a: AlgebraElement) -> tuple[float, str]:
    """Certified upper bound on ||lambda(a)|| and the rule that produced it."""
    l1 = a.l1()
    if len(a) <= 1:
        return l1, "unitary"
    g = a.group
    if g.family == "cyclic":
        vals = _cyclic_symbol(a)
        return min(l1, float(np.abs(vals).max()) * (1 + 1e-12)), "characters"
    if g.is_finite:
        M = regular_matrix(a)
        return min(l1, float(np.linalg.norm(M, 2)) * (1 + 1e-12)), "regular-representation"
    if g.family == "free_abelian" and g.generators is None:
        _, hi = fourier_sup_bounds(a)
        return min(l1, hi), "fourier-grid"
    return l1, "l1"


def regular_matrix(a: AlgebraElement) -> np.ndarray:
    """Dense left-regular matrix of ``a`` on a finite group."""
    g = a.group
    elems = g.elements()
    index = {x: i for i, x in enumerate(elems)}
    M = np.zeros((len(elems), len(elems)), dtype=complex)
    for j, y in enumerate(elems):
        for x, v in a._c.items():
            M[index[g._mul(x, y)], j] += v
    return M


def _cyclic_symbol(a: AlgebraElement) -> np.ndarray:
    m = a.group.param
    coeffs = np.zeros(m, dtype=complex)
    for x, v in a._c.items():
        coeffs[x] += v
    # characters chi_t(x) = exp(2 pi i t x / m)
    return np.fft.ifft(coeffs) * m


def symbol_on_grid(a: AlgebraElement, points: int) -> np.ndarray:
    """Values of sum a(k) exp(i k.theta) on a uniform grid of the d-torus."""
    d = a.group.param
    grid = np.zeros((points,) * d, dtype=complex)
    for k, v in a._c.items():
        grid[tuple(c % points for c in k)] += v
    return np.fft.ifftn(grid) * points**d


def fourier_sup_bounds(a: AlgebraElement, points: int | None = None) -> tuple[float, float]:
    """Certified bounds on sup |a^(theta)| over the torus for a in C*(Z^d).

    The grid maximum is a lower bound. For the upper bound, |a^|^2 has degree
    at most 2K_i in coordinate i and vanishing gradient at its maximizer, so a
    second-order Bernstein estimate gives sup <= max_grid / (1 - (h sum K_i)^2 / 2).
    """
    d = a.group.param
    degs = [max((abs(k[i]) for k in a._c), default=0) for i in range(d)]
    K = sum(degs)
    if points is None:
        points = 1024 if d == 1 else 256
        points = max(points, 8 * (2 * max(degs, default=0) + 1))
    h = 2 * math.pi / points
    slack = (h * K) ** 2 / 2
    if slack >= 0.5 or points <= 2 * max(degs, default=0):
        raise PreconditionError(f"grid of {points} points is too coarse for degree {degs}")
    m = float(np.abs(symbol_on_grid(a, points)).max())
    return m, m / math.sqrt(1 - slack) * (1 + 1e-12)


def spectral_range(a: AlgebraElement, window: int | None = None) -> tuple[float, float, float, float]:
    """Bounds on min and max of the spectrum of a self-adjoint ``a``.

    Returns (min_lo, min_hi, max_lo, max_hi). Finite groups and Z^d are handled
    exactly up to rounding or a certified grid; otherwise a window compression
    gives the inner bounds and the l1 norm the outer ones.
    """
    g = a.group
    l1 = a.l1()
    if g.family == "cyclic":
        vals = _cyclic_symbol(a).real
        lo, hi = float(vals.min()), float(vals.max())
        return lo, lo, hi, hi
    if g.is_finite:
        ev = np.linalg.eigvalsh(regular_matrix(a))
        return float(ev[0]), float(ev[0]), float(ev[-1]), float(ev[-1])
    if g.family == "free_abelian" and g.generators is None:
        d = g.param
        degs = [max((abs(k[i]) for k in a._c), default=0) for i in range(d)]
        points = max(1024 if d == 1 else 256, 8 * (2 * max(degs, default=0) + 1))
        vals = symbol_on_grid(a, points).real
        # real trig polynomial: grid points are in the spectrum; first-order slack outward
        K = sum(degs)
        slack = (math.pi / points) * K * l1
        lo, hi = float(vals.min()), float(vals.max())
        return lo - slack, lo, hi, hi + slack
    w = window if window is not None else a.radius + 4
    A = window_matrix(a, w).toarray()
    ev = np.linalg.eigvalsh((A + A.conj().T) / 2)
    return -l1, float(ev[0]), float(ev[-1]), l1


def quotient_norm_bounds(a: AlgebraElement, window: int | None = None) -> tuple[float, float]:
    """Bounds on inf_t ||a - t 1|| = (max spec - min spec) / 2 for self-adjoint a."""
    min_lo, min_hi, max_lo, max_hi = spectral_range(a, window)
    lower = max(0.0, (max_lo - min_hi) / 2)
    upper = (max_hi - min_lo) / 2
    h = haar_state(a).real
    upper = min(upper, (a - AlgebraElement.unit(a.group) * h).l1())
    return lower, max(lower, upper)
