"""Lip-norm families on group algebras, invariance checks and radius bounds.

Families:

    dirac_word_length   ||[D, lambda(a)]|| with D = multiplication by word length
    dirac_circle        ||[D, lambda(a)]|| on l2(Z) with D = multiplication by m, i.e. sup |f'|
    weighted_l1         sum |a(x)| l(x)
    sobolev             (sum_{x != e} |a(x)|^2 (1 + l(x))^{2s})^{1/2}
    classical_lipschitz max |f(x) - f(y)| / d(x, y) on functions on a finite group

Dirac norms are two-sided: a window compression from below and the weighted
l1 norm (or a certified Fourier bound) from above.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import zeta

from . import groups
from .algebra import (
    AlgebraElement,
    NormEstimate,
    fourier_sup_bounds,
    largest_singular_value,
    max_column_norm,
    quotient_norm_bounds,
    random_self_adjoint,
)
from .errors import PreconditionError, StructuralError
from .groups import GroupId
from .kernels import PositiveDefiniteKernel, counit_kernel, schur_multiply

FAMILIES = ("dirac_word_length", "dirac_circle", "weighted_l1", "sobolev", "classical_lipschitz")

DENSE_LIMIT = 1500


@dataclass(frozen=True)
class LipNormSpec:
    family: str
    window: int | None = None
    margin: int = 6
    s: float = 1.0
    grid: int = 2**14
    tol: float = 1e-10
    max_iter: int = 10_000
    group: GroupId | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise StructuralError(f"unknown Lip-norm family {self.family!r}; expected one of {FAMILIES}")
        if self.s < 0:
            raise PreconditionError(f"Sobolev order must be >= 0, got {self.s}")
        if self.window is not None and self.window < 0:
            raise PreconditionError(f"window must be >= 0, got {self.window}")

    @classmethod
    def dirac_word_length(cls, window: int | None = None, margin: int = 6) -> "LipNormSpec":
        return cls("dirac_word_length", window=window, margin=margin)

    @classmethod
    def dirac_circle(cls, grid: int = 2**14) -> "LipNormSpec":
        return cls("dirac_circle", grid=grid)

    @classmethod
    def weighted_l1(cls) -> "LipNormSpec":
        return cls("weighted_l1")

    @classmethod
    def sobolev(cls, s: float = 1.0) -> "LipNormSpec":
        return cls("sobolev", s=s)

    @classmethod
    def classical_lipschitz(cls, group: GroupId | None = None) -> "LipNormSpec":
        return cls("classical_lipschitz", group=group)

    @property
    def id(self) -> str:
        if self.family == "sobolev":
            return f"sobolev(s={self.s:g})"
        if self.family == "dirac_word_length" and self.window is not None:
            return f"dirac_word_length(window={self.window})"
        return self.family

    @property
    def is_spectral(self) -> bool:
        return self.family in ("dirac_word_length", "dirac_circle")

    def window_for(self, a: AlgebraElement) -> int:
        w = self.window if self.window is not None else a.radius + self.margin
        if w < a.radius + 1:
            raise PreconditionError(f"window {w} must be at least support radius + 1 = {a.radius + 1}")
        return w

    def to_json(self) -> dict:
        out = {"family": self.family}
        if self.family == "sobolev":
            out["s"] = self.s
        if self.family == "dirac_word_length":
            out["window"] = self.window
            out["margin"] = self.margin
        if self.family == "dirac_circle":
            out["grid"] = self.grid
        return out


def _check_circle_group(g: GroupId) -> None:
    if not (g.family == "free_abelian" and g.param == 1 and g.generators is None):
        raise StructuralError(f"dirac_circle is defined on C*(Z) with standard generators, not {g}")


# -- Dirac commutators on windows ------------------------------------------------


class DiracWindow:
    """Index data for [D, lambda(.)] compressed to l2(ball(W)); shared per (group, W)."""

    _cache: dict = {}
    _cache_lock = threading.Lock()

    def __init__(self, g: GroupId, window: int):
        self.group = g
        self.window = window
        self.ball = groups.enumerate_ball(g, window)
        self.index = {x: i for i, x in enumerate(self.ball)}
        self.length = np.array([groups.word_length(g, x) for x in self.ball], dtype=float)
        self._blocks: dict = {}
        self._lock = threading.Lock()

    @classmethod
    def get(cls, g: GroupId, window: int) -> "DiracWindow":
        key = (g, window)
        with cls._cache_lock:
            w = cls._cache.get(key)
            if w is None:
                w = cls._cache[key] = DiracWindow(g, window)
            return w

    @property
    def size(self) -> int:
        return len(self.ball)

    def block(self, x):
        """(rows, cols, weights) of the entries contributed by delta_x."""
        with self._lock:
            blk = self._blocks.get(x)
        if blk is not None:
            return blk
        g = self.group
        rows, cols = [], []
        for j, y in enumerate(self.ball):
            i = self.index.get(g._mul(x, y))
            if i is not None:
                rows.append(i)
                cols.append(j)
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        wts = self.length[rows] - self.length[cols]
        keep = wts != 0
        blk = (rows[keep], cols[keep], wts[keep])
        with self._lock:
            self._blocks[x] = blk
        return blk

    def matrix(self, a: AlgebraElement, dense: bool | None = None):
        n = self.size
        if dense is None:
            dense = n <= DENSE_LIMIT
        if dense:
            M = np.zeros((n, n), dtype=complex)
            for x, v in a.items():
                r, c, w = self.block(x)
                M[r, c] += v * w
            return M
        parts = [self.block(x) + (v,) for x, v in a.items()]
        rows = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0, np.intp)
        cols = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0, np.intp)
        vals = np.concatenate([p[2] * p[3] for p in parts]) if parts else np.zeros(0)
        return sp.csr_matrix((vals.astype(complex), (rows, cols)), shape=(n, n))

    def norm(self, a: AlgebraElement, tol: float = 1e-10, max_iter: int = 10_000) -> tuple[float, int, bool]:
        """Norm of the compressed commutator: dense eigen/SVD or sparse power iteration."""
        if not a:
            return 0.0, 0, True
        M = self.matrix(a)
        if isinstance(M, np.ndarray):
            if a.is_self_adjoint(atol=1e-14):
                # [D, A] is skew-adjoint for self-adjoint A
                ev = np.linalg.eigvalsh(1j * M)
                return float(max(abs(ev[0]), abs(ev[-1]))), 1, True
            return float(np.linalg.norm(M, 2)), 1, True
        sigma, it, conv = largest_singular_value(M, tol=tol, max_iter=max_iter)
        return max(sigma, max_column_norm(M)), it, conv


def weighted_l1_value(a: AlgebraElement) -> float:
    g = a.group
    if g.has_l1_closed_form:
        return math.fsum(abs(v) * sum(map(abs, x)) for x, v in a.items())
    return math.fsum(abs(v) * groups.word_length(g, x) for x, v in a.items())


def dirac_word_length_eval(L: LipNormSpec, a: AlgebraElement, window: int | None = None) -> NormEstimate:
    g = a.group
    w = window if window is not None else L.window_for(a)
    if w < a.radius + 1 and not (g.is_finite and w >= groups.diameter(g)):
        raise PreconditionError(f"window {w} must be at least support radius + 1 = {a.radius + 1}")
    upper = weighted_l1_value(a)
    dw = DiracWindow.get(g, w)
    lower, it, conv = dw.norm(a, L.tol, L.max_iter)
    if g.is_finite and w >= groups.diameter(g) and dw.size <= DENSE_LIMIT:
        # the window is the whole group: the compression is the operator itself
        upper = min(upper, lower * (1 + 1e-12))
    return NormEstimate(min(lower, upper), upper, w, it, conv, "dirac-window")


def derivative(a: AlgebraElement) -> AlgebraElement:
    """k -> k a(k) on Z: the coefficients of f' up to the factor i."""
    _check_circle_group(a.group)
    return AlgebraElement._trusted(a.group, {x: v * x[0] for x, v in a.items() if x[0] != 0})


def dirac_circle_eval(L: LipNormSpec, a: AlgebraElement) -> NormEstimate:
    da = derivative(a)
    if not da:
        return NormEstimate(0.0, 0.0, a.radius, 0, True, "fourier-grid")
    points = L.grid
    while True:
        try:
            lo, hi = fourier_sup_bounds(da, points)
            break
        except PreconditionError:
            points *= 2
            if points > 2**24:
                raise
    return NormEstimate(lo, hi, a.radius, points, True, "fourier-grid")


def sobolev_value(a: AlgebraElement, s: float) -> float:
    g = a.group
    e = g.identity
    return math.sqrt(
        math.fsum(abs(v) ** 2 * (1 + groups.word_length(g, x)) ** (2 * s) for x, v in a.items() if x != e)
    )


def lip_eval(L: LipNormSpec, a, window: int | None = None) -> NormEstimate:
    """Two-sided estimate of L(a); exact families return lower == upper."""
    if not isinstance(a, AlgebraElement):
        if L.family != "classical_lipschitz":
            raise StructuralError(f"{L.family} acts on group-algebra elements, got {type(a).__name__}")
        from .classical import lipschitz_constant

        v = lipschitz_constant(a)
        return NormEstimate(float(v), float(v), 0, 0, True, "exact")
    if L.family == "classical_lipschitz":
        raise StructuralError("classical_lipschitz acts on functions on a finite group (FunctionOnG)")
    if L.family == "weighted_l1":
        v = weighted_l1_value(a)
        return NormEstimate(v, v, a.radius, 0, True, "exact")
    if L.family == "sobolev":
        v = sobolev_value(a, L.s)
        return NormEstimate(v, v, a.radius, 0, True, "exact")
    if L.family == "dirac_circle":
        _check_circle_group(a.group)
        return dirac_circle_eval(L, a)
    return dirac_word_length_eval(L, a, window)


def lip_value(L: LipNormSpec, a, window: int | None = None) -> float:
    """Window value for Dirac word-length, the upper estimate otherwise."""
    est = lip_eval(L, a, window)
    return est.lower if L.family == "dirac_word_length" else est.upper


# -- invariance ----------------------------------------------------------------------


def verify_invariance(
    L: LipNormSpec, phi: PositiveDefiniteKernel, a: AlgebraElement, tol: float = 1e-9, window: int | None = None
) -> tuple[bool, float]:
    """Check L(phi . a) <= L(a) + tol; returns (holds, slack = L(a) - L(phi . a)).

    Dirac word-length values are compared on one common window, where Schur
    multiplication by a positive-definite kernel is already a contraction.
    Other families compare the lower estimate of L(phi . a) with the upper
    estimate of L(a), so a reported violation is a real one.
    """
    if not a.is_self_adjoint(atol=1e-14):
        a = a.symmetrize()
    b = schur_multiply(phi, a)
    if L.family == "dirac_word_length":
        w = window if window is not None else L.window_for(a)
        la = lip_eval(L, a, w).lower
        lb = lip_eval(L, b, w).lower
    else:
        la = lip_eval(L, a).upper
        lb = lip_eval(L, b).lower
    slack = la - lb
    return slack >= -tol, slack


def invariantize_lower(
    L: LipNormSpec, a: AlgebraElement, kernels: Sequence[PositiveDefiniteKernel], window: int | None = None
) -> float:
    """max over kernels and phi = 1 of L(phi . a): a lower bound for the invariantized norm."""
    kernels = list(kernels)
    if not kernels:
        raise PreconditionError("invariantize_lower needs at least one kernel")
    if not a.is_self_adjoint(atol=1e-14):
        raise PreconditionError("invariantize_lower needs a self-adjoint element")
    if L.family == "dirac_word_length" and window is None:
        window = L.window_for(a)
    best = lip_eval(L, a, window).lower
    for phi in kernels:
        if phi.is_counit:
            continue
        best = max(best, lip_eval(L, schur_multiply(phi, a), window).lower)
    return best


# -- radius ------------------------------------------------------------------------------


@dataclass(frozen=True)
class RadiusEstimate:
    lower: Fraction | float
    upper: Fraction | float
    level: int | None
    method: str = ""
    witness: str = ""

    def __post_init__(self):
        if self.lower > self.upper:
            raise AssertionError(f"radius lower {self.lower} exceeds upper {self.upper}")

    @property
    def exact(self) -> bool:
        return self.lower == self.upper and isinstance(self.upper, (int, Fraction))

    def to_json(self) -> dict:
        def enc(v):
            return str(v) if isinstance(v, Fraction) else v

        return {"lower": enc(self.lower), "upper": enc(self.upper), "level": self.level, "method": self.method}


def element_order(g: GroupId, x) -> int | None:
    """Order of x, None for infinite order (all catalog infinite groups are torsion-free)."""
    if x == g.identity:
        return 1
    if not g.is_finite:
        return None
    k, y = 1, x
    while y != g.identity:
        y = g._mul(y, x)
        k += 1
    return k


def _pair_quotient_norm(g: GroupId, x) -> Fraction | float:
    """Quotient norm of (delta_x + delta_x^-1)/2: spectrum is cos of the m-th roots of unity."""
    m = element_order(g, x)
    if m is None or m % 2 == 0:
        return Fraction(1)
    return (1 + math.cos(math.pi / m)) / 2


def sphere_tail(g: GroupId, R: int, offset: int, p: float) -> float:
    """sum_{n > R} |S_n| (n + offset)^-p, math.inf when divergent or unknown."""
    if g.is_finite:
        diam = groups.diameter(g)
        return math.fsum(groups.sphere_size(g, n) * (n + offset) ** (-p) for n in range(R + 1, diam + 1))
    if not g.has_l1_closed_form:
        return math.inf
    d = g.param
    ns = np.arange(1, d + 1, dtype=float)
    sizes = [groups.sphere_size(g, int(n)) for n in ns]
    P = np.polynomial.Polynomial.fit(ns, sizes, d - 1).convert()
    Q = P(np.polynomial.Polynomial([-offset, 1]))
    total = 0.0
    for j, c in enumerate(Q.coef):
        if abs(c) < 1e-9:
            continue
        if p - j <= 1:
            return math.inf
        total += c * float(zeta(p - j, R + 1 + offset))
    return total


def _system_elements(g: GroupId, level: int | None) -> tuple[list, bool]:
    """Elements spanning the system and whether that is the whole group."""
    if level is None:
        if g.is_finite:
            return g.elements(), True
        return groups.enumerate_ball(g, 3), False
    ball = groups.enumerate_ball(g, level)
    whole = g.is_finite and level >= groups.diameter(g)
    return ball, whole


def _radius_upper(L: LipNormSpec, g: GroupId, level: int | None) -> tuple[Fraction | float, str]:
    e = g.identity
    if L.family == "weighted_l1":
        from .exact_lp import maximize

        # maximize sum u_x subject to sum l(x) u_x <= 1; only the sphere of radius 1 matters
        elems = [x for x in groups.enumerate_ball(g, 1 if level is None else min(level, 1)) if x != e]
        if not elems:
            return Fraction(0), "lp"
        res = maximize([1] * len(elems), [[groups.word_length(g, x) for x in elems]], [1])
        return res.value, "lp"
    if L.family == "dirac_circle":
        return math.pi / 2, "analytic"
    if L.family == "sobolev":
        offset, p = 1, 2 * L.s
    else:
        offset, p = 0, 2.0
    R = level if level is not None else (groups.diameter(g) if g.is_finite else 0)
    inner = math.fsum(
        (groups.word_length(g, x) + offset) ** (-p) for x in groups.enumerate_ball(g, R) if x != e
    )
    if level is None and not g.is_finite:
        inner += sphere_tail(g, R, offset, p)
    return math.sqrt(inner) * (1 + 1e-12), "l2-bound"


def radius_estimate(
    L: LipNormSpec,
    group: GroupId,
    level: int | None = None,
    samples: int = 32,
    seed: int = 0,
) -> RadiusEstimate:
    """Bounds on the radius sup {quotient norm of a : a = a*, L(a) <= 1} of a truncation.

    ``level=None`` means the full algebra. The upper bound comes from
    quotient norm <= sum_{x != e} |a(x)| and a family-specific inequality
    (exact LP for weighted_l1). The lower bound evaluates candidates.
    """
    if L.family == "classical_lipschitz":
        raise StructuralError("use classical.classical_radius for classical_lipschitz")
    if L.family == "dirac_circle":
        _check_circle_group(group)
    elems, _ = _system_elements(group, level)
    e = group.identity
    nontrivial = [x for x in elems if x != e]
    if not nontrivial:
        return RadiusEstimate(Fraction(0), Fraction(0), level, "constants-only")
    upper, umethod = _radius_upper(L, group, level)
    best: Fraction | float = Fraction(0)
    witness = ""
    exact_family = L.family == "weighted_l1"
    for x in nontrivial:
        if best >= upper:
            break
        a = (AlgebraElement.delta(group, x, 0.5) + AlgebraElement.delta(group, group._inv(x), 0.5))
        qn = _pair_quotient_norm(group, x)
        if exact_family:
            val = qn / groups.word_length(group, x) if isinstance(qn, Fraction) else qn / weighted_l1_value(a)
        else:
            val = float(qn) / lip_eval(L, a).upper
        if val > best:
            best, witness = val, f"pair{x!r}"
    rng = np.random.default_rng(seed)
    rad = level if level is not None else min(3, groups.diameter(group) or 3)
    for _ in range(samples if best < upper else 0):
        a = random_self_adjoint(group, rad, rng)
        la = lip_eval(L, a).upper
        if la <= 0:
            continue
        qn_lo, _ = quotient_norm_bounds(a)
        val = min(qn_lo / la, float(upper))
        if val > best:
            best, witness = val, "random"
    if isinstance(best, float) and best > upper:
        best = float(upper)
    return RadiusEstimate(best, upper, level, umethod, witness)
