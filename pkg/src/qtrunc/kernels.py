"""Normalized positive-definite functions with explicit factorization witnesses.

A kernel phi stands for the state a -> sum a(x) phi(x) of C*(G). Each one
carries the unit vectors xi_i and convex weights w_i with
phi = sum w_i <xi_i, lambda(.) xi_i>, so positive-definiteness is
witnessed rather than assumed. ``tail`` is the constant value off the finite
support; it is nonzero only when the counit (phi = 1 everywhere) is mixed in
on an infinite group, whose witness is the trivial representation.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from . import groups
from .algebra import AlgebraElement
from .errors import PreconditionError, StructuralError
from .groups import Element, GroupId

Number = Fraction | complex


@dataclass(frozen=True)
class PositiveDefiniteKernel:
    group: GroupId
    values: Mapping[Element, Number]
    name: str
    witnesses: tuple = ()
    tail: Fraction = Fraction(0)

    def __call__(self, x) -> Number:
        return self.values.get(x, self.tail)

    def value(self, x) -> complex:
        return complex(self(x))

    @property
    def support(self) -> list[Element] | None:
        """Sorted support, or None when phi does not vanish off a finite set."""
        if self.tail != 0:
            return None
        return sorted(x for x, v in self.values.items() if v != 0)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.values.values())

    @property
    def is_real(self) -> bool:
        return all(isinstance(v, Fraction) or abs(v.imag) == 0 for v in self.values.values())

    @property
    def radius(self) -> int | None:
        supp = self.support
        if supp is None:
            return None
        return groups.support_radius(self.group, supp)

    @property
    def is_counit(self) -> bool:
        if self.tail == 1 and all(v == 1 for v in self.values.values()):
            return True
        if self.group.is_finite and self.tail == 0:
            return all(self(x) == 1 for x in self.group.elements())
        return False

    def gram_min_eigenvalue(self, radius: int = 3) -> float:
        """Smallest eigenvalue of [phi(x_i^-1 x_j)] over ball(radius)."""
        g = self.group
        ball = groups.enumerate_ball(g, radius)
        inv = [g._inv(x) for x in ball]
        G = np.array([[self.value(g._mul(xi, y)) for y in ball] for xi in inv])
        return float(np.linalg.eigvalsh((G + G.conj().T) / 2)[0])

    def from_witnesses(self) -> dict:
        """Recompute phi on its finite support from the stored witnesses."""
        out: dict = {}
        for w, xi in self.witnesses:
            for x, v in _vector_state_values(self.group, xi).items():
                out[x] = out.get(x, 0j) + float(w) * v
        return out

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "group": str(self.group),
            "values": [
                [list(x) if isinstance(x, tuple) else x, _num_json(v)] for x, v in sorted(self.values.items())
            ],
            "tail": _num_json(self.tail),
        }


def _num_json(v):
    if isinstance(v, Fraction):
        return str(v)
    v = complex(v)
    return [v.real, v.imag]


def _vector_state_values(g: GroupId, xi: Mapping) -> dict:
    # phi(x) = <xi, lambda_x xi> = sum_y conj(xi(y)) xi(x^-1 y); nonzero only at x = y y'^-1
    out: dict = {}
    for y, u in xi.items():
        for yp, v in xi.items():
            x = g._mul(y, g._inv(yp))
            out[x] = out.get(x, 0j) + complex(u).conjugate() * complex(v)
    return out


def vector_state_kernel(xi: Mapping[Element, complex] | AlgebraElement, group: GroupId | None = None, name: str | None = None) -> PositiveDefiniteKernel:
    """The positive-definite function of the vector state of a unit vector xi."""
    if isinstance(xi, AlgebraElement):
        group = xi.group
        xi = dict(xi.items())
    if group is None:
        raise StructuralError("a group is required when xi is a plain mapping")
    xi = {group.element(x) if not group.is_valid(x) else x: complex(v) for x, v in xi.items() if v != 0}
    norm = math.sqrt(math.fsum(abs(v) ** 2 for v in xi.values()))
    if abs(norm - 1.0) > 1e-12:
        raise PreconditionError(f"xi must be a unit vector, |xi| = {norm!r}")
    vals = {x: v for x, v in _vector_state_values(group, xi).items() if v != 0}
    return PositiveDefiniteKernel(group, vals, name or "vector-state", ((Fraction(1), xi),))


def folner_kernel(g: GroupId, F: Iterable, name: str | None = None) -> PositiveDefiniteKernel:
    """phi(x) = |F cap xF| / |F|, the vector state of 1_F / sqrt|F|."""
    F = sorted({g.element(x) if not g.is_valid(x) else x for x in F})
    if not F:
        raise PreconditionError("Folner set must be nonempty")
    counts: dict = {}
    for y in F:
        for yp in F:
            x = g._mul(y, g._inv(yp))
            counts[x] = counts.get(x, 0) + 1
    n = len(F)
    vals = {x: Fraction(c, n) for x, c in counts.items()}
    xi = {x: 1 / math.sqrt(n) for x in F}
    return PositiveDefiniteKernel(g, vals, name or f"folner[{len(F)}]", ((Fraction(1), xi),))


# named kernels are immutable, so constructors memoize them
@functools.lru_cache(maxsize=512)
def fejer_kernel(g: GroupId, n: int) -> PositiveDefiniteKernel:
    """Folner kernel of the box [0, n)^d; on Z its values are (1 - |k|/n)_+."""
    if n < 1:
        raise PreconditionError(f"Fejer order must be >= 1, got {n}")
    if g.family == "free_abelian":
        # |F cap (k + F)| = prod (n - |k_i|) for the box F, so skip the overlap count
        d = g.param
        den = n**d
        vals = {k: Fraction(math.prod(n - abs(c) for c in k), den) for k in itertools.product(range(1 - n, n), repeat=d)}
        xi = {x: 1 / math.sqrt(den) for x in itertools.product(range(n), repeat=d)}
        return PositiveDefiniteKernel(g, vals, f"fejer[{n}]", ((Fraction(1), xi),))
    if g.family == "cyclic":
        F = list(range(min(n, g.param)))
    else:
        raise StructuralError(f"Fejer boxes are defined for Z^d and Z/m, not {g}")
    return folner_kernel(g, F, name=f"fejer[{n}]")


@functools.lru_cache(maxsize=512)
def folner_ball_kernel(g: GroupId, r: int) -> PositiveDefiniteKernel:
    """Folner kernel of the word-metric ball of radius r."""
    return folner_kernel(g, groups.enumerate_ball(g, r), name=f"folner-ball[{r}]")


@functools.lru_cache(maxsize=64)
def counit_kernel(g: GroupId) -> PositiveDefiniteKernel:
    """phi = 1 everywhere: the counit (trivial representation)."""
    if g.is_finite:
        k = folner_kernel(g, g.elements(), name="counit")
        return k
    return PositiveDefiniteKernel(g, {}, "counit", ((Fraction(1), "trivial-representation"),), Fraction(1))


@functools.lru_cache(maxsize=64)
def haar_kernel(g: GroupId) -> PositiveDefiniteKernel:
    """Indicator of the identity: the Haar state."""
    return folner_kernel(g, [g.identity], name="haar")


def convex_combination(kernels: Iterable[PositiveDefiniteKernel], weights: Iterable) -> PositiveDefiniteKernel:
    kernels = list(kernels)
    weights = [Fraction(w) if not isinstance(w, float) else w for w in weights]
    if not kernels or len(kernels) != len(weights):
        raise PreconditionError("need as many weights as kernels, at least one")
    if any(w < 0 for w in weights) or abs(float(sum(weights)) - 1.0) > 1e-12:
        raise PreconditionError("weights must be nonnegative and sum to 1")
    g = kernels[0].group
    if any(k.group != g for k in kernels):
        raise StructuralError("kernels live on different groups")
    keys = set().union(*(k.values for k in kernels))
    vals = {}
    for x in keys:
        v = sum((w * k(x) for w, k in zip(weights, kernels)), Fraction(0))
        if v != 0:
            vals[x] = v
    tail = sum((w * k.tail for w, k in zip(weights, kernels)), Fraction(0))
    # only mixes of exact kernels with rational weights stay exact
    if not all(isinstance(v, Fraction) for v in vals.values()):
        vals = {x: complex(v) for x, v in vals.items()}
    witnesses = tuple((w * wi, xi) for w, k in zip(weights, kernels) for wi, xi in k.witnesses)
    name = "+".join(f"{w}*{k.name}" for w, k in zip(weights, kernels))
    return PositiveDefiniteKernel(g, vals, name, witnesses, Fraction(tail) if not isinstance(tail, float) else tail)


def schur_multiply(phi: PositiveDefiniteKernel, a: AlgebraElement) -> AlgebraElement:
    """(phi . a)(x) = phi(x) a(x); the action mu * a of the state of phi."""
    if phi.group != a.group:
        raise StructuralError(f"kernel on {phi.group} applied to an element of {a.group}")
    return AlgebraElement._trusted(a.group, {x: v * complex(phi(x)) for x, v in a.items()})
