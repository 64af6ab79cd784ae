"""Fourier truncations, Fejer averaging operators and their epsilon certificates.

For a group algebra the truncation at level n is the span of delta_x with
l(x) <= n. Averaging against a positive-definite kernel phi is coefficientwise
multiplication; its distance to the identity map is governed by

    epsilon = sup { |counit(a) - nu(a)| : a = a*, L(a) <= 1 }

where nu is the state of phi.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from . import groups
from .algebra import AlgebraElement, convolve, haar_state, involution
from .errors import PreconditionError, StructuralError
from .groups import GroupId
from .kernels import PositiveDefiniteKernel, counit_kernel, schur_multiply
from .lipball import Functional, SupResult, sup_functional
from .lipnorms import LipNormSpec


@dataclass(frozen=True)
class TruncationSystem:
    """Level-n truncation of C*(G) (``labels`` is None) or of C(G) for a finite group (labels = S^n)."""

    group: GroupId
    level: int | None
    labels: frozenset | None = None
    generating_labels: frozenset | None = None

    def __post_init__(self):
        if self.level is not None and self.level < 0:
            raise PreconditionError(f"truncation level must be >= 0, got {self.level}")

    @classmethod
    def group_algebra(cls, group: GroupId, level: int | None) -> "TruncationSystem":
        return cls(group, level)

    @classmethod
    def classical(cls, group: GroupId, S: Iterable[str], level: int) -> "TruncationSystem":
        from .classical import FiniteGroupData, IsotypicLabelSet, filtration_sets

        data = FiniteGroupData.get(group)
        Sset = IsotypicLabelSet.of(data, S)
        Sn, _ = filtration_sets(Sset, level)
        return cls(group, level, frozenset(Sn.labels), frozenset(Sset.labels))

    @property
    def is_classical(self) -> bool:
        return self.labels is not None

    @property
    def is_full(self) -> bool:
        return self.level is None

    def basis(self) -> list:
        """ball(n) for group algebras, the labels of S^n for classical systems."""
        if self.is_classical:
            return sorted(self.labels)
        if self.level is None:
            if self.group.is_finite:
                return self.group.elements()
            raise StructuralError("the full algebra of an infinite group has no finite basis")
        return groups.enumerate_ball(self.group, self.level)

    def contains(self, a: AlgebraElement) -> bool:
        if self.level is None:
            return True
        return all(groups.word_length(self.group, x) <= self.level for x in a.support)

    def __str__(self):
        lvl = "full" if self.level is None else str(self.level)
        kind = "C" if self.is_classical else "C*"
        return f"{kind}({self.group})@{lvl}"


@dataclass(frozen=True)
class EpsilonCertificate:
    epsilon: Fraction | float
    lower: Fraction | float
    lipnorm: str
    kernel: str
    support: tuple
    level_N: int | None
    method: str
    scope: str
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.epsilon < 0:
            raise AssertionError("epsilon must be nonnegative")
        if self.method == "closed-form" and self.gap != 0:
            raise AssertionError("closed-form certificates have zero gap")

    @property
    def gap(self):
        g = self.epsilon - self.lower
        return g if g > 0 else type(g)(0)

    @property
    def is_global(self) -> bool:
        return self.scope == "global"

    def to_json(self) -> dict:
        def enc(v):
            return str(v) if isinstance(v, Fraction) else float(v)

        return {
            "epsilon": enc(self.epsilon),
            "epsilon_float": float(self.epsilon),
            "lower": enc(self.lower),
            "gap": enc(self.gap),
            "method": self.method,
            "scope": self.scope,
            "kernel": self.kernel,
            "lipnorm": self.lipnorm,
            "level_N": self.level_N,
        }


def truncate(a: AlgebraElement, n: int) -> AlgebraElement:
    """Drop the coefficients outside ball(n)."""
    if n < 0:
        raise PreconditionError(f"truncation level must be >= 0, got {n}")
    g = a.group
    return AlgebraElement._trusted(g, {x: v for x, v in a.items() if groups.word_length(g, x) <= n})


def fejer_operator(phi: PositiveDefiniteKernel, a: AlgebraElement) -> AlgebraElement:
    """P(a) = phi . a, the averaging operator of the state of phi."""
    return schur_multiply(phi, a)


def min_level(F: Iterable, g: GroupId | TruncationSystem, S: Iterable[str] | None = None) -> int:
    """Smallest N with F inside ball(N), or inside S^N for classical label sets."""
    F = list(F)
    if isinstance(g, TruncationSystem):
        if g.is_classical:
            S = g.generating_labels
        g = g.group
    if S is not None:
        from .classical import FiniteGroupData, IsotypicLabelSet, filtration_sets

        data = FiniteGroupData.get(g)
        Sset = IsotypicLabelSet.of(data, S)
        _, stab = filtration_sets(Sset, 0)
        need = set(F)
        for n in range(stab + 1):
            if need <= filtration_sets(Sset, n)[0].labels:
                return n
        raise PreconditionError(f"labels {sorted(need)} are not all reached by the filtration")
    return groups.support_radius(g, F)


def default_search_window(phi: PositiveDefiniteKernel, L: LipNormSpec) -> int:
    r = groups.support_radius(phi.group, phi.values)
    if L.family == "dirac_circle":
        return 8 * (r + 1)
    if L.family == "dirac_word_length":
        if phi.group.is_finite:
            return groups.diameter(phi.group)
        return r + 2
    return r + 1


def epsilon_of_kernel(
    phi: PositiveDefiniteKernel,
    L: LipNormSpec,
    search_window: int | None = None,
    support: int | None = None,
    seed: int = 0,
) -> EpsilonCertificate:
    """Certified sup |counit(a) - nu(a)| over self-adjoint a with L(a) <= 1.

    ``search_window`` is the interior search radius (weighted_l1, sobolev),
    the trigonometric degree (dirac_circle) or the support radius
    (dirac_word_length). ``support`` restricts a to ball(support); the
    certificate scope then says so.
    """
    g = phi.group
    if search_window is None:
        search_window = default_search_window(phi, L)
    supp = phi.support
    level = groups.support_radius(g, supp) if supp is not None else None
    if phi.is_counit:
        return EpsilonCertificate(Fraction(0), Fraction(0), L.id, phi.name, (), level, "closed-form", "global")
    psi = Functional.difference(counit_kernel(g), phi)
    res: SupResult = sup_functional(L, psi, search_window, support, seed=seed)
    method = res.method
    if method == "closed-form" and res.gap != 0:
        method = "closed-form+tail-bound"
    return EpsilonCertificate(
        res.upper,
        res.lower,
        L.id,
        phi.name,
        tuple(supp) if supp is not None else (),
        level,
        method,
        res.scope,
        res.details,
    )


def support_propagation(a: AlgebraElement) -> list:
    """F_a = supp(a) supp(a)^-1: outside it the vector state of a vanishes on delta_y."""
    if not a:
        raise PreconditionError("support_propagation needs a nonzero element")
    g = a.group
    supp = a.support
    return sorted({g._mul(x, g._inv(y)) for x in supp for y in supp})


def vector_state_value(a: AlgebraElement, y) -> complex:
    """mu_a(delta_y) = h(a* delta_y a) / |a|_2^2, by direct convolution."""
    g = a.group
    d = AlgebraElement.delta(g, y)
    return haar_state(convolve(convolve(involution(a), d), a)) / a.l2() ** 2
