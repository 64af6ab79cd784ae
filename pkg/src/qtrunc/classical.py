"""Exact harmonic analysis on finite groups.

Irreducible representations are stored as matrices over Q(zeta_N): read from
the bundled data file for S3, Q8 and D4, and generated for Z/m as the
characters k -> (x -> zeta_m^{kx}). Everything below is exact.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import groups
from .cyclotomic import Cyc
from .errors import PreconditionError, StructuralError
from .groups import GroupId, load_group_data

CYCLIC_LIMIT = 12


class FiniteGroupData:
    """Elements, irreps, characters and word metric of a finite catalog group."""

    _cache: dict = {}
    _lock = threading.Lock()

    def __init__(self, group: GroupId):
        if not group.is_finite:
            raise StructuralError(f"{group} is not finite")
        self.group = group
        self.elements = group.elements()
        self.index = {x: i for i, x in enumerate(self.elements)}
        self.n = len(self.elements)
        if group.family == "cyclic":
            m = group.param
            if m > CYCLIC_LIMIT:
                raise StructuralError(f"exact irreps of Z/m are catalogued for m <= {CYCLIC_LIMIT}")
            self.order = m
            self.trivial = "0"
            self.irreps = {str(k): [[[Cyc.zeta(m, k * x)]] for x in range(m)] for k in range(m)}
        else:
            key = group.param if group.family == "table" else str(group)
            raw = load_group_data()["groups"].get(key)
            if raw is None:
                raise StructuralError(f"no representation data for {group}")
            self.order = raw["cyclotomic_order"]
            self.trivial = raw["trivial"]
            self.irreps = {
                label: [[[Cyc.from_json(self.order, c) for c in row] for row in m] for m in mats]
                for label, mats in raw["irreps"].items()
            }
            if group.family == "dihedral":
                order = [tuple(e) for e in raw["elements"]]
                if order != self.elements:
                    raise StructuralError("dihedral element order in the data file does not match")
        self.characters = {
            label: [sum((m[i][i] for i in range(len(m))), Cyc.rational(self.order, 0)) for m in mats]
            for label, mats in self.irreps.items()
        }
        self.dims = {label: len(mats[0]) for label, mats in self.irreps.items()}
        self.labels = sorted(self.irreps, key=lambda l: (l != self.trivial, self.dims[l], l))
        self.inverse_index = [self.index[group._inv(x)] for x in self.elements]
        self.mul_index = [[self.index[group._mul(x, y)] for y in self.elements] for x in self.elements]
        self.distance = [
            [groups.word_length(group, group._mul(group._inv(x), y)) for y in self.elements] for x in self.elements
        ]

    @classmethod
    def get(cls, group: GroupId) -> "FiniteGroupData":
        with cls._lock:
            d = cls._cache.get(group)
            if d is None:
                d = cls._cache[group] = FiniteGroupData(group)
            return d

    def check_label(self, label: str) -> None:
        if label not in self.irreps:
            raise StructuralError(f"unknown irrep label {label!r} for {self.group}; known: {self.labels}")

    def conjugate_label(self, label: str) -> str:
        self.check_label(label)
        target = [c.conjugate() for c in self.characters[label]]
        for l, ch in self.characters.items():
            if ch == target:
                return l
        raise StructuralError(f"no conjugate of {label} in the catalog")

    def kernel(self, label: str) -> set:
        """Elements acting trivially in the representation."""
        d = self.dims[label]
        return {x for x, c in zip(self.elements, self.characters[label]) if c == d}

    def character_inner(self, chi: Sequence[Cyc], label: str) -> Cyc:
        """<chi, chi_label> = (1/|G|) sum_g chi(g) conj(chi_label(g))."""
        psi = self.characters[label]
        total = sum((a * b.conjugate() for a, b in zip(chi, psi)), Cyc.rational(self.order, 0))
        return total / self.n


@dataclass(frozen=True)
class FunctionOnG:
    """Values of a function on G in the element order of ``data``; exact when all are Cyc."""

    data: FiniteGroupData
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.data.n:
            raise StructuralError(f"expected {self.data.n} values, got {len(self.values)}")

    @classmethod
    def exact(cls, data: FiniteGroupData, values: Iterable) -> "FunctionOnG":
        return cls(data, tuple(v if isinstance(v, Cyc) else Cyc.rational(data.order, v) for v in values))

    @classmethod
    def delta(cls, data: FiniteGroupData, x) -> "FunctionOnG":
        i = data.index[x]
        return cls.exact(data, [int(j == i) for j in range(data.n)])

    @classmethod
    def from_mapping(cls, data: FiniteGroupData, f: Mapping) -> "FunctionOnG":
        return cls.exact(data, [f.get(x, 0) for x in data.elements])

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Cyc) for v in self.values)

    def __call__(self, x):
        return self.values[self.data.index[x]]

    def __add__(self, other: "FunctionOnG") -> "FunctionOnG":
        return FunctionOnG(self.data, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "FunctionOnG") -> "FunctionOnG":
        return FunctionOnG(self.data, tuple(a - b for a, b in zip(self.values, other.values)))

    def scale(self, c) -> "FunctionOnG":
        return FunctionOnG(self.data, tuple(v * c for v in self.values))

    def translate(self, z) -> "FunctionOnG":
        """x -> f(z x)."""
        d = self.data
        zi = d.index[z]
        return FunctionOnG(d, tuple(self.values[d.mul_index[zi][i]] for i in range(d.n)))

    def real_values(self) -> list:
        """Values as Fractions when rational, floats otherwise."""
        out = []
        for v in self.values:
            if isinstance(v, Cyc) and v.is_rational():
                out.append(v.to_fraction())
            else:
                c = complex(v)
                out.append(c.real if c.imag == 0 else c)
        return out

    def is_zero(self) -> bool:
        return all(not v if isinstance(v, Cyc) else v == 0 for v in self.values)

    def __eq__(self, other):
        return isinstance(other, FunctionOnG) and self.data is other.data and self.values == other.values

    def __hash__(self):
        return hash(self.values)


@dataclass(frozen=True)
class IsotypicLabelSet:
    data: FiniteGroupData
    labels: frozenset

    @classmethod
    def of(cls, data: FiniteGroupData, labels: Iterable[str]) -> "IsotypicLabelSet":
        labels = frozenset(labels)
        for l in labels:
            data.check_label(l)
        return cls(data, labels)

    @property
    def conjugate_closed(self) -> bool:
        return all(self.data.conjugate_label(l) in self.labels for l in self.labels)

    @property
    def contains_trivial(self) -> bool:
        return self.data.trivial in self.labels

    @property
    def faithful(self) -> bool:
        common = set(self.data.elements)
        for l in self.labels:
            common &= self.data.kernel(l)
        return common == {self.data.group.identity}

    def sorted(self) -> list[str]:
        return [l for l in self.data.labels if l in self.labels]


def isotypic_project(f: FunctionOnG, label: str) -> FunctionOnG:
    """E f(x) = (d / |G|) sum_g chi(g) f(g^-1 x)."""
    d = f.data
    d.check_label(label)
    chi = d.characters[label]
    dim = d.dims[label]
    out = []
    for xi in range(d.n):
        acc = Cyc.rational(d.order, 0) if f.is_exact else 0j
        for gi in range(d.n):
            v = f.values[d.mul_index[d.inverse_index[gi]][xi]]
            acc = acc + (chi[gi] * v if f.is_exact else complex(chi[gi]) * complex(v))
        out.append(acc * Fraction(dim, d.n) if f.is_exact else acc * dim / d.n)
    return FunctionOnG(d, tuple(out))


def fusion_decompose(data: FiniteGroupData, gamma: str, beta: str) -> dict[str, int]:
    """Multiplicities of each irrep in gamma (x) beta, from exact character inner products."""
    data.check_label(gamma)
    data.check_label(beta)
    memo = data.__dict__.setdefault("_fusion", {})
    key = (gamma, beta) if gamma <= beta else (beta, gamma)
    if key in memo:
        return dict(memo[key])
    prod = [a * b for a, b in zip(data.characters[gamma], data.characters[beta])]
    out = {}
    for l in data.labels:
        m = data.character_inner(prod, l)
        q = m.to_fraction()
        if q.denominator != 1 or q < 0:
            raise AssertionError(f"non-integral multiplicity {q} of {l} in {gamma} x {beta}")
        if q:
            out[l] = int(q)
    memo[key] = dict(out)
    return out


def filtration_sets(S: IsotypicLabelSet, n: int) -> tuple[IsotypicLabelSet, int]:
    """S^n (labels inside n-fold tensor powers of S, S^0 = {trivial}) and the stabilization level."""
    if n < 0:
        raise PreconditionError(f"level must be >= 0, got {n}")
    if not S.contains_trivial or not S.conjugate_closed:
        raise PreconditionError("S must contain the trivial label and be closed under conjugation")
    if not S.faithful:
        raise PreconditionError("S is not faithful: filtration will not exhaust")
    data = S.data
    levels = [frozenset({data.trivial})]
    while True:
        cur = levels[-1]
        nxt = frozenset(l for g in cur for b in S.labels for l in fusion_decompose(data, g, b))
        if nxt == cur:
            break
        levels.append(nxt)
    stab = len(levels) - 1
    return IsotypicLabelSet(data, levels[min(n, stab)]), stab


def lipschitz_constant(f: FunctionOnG) -> Fraction | float:
    """max over x != y of |f(x) - f(y)| / d(x, y) for the word metric."""
    d = f.data
    vals = f.real_values()
    exact = all(isinstance(v, Fraction) for v in vals)
    best = Fraction(0) if exact else 0.0
    for i in range(d.n):
        for j in range(i + 1, d.n):
            r = abs(vals[i] - vals[j]) / d.distance[i][j]
            if r > best:
                best = r
    return best


def induced_lipnorm_translation(L, f: FunctionOnG) -> Fraction | float:
    """sup over z of L(x -> f(z x)); point masses suffice since the argument is convex in the state."""
    if L.family != "classical_lipschitz":
        raise StructuralError("the translation-induced norm is defined for classical_lipschitz")
    return max(lipschitz_constant(f.translate(z)) for z in f.data.elements)


def classical_radius(data: FiniteGroupData) -> Fraction:
    """Half the diameter of G: the radius of the state space under the Kantorovich metric."""
    return Fraction(max(max(row) for row in data.distance), 2)


def _check_subgroup(data: FiniteGroupData, H: Iterable) -> list:
    g = data.group
    H = sorted({g.element(h) if not g.is_valid(h) else h for h in H})
    Hs = set(H)
    if g.identity not in Hs or any(g._mul(a, b) not in Hs for a in H for b in H):
        raise PreconditionError(f"{H} is not a subgroup of {g}")
    return H


@dataclass(frozen=True)
class RestrictionReport:
    subgroup: tuple
    basis_size: int
    samples: int
    max_discrepancy: Fraction | float

    def to_json(self) -> dict:
        v = self.max_discrepancy
        return {
            "subgroup": [list(h) if isinstance(h, tuple) else h for h in self.subgroup],
            "basis_size": self.basis_size,
            "samples": self.samples,
            "max_discrepancy": str(v) if isinstance(v, Fraction) else v,
        }


def coset_basis(data: FiniteGroupData, H: Sequence, orientation: str = "left") -> list[FunctionOnG]:
    """Indicators of the cosets H x (left-H-invariant functions) or x H (right-invariant)."""
    g = data.group
    seen, basis = set(), []
    for x in data.elements:
        if x in seen:
            continue
        coset = {g._mul(h, x) for h in H} if orientation == "left" else {g._mul(x, h) for h in H}
        seen |= coset
        basis.append(FunctionOnG.exact(data, [int(y in coset) for y in data.elements]))
    return basis


def homogeneous_restriction_check(
    group: GroupId | FiniteGroupData,
    H: Iterable,
    L,
    samples: int = 32,
    seed: int = 0,
    orientation: str = "left",
) -> RestrictionReport:
    """Compare the induced Lip-norm on B = {f : f(h x) = f(x)} with the restriction of L.

    The coaction is Delta(f)(x, g) = f(x g). It maps B into B (x) C(G) only for
    left-invariant B, which is verified; the right-invariant orientation fails.
    """
    data = group if isinstance(group, FiniteGroupData) else FiniteGroupData.get(group)
    H = _check_subgroup(data, H)
    basis = coset_basis(data, H, orientation)
    g = data.group

    def invariant(f: FunctionOnG) -> bool:
        if orientation == "left":
            return all(f(g._mul(h, x)) == f(x) for h in H for x in data.elements)
        return all(f(g._mul(x, h)) == f(x) for h in H for x in data.elements)

    for f in basis:
        for z in data.elements:
            zi = data.index[z]
            fz = FunctionOnG(data, tuple(f.values[data.mul_index[i][zi]] for i in range(data.n)))
            if not invariant(fz):
                raise PreconditionError(
                    "Delta(B) is not contained in B (x) A: the homogeneous space orientation is misconfigured"
                )
    rng = np.random.default_rng(seed)
    tests = list(basis)
    for _ in range(samples):
        coeffs = [Fraction(int(c), 7) for c in rng.integers(-14, 15, size=len(basis))]
        f = FunctionOnG.exact(data, [0] * data.n)
        for c, b in zip(coeffs, basis):
            f = f + b.scale(c)
        tests.append(f)
    worst = Fraction(0)
    for f in tests:
        diff = abs(induced_lipnorm_translation(L, f) - lipschitz_constant(f))
        worst = max(worst, diff)
    return RestrictionReport(tuple(H), len(basis), len(tests), worst)
