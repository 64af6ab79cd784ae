"""Catalog of finitely generated groups with word metrics.

Families and their element normal forms:

    cyclic(m)        int in [0, m)
    free_abelian(d)  tuple of d ints
    heisenberg       (a, b, c), product (a+a', b+b', c+c'+a*b')
    dihedral(n)      (k, f) meaning r^k s^f, 0 <= k < n, f in {0, 1}
    table(name)      int index into a Cayley table from the bundled data file

Generating sets always contain the identity and are closed under inverses.
Word lengths come from breadth-first search over the Cayley graph, except for
free abelian groups with the standard generators where the l1 norm is used.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from typing import Any, Hashable, Iterable

from .errors import ResourceError, StructuralError

Element = Hashable

DEFAULT_BALL_BUDGET = 100_000
_FAMILIES = ("cyclic", "free_abelian", "heisenberg", "dihedral", "table")


@lru_cache(maxsize=None)
def load_group_data() -> dict:
    """The bundled finite-group data file (Cayley tables, irreps, characters)."""
    with resources.files("qtrunc.data").joinpath("finite_groups.json").open() as fh:
        return json.load(fh)


@dataclass(frozen=True)
class GroupId:
    family: str
    param: Any = None
    generators: tuple | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise StructuralError(f"unknown group family {self.family!r}")
        if self.family in ("cyclic", "free_abelian") and not (isinstance(self.param, int) and self.param >= 1):
            raise StructuralError(f"{self.family} needs a positive integer parameter, got {self.param!r}")
        if self.family == "dihedral" and not (isinstance(self.param, int) and self.param >= 2):
            raise StructuralError(f"dihedral needs n >= 2, got {self.param!r}")
        if self.family == "table" and self.param not in load_group_data()["groups"]:
            raise StructuralError(f"no Cayley table named {self.param!r} in the data file")
        if self.generators is not None:
            gens = tuple(sorted({self._canon_checked(s) for s in self.generators}))
            object.__setattr__(self, "generators", gens)

    # -- construction helpers -------------------------------------------------

    @classmethod
    def cyclic(cls, m: int) -> "GroupId":
        return cls("cyclic", m)

    @classmethod
    def free_abelian(cls, d: int) -> "GroupId":
        return cls("free_abelian", d)

    @classmethod
    def heisenberg(cls, generators=None) -> "GroupId":
        return cls("heisenberg", None, generators)

    @classmethod
    def dihedral(cls, n: int) -> "GroupId":
        return cls("dihedral", n)

    @classmethod
    def table(cls, name: str) -> "GroupId":
        return cls("table", name)

    def __str__(self):
        base = {
            "cyclic": lambda: f"Z/{self.param}",
            "free_abelian": lambda: "Z" if self.param == 1 else f"Z^{self.param}",
            "heisenberg": lambda: "H3",
            "dihedral": lambda: f"D{self.param}",
            "table": lambda: str(self.param),
        }[self.family]()
        return base if self.generators is None else f"{base}{list(self.generators)}"

    # -- structure --------------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self.family in ("cyclic", "dihedral", "table")

    @property
    def is_abelian(self) -> bool:
        if self.family in ("cyclic", "free_abelian"):
            return True
        if self.family == "dihedral":
            return self.param == 2
        if self.family == "table":
            t = self._table
            return all(t[i][j] == t[j][i] for i in range(len(t)) for j in range(i))
        return False

    @property
    def order(self) -> int | None:
        if self.family == "cyclic":
            return self.param
        if self.family == "dihedral":
            return 2 * self.param
        if self.family == "table":
            return len(self._table)
        return None

    @cached_property
    def _table(self) -> list[list[int]]:
        return load_group_data()["groups"][self.param]["table"]

    @cached_property
    def _table_inverse(self) -> list[int]:
        t = self._table
        return [row.index(0) for row in t]

    @property
    def identity(self) -> Element:
        f = self.family
        if f in ("cyclic", "table"):
            return 0
        if f == "free_abelian":
            return (0,) * self.param
        if f == "heisenberg":
            return (0, 0, 0)
        return (0, 0)

    def is_valid(self, x) -> bool:
        f = self.family
        if f in ("cyclic", "table"):
            n = self.order
            return type(x) is int and 0 <= x < n
        if f == "free_abelian":
            return type(x) is tuple and len(x) == self.param and all(type(c) is int for c in x)
        if f == "heisenberg":
            return type(x) is tuple and len(x) == 3 and all(type(c) is int for c in x)
        return (
            type(x) is tuple and len(x) == 2 and all(type(c) is int for c in x)
            and 0 <= x[0] < self.param and x[1] in (0, 1)
        )

    def _check(self, x) -> None:
        if not self.is_valid(x):
            raise StructuralError(f"{x!r} is not a valid normal form for {self}")

    def element(self, raw) -> Element:
        """Canonicalize user input (lists, bare ints for Z, residues) to a normal form."""
        return self._canon_checked(raw)

    def _canon_checked(self, raw) -> Element:
        f = self.family
        try:
            if f == "cyclic":
                x = int(raw) % self.param
            elif f == "table":
                names = load_group_data()["groups"][self.param]["elements"]
                x = names.index(raw) if isinstance(raw, str) else int(raw)
            elif f == "free_abelian" and self.param == 1 and not isinstance(raw, (list, tuple)):
                x = (int(raw),)
            elif f == "dihedral":
                k, s = raw
                x = (int(k) % self.param, int(s))
            else:
                x = tuple(int(c) for c in raw)
        except (TypeError, ValueError) as exc:
            raise StructuralError(f"cannot read {raw!r} as an element of {self}") from exc
        self._check(x)
        return x

    def multiply(self, x: Element, y: Element) -> Element:
        self._check(x)
        self._check(y)
        return self._mul(x, y)

    def _mul(self, x, y):
        f = self.family
        if f == "cyclic":
            return (x + y) % self.param
        if f == "free_abelian":
            return tuple(a + b for a, b in zip(x, y))
        if f == "heisenberg":
            return (x[0] + y[0], x[1] + y[1], x[2] + y[2] + x[0] * y[1])
        if f == "dihedral":
            k = (x[0] + (y[0] if x[1] == 0 else -y[0])) % self.param
            return (k, x[1] ^ y[1])
        return self._table[x][y]

    def inverse(self, x: Element) -> Element:
        self._check(x)
        return self._inv(x)

    def _inv(self, x):
        f = self.family
        if f == "cyclic":
            return (-x) % self.param
        if f == "free_abelian":
            return tuple(-a for a in x)
        if f == "heisenberg":
            return (-x[0], -x[1], -x[2] + x[0] * x[1])
        if f == "dihedral":
            return ((-x[0]) % self.param, 0) if x[1] == 0 else x
        return self._table_inverse[x]

    def elements(self) -> list[Element]:
        """All elements of a finite group, lexicographically ordered."""
        f = self.family
        if f in ("cyclic", "table"):
            return list(range(self.order))
        if f == "dihedral":
            return [(k, s) for k in range(self.param) for s in (0, 1)]
        raise StructuralError(f"{self} is infinite")

    @cached_property
    def generating_set(self) -> tuple:
        """Symmetric generating set including the identity, sorted."""
        if self.generators is not None:
            gens = set(self.generators)
        else:
            gens = set(self._default_generators())
        gens |= {self._inv(s) for s in gens}
        gens.add(self.identity)
        return tuple(sorted(gens))

    def _default_generators(self) -> list:
        f = self.family
        if f == "cyclic":
            return [1 % self.param]
        if f == "free_abelian":
            return [tuple(1 if i == j else 0 for j in range(self.param)) for i in range(self.param)]
        if f == "heisenberg":
            return [(1, 0, 0), (0, 1, 0)]
        if f == "dihedral":
            return [(1, 0), (0, 1)]
        names = load_group_data()["groups"][self.param]["elements"]
        return [names.index(s) for s in load_group_data()["groups"][self.param]["generators"]]

    @cached_property
    def has_l1_closed_form(self) -> bool:
        if self.family != "free_abelian":
            return False
        return self.generators is None

    @cached_property
    def _metric(self) -> "_CayleyBFS":
        return _CayleyBFS(self)


def parse_group(text: str) -> GroupId:
    """Parse catalog ids such as ``Z``, ``Z^2``, ``Z/6``, ``H3``, ``D4``, ``S3``, ``Q8``."""
    s = text.strip().replace(" ", "")
    if s == "Z":
        return GroupId.free_abelian(1)
    if m := re.fullmatch(r"Z\^(\d+)", s):
        return GroupId.free_abelian(int(m.group(1)))
    if m := re.fullmatch(r"Z/(\d+)", s):
        return GroupId.cyclic(int(m.group(1)))
    if s == "H3":
        return GroupId.heisenberg()
    if m := re.fullmatch(r"D(\d+)", s):
        return GroupId.dihedral(int(m.group(1)))
    if s in load_group_data()["groups"]:
        return GroupId.table(s)
    raise StructuralError(f"unknown group id {text!r}")


class _CayleyBFS:
    """Memoized BFS layers of the Cayley graph; thread-safe lazy growth."""

    def __init__(self, g: GroupId):
        self.g = g
        self.length: dict = {g.identity: 0}
        self.layers: list[list] = [[g.identity]]
        self.exhausted = False
        self._lock = threading.Lock()

    def _grow(self) -> None:
        g = self.g
        new = []
        for x in self.layers[-1]:
            for s in g.generating_set:
                y = g._mul(x, s)
                if y not in self.length:
                    self.length[y] = len(self.layers)
                    new.append(y)
        if new:
            self.layers.append(sorted(new))
        else:
            self.exhausted = True

    def ensure_radius(self, n: int, budget: int) -> None:
        with self._lock:
            while len(self.layers) <= n and not self.exhausted:
                if len(self.length) > budget:
                    raise ResourceError(
                        f"ball of radius {len(self.layers)} in {self.g} exceeds the budget of {budget} elements"
                    )
                self._grow()
            if len(self.layers) > n or self.exhausted:
                size = sum(len(layer) for layer in self.layers[: n + 1])
                if size > budget:
                    raise ResourceError(f"ball of radius {n} in {self.g} has {size} elements, budget is {budget}")

    def find(self, x, budget: int) -> int:
        with self._lock:
            while x not in self.length:
                if self.exhausted:
                    raise StructuralError(f"{x!r} is not reachable from the generators of {self.g}")
                if len(self.length) > budget:
                    raise ResourceError(f"word length of {x!r} in {self.g} needs more than {budget} elements")
                self._grow()
            return self.length[x]


def multiply(g: GroupId, x: Element, y: Element) -> Element:
    return g.multiply(x, y)


def inverse(g: GroupId, x: Element) -> Element:
    return g.inverse(x)


def word_length(g: GroupId, x: Element, budget: int = DEFAULT_BALL_BUDGET) -> int:
    """Graph distance from the identity in the Cayley graph of ``g``'s generating set."""
    if g.has_l1_closed_form:
        if type(x) is not tuple or len(x) != g.param:
            g._check(x)
        return sum(map(abs, x))
    g._check(x)
    return g._metric.find(x, budget)


def bfs_word_length(g: GroupId, x: Element, budget: int = DEFAULT_BALL_BUDGET) -> int:
    """Word length by BFS even where a closed form exists (used to cross-check it)."""
    g._check(x)
    return g._metric.find(x, budget)


def distance(g: GroupId, x: Element, y: Element) -> int:
    """Left-invariant word metric d(x, y) = l(x^-1 y)."""
    return word_length(g, g._mul(g.inverse(x), y))


def enumerate_ball(g: GroupId, n: int, budget: int = DEFAULT_BALL_BUDGET) -> list[Element]:
    """All elements of word length <= n, lexicographically ordered."""
    if n < 0:
        raise StructuralError(f"ball radius must be nonnegative, got {n}")
    if g.has_l1_closed_form:
        size = _l1_ball_size(g.param, n)
        if size > budget:
            raise ResourceError(f"ball of radius {n} in {g} has {size} elements, budget is {budget}")
        return sorted(_l1_ball(g.param, n))
    bfs = g._metric
    bfs.ensure_radius(n, budget)
    return sorted(x for layer in bfs.layers[: n + 1] for x in layer)


def sphere_size(g: GroupId, n: int, budget: int = DEFAULT_BALL_BUDGET) -> int:
    if g.has_l1_closed_form:
        return _l1_ball_size(g.param, n) - (_l1_ball_size(g.param, n - 1) if n > 0 else 0)
    bfs = g._metric
    bfs.ensure_radius(n, budget)
    return len(bfs.layers[n]) if n < len(bfs.layers) else 0


def diameter(g: GroupId) -> int | None:
    """Diameter of a finite group's Cayley graph; None for infinite groups."""
    if not g.is_finite:
        return None
    bfs = g._metric
    bfs.ensure_radius(g.order, DEFAULT_BALL_BUDGET)
    return len(bfs.layers) - 1


def support_radius(g: GroupId, xs: Iterable[Element]) -> int:
    return max((word_length(g, x) for x in xs), default=0)


def _l1_ball(d: int, n: int):
    if d == 0:
        yield ()
        return
    for k in range(-n, n + 1):
        for rest in _l1_ball(d - 1, n - abs(k)):
            yield (k,) + rest


@lru_cache(maxsize=None)
def _l1_ball_size(d: int, n: int) -> int:
    if n < 0:
        return 0
    if d == 0:
        return 1
    return sum(_l1_ball_size(d - 1, n - abs(k)) for k in range(-n, n + 1))
