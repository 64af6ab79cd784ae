"""State-space metrics, Hausdorff distances and quantum Gromov-Hausdorff certificates.

Upper bounds on dist_q(truncation, full algebra) come from an averaging
operator P (a Fejer kernel) with L(P a) <= L(a) and |a - P a| <= eps L(a).
The lower bound is the elementary |r_C - r_D| <= dist_q for the radii of the
two state spaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog

from . import groups
from .algebra import AlgebraElement, norm_upper, random_self_adjoint
from .classical import FiniteGroupData, classical_radius
from .errors import ConvergenceError, PreconditionError, StructuralError
from .exact_lp import maximize
from .kernels import PositiveDefiniteKernel, convex_combination, counit_kernel, fejer_kernel, folner_ball_kernel, schur_multiply
from .lipball import Functional, SupResult, sup_dirac_circle, sup_dirac_word_length, sup_functional, sup_sobolev, weighted_l1_lp, sup_weighted_l1
from .lipnorms import LipNormSpec, lip_eval, radius_estimate, verify_invariance
from .truncation import EpsilonCertificate, TruncationSystem, epsilon_of_kernel, min_level


@dataclass(frozen=True)
class StateModel:
    """A state given by a positive-definite kernel (group algebra) or a probability vector (C(G))."""

    kernel: PositiveDefiniteKernel | None = None
    probabilities: tuple | None = None
    data: FiniteGroupData | None = None
    label: str = ""

    def __post_init__(self):
        if (self.kernel is None) == (self.probabilities is None):
            raise StructuralError("a state is either a kernel or a probability vector")
        if self.probabilities is not None:
            p = self.probabilities
            if self.data is None or len(p) != self.data.n:
                raise StructuralError("probability vector does not match the group")
            if any(v < 0 for v in p) or sum(p) != 1 and abs(float(sum(p)) - 1) > 1e-12:
                raise PreconditionError("probabilities must be nonnegative and sum to 1")

    @classmethod
    def from_kernel(cls, phi: PositiveDefiniteKernel, label: str | None = None) -> "StateModel":
        return cls(kernel=phi, label=label or phi.name)

    @classmethod
    def point_mass(cls, data: FiniteGroupData, x) -> "StateModel":
        i = data.index[x]
        return cls(probabilities=tuple(Fraction(int(j == i)) for j in range(data.n)), data=data, label=f"delta[{x}]")

    @classmethod
    def from_probabilities(cls, data: FiniteGroupData, p: Sequence, label: str = "") -> "StateModel":
        return cls(probabilities=tuple(Fraction(v) if not isinstance(v, float) else v for v in p), data=data, label=label)

    @property
    def is_classical(self) -> bool:
        return self.probabilities is not None


# -- state metrics -----------------------------------------------------------------


def kantorovich(mu: StateModel, nu: StateModel) -> Fraction | float:
    """sup of sum f (mu - nu) over 1-Lipschitz f for the word metric: exact LP, f(x0) = 0."""
    data = mu.data
    if nu.data is not data:
        raise StructuralError("states on different groups")
    n = data.n
    diff = [a - b for a, b in zip(mu.probabilities, nu.probabilities)]
    free = list(range(1, n))
    # variables f+ and f- for each free element; constraints f(x) - f(y) <= d(x, y) for x != y
    c = [diff[i] for i in free] + [-diff[i] for i in free]
    A, b = [], []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            row = [0] * (2 * len(free))
            if i:
                row[i - 1] += 1
                row[len(free) + i - 1] -= 1
            if j:
                row[j - 1] -= 1
                row[len(free) + j - 1] += 1
            A.append(row)
            b.append(data.distance[i][j])
    return maximize(c, A, b, exact=all(isinstance(v, Fraction) for v in diff)).value


def state_metric(mu: StateModel, nu: StateModel, L: LipNormSpec, system: TruncationSystem, seed: int = 0) -> SupResult:
    """sup |mu(a) - nu(a)| over self-adjoint a in the system with L(a) <= 1."""
    if mu.is_classical or nu.is_classical:
        if not (mu.is_classical and nu.is_classical) or L.family != "classical_lipschitz":
            raise StructuralError("probability-vector states need classical_lipschitz on C(G)")
        v = kantorovich(mu, nu)
        return SupResult(v, v, "lp", "global")
    psi = Functional.difference(mu.kernel, nu.kernel)
    g = psi.group
    n = system.level
    if n is None:
        return sup_functional(L, psi, max(psi.inner_radius, 1), None, seed=seed)
    if not psi.values or all(psi(x) == 0 for x in groups.enumerate_ball(g, n)):
        return SupResult(Fraction(0), Fraction(0), "closed-form", f"support<={n}")
    if L.family == "weighted_l1":
        if psi.is_real and len(groups.enumerate_ball(g, n)) <= 129:
            v = weighted_l1_lp(psi, n)
            return SupResult(v, v, "lp", f"support<={n}")
        return sup_weighted_l1(psi, n, n)
    if L.family == "sobolev":
        return sup_sobolev(psi, L.s, n, n)
    if L.family == "dirac_circle":
        return sup_dirac_circle(psi, n, L.grid, n)
    if L.family == "dirac_word_length":
        return sup_dirac_word_length(psi, n, L.window if L.window is not None and L.window >= n else None, seed=seed)
    raise StructuralError(f"{L.family} is not defined on group algebras")


def hausdorff_state_distance(
    netA: Iterable[StateModel], netB: Iterable[StateModel], L: LipNormSpec, system: TruncationSystem
) -> SupResult:
    """max of the two directed sup-inf deviations; bounds from the lower and upper metric values."""
    netA, netB = list(netA), list(netB)
    if not netA or not netB:
        raise PreconditionError("Hausdorff distance needs nonempty nets")
    D = [[state_metric(a, b, L, system) for b in netB] for a in netA]
    lo_ab = max(min(d.lower for d in row) for row in D)
    hi_ab = max(min(d.upper for d in row) for row in D)
    lo_ba = max(min(D[i][j].lower for i in range(len(netA))) for j in range(len(netB)))
    hi_ba = max(min(D[i][j].upper for i in range(len(netA))) for j in range(len(netB)))
    return SupResult(max(lo_ab, lo_ba), max(hi_ab, hi_ba), "hausdorff", "net", {"directed": (hi_ab, hi_ba)})


def directed_deviation(netA, netB, L, system) -> Fraction | float:
    """sup over A of inf over B of the state metric (upper values)."""
    return max(min(state_metric(a, b, L, system).upper for b in netB) for a in netA)


# -- dist_q certificate --------------------------------------------------------------


@dataclass(frozen=True)
class DistqCertificate:
    system: str
    level: int
    lipnorm: str
    kernel: str
    upper: Fraction | float
    lower: Fraction | float
    gap: Fraction | float
    epsilon: EpsilonCertificate
    hypothesis_check: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower > self.upper:
            raise AssertionError(f"certificate lower {self.lower} exceeds upper {self.upper}")

    @property
    def exact(self) -> bool:
        return self.lower == self.upper and isinstance(self.upper, Fraction)

    def to_json(self) -> dict:
        def enc(v):
            return str(v) if isinstance(v, Fraction) else float(v)

        return {
            "system": self.system,
            "level": self.level,
            "lipnorm": self.lipnorm,
            "kernel": self.kernel,
            "upper": enc(self.upper),
            "lower": enc(self.lower),
            "gap": enc(self.gap),
            "epsilon": self.epsilon.to_json(),
            "hypothesis_check": self.hypothesis_check,
        }


_RADIUS_CACHE: dict = {}


def _radius(L: LipNormSpec, g, level):
    key = (L, g, level)
    r = _RADIUS_CACHE.get(key)
    if r is None:
        r = _RADIUS_CACHE[key] = radius_estimate(L, g, level)
    return r


def check_hypotheses(
    phi: PositiveDefiniteKernel, L: LipNormSpec, eps, samples: int, seed: int, radius: int, tol: float = 1e-9
) -> dict:
    """Sample L(P a) <= L(a) and |a - P a| <= eps L(a) on random self-adjoint a."""
    g = phi.group
    rng = np.random.default_rng(seed)
    worst_inv, worst_approx = -math.inf, -math.inf
    for _ in range(samples):
        a = random_self_adjoint(g, radius, rng)
        ok, slack = verify_invariance(L, phi, a, tol)
        worst_inv = max(worst_inv, -slack)
        la = lip_eval(L, a).lower
        nrm, _ = norm_upper(a - schur_multiply(phi, a))
        worst_approx = max(worst_approx, nrm - float(eps) * la)
    worst = max(worst_inv, worst_approx)
    return {
        "samples": samples,
        "max_violation": float(worst) if samples else 0.0,
        "passed": bool(samples == 0 or worst <= tol),
    }


def distq_certificate(
    systemN: TruncationSystem,
    phi: PositiveDefiniteKernel,
    L: LipNormSpec,
    samples: int = 8,
    seed: int = 0,
    search_window: int | None = None,
) -> DistqCertificate:
    """Certified bounds on dist_q between the level-N truncation and the full algebra."""
    g = systemN.group
    if systemN.is_classical:
        raise StructuralError("distq certificates are built for group-algebra truncations")
    N = systemN.level
    if N is None:
        raise PreconditionError("the truncation system needs a finite level")
    supp = phi.support
    if supp is None:
        if not g.is_finite:
            raise PreconditionError("F not inside S^N: the kernel has infinite support")
        supp = g.elements()
    need = min_level(supp, g)
    if need > N:
        raise PreconditionError(f"F not inside S^N: the kernel needs level {need} > {N}")
    eps = epsilon_of_kernel(phi, L, search_window, seed=seed)
    if not eps.is_global:
        raise PreconditionError(
            f"epsilon is only certified for {eps.scope}; a global bound is needed for dist_q"
        )
    radius = N + 2 if not g.is_finite else groups.diameter(g)
    check = check_hypotheses(phi, L, eps.epsilon, samples, seed, radius)
    rN = _radius(L, g, N)
    rF = _radius(L, g, None)
    lower = max(Fraction(0), rF.lower - rN.upper, rN.lower - rF.upper)
    if isinstance(lower, float) or isinstance(eps.epsilon, float):
        lower = float(lower)
    upper = eps.epsilon
    check["radius"] = {"level": rN.to_json(), "full": rF.to_json()}
    return DistqCertificate(str(systemN), N, L.id, phi.name, upper, lower, eps.gap, eps, check)


# -- state approximation ----------------------------------------------------------------


@dataclass(frozen=True)
class Approximation:
    state: StateModel
    weights: tuple
    candidates: tuple
    deviation: float
    success: bool
    net_size: int


def default_candidates(g, budget: int) -> list[PositiveDefiniteKernel]:
    if g.family in ("free_abelian", "cyclic") and g.generators is None:
        return [fejer_kernel(g, k) for k in range(1, budget + 1)]
    return [folner_ball_kernel(g, r) for r in range(budget + 1)]


def approximate_state(
    mu: StateModel,
    eps_target: float,
    L: LipNormSpec,
    system: TruncationSystem,
    budget: int,
    candidates: Sequence[PositiveDefiniteKernel] | None = None,
    random_directions: int = 32,
    seed: int = 0,
) -> Approximation:
    """Fit a convex combination of candidate vector states to mu on a net of the Lip ball.

    The net holds the coordinate directions of the system normalized to L = 1
    and seeded random self-adjoint elements; the LP minimizes the largest
    deviation on the net. Success means deviation <= eps_target / 2.
    """
    if eps_target <= 0:
        raise PreconditionError("eps_target must be positive")
    if mu.is_classical:
        raise StructuralError("approximate_state works with kernel states")
    g = mu.kernel.group
    cands = list(candidates) if candidates is not None else default_candidates(g, budget)
    if not cands:
        raise PreconditionError("no candidate states")
    level = system.level if system.level is not None else budget
    e = g.identity
    net: list[AlgebraElement] = []
    seen = set()
    for x in groups.enumerate_ball(g, level):
        if x == e or x in seen:
            continue
        xi = g._inv(x)
        seen |= {x, xi}
        dirs = [AlgebraElement.delta(g, x, 0.5) + AlgebraElement.delta(g, xi, 0.5)]
        if xi != x:
            dirs.append(AlgebraElement.delta(g, x, 0.5j) + AlgebraElement.delta(g, xi, -0.5j))
        net.extend(dirs)
    rng = np.random.default_rng(seed)
    for _ in range(random_directions):
        net.append(random_self_adjoint(g, level, rng))
    net = [a * (1.0 / lip_eval(L, a).upper) for a in net if lip_eval(L, a).upper > 0]
    if not net:
        state = StateModel.from_kernel(cands[0])
        return Approximation(state, (1.0,), tuple(c.name for c in cands), 0.0, True, 0)

    def value(phi, a):
        return sum(v * complex(phi(x)) for x, v in a.items()).real

    target = np.array([value(mu.kernel, a) for a in net])
    V = np.array([[value(c, a) for c in cands] for a in net])
    k = len(cands)
    # variables: w (k), tau; minimize tau with |target - V w| <= tau, sum w = 1, w >= 0
    cvec = np.zeros(k + 1)
    cvec[-1] = 1.0
    ones = np.ones((len(net), 1))
    A_ub = np.vstack([np.hstack([V, -ones]), np.hstack([-V, -ones])])
    b_ub = np.concatenate([target, -target])
    A_eq = np.hstack([np.ones((1, k)), np.zeros((1, 1))])
    res = linprog(cvec, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=[(0, None)] * (k + 1), method="highs")
    if res.status != 0:
        raise ConvergenceError(f"approximation LP failed: {res.message}")
    w = np.maximum(res.x[:k], 0.0)
    w = w / w.sum()
    dev = float(np.max(np.abs(target - V @ w)))
    used = [(wi, c) for wi, c in zip(w, cands) if wi > 1e-12]
    total = sum(wi for wi, _ in used)
    used = [(wi / total, c) for wi, c in used]
    combo = convex_combination([c for _, c in used], [float(wi) for wi, _ in used]) if len(used) > 1 else used[0][1]
    return Approximation(
        StateModel.from_kernel(combo),
        tuple(float(x) for x in w),
        tuple(c.name for c in cands),
        dev,
        dev <= eps_target / 2,
        len(net),
    )
