"""Maximize a state difference over the self-adjoint Lip-norm unit ball.

Given a functional psi on the group (psi = phi_mu - phi_nu for two states),
compute sup { sum_x a(x) psi(x) : a = a*, L(a) <= 1 } with a certified lower
and upper bound. The identity coefficient never matters: every Lip-norm
vanishes on scalars and psi(e) = 0 for unital states.

``support`` restricts a to ball(support); ``None`` asks for the value over
the whole algebra, which needs an analytic tail argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from . import groups
from .errors import ConvergenceError, PreconditionError, StructuralError
from .exact_lp import maximize
from .groups import GroupId
from .kernels import PositiveDefiniteKernel
from .lipnorms import DiracWindow, LipNormSpec, _check_circle_group, sphere_tail

Number = Fraction | complex | float

CONIC_LIMIT = 40
# the dense circle LP grows cubically with the degree; above this it runs at this degree
LP_DEGREE_LIMIT = 128


@dataclass(frozen=True)
class Functional:
    """psi(x) = values[x] on the listed elements and ``tail`` elsewhere."""

    group: GroupId
    values: dict
    tail: Number = Fraction(0)
    abs_bound: float = 2.0
    source: tuple = ()

    def __call__(self, x):
        return self.values.get(x, self.tail)

    @property
    def inner_radius(self) -> int:
        return groups.support_radius(self.group, self.values)

    @property
    def exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in list(self.values.values()) + [self.tail])

    @property
    def is_real(self) -> bool:
        return all(isinstance(v, (int, Fraction)) or complex(v).imag == 0 for v in list(self.values.values()) + [self.tail])

    @classmethod
    def difference(cls, mu: PositiveDefiniteKernel, nu: PositiveDefiniteKernel) -> "Functional":
        if mu.group != nu.group:
            raise StructuralError("states live on different groups")
        keys = set(mu.values) | set(nu.values)
        vals = {x: mu(x) - nu(x) for x in keys}
        bound = 2.0
        if mu.is_counit and all(isinstance(v, Fraction) and 0 <= v <= 1 for v in nu.values.values()):
            bound = 1.0
        return cls(mu.group, vals, mu.tail - nu.tail, bound, (mu, nu))


@dataclass(frozen=True)
class SupResult:
    lower: Fraction | float
    upper: Fraction | float
    method: str
    scope: str
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower > self.upper + 1e-12 * max(1.0, abs(float(self.upper))):
            raise AssertionError(f"lower {self.lower} exceeds upper {self.upper}")

    @property
    def gap(self) -> Fraction | float:
        g = self.upper - self.lower
        return g if g > 0 else type(g)(0)

    @property
    def value(self) -> Fraction | float:
        """The certified (upper) value."""
        return self.upper


def _orbits(g: GroupId, elems) -> list[tuple]:
    """Representatives x of {x, x^-1} among elems, x != e, with the orbit size."""
    e = g.identity
    seen, out = set(), []
    for x in elems:
        if x == e or x in seen:
            continue
        xi = g._inv(x)
        seen.update((x, xi))
        out.append((x, xi, 1 if xi == x else 2))
    return out


def _support_elements(g: GroupId, support: int | None, psi: Functional) -> tuple[list, bool]:
    if support is None:
        R = psi.inner_radius
        if g.is_finite:
            return g.elements(), True
        return groups.enumerate_ball(g, R), False
    ball = groups.enumerate_ball(g, support)
    return ball, g.is_finite and support >= groups.diameter(g)


# -- weighted l1 -----------------------------------------------------------------------


def sup_weighted_l1(psi: Functional, search_window: int, support: int | None = None, exact_lp: bool = False) -> SupResult:
    """Closed form max |psi(x)| / l(x) over the search ball, plus a tail bound."""
    g = psi.group
    R = search_window if support is None else min(search_window, support)
    elems = groups.enumerate_ball(g, R)
    exact = psi.exact and psi.is_real
    best: Fraction | float = Fraction(0) if exact else 0.0
    arg = None
    for x in elems:
        if x == g.identity:
            continue
        v = psi(x)
        r = abs(Fraction(v)) / groups.word_length(g, x) if exact else abs(complex(v)) / groups.word_length(g, x)
        if r > best:
            best, arg = r, x
    details = {"argmax": arg, "search_window": R}
    finite_done = g.is_finite and R >= groups.diameter(g)
    if support is not None and support <= R or finite_done:
        res = SupResult(best, best, "closed-form", "global" if finite_done else f"support<={support}", details)
    elif R >= psi.inner_radius:
        t = psi.tail
        tail = (abs(Fraction(t)) if exact else abs(complex(t))) / (R + 1)
        details["tail"] = tail
        top = max(best, tail)
        res = SupResult(top, top, "closed-form", "global", details)
    else:
        bound = psi.abs_bound / (R + 1)
        details["tail_bound"] = bound
        if float(best) < bound:
            raise PreconditionError(
                f"inconclusive, enlarge window: interior max {float(best):.6g} is below the tail bound {bound:.6g}"
            )
        res = SupResult(best, best, "closed-form", "global", details)
    if exact_lp:
        lp = weighted_l1_lp(psi, R)
        if lp != res.lower and res.scope != "global":
            raise AssertionError(f"LP value {lp} disagrees with the closed form {res.lower}")
        res.details["lp"] = lp
    return res


def weighted_l1_lp(psi: Functional, support: int):
    """Exact LP over real self-adjoint a on ball(support): max q.(u+ - u-), sum c (u+ + u-) <= 1."""
    g = psi.group
    orbs = _orbits(g, groups.enumerate_ball(g, support))
    if not orbs:
        return Fraction(0)
    if not psi.is_real:
        raise StructuralError("the exact LP handles real functionals; use the closed form")
    q, c = [], []
    for x, xi, n in orbs:
        q.append(n * Fraction(psi(x)) if psi.exact else n * complex(psi(x)).real)
        c.append(n * groups.word_length(g, x))
    obj = q + [-v for v in q]
    A = [c + c]
    return maximize(obj, A, [1]).value


# -- Sobolev ----------------------------------------------------------------------------


def sup_sobolev(psi: Functional, s: float, search_window: int, support: int | None = None) -> SupResult:
    """Cauchy-Schwarz: (sum_{x != e} |psi(x)|^2 (1 + l(x))^{-2s})^{1/2}."""
    g = psi.group
    R = search_window if support is None else min(search_window, support)
    elems = groups.enumerate_ball(g, R)
    inner = math.fsum(
        abs(complex(psi(x))) ** 2 * (1 + groups.word_length(g, x)) ** (-2 * s) for x in elems if x != g.identity
    )
    finite_done = g.is_finite and R >= groups.diameter(g)
    if support is not None and support <= R or finite_done:
        v = math.sqrt(inner)
        return SupResult(v, v, "closed-form", "global" if finite_done else f"support<={support}", {"search_window": R})
    if R >= psi.inner_radius:
        tail = abs(complex(psi.tail)) ** 2
        tail = tail * sphere_tail(g, R, 1, 2 * s) if tail else 0.0
        v = math.sqrt(inner + tail)
        return SupResult(v, v, "closed-form", "global", {"search_window": R, "tail": tail})
    bound = psi.abs_bound**2 * sphere_tail(g, R, 1, 2 * s)
    return SupResult(math.sqrt(inner), math.sqrt(inner + bound), "closed-form+tail-bound", "global", {"search_window": R})


# -- circle -----------------------------------------------------------------------------


def circle_transport(psi: Functional) -> float:
    """W1 distance from the point mass at 0 to the measure of phi = 1 - psi on the circle.

    With F_phi = sum phi(k) e^{ik theta} >= 0 and |theta| = pi/2 - (4/pi) sum_{odd k>0} cos(k theta)/k^2,
    the transport cost is (1 - t) pi/2 - (2/pi) sum_{odd k} (phi(k) - t) / k^2 where t is the
    constant tail of phi (a counit component, which costs nothing).
    """
    src = psi.source
    if not (len(src) == 2 and src[0].is_counit):
        raise PreconditionError("the transport bound applies to counit minus a positive-definite kernel")
    nu = src[1]
    t = complex(nu.tail)
    total = (1 - t) * math.pi / 2
    acc = 0j
    for x, v in nu.values.items():
        k = x[0]
        if k % 2:
            acc += (complex(v) - t) / (k * k)
    total -= 2 / math.pi * acc
    return float(total.real)


def _circle_lp(psi: Functional, K: int, grid: int) -> tuple[float, float, np.ndarray]:
    """Grid LP over real f of degree <= K with |f'| <= 1 at grid points.

    Returns (certified lower, grid value, coefficients). The grid value is an
    upper bound for the degree-K problem; rescaling by the second-order
    Bernstein factor makes the grid optimum feasible on the whole circle.
    """
    if K == 0:
        return 0.0, 0.0, np.zeros(0)
    h = 2 * math.pi / grid
    slack = (h * K) ** 2 / 2
    if slack >= 0.5:
        raise PreconditionError(f"grid of {grid} points is too coarse for degree {K}")
    ks = np.arange(1, K + 1)
    re = np.array([complex(psi((int(k),))).real for k in ks])
    im = np.array([complex(psi((int(k),))).imag for k in ks])
    real_only = not np.any(im)
    # f' is odd when f is even, so half the grid suffices in the real case
    theta = np.arange(grid // 2 + 1) * h if real_only else np.arange(grid) * h
    S = np.sin(np.outer(theta, ks)) * ks
    if real_only:
        # a(k) = a(-k) = alpha_k / 2, f = sum alpha_k cos k theta, objective sum alpha_k Re psi(k)
        c = re
        D = -S
    else:
        C = np.cos(np.outer(theta, ks)) * ks
        c = np.concatenate([re, im])
        D = np.hstack([-S, C])
    # constraint generation: solve on a subgrid, add every full-grid point where |f'| > 1
    active = np.zeros(len(theta), dtype=bool)
    active[:: max(1, len(theta) // (8 * K))] = True
    rounds = 0
    while True:
        Da = D[active]
        res = linprog(
            -c, A_ub=np.vstack([Da, -Da]), b_ub=np.ones(2 * len(Da)), bounds=[(None, None)] * len(c), method="highs"
        )
        if res.status != 0:
            raise ConvergenceError(f"circle LP failed: {res.message}")
        viol = np.abs(D @ res.x) > 1 + 1e-9
        rounds += 1
        if not viol.any():
            break
        active |= viol
    x = res.x / max(1.0, float(np.abs(D @ res.x).max()))
    grid_val = float(c @ res.x)
    lower = float(c @ x) * math.sqrt(1 - slack)
    return lower, grid_val, x


def _jackson_multipliers(K: int) -> np.ndarray:
    """Fourier multipliers rho_0..rho_K of the Jackson kernel (squared Fejer kernel) of degree <= K."""
    m = K // 2 + 1
    f = 1 - np.abs(np.arange(-m + 1, m)) / m
    sq = np.convolve(f, f)
    r = sq[len(sq) // 2 :] / sq[len(sq) // 2]
    out = np.zeros(K + 1)
    out[: min(len(r), K + 1)] = r[: K + 1]
    return out


def circle_jackson_lower(psi: Functional, K: int) -> float:
    """|psi(f)| for f = pi/2 - |theta| smoothed by the Jackson kernel of degree <= K.

    The kernel is a probability density, so f stays 1-Lipschitz and the value is a
    certified lower bound at degree K.
    """
    rho = _jackson_multipliers(K)
    acc = 0.0
    for k in range(1, K + 1, 2):
        acc += rho[k] * complex(psi((k,))).real / (k * k)
    return abs(4 / math.pi * acc)


def sup_dirac_circle(psi: Functional, degree: int, grid: int = 2**14, support: int | None = None) -> SupResult:
    """Degree-limited grid LP (two-sided on truncations); transport value for counit minus a state.

    Above LP_DEGREE_LIMIT the LP runs at that degree and the Jackson-smoothed
    transport potential supplies a second lower bound at the full degree.
    """
    g = psi.group
    _check_circle_group(g)
    K = degree if support is None else min(degree, support)
    K_lp = min(K, LP_DEGREE_LIMIT)
    lower, grid_val, coef = _circle_lp(psi, K_lp, grid)
    lower, grid_val = float(lower), float(grid_val)
    details = {"degree": K, "lp_degree": K_lp, "grid": grid, "lp_grid_value": grid_val}
    if support is not None and support <= degree and K_lp == K:
        return SupResult(lower, max(lower, grid_val), "lp", f"support<={support}", details)
    jl = float(circle_jackson_lower(psi, K)) if K > K_lp or support is None else 0.0
    details["jackson_lower"] = jl
    if support is not None and support <= degree:
        # the grid value only bounds the degree-K_lp problem, so no upper bound is available here
        raise PreconditionError(f"support {support} exceeds the LP degree limit {LP_DEGREE_LIMIT}")
    upper = float(circle_transport(psi))
    details["transport"] = upper
    lower = max(lower, jl)
    if lower > upper + 1e-9:
        raise AssertionError(f"LP lower {lower} above transport value {upper}")
    return SupResult(min(lower, upper), upper, "lp+transport", "global", details)


# -- Dirac word length -----------------------------------------------------------------


def sup_dirac_word_length(
    psi: Functional,
    support: int,
    window: int | None = None,
    iterations: int = 400,
    seed: int = 0,
    target_gap: float = 1e-4,
) -> SupResult:
    """Subgradient ascent for the primal, a feasible nuclear-norm dual for the upper bound.

    The norm is relaxed to its compression on ball(window) (window >= support),
    which only enlarges the feasible set; so the dual value bounds the sup over
    a supported in ball(support). Finite groups with window >= diameter are exact.
    """
    g = psi.group
    w = window if window is not None else support + 2
    if w < support:
        raise PreconditionError(f"window {w} is smaller than the support radius {support}")
    dw = DiracWindow.get(g, w)
    orbs = _orbits(g, groups.enumerate_ball(g, support))
    global_ = g.is_finite and support >= groups.diameter(g) and w >= groups.diameter(g)
    scope = "global" if global_ else f"support<={support}"
    if not orbs:
        return SupResult(0.0, 0.0, "subgradient", scope, {})
    mats, q, colw = [], [], []
    real_psi = psi.is_real
    for x, xi, n in orbs:
        Bx = _dense_delta(dw, x)
        Bre = Bx if n == 1 else Bx + _dense_delta(dw, xi)
        v = complex(psi(x))
        mats.append(Bre)
        q.append(n * v.real)
        colw.append(n * groups.word_length(g, x) ** 2)
        if n == 2 and not real_psi:
            mats.append(1j * (Bx - _dense_delta(dw, xi)))
            q.append(-2 * v.imag)
            colw.append(n * groups.word_length(g, x) ** 2)
    B = np.stack(mats)
    q = np.asarray(q, dtype=float)
    colw = np.asarray(colw, dtype=float)
    if not np.any(q):
        return SupResult(0.0, 0.0, "subgradient", scope, {"window": w})
    is_real = np.isrealobj(B) or not np.any(B.imag)
    if is_real:
        B = B.real

    def top(t):
        M = np.tensordot(t, B, axes=1)
        U, S, Vh = np.linalg.svd(M)
        return M, U, S, Vh

    # start from the better of q and the best single orbit
    cands = [q / np.linalg.norm(q)]
    j = int(np.argmax(np.abs(q) / np.sqrt(colw)))
    e = np.zeros_like(q)
    e[j] = np.sign(q[j])
    cands.append(e)
    best_val, best_t = -math.inf, None
    for t in cands:
        _, _, S, _ = top(t)
        val = float(q @ t) / S[0]
        if val > best_val:
            best_val, best_t = val, t / S[0]
    t = best_t.copy()
    eta0 = 0.2
    for k in range(iterations):
        M, U, S, Vh = top(t)
        sigma = S[0]
        t = t / sigma
        val = float(q @ t)
        if val > best_val:
            best_val, best_t = val, t.copy()
        u, v = U[:, 0], Vh[0].conj()
        gs = np.real(np.einsum("i,kij,j->k", u.conj(), B, v))
        grad = q - val * gs
        gn = np.linalg.norm(grad)
        if gn < 1e-14:
            break
        t = t + eta0 / math.sqrt(k + 1) * np.linalg.norm(t) * grad / gn
    M, U, S, Vh = top(best_t)
    best_t = best_t / S[0]
    primal = float(q @ best_t)
    upper, info = _nuclear_dual(B, q, colw, best_t, primal)
    details = {"window": w, "support": support, "dual": info}
    # the conic polish is only affordable on small windows
    if upper - primal > target_gap * max(1.0, abs(primal)) and dw.size <= CONIC_LIMIT:
        try:
            up2, info2 = _cvx_dual(B, q, colw)
            if up2 < upper:
                upper, details["dual"] = up2, info2
        except ImportError:
            pass
    if primal > upper:
        upper = primal
    return SupResult(primal, upper, "subgradient", scope, details)


def _dense_delta(dw: DiracWindow, x) -> np.ndarray:
    r, c, wts = dw.block(x)
    M = np.zeros((dw.size, dw.size))
    M[r, c] = wts
    return M


def _residual_bound(resid: np.ndarray, colw: np.ndarray) -> float:
    # for ||B(t)|| <= 1 the identity column gives sum colw t^2 <= 1, so |r.t| <= |r / sqrt(colw)|
    return float(np.linalg.norm(resid / np.sqrt(colw)))


def _project(B, q, Y0):
    """Y = Y0 + sum gamma_O B_O with <B_O, Y> = q_O exactly (least squares on the Gram system)."""
    nb = B.shape[0]
    flat = B.reshape(nb, -1)
    G = np.real(flat.conj() @ flat.T)
    cur = np.real(flat.conj() @ Y0.reshape(-1))
    gamma = np.linalg.lstsq(G, q - cur, rcond=None)[0]
    Y = Y0 + np.tensordot(gamma, B, axes=1)
    resid = np.real(flat.conj() @ Y.reshape(-1)) - q
    return Y, resid


def _nuclear_dual(B, q, colw, t, primal) -> tuple[float, dict]:
    M = np.tensordot(t, B, axes=1)
    U, S, Vh = np.linalg.svd(M)
    nb = B.shape[0]
    best = (math.inf, {})
    for k in range(1, min(8, len(S)) + 1):
        Uk, Vk = U[:, :k], Vh[:k].conj().T
        # q_O ~ lambda Re <B_O, U Z V^H> with Z symmetric: solve for the entries of Z
        basis = []
        for i in range(k):
            for j in range(i, k):
                Z = np.zeros((k, k))
                Z[i, j] = Z[j, i] = 1.0
                basis.append(Z)
        cols = np.stack([np.real(np.einsum("kab,ab->k", B.conj(), Uk @ Z @ Vk.conj().T)) for Z in basis], axis=1)
        z = np.linalg.lstsq(cols, q, rcond=None)[0]
        Z = sum(zi * Zi for zi, Zi in zip(z, basis))
        Y0 = Uk @ Z @ Vk.conj().T
        Y, resid = _project(B, q, Y0)
        val = float(np.linalg.svd(Y, compute_uv=False).sum()) + _residual_bound(resid, colw)
        if val < best[0]:
            best = (val, {"rank": k, "residual": float(np.abs(resid).max())})
    return best


def _cvx_dual(B, q, colw) -> tuple[float, dict]:
    """Minimum nuclear norm over the affine set <B_O, Y> = q_O (real data only)."""
    import cvxpy as cp

    if not np.isrealobj(B):
        raise ImportError("conic dual polish handles real matrices only")
    nb, n, _ = B.shape
    Y = cp.Variable((n, n))
    cons = [cp.sum(cp.multiply(B[i], Y)) == q[i] for i in range(nb)]
    prob = cp.Problem(cp.Minimize(cp.normNuc(Y)), cons)
    prob.solve(solver="CLARABEL")
    if Y.value is None:
        raise ConvergenceError("nuclear-norm dual failed")
    Yv, resid = _project(B, q, np.asarray(Y.value))
    val = float(np.linalg.svd(Yv, compute_uv=False).sum()) + _residual_bound(resid, colw)
    return val, {"solver": "conic", "residual": float(np.abs(resid).max())}


# -- dispatch --------------------------------------------------------------------------


def sup_functional(
    L: LipNormSpec, psi: Functional, search_window: int, support: int | None = None, seed: int = 0
) -> SupResult:
    if L.family == "weighted_l1":
        return sup_weighted_l1(psi, search_window, support)
    if L.family == "sobolev":
        return sup_sobolev(psi, L.s, search_window, support)
    if L.family == "dirac_circle":
        return sup_dirac_circle(psi, search_window, L.grid, support)
    if L.family == "dirac_word_length":
        R = search_window if support is None else min(search_window, support)
        return sup_dirac_word_length(psi, R, L.window if L.window is not None and L.window >= R else None, seed=seed)
    raise StructuralError(f"{L.family} is not a group-algebra Lip-norm")
