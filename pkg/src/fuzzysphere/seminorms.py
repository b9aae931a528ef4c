"""Seminorms with declared Leibniz-type properties, their combinators, and the
concrete Lipschitz seminorms on matrices and on sphere functions.

Gradients follow one convention throughout: ``value_and_grad(a)`` returns
``(L(a), G)`` where ``G`` has the shape of ``a``'s coordinates and the real
linear functional ``x -> Re sum(conj(G) * x)`` is a subgradient of ``L`` at
``a``.  For complex coordinates this ``G`` is also the gradient with respect to
the real and imaginary parts taken jointly.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .errors import DomainMismatch, NonMonotoneNorm, NotADerivation, NotAMetric
from .functions import (
    FunctionElement,
    Jet,
    harmonic_matrix,
    gradient_direction,
    gradient_modulus,
    maximize_on_sphere,
    search_points,
)
from .groupmodel import sphere_angles, sphere_points, su2_axis_angle, su2_random
from .repn import SpinIrrep

LEIBNIZ = "leibniz"
STRONG = "stronglyLeibniz"
STAR = "star"
FINITE = "finite"
LSC = "lowerSemicontinuous"
CONTINUOUS = "continuous"

# properties that survive maxima, sums and monotone combinations
_PRESERVED = frozenset({LEIBNIZ, STRONG, FINITE, LSC, CONTINUOUS, STAR})


@dataclass(frozen=True, eq=False)
class SeminormHandle:
    """An evaluable seminorm with declared property flags."""

    name: str
    evaluate: Callable
    domain: str
    flags: frozenset = frozenset()
    value_and_grad: Callable | None = None

    def __call__(self, element) -> float:
        return self.evaluate(element)

    def has(self, flag: str) -> bool:
        return flag in self.flags

    def scaled(self, r: float) -> "SeminormHandle":
        if r < 0:
            raise ValueError("scale must be nonnegative")
        vg = None
        if self.value_and_grad is not None:

            def vg(a, _base=self.value_and_grad):
                v, g = _base(a)
                return r * v, r * g

        return SeminormHandle(f"{r:g}*{self.name}", lambda a: r * self.evaluate(a), self.domain, self.flags, vg)


# ------------------------------------------------------------ direction search

# 13 representatives of the 26-direction cube grid (faces, edges, corners), one per +/- pair
_GRID = np.array(
    [v for v in itertools.product((-1, 0, 1), repeat=3) if v > (0, 0, 0)],
    dtype=float,
)
DIRECTION_GRID = _GRID / np.linalg.norm(_GRID, axis=1, keepdims=True)


# the ascent is linear and crawls where the sup is nearly flat; optimizer
# gradients stop at 500 steps, reported values get the longer run
EVAL_ITER = 5000


def max_direction_norm(C, n_starts: int = 3, tol: float = 1e-15, max_iter: int = 500):
    """``sup_{|X|=1} ||X_1 C_1 + X_2 C_2 + X_3 C_3||`` (operator norm), batched.

    ``C`` has shape ``(..., 3, a, b)``.  The objective is convex in ``X``, so the
    fixed-point map ``X <- g/|g|`` with ``g_k = Re(u* C_k v)`` (top singular pair
    of the current matrix) never decreases it.  Starts are the best few cube-grid
    directions.  Returns ``(value, X, u, v)`` with batch shape prepended.
    """
    C = np.asarray(C, dtype=complex)
    batch = C.shape[:-3]
    a, b = C.shape[-2:]
    Cf = C.reshape((-1, 3, a, b))
    nb = Cf.shape[0]
    grid_vals = np.linalg.svd(
        np.einsum("gk,nkab->ngab", DIRECTION_GRID, Cf), compute_uv=False
    )[..., 0]
    k = min(n_starts, len(DIRECTION_GRID))
    starts = np.argsort(-grid_vals, axis=1, kind="stable")[:, :k]
    X = DIRECTION_GRID[starts].reshape(nb * k, 3)
    Cs = np.repeat(Cf, k, axis=0)
    value = np.zeros(nb * k)
    active = np.ones(nb * k, dtype=bool)
    u = np.zeros((nb * k, a), dtype=complex)
    v = np.zeros((nb * k, b), dtype=complex)
    prev = np.full(nb * k, -np.inf)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        M = np.einsum("nk,nkab->nab", X[idx], Cs[idx])
        U, S, Vh = np.linalg.svd(M)
        uu = U[:, :, 0]
        vv = Vh[:, 0, :].conj()
        g = np.real(np.einsum("na,nkab,nb->nk", uu.conj(), Cs[idx], vv))
        gn = np.linalg.norm(g, axis=1)
        value[idx] = S[:, 0]
        u[idx] = uu
        v[idx] = vv
        scale = np.maximum(S[:, 0], 1e-300)
        # stalled: ascent has reached rounding level even if the gap test has not
        stalled = S[:, 0] - prev[idx] <= 10 * tol * scale
        prev[idx] = S[:, 0]
        done = (gn - S[:, 0] <= tol * scale) | (gn == 0) | stalled
        move = ~done
        X[idx[move]] = g[move] / gn[move, None]
        active[idx[done]] = False
    value = value.reshape(nb, k)
    best = np.argmax(value, axis=1)
    pick = np.arange(nb) * k + best
    out_v = value[np.arange(nb), best].reshape(batch)
    return (
        out_v,
        X[pick].reshape(batch + (3,)),
        u[pick].reshape(batch + (a,)),
        v[pick].reshape(batch + (b,)),
    )


def commutators(generators, T):
    """``[J_k, T]`` stacked along a new leading axis of size 3."""
    return np.stack([J @ T - T @ J for J in generators])


# ----------------------------------------------------------- concrete seminorms


def matrix_lipnorm(irrep: SpinIrrep) -> SeminormHandle:
    """``L(T) = sup_{|X|=1} ||[X.J, T]||`` on ``M_{n+1}``."""
    J = irrep.J

    def value_and_grad(T):
        T = np.asarray(T, dtype=complex)
        val, X, u, v = max_direction_norm(commutators(J, T))
        A = irrep.generator(X)
        grad = A @ np.outer(u, v.conj()) - np.outer(u, (A @ v).conj())
        return float(val), grad

    def evaluate(T):
        return float(max_direction_norm(commutators(J, np.asarray(T, dtype=complex)), max_iter=EVAL_ITER)[0])

    return SeminormHandle(
        f"L_B[n={irrep.n}]",
        evaluate,
        f"matrix:{irrep.d}",
        frozenset({LEIBNIZ, STRONG, STAR, FINITE, LSC, CONTINUOUS}),
        value_and_grad,
    )


def hemisphere_directions(count: int):
    """Fibonacci points on the upper unit hemisphere (``X`` and ``-X`` give the same norm)."""
    i = np.arange(count) + 0.5
    z = 1.0 - i / count
    r = np.sqrt(1.0 - z * z)
    ph = np.pi * (1.0 + 5**0.5) * i
    return np.stack([r * np.cos(ph), r * np.sin(ph), z], axis=1)


def schatten_norm(M, p: float):
    """Schatten ``p``-norm of each matrix in a stack and its gradient ``U (s/|M|_p)^(p-1) V^H``."""
    U, s, Vh = np.linalg.svd(M)
    top = np.maximum(s[..., :1], 1e-300)
    val = top[..., 0] * np.sum((s / top) ** p, axis=-1) ** (1.0 / p)
    w = (s / np.maximum(val[..., None], 1e-300)) ** (p - 1)
    return val, np.einsum("...ik,...k,...kj->...ij", U, w, Vh)


def smooth_matrix_lipnorm(irrep: SpinIrrep, p: float, n_dirs: int):
    """Differentiable stand-in for ``L_B``: the ``p``-mean over directions of
    Schatten-``p`` norms of ``[X.J, T]``.  Tends to ``L_B`` as ``p`` and the
    direction count grow.  Returns a ``(value, gradient)`` map.
    """
    A = np.einsum("gk,kab->gab", hemisphere_directions(n_dirs), np.array(irrep.J))

    def value_and_grad(T):
        M = A @ T - T @ A
        v, G = schatten_norm(M, p)
        top = float(v.max())
        if top <= 0:
            return 0.0, np.zeros_like(T)
        c = top * np.mean((v / top) ** p) ** (1.0 / p)
        H = (((v / c) ** (p - 1)) / len(v))[:, None, None] * G
        return float(c), (A @ H - H @ A).sum(axis=0)

    return value_and_grad


def function_lipnorm(l_max: int, frame=None, refine: bool = True) -> SeminormHandle:
    """``L(f) = sup_x sup_{|X|=1} |(X.L f)(x)|`` for band-limited ``f``.

    For smooth ``f`` this is the Lipschitz constant for great-circle distance.
    Accepts :class:`FunctionElement` (searched over the sphere) or
    :class:`Jet` (maximum over the jet's own points).  ``frame`` is accepted
    for interface symmetry; the search grid is chosen from ``l_max``.
    """
    from .errors import BandLimitExceeded

    if frame is not None and frame.exactness_degree < 2 * l_max:
        raise ValueError("frame exactness must be at least 2*l_max")

    def check(f):
        if f.l_max > l_max and f.band() > l_max:
            raise BandLimitExceeded(f"degree {f.band()} exceeds l_max={l_max}")

    def locate(f):
        ang = f.angular()

        def modulus(theta, phi):
            Y = harmonic_matrix(f.l_max, theta, phi)
            return gradient_modulus(ang @ Y.T)

        return maximize_on_sphere(modulus, f.l_max, refine=refine)

    def evaluate(f):
        if isinstance(f, Jet):
            return float(np.max(gradient_modulus(f.derivs)))
        check(f)
        return locate(f)[0]

    def value_and_grad(f):
        check(f)
        val, (theta, phi) = locate(f)
        Y = harmonic_matrix(f.l_max, theta, phi)[0]
        from .functions import angular_momentum_blocks

        blocks = angular_momentum_blocks(f.l_max)
        vals = np.array([[Y @ (B @ f.coeffs)] for B in blocks])
        X, ph = gradient_direction(vals)
        w = sum(X[k, 0] * (Y @ blocks[k]) for k in range(3))
        return val, np.exp(1j * ph[0]) * np.conj(w)

    return SeminormHandle(
        f"L_A[l_max={l_max}]",
        evaluate,
        f"function:{l_max}",
        frozenset({LEIBNIZ, STRONG, STAR, FINITE, LSC, CONTINUOUS}),
        value_and_grad,
    )


def finite_metric_lipnorm(points, distances, tol: float = 1e-12) -> SeminormHandle:
    """Lipschitz seminorm ``max_{i != j} |f_i - f_j| / rho(i, j)`` of a finite metric."""
    rho = np.asarray(distances, dtype=float)
    k = len(points)
    if rho.shape != (k, k):
        raise NotAMetric("distance table has the wrong shape")
    if np.any(np.abs(np.diag(rho)) > tol) or np.any(np.abs(rho - rho.T) > tol):
        raise NotAMetric("distance table is not symmetric with zero diagonal")
    off = ~np.eye(k, dtype=bool)
    if np.any(rho[off] <= 0):
        raise NotAMetric("distinct points at distance zero")
    for i, j, m in itertools.product(range(k), repeat=3):
        if rho[i, j] > rho[i, m] + rho[m, j] + tol:
            raise NotAMetric(f"triangle inequality fails at {(i, m, j)}")
    iu, ju = np.triu_indices(k, 1)

    def value_and_grad(f):
        f = np.asarray(f, dtype=complex)
        diffs = np.abs(f[iu] - f[ju]) / rho[iu, ju]
        p = int(np.argmax(diffs))
        g = np.zeros(k, dtype=complex)
        if diffs[p] > 0:
            i, j = iu[p], ju[p]
            ph = (f[i] - f[j]) / abs(f[i] - f[j])
            g[i] = ph / rho[i, j]
            g[j] = -ph / rho[i, j]
        return float(diffs[p]), g

    def evaluate(f):
        f = np.asarray(f, dtype=complex)
        if k < 2:
            return 0.0
        return float(np.max(np.abs(f[iu] - f[ju]) / rho[iu, ju]))

    return SeminormHandle(
        f"L_rho[{k} points]",
        evaluate,
        f"finite:{k}",
        frozenset({LEIBNIZ, STRONG, STAR, FINITE, LSC, CONTINUOUS}),
        value_and_grad,
    )


def derivation_seminorm(
    derivation,
    module_norm,
    name: str = "derivation",
    domain: str = "matrix",
    sampler=None,
    left=None,
    right=None,
    trials: int = 20,
    rng=None,
    tol: float = 1e-9,
) -> SeminormHandle:
    """``L(a) = ||d(a)||`` for a derivation ``d`` into a normed bimodule.

    When ``sampler`` is given, ``d(ab) = a.d(b) + d(a).b`` is checked on
    ``trials`` sampled pairs, with ``left(a, m)`` and ``right(m, b)`` the module
    actions (matrix products by default).
    """
    left = left or (lambda a, m: a @ m)
    right = right or (lambda m, b: m @ b)
    if sampler is not None:
        rng = rng if rng is not None else np.random.default_rng(0)
        for _ in range(trials):
            a, b = sampler(rng)
            # matrices compose; functions on points multiply pointwise
            lhs = derivation(a @ b if np.ndim(a) >= 2 else a * b)
            rhs = left(a, derivation(b)) + right(derivation(a), b)
            scale = max(1.0, float(np.max(np.abs(rhs))))
            if np.max(np.abs(np.asarray(lhs) - np.asarray(rhs))) > tol * scale:
                raise NotADerivation(f"Leibniz identity fails for {name}")
    return SeminormHandle(
        name,
        lambda a: float(module_norm(derivation(a))),
        domain,
        frozenset({LEIBNIZ, STRONG, FINITE, CONTINUOUS, LSC}),
    )


def inner_derivation_seminorm(D, **kwargs) -> SeminormHandle:
    """``T -> ||[D, T]||`` with the operator norm."""
    D = np.asarray(D, dtype=complex)
    return derivation_seminorm(lambda T: D @ T - T @ D, lambda m: np.linalg.norm(m, 2), **kwargs)


def two_point_seminorm(i: int, j: int, distance: float) -> SeminormHandle:
    """``|f_j - f_i| / rho`` as the derivation into ``C`` with actions at the two points."""
    def d(f):
        f = np.asarray(f)
        return (f[j] - f[i]) / distance

    return derivation_seminorm(
        d,
        abs,
        name=f"two-point[{i},{j}]",
        domain="finite",
        left=lambda a, m: np.asarray(a)[j] * m,
        right=lambda m, b: m * np.asarray(b)[i],
        sampler=lambda rng: (rng.standard_normal(max(i, j) + 1), rng.standard_normal(max(i, j) + 1)),
    )


# ----------------------------------------------------------------- combinators


def _common_domain(seminorms):
    domains = {s.domain for s in seminorms}
    if len(domains) != 1:
        raise DomainMismatch(f"cannot combine seminorms over {sorted(domains)}")
    return domains.pop()


def _joint_flags(seminorms):
    flags = _PRESERVED
    for s in seminorms:
        flags = flags & s.flags
    return frozenset(flags)


def combine_max(seminorms) -> SeminormHandle:
    """Pointwise maximum; ties go to the lowest index for the subgradient."""
    seminorms = list(seminorms)
    domain = _common_domain(seminorms)

    def evaluate(a):
        return max(s(a) for s in seminorms)

    vg = None
    if all(s.value_and_grad is not None for s in seminorms):

        def vg(a):
            results = [s.value_and_grad(a) for s in seminorms]
            vals = [r[0] for r in results]
            return results[int(np.argmax(vals))]

    return SeminormHandle(
        "max(" + ", ".join(s.name for s in seminorms) + ")",
        evaluate,
        domain,
        _joint_flags(seminorms),
        vg,
    )


def star_seminorm(L: SeminormHandle, adjoint=None) -> SeminormHandle:
    """``L*(a) = L(a*)``."""
    adjoint = adjoint or (lambda a: np.conj(np.asarray(a)).T)
    return SeminormHandle(L.name + "*", lambda a: L(adjoint(a)), L.domain, L.flags)


def star_closure(L: SeminormHandle, adjoint=None) -> SeminormHandle:
    """``L v L*``, a *-seminorm with the same Leibniz-type properties."""
    out = combine_max([L, star_seminorm(L, adjoint)])
    return SeminormHandle(out.name, out.evaluate, out.domain, out.flags | {STAR})


def check_monotone_norm(outer, k: int, rng=None, samples: int = 500, tol: float = 1e-12) -> bool:
    rng = rng if rng is not None else np.random.default_rng(0)
    for _ in range(samples):
        r = rng.random(k) * rng.choice([1e-3, 1.0, 1e3])
        s = r + rng.random(k) * (rng.random(k) < 0.5)
        if outer(r) > outer(s) * (1 + tol) + tol:
            return False
    return True


def combine_monotone(seminorms, outer, name: str = "outer", rng=None) -> SeminormHandle:
    """``N(a) = outer(L_1(a), ..., L_k(a))`` for a monotone norm ``outer`` on R^k."""
    seminorms = list(seminorms)
    domain = _common_domain(seminorms)
    if not check_monotone_norm(outer, len(seminorms), rng):
        raise NonMonotoneNorm(f"{name} is not monotone on the positive orthant")
    return SeminormHandle(
        f"{name}(" + ", ".join(s.name for s in seminorms) + ")",
        lambda a: float(outer(np.array([s(a) for s in seminorms]))),
        domain,
        _joint_flags(seminorms),
    )


# ------------------------------------------------------------ Leibniz checking


@dataclass(frozen=True)
class Algebra:
    """Operations a Leibniz check needs: product, inverse, norm, unit, conditioning."""

    mul: Callable
    inverse: Callable
    norm: Callable
    one: Callable
    condition: Callable


def _matrix_cond(a):
    return float(np.linalg.cond(a))


def matrix_algebra(d: int) -> Algebra:
    return Algebra(
        mul=lambda a, b: a @ b,
        inverse=np.linalg.inv,
        norm=lambda a: float(np.linalg.norm(a, 2)),
        one=lambda: np.eye(d, dtype=complex),
        condition=_matrix_cond,
    )


def jet_algebra(theta, phi) -> Algebra:
    def cond(a):
        mags = np.abs(a.values)
        return float(mags.max() / mags.min()) if mags.min() > 0 else np.inf

    return Algebra(
        mul=lambda a, b: a * b,
        inverse=lambda a: a.inverse(),
        norm=lambda a: a.sup_norm(),
        one=lambda: Jet.constant(1.0, theta, phi),
        condition=cond,
    )


def finite_algebra(k: int) -> Algebra:
    def cond(a):
        mags = np.abs(a)
        return float(mags.max() / mags.min()) if mags.min() > 0 else np.inf

    return Algebra(
        mul=lambda a, b: a * b,
        inverse=lambda a: 1.0 / a,
        norm=lambda a: float(np.max(np.abs(a))),
        one=lambda: np.ones(k, dtype=complex),
        condition=cond,
    )


@dataclass
class LeibnizReport:
    seminorm: str
    trials: int
    worst_product_slack: float
    worst_inverse_slack: float | None
    inverse_applicable: bool
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "seminorm": self.seminorm,
            "trials": self.trials,
            "worstProductSlack": self.worst_product_slack,
            "worstInverseSlack": self.worst_inverse_slack,
            "inverseApplicable": self.inverse_applicable,
            "violations": self.violations,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def check_leibniz(
    L: SeminormHandle,
    sampler,
    trials: int,
    algebra: Algebra,
    rng=None,
    rel_tol: float = 1e-9,
    max_condition: float = 1e6,
) -> LeibnizReport:
    """Sample the product and inverse inequalities of a strongly Leibniz seminorm.

    Slack is ``(lhs - rhs) / rhs``; negative means the inequality holds with
    room.  The inverse test is skipped when ``L(1) != 0``.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    inverse_ok = L(algebra.one()) <= 1e-12
    worst_p = -np.inf
    worst_i = -np.inf if inverse_ok else None
    violations = []
    for t in range(trials):
        a, b = sampler(rng)
        La, Lb = L(a), L(b)
        lhs = L(algebra.mul(a, b))
        rhs = La * algebra.norm(b) + algebra.norm(a) * Lb
        slack = (lhs - rhs) / max(rhs, 1e-300)
        worst_p = max(worst_p, slack)
        if lhs > rhs * (1 + rel_tol) + 1e-14:
            violations.append({"kind": "product", "trial": t, "lhs": lhs, "rhs": rhs})
        if inverse_ok and algebra.condition(a) <= max_condition:
            ainv = algebra.inverse(a)
            lhs_i = L(ainv)
            rhs_i = algebra.norm(ainv) ** 2 * La
            slack_i = (lhs_i - rhs_i) / max(rhs_i, 1e-300)
            worst_i = max(worst_i, slack_i)
            if lhs_i > rhs_i * (1 + rel_tol) + 1e-14:
                violations.append({"kind": "inverse", "trial": t, "lhs": lhs_i, "rhs": rhs_i})
    return LeibnizReport(
        L.name, trials, float(worst_p), None if worst_i is None else float(worst_i), inverse_ok, violations
    )


# ---------------------------------------------------------------- quotients


@dataclass(frozen=True)
class QuotientResult:
    value: float
    minimizer: np.ndarray
    converged: bool
    spread: float


def quotient_minimize(L, lift, a, starts: int = 8, rng=None, tol: float = 1e-6) -> QuotientResult:
    """``inf { L(base + sum_k t_k v_k) : t real }`` for ``lift(a) = (base, [v_k])``.

    ``L`` is convex along the fiber, so Nelder-Mead from several starts finds the
    infimum; disagreement between starts beyond ``tol`` clears ``converged``.
    """
    base, directions = lift(a)
    directions = [np.asarray(v) for v in directions]
    if not directions:
        return QuotientResult(float(L(base)), np.zeros(0), True, 0.0)
    rng = rng if rng is not None else np.random.default_rng(0)
    scale = max(1.0, float(np.max(np.abs(np.asarray(base)))))

    def objective(t):
        c = np.asarray(base) + sum(ti * v for ti, v in zip(t, directions))
        return L(c)

    k = len(directions)
    inits = [np.zeros(k)] + [scale * rng.standard_normal(k) for _ in range(starts - 1)]
    results = []
    for x0 in inits:
        r = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={"xatol": 1e-11, "fatol": 1e-13, "maxiter": 4000 * k, "maxfev": 8000 * k},
        )
        results.append((float(r.fun), np.asarray(r.x)))
    vals = np.array([r[0] for r in results])
    best = int(np.argmin(vals))
    spread = float(np.median(vals) - vals[best])
    return QuotientResult(vals[best], results[best][1], spread <= tol * max(1.0, vals[best]), spread)


def quotient_seminorm(L: SeminormHandle, lift, name: str | None = None, starts: int = 8) -> SeminormHandle:
    """Quotient seminorm through a finite-dimensional fiber parametrization.

    Values are numerical infima, hence upper bounds on the exact quotient.  No
    Leibniz flags are claimed: a quotient of a Leibniz seminorm need not be
    Leibniz, so :func:`check_leibniz` is the way to probe it.
    """
    flags = L.flags & {FINITE, STAR}
    return SeminormHandle(
        name or f"quotient({L.name})",
        lambda a: quotient_minimize(L, lift, a, starts=starts).value,
        "quotient",
        frozenset(flags),
    )


# ------------------------------------------------------------- amplification


def amplify(base: SeminormHandle | SpinIrrep | int, q: int, refine: bool = True) -> SeminormHandle:
    """Seminorm on ``q x q`` matrices over ``M_{n+1}`` or over sphere functions.

    The group acts entrywise, so the generators act as ``I_q (x) J`` and the
    seminorm is ``sup_X ||[I_q (x) X.J, T]||`` for matrices, and
    ``sup_x sup_X ||(X.L F)(x)||`` for function matrices.  Pass a
    :class:`SpinIrrep` (or a handle built by :func:`matrix_lipnorm` together
    with it) for the matrix case and ``l_max`` for the function case.
    """
    if q not in (1, 2, 3):
        raise ValueError("q must be 1, 2 or 3")
    if isinstance(base, SpinIrrep):
        irrep = base
        eye = np.eye(q)
        J = tuple(np.kron(eye, Jk) for Jk in irrep.J)

        def evaluate(T):
            T = np.asarray(T, dtype=complex)
            return float(max_direction_norm(commutators(J, T), max_iter=EVAL_ITER)[0])

        return SeminormHandle(
            f"L_B^{q}[n={irrep.n}]",
            evaluate,
            f"amplified-matrix:{q}x{irrep.d}",
            frozenset({LEIBNIZ, STRONG, STAR, FINITE}),
        )

    l_max = int(base)

    def evaluate_functions(F):
        F = np.asarray(F, dtype=object)
        L = max(f.l_max for f in F.ravel())
        coeffs = np.stack([f.padded(L).coeffs for f in F.ravel()]).reshape(q, q, -1)
        from .functions import angular_momentum_blocks

        ang = np.stack([np.einsum("ab,ijb->ija", B, coeffs) for B in angular_momentum_blocks(L)])

        def sup_at(theta, phi):
            Y = harmonic_matrix(L, theta, phi)
            C = np.einsum("kija,pa->pkij", ang, Y)
            return max_direction_norm(C)[0]

        return maximize_on_sphere(sup_at, L, refine=refine)[0]

    return SeminormHandle(
        f"L_A^{q}[l_max={l_max}]",
        evaluate_functions,
        f"amplified-function:{q}",
        frozenset({LEIBNIZ, STRONG, STAR, FINITE}),
    )


def block_matrix(blocks):
    """Assemble a ``q x q`` nested list of equal square matrices."""
    return np.block([[np.asarray(b, dtype=complex) for b in row] for row in blocks])


def block_entry(T, i: int, j: int, d: int):
    return T[i * d : (i + 1) * d, j * d : (j + 1) * d]


# ------------------------------------------------------ group-sup spot checks


def group_sup_matrix(irrep: SpinIrrep, T, rng, samples: int = 500) -> float:
    """``max ||U_g T U_g* - T|| / l(g)`` over Haar-random ``g`` plus short rotations.

    Never exceeds the infinitesimal seminorm for the rotation-angle length.
    """
    T = np.asarray(T, dtype=complex)
    us = su2_random(rng, samples)
    best = 0.0
    for idx, u in enumerate(us):
        axis, beta = su2_axis_angle(u)
        if idx % 2:
            beta = beta * 10.0 ** (-rng.integers(1, 4))  # short rotations approach the sup
        if beta <= 0:
            continue
        U = irrep.rotation(axis, beta)
        best = max(best, np.linalg.norm(U @ T @ U.conj().T - T, 2) / beta)
    return float(best)
