"""Ratio maximization ``sup objective(p) / constraint(p)`` over real parameters.

Both functions are positively homogeneous of degree one and vanish on the
directions that have been quotiented out, so the supremum of the ratio equals
the supremum of the objective over the constraint's unit ball.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .errors import DimensionTooLarge

DEFAULT_RESTARTS = 20
ACCEPTANCE_RESTARTS = 100
SPREAD_LIMIT = 0.02


@dataclass
class RatioProblem:
    """``objective`` and ``constraint`` map a real vector to ``(value, gradient)``.

    ``batch_ratio``, when present, evaluates the ratio on an ``(N, dim)`` array
    and lets :func:`brute_force_ratio` sweep large grids.  ``warm_starts`` are
    tried before the seeded random starts.

    ``stages`` is an optional continuation: a list of ``Stage`` surrogates of
    increasing sharpness.  Each restart climbs them in order before the exact
    ratio is evaluated (and polished with the exact subgradients when
    ``polish`` is set).
    """

    objective: Callable
    constraint: Callable
    dim: int
    seed: int = 0
    restarts: int = DEFAULT_RESTARTS
    max_iters: int = 2000
    tolerance: float = 1e-7
    warm_starts: list = field(default_factory=list)
    batch_ratio: Callable | None = None
    name: str = "ratio"
    stages: list = field(default_factory=list)
    polish: bool = True

    def ratio(self, p) -> float:
        c = self.constraint(p)[0]
        return self.objective(p)[0] / c if c > 0 else 0.0


@dataclass(frozen=True)
class Stage:
    """Smooth surrogate pair for one continuation step."""

    objective: Callable
    constraint: Callable
    max_iters: int = 500


@dataclass
class RatioEstimate:
    value: float
    witness: np.ndarray
    values: list
    spread: float
    unstable: bool
    all_failed: bool
    evaluations: int

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "spread": self.spread,
            "unstable": self.unstable,
            "allRestartsFailed": self.all_failed,
            "restarts": len(self.values),
        }


def linear_problem(objective, constraint, basis, shape, stages=(), **kwargs) -> RatioProblem:
    """Lift element-space ``(value, G)`` maps through ``element = basis @ p``.

    ``basis`` is a complex ``(size, dim)`` matrix; an element gradient ``G``
    (convention ``Re <G, dx>``) pulls back to ``Re(basis^H G)``.  ``stages``
    holds element-space ``Stage`` surrogates and is lifted the same way.
    """
    basis = np.asarray(basis)
    bh = basis.conj().T

    def wrap(fn):
        def inner(p):
            x = (basis @ p).reshape(shape)
            v, g = fn(x)
            return v, np.real(bh @ np.asarray(g).reshape(-1))

        return inner

    lifted = [Stage(wrap(st.objective), wrap(st.constraint), st.max_iters) for st in stages]
    return RatioProblem(wrap(objective), wrap(constraint), basis.shape[1], stages=lifted, **kwargs)


def _climb(objective, constraint, x0, max_iters, tolerance):
    count = [0]

    def f(p):
        count[0] += 1
        o, go = objective(p)
        c, gc = constraint(p)
        if c <= 1e-14 * max(1.0, float(np.linalg.norm(p))):
            return 0.0, np.zeros_like(p)
        r = o / c
        return -r, -(go - r * gc) / c

    res = minimize(
        f,
        x0,
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": max_iters, "ftol": tolerance * 1e-3, "gtol": 1e-10},
    )
    x = np.asarray(res.x)
    nrm = np.linalg.norm(x)
    if nrm > 0:
        x = x / nrm
    return x, count[0]


def _ascend(problem: RatioProblem, x0):
    x, count = _climb(problem.objective, problem.constraint, x0, problem.max_iters, problem.tolerance)
    return problem.ratio(x), x, count


def _restart(problem: RatioProblem, x0):
    evals = 0
    x = x0
    for st in problem.stages:
        x, k = _climb(st.objective, st.constraint, x, st.max_iters, problem.tolerance)
        evals += k
    if problem.polish or not problem.stages:
        val, x2, k = _ascend(problem, x)
        evals += k
        # the exact nonsmooth ascent may stall below its start
        staged = problem.ratio(x) if problem.stages else -np.inf
        return (val, x2, evals) if val >= staged else (staged, x, evals)
    return problem.ratio(x), x, evals + 1


def ratio_maximize(problem: RatioProblem) -> RatioEstimate:
    """Multi-start ascent of the ratio.

    Restart ``k`` starts from the ``k``-th warm start, or else from a Gaussian
    direction drawn from a generator seeded by ``(seed, k)``; adding restarts
    therefore never lowers the best value.
    """
    values, witnesses = [], []
    evals = 0
    for k in range(max(1, problem.restarts)):
        if k < len(problem.warm_starts):
            x0 = np.asarray(problem.warm_starts[k], dtype=float)
        else:
            x0 = np.random.default_rng([problem.seed, k]).standard_normal(problem.dim)
        x0 = x0 / max(np.linalg.norm(x0), 1e-300)
        start_val = problem.ratio(x0)
        val, x, n = _restart(problem, x0)
        evals += n + 1
        if start_val > val:
            val, x = start_val, x0
        values.append(float(val))
        witnesses.append(x)
    vals = np.array(values)
    best = int(np.argmax(vals))
    top = float(vals[best])
    if top <= 1e-14:
        return RatioEstimate(0.0, witnesses[best], values, 0.0, False, True, evals)
    spread = float((top - np.median(vals)) / top)
    return RatioEstimate(top, witnesses[best], values, spread, spread > SPREAD_LIMIT, False, evals)


def sphere_grid(dim: int, resolution: int):
    """Hyperspherical-angle grid on ``S^{dim-1}``; ``resolution`` points per angle."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    polar = np.pi * (np.arange(resolution) + 0.5) / resolution
    azim = 2 * np.pi * np.arange(resolution) / resolution
    axes = [polar] * (dim - 2) + [azim]
    angles = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim - 1)
    pts = np.ones((angles.shape[0], dim))
    sin_prod = np.ones(angles.shape[0])
    for i in range(dim - 1):
        pts[:, i] = sin_prod * np.cos(angles[:, i])
        sin_prod = sin_prod * np.sin(angles[:, i])
    pts[:, dim - 1] = sin_prod
    return pts


def brute_force_ratio(problem: RatioProblem, resolution: int = 25, chunk: int = 200_000, polish: bool = True) -> float:
    """Exhaustive sweep of the unit sphere followed by a Nelder-Mead polish.

    Independent of :func:`ratio_maximize`: no gradients, no random starts.
    """
    if problem.dim > 8:
        raise DimensionTooLarge(f"dimension {problem.dim} > 8")
    if resolution < 25:
        raise ValueError("resolution must be at least 25 points per dimension")
    pts = sphere_grid(problem.dim, resolution)
    if problem.batch_ratio is not None:
        vals = np.concatenate([problem.batch_ratio(pts[i : i + chunk]) for i in range(0, len(pts), chunk)])
    else:
        vals = np.array([problem.ratio(p) for p in pts])
    best = int(np.argmax(vals))
    value, x = float(vals[best]), pts[best]
    if not polish or value <= 0:
        return max(value, 0.0)

    def neg(p):
        n = np.linalg.norm(p)
        if n == 0:
            return 0.0
        if problem.batch_ratio is not None:
            return -float(problem.batch_ratio((p / n)[None, :])[0])
        return -problem.ratio(p / n)

    step = np.pi / resolution
    simplex = np.vstack([x] + [x + step * e for e in np.eye(problem.dim)])
    res = minimize(
        neg,
        x,
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-13, "maxiter": 20000, "maxfev": 40000},
    )
    return max(value, -float(res.fun))
