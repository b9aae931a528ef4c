"""Bridge seminorm between functions on the sphere and spin-n/2 matrices, the
constants that control it, and the assembled proximity bound.

The bridge at a point ``x`` is ``N_x(f, T) = || |x><x| (f(x) I - T) ||``, a
rank-one matrix whose norm is the length of ``<x| (f(x) I - T)``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field

import numpy as np

from .berezin import (
    BerezinContext,
    berezin_context,
    berezin_operator,
    contravariant_symbol,
    covariant_symbol,
    delta_A,
)
from .functions import FunctionElement, Jet, harmonic_matrix, maximize_on_sphere, n_coeffs
from .groupmodel import radial_integral_checked
from .optsolve import DEFAULT_RESTARTS, RatioEstimate, RatioProblem, Stage, linear_problem, ratio_maximize
from .repn import SpinIrrep, isotypic_basis
from .seminorms import (
    FINITE,
    LEIBNIZ,
    STAR,
    STRONG,
    SeminormHandle,
    function_lipnorm,
    matrix_lipnorm,
    schatten_norm,
    smooth_matrix_lipnorm,
)

SAFETY_FACTOR = 1.05
CSV_COLUMNS = [
    "n",
    "gammaA",
    "gammaB",
    "gammaB_spread",
    "deltaA",
    "deltaB",
    "deltaB_spread",
    "gamma",
    "proxBound",
    "unstable",
]


@dataclass(frozen=True, eq=False)
class PairElement:
    """``(f, T)`` in functions (+) matrices; ``f`` may be a :class:`Jet`."""

    f: object
    T: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "T", np.asarray(self.T, dtype=complex))

    def star(self):
        return PairElement(self.f.conj(), self.T.conj().T)

    def __mul__(self, other):
        if isinstance(other, PairElement):
            f = self.f.product(other.f) if isinstance(self.f, FunctionElement) else self.f * other.f
            return PairElement(f, self.T @ other.T)
        return PairElement(self.f * other, self.T * other)

    def inverse(self):
        return PairElement(self.f.inverse(), np.linalg.inv(self.T))


# ----------------------------------------------------------------- N_x, N


def _values_at(f, theta, phi):
    if isinstance(f, Jet):
        return f.values
    return f(theta, phi)


def bridge_N_points(irrep: SpinIrrep, f, T, theta, phi):
    """``N_x(f, T)`` at each of the given points."""
    rows = irrep.coherent_states(theta, phi)
    fx = _values_at(f, theta, phi)
    w = fx[:, None] * rows.conj() - rows.conj() @ T
    return np.linalg.norm(w, axis=1)


def bridge_N_at(ctx: BerezinContext, x, f, T) -> float:
    """``N_x`` at one point ``x = (theta, phi)`` or at frame node index ``x``."""
    if np.isscalar(x) and not isinstance(x, tuple):
        theta, phi = ctx.frame.theta[int(x)], ctx.frame.phi[int(x)]
    else:
        theta, phi = x
    T = np.asarray(T, dtype=complex)
    return float(bridge_N_points(ctx.irrep, f, T, np.atleast_1d(theta), np.atleast_1d(phi))[0])


def bridge_N(ctx: BerezinContext, f, T, refine: bool = True, return_point: bool = False):
    """``sup_x N_x(f, T)``: dense grid plus local refinement around the best nodes.

    A lower estimate of the true supremum.  For a :class:`Jet` the supremum is
    over the jet's points.
    """
    T = np.asarray(T, dtype=complex)
    if isinstance(f, Jet):
        vals = bridge_N_points(ctx.irrep, f, T, f.theta, f.phi)
        k = int(np.argmax(vals))
        out = float(vals[k])
        return (out, (float(f.theta[k]), float(f.phi[k]))) if return_point else out
    degree = max(f.l_max, ctx.n)
    value, point = maximize_on_sphere(
        lambda t, p: bridge_N_points(ctx.irrep, f, T, t, p), degree, refine=refine
    )
    return (value, point) if return_point else value


def bridge_N_grad(ctx: BerezinContext, f: FunctionElement, T, refine: bool = True):
    """``(N(f, T), G_f, G_T)`` with subgradients at the maximizing point."""
    T = np.asarray(T, dtype=complex)
    value, (theta, phi) = bridge_N(ctx, f, T, refine=refine, return_point=True)
    s = ctx.irrep.coherent_states(theta, phi)[0]
    Y = harmonic_matrix(f.l_max, theta, phi)[0]
    fx = Y @ f.coeffs
    w = fx * s.conj() - s.conj() @ T
    nw = np.linalg.norm(w)
    if nw == 0:
        return 0.0, np.zeros_like(f.coeffs), np.zeros_like(T)
    r = w / nw
    G_T = -np.outer(s, r)
    a = np.sum(np.conj(r) * s.conj())
    G_f = np.conj(a * Y)
    return float(nw), G_f, G_T


def msd_form(irrep: SpinIrrep, T) -> float:
    """``sqrt(tr(P T T* P) - |tr(P T)|^2)`` for the highest-weight projection ``P``."""
    T = np.asarray(T, dtype=complex)
    P = irrep.P
    PT = P @ T
    val = np.real(np.trace(PT @ T.conj().T @ P)) - abs(np.trace(PT)) ** 2
    return float(np.sqrt(max(val, 0.0)))


def msd_grad(irrep: SpinIrrep, T):
    """Value and subgradient; the value is the length of row 0 of ``T`` without its diagonal entry."""
    T = np.asarray(T, dtype=complex)
    row = T[0].copy()
    row[0] = 0
    val = float(np.linalg.norm(row))
    G = np.zeros_like(T)
    if val > 0:
        G[0] = row / val
    return val, G


# ------------------------------------------------------------------ constants


def gamma_A(n: int, n_nodes: int = 96):
    """``(n+1) int theta cos^n(theta/2) dmu`` and its doubled-resolution check."""
    val, _, ok = radial_integral_checked(lambda t: (n + 1) * t * np.cos(t / 2) ** n, n_nodes)
    return val, ok


def traceless_basis(irrep: SpinIrrep):
    """Complex ``(d*d, 2(d*d - 1))`` basis: HS-orthonormal traceless ``T^l_m`` and ``i T^l_m``."""
    flat = isotypic_basis(irrep).flat()[1:].reshape(-1, irrep.d**2)
    return np.concatenate([flat, 1j * flat]).T


def _warm_starts(irrep: SpinIrrep, count: int):
    """Coordinates of raising-type ``T^l_m`` (``m > 0``), smallest ``l`` first.

    These have a nonzero first row, so ``P T`` does not vanish and the
    objectives start away from their zero set.
    """
    labels = isotypic_basis(irrep).labels()[1:]
    order = sorted((k for k, (l, m) in enumerate(labels) if m > 0), key=lambda k: (labels[k][0], -labels[k][1]))
    dim = 2 * len(labels)
    out = []
    for k in order[:count]:
        e = np.zeros(dim)
        e[k] = 1.0
        out.append(e)
    return out


# Continuation schedule: (Schatten exponent, number of directions).
SMOOTHING_SCHEDULE = ((4, 40), (16, 40), (64, 40), (256, 150))
# Exact nonsmooth polish only pays for itself in low dimension.
POLISH_MAX_DIM = 64


def _ratio_over_traceless(ctx, objective, smooth_objective, restarts, seed, warm, name):
    """Maximize ``objective / L_B`` over traceless matrices.

    Each restart climbs smoothed versions of the ratio (``smooth_objective(p)``
    over the Schatten-``p`` direction mean of commutator norms) before the
    exact ratio is taken; plain subgradient ascent stalls on the kinks of the
    operator norm.
    """
    irrep = ctx.irrep
    LB = matrix_lipnorm(irrep)
    basis = traceless_basis(irrep)
    stages = [Stage(smooth_objective(p), smooth_matrix_lipnorm(irrep, p, k)) for p, k in SMOOTHING_SCHEDULE]
    problem = linear_problem(
        objective,
        LB.value_and_grad,
        basis,
        (irrep.d, irrep.d),
        stages=stages,
        polish=basis.shape[1] <= POLISH_MAX_DIM,
        seed=seed,
        restarts=restarts,
        warm_starts=_warm_starts(irrep, warm),
        name=name,
    )
    est = ratio_maximize(problem)
    witness = (basis @ est.witness).reshape(irrep.d, irrep.d)
    # rescore with the fully converged L_B so the reported value is attained
    top = objective(witness)[0] / LB(witness) if est.value > 0 else 0.0
    return est, witness, float(top)


@dataclass
class ConstantEstimate:
    value: float
    spread: float
    unstable: bool
    witness: np.ndarray = field(repr=False)
    estimate: RatioEstimate = field(repr=False)


def gamma_B(ctx: BerezinContext, restarts: int = DEFAULT_RESTARTS, seed: int = 0, warm: int = 4) -> ConstantEstimate:
    """``sup msd(T) / L_B(T)`` over traceless complex ``T`` (lower estimate)."""

    def objective(T):
        return msd_grad(ctx.irrep, T)

    est, W, top = _ratio_over_traceless(ctx, objective, lambda p: objective, restarts, seed, warm, "gammaB")
    return ConstantEstimate(top, est.spread, est.unstable, W, est)


def delta_B(ctx: BerezinContext, restarts: int = DEFAULT_RESTARTS, seed: int = 0, warm: int = 4) -> ConstantEstimate:
    """``sup ||T - breve_sigma(sigma_T)|| / L_B(T)`` over traceless ``T`` (lower estimate)."""
    d = ctx.d
    K = np.eye(d * d) - berezin_operator(ctx)
    KH = K.conj().T

    def objective(T):
        R = (K @ T.reshape(-1)).reshape(d, d)
        U, S, Vh = np.linalg.svd(R)
        G = (KH @ np.outer(U[:, 0], Vh[0]).reshape(-1)).reshape(d, d)
        return float(S[0]), G

    def smooth(p):
        def inner(T):
            v, G = schatten_norm((K @ T.reshape(-1)).reshape(d, d), p)
            return float(v), (KH @ G.reshape(-1)).reshape(d, d)

        return inner

    est, W, top = _ratio_over_traceless(ctx, objective, smooth, restarts, seed, warm, "deltaB")
    return ConstantEstimate(top, est.spread, est.unstable, W, est)


# ------------------------------------------------- spin-1/2 closed-form oracles


def _spin_half_vectors(P):
    """Rows ``p`` of a phase-fixed parametrization ``T = t . sigma`` with
    ``t = (p0 + i p1, p2 + i p3, p4)``; every traceless 2x2 matrix is a
    multiple of one of these by a unit complex number."""
    P = np.atleast_2d(P)
    return P[:, [0, 2, 4]], np.column_stack([P[:, 1], P[:, 3], np.zeros(len(P))])


def _spin_half_opnorm(a, b):
    """``||t . sigma||`` for ``t = a + ib``: ``sqrt(|a|^2 + |b|^2 + 2 |a x b|)``.

    At ``n = 1`` this is also ``L_B(t . sigma)``, since ``[X.J, t.sigma] =
    i (X x t).sigma`` and the supremum over ``X`` is reached along ``a x b``.
    """
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    return np.sqrt(np.sum(a * a, axis=-1) + np.sum(b * b, axis=-1) + 2 * cross)


def spin_half_oracles() -> dict:
    """Closed-form ratio problems at ``n = 1`` for the brute-force sweep.

    * ``gammaB``: ``msd(t.sigma) = |t_x - i t_y|`` over ``L_B``;
    * ``deltaB``: the symbol of ``sigma_k`` is ``x_k`` and ``breve_sigma(x_k)
      = sigma_k / 3``, so ``T - breve_sigma(sigma_T) = (2/3) T``;
    * ``rhoL``: spin up against spin down, ``(mu - nu)(t.sigma) = 2 t_z`` over
      ``L_B(t.sigma) = |t|`` on real ``t``.
    """

    def gamma_batch(P):
        a, b = _spin_half_vectors(P)
        top = np.abs((a[:, 0] + 1j * b[:, 0]) - 1j * (a[:, 1] + 1j * b[:, 1]))
        return top / np.maximum(_spin_half_opnorm(a, b), 1e-300)

    def delta_batch(P):
        a, b = _spin_half_vectors(P)
        nrm = _spin_half_opnorm(a, b)
        return (1 - 1 / 3) * nrm / np.maximum(nrm, 1e-300)

    def rho_batch(P):
        P = np.atleast_2d(P)
        return np.abs(2 * P[:, 2]) / np.maximum(np.linalg.norm(P, axis=1), 1e-300)

    def problem(batch, dim, name):
        # value-only maps: the brute-force sweep never asks for gradients
        return RatioProblem(
            lambda p: (float(batch(p)[0]), None),
            lambda p: (1.0, None),
            dim,
            batch_ratio=batch,
            name=name,
        )

    return {
        "gammaB": problem(gamma_batch, 5, "gammaB[n=1]"),
        "deltaB": problem(delta_batch, 5, "deltaB[n=1]"),
        "rhoL": problem(rho_batch, 3, "rhoL[n=1]"),
    }


@dataclass(frozen=True)
class BridgeConstants:
    n: int
    gammaA: float
    gammaB: float
    gammaB_spread: float
    deltaA: float
    deltaB: float
    deltaB_spread: float
    unstable: bool

    @property
    def gamma(self) -> float:
        return max(self.gammaA, self.gammaB)

    @property
    def proxBound(self) -> float:
        return max(self.gammaA + self.deltaB, self.gammaB)

    def row(self) -> dict:
        out = asdict(self)
        out["gamma"] = self.gamma
        out["proxBound"] = self.proxBound
        return {k: out[k] for k in CSV_COLUMNS}


def prox_bound(n: int, restarts: int = DEFAULT_RESTARTS, seed: int = 0, band: int | None = None) -> BridgeConstants:
    ctx = berezin_context(n, band)
    gA, _ = gamma_A(n)
    dA, _ = delta_A(n)
    gB = gamma_B(ctx, restarts, seed)
    dB = delta_B(ctx, restarts, seed)
    return BridgeConstants(n, gA, gB.value, gB.spread, dA, dB.value, dB.spread, gB.unstable or dB.unstable)


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.10g}"


def constants_csv(rows, header_lines=()) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        rec = r.row()
        writer.writerow([_fmt(rec[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


# --------------------------------------------------------- combined seminorm


def combined_seminorm(
    ctx: BerezinContext,
    gamma: float,
    refine: bool = True,
    l_max: int | None = None,
    bridge_scale: float = 1.0,
) -> SeminormHandle:
    """``L_A(f) v L_B(T) v (N(f, T) v N(conj f, T*)) / gamma`` on pairs.

    ``bridge_scale`` multiplies both bridge terms; values other than 1 corrupt
    the seminorm on purpose and exist only to exercise the bound checks.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    l_max = 2 * ctx.n if l_max is None else l_max
    LA = function_lipnorm(l_max, refine=refine)
    LB = matrix_lipnorm(ctx.irrep)

    def parts(pair: PairElement):
        n1 = bridge_scale * bridge_N(ctx, pair.f, pair.T, refine=refine)
        n2 = bridge_scale * bridge_N(ctx, pair.f.conj(), pair.T.conj().T, refine=refine)
        return LA(pair.f), LB(pair.T), n1 / gamma, n2 / gamma

    return SeminormHandle(
        f"L_n[n={ctx.n}, gamma={gamma:.6g}]",
        lambda pair: max(parts(pair)),
        f"pair:{ctx.n}",
        frozenset({LEIBNIZ, STRONG, STAR, FINITE}),
    )


def combined_parts(ctx: BerezinContext, gamma: float, pair: PairElement, refine: bool = True):
    LA = function_lipnorm(max(pair.f.l_max, 1) if isinstance(pair.f, FunctionElement) else 1, refine=refine)
    LB = matrix_lipnorm(ctx.irrep)
    return {
        "L_A": LA(pair.f),
        "L_B": LB(pair.T),
        "N": bridge_N(ctx, pair.f, pair.T, refine=refine) / gamma,
        "N*": bridge_N(ctx, pair.f.conj(), pair.T.conj().T, refine=refine) / gamma,
    }


def bridge_point_seminorm(ctx: BerezinContext, theta: float, phi: float) -> SeminormHandle:
    """``N_x`` at a fixed point as a seminorm on pairs."""
    return SeminormHandle(
        f"N_x[theta={theta:.4g}, phi={phi:.4g}]",
        lambda pair: float(
            bridge_N_points(ctx.irrep, pair.f, pair.T, np.atleast_1d(theta), np.atleast_1d(phi))[0]
        ),
        f"pair:{ctx.n}",
        frozenset({LEIBNIZ, STRONG, FINITE}),
    )


def bridge_seminorm(ctx: BerezinContext, refine: bool = True) -> SeminormHandle:
    return SeminormHandle(
        f"N_sigma[n={ctx.n}]",
        lambda pair: bridge_N(ctx, pair.f, pair.T, refine=refine),
        f"pair:{ctx.n}",
        frozenset({LEIBNIZ, STRONG, FINITE}),
    )


# ----------------------------------------------------------- matricial bridge


def _function_block_values(F, theta, phi):
    q = len(F)
    L = max(f.l_max for row in F for f in row)
    Y = harmonic_matrix(L, theta, phi)
    vals = np.empty((len(np.atleast_1d(theta)), q, q), dtype=complex)
    for i in range(q):
        for j in range(q):
            vals[:, i, j] = Y @ F[i][j].padded(L).coeffs
    return vals, L


def matricial_N_points(irrep: SpinIrrep, F, T, theta, phi):
    """``|| (I_q (x) |x><x|)(F(x) (x) I_d - T) ||`` at each point."""
    q = len(F)
    d = irrep.d
    rows = irrep.coherent_states(theta, phi).conj()  # <x| as rows
    Fx, _ = _function_block_values(F, theta, phi)
    T = np.asarray(T, dtype=complex).reshape(q, d, q, d)
    # row block i of (I_q (x) <x|) T is sum_a conj(x_a) T[i, a, j, :]
    xT = np.einsum("pa,iajb->pijb", rows, T)
    W = Fx[:, :, :, None] * rows[:, None, None, :] - xT
    W = W.reshape(len(rows), q, q * d)
    return np.linalg.svd(W, compute_uv=False)[:, 0]


def matricial_bridge(ctx: BerezinContext, q: int, F, T, refine: bool = True):
    """``sup_x`` of the amplified bridge; returns ``(value, point)``."""
    if q not in (2, 3):
        raise ValueError("q must be 2 or 3")
    degree = max(max(f.l_max for row in F for f in row), ctx.n)
    return maximize_on_sphere(lambda t, p: matricial_N_points(ctx.irrep, F, T, t, p), degree, refine=refine)


def amplified_symbol_gap(ctx: BerezinContext, F, T, refine: bool = True):
    """``sup_x ||F(x) - sigma_T(x)||`` with entrywise symbols; returns ``(value, point)``."""
    q = len(F)
    d = ctx.d
    T = np.asarray(T, dtype=complex)
    G = [[F[i][j] - covariant_symbol(ctx, T[i * d : (i + 1) * d, j * d : (j + 1) * d]) for j in range(q)] for i in range(q)]
    degree = max(f.l_max for row in G for f in row)

    def opnorm(theta, phi):
        vals, _ = _function_block_values(G, theta, phi)
        return np.linalg.svd(vals, compute_uv=False)[:, 0]

    return maximize_on_sphere(opnorm, degree, refine=refine)


@dataclass(frozen=True)
class MatricialCheck:
    gap: float
    bridge: float
    q: int

    @property
    def ok(self) -> bool:
        return self.gap <= self.q * self.bridge * (1 + 1e-9) + 1e-12


def matricial_check(ctx: BerezinContext, F, T, refine: bool = True) -> MatricialCheck:
    """``||F - sigma_T|| <= q N^{n,q}(F, T)``.

    The bridge value includes the point where the gap peaks, so the inequality
    compares quantities evaluated consistently.
    """
    q = len(F)
    gap, (t, p) = amplified_symbol_gap(ctx, F, T, refine)
    nq, _ = matricial_bridge(ctx, q, F, T, refine)
    at_gap = float(matricial_N_points(ctx.irrep, F, T, np.atleast_1d(t), np.atleast_1d(p))[0])
    return MatricialCheck(gap, max(nq, at_gap), q)
