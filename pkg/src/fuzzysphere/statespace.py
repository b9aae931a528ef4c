"""States, the metric they inherit from a Lipschitz seminorm, the two pullback
maps between states of functions and of matrices, and the one-sided
neighborhood estimates that bound the distance between the state spaces.

Distances are suprema of a linear functional over a seminorm ball, so every
number produced here is a lower estimate attached to an explicit witness.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .berezin import BerezinContext
from .bridge import SAFETY_FACTOR, BridgeConstants, PairElement, combined_seminorm
from .errors import BoundViolation
from .functions import FunctionElement, angular_momentum_blocks, harmonic_matrix, real_basis
from .groupmodel import su2_frame
from .optsolve import DEFAULT_RESTARTS, RatioProblem, Stage, ratio_maximize
from .repn import SpinIrrep
from .seminorms import (
    SeminormHandle,
    finite_metric_lipnorm,
    matrix_lipnorm,
    quotient_minimize,
    smooth_matrix_lipnorm,
)

STATE_TOL = 1e-10
NEIGHBORHOOD_SLACK = 0.02
SMOOTHING_SCHEDULE = ((4, 40), (16, 40), (64, 40), (256, 150))
# the matrix term rarely binds in pair searches, so fewer directions suffice
PAIR_SCHEDULE = ((4, 24), (16, 24), (64, 40), (256, 80))


# ---------------------------------------------------------------------- states


@dataclass(frozen=True, eq=False)
class StateVector:
    """A state, stored as one of

    * ``"density"``: a density matrix on ``C^d``;
    * ``"weights"``: a probability measure on sphere points ``(theta, phi, w)``;
    * ``"discrete"``: a probability vector on the points of a finite space;
    * ``"pair"``: ``(t, a, b)`` meaning ``t a + (1 - t) b`` on pairs ``(f, T)``.

    Calling the state on an element returns its (complex) value.
    """

    kind: str
    payload: object

    def __call__(self, element):
        if self.kind == "density":
            T = element.T if isinstance(element, PairElement) else element
            return complex(np.trace(self.payload @ np.asarray(T)))
        if self.kind == "weights":
            f = element.f if isinstance(element, PairElement) else element
            theta, phi, w = self.payload
            return complex(np.dot(w, f(theta, phi)))
        if self.kind == "discrete":
            return complex(np.dot(self.payload, np.asarray(element)))
        if self.kind == "pair":
            t, a, b = self.payload
            return t * a(element) + (1 - t) * b(element)
        raise ValueError(f"unknown state kind {self.kind!r}")


def density_state(rho, tol: float = STATE_TOL) -> StateVector:
    rho = np.asarray(rho, dtype=complex)
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ValueError("density matrix is not hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError("density matrix does not have unit trace")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0] < -tol:
        raise ValueError("density matrix is not positive")
    return StateVector("density", rho)


def weights_state(theta, phi, weights, tol: float = STATE_TOL) -> StateVector:
    w = np.asarray(weights, dtype=float)
    if np.any(w < -tol) or abs(w.sum() - 1) > tol:
        raise ValueError("weights must be nonnegative and sum to 1")
    return StateVector("weights", (np.atleast_1d(theta).astype(float), np.atleast_1d(phi).astype(float), w))


def point_mass(theta: float, phi: float) -> StateVector:
    return weights_state([theta], [phi], [1.0])


def discrete_state(weights, tol: float = STATE_TOL) -> StateVector:
    w = np.asarray(weights, dtype=float)
    if np.any(w < -tol) or abs(w.sum() - 1) > tol:
        raise ValueError("weights must be nonnegative and sum to 1")
    return StateVector("discrete", w)


def pair_state(t: float, a: StateVector, b: StateVector) -> StateVector:
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    return StateVector("pair", (float(t), a, b))


def coherent_state(irrep: SpinIrrep, theta: float, phi: float) -> StateVector:
    r = irrep.coherent_states(theta, phi)[0]
    return StateVector("density", np.outer(r, r.conj()))


def random_density(rng, d: int) -> StateVector:
    """Ginibre-type density matrix ``G G* / tr(G G*)``."""
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = G @ G.conj().T
    return StateVector("density", rho / np.trace(rho).real)


# --------------------------------------------------------------- pullbacks


def pullback_state_A_to_B(ctx: BerezinContext, mu: StateVector) -> StateVector:
    """``nu = mu o sigma``: the density ``sum_i mu_i |x_i><x_i|``."""
    theta, phi, w = mu.payload
    rows = ctx.irrep.coherent_states(theta, phi)
    rho = np.einsum("n,ni,nj->ij", w, rows, rows.conj())
    return StateVector("density", rho)


def husimi_weights(ctx: BerezinContext, rho):
    """Frame weights times ``d <x_i|rho|x_i>``, renormalized to sum 1."""
    vals = np.real(ctx.expectation(np.asarray(rho, dtype=complex)))
    w = ctx.frame.weights * ctx.d * vals
    return w / w.sum()


def pullback_state_B_to_A(ctx: BerezinContext, nu: StateVector) -> StateVector:
    """``mu = nu o breve_sigma``, supported on the frame nodes.

    Exact on functions of degree ``<= 3n`` since the Husimi density has degree
    ``n`` and the frame integrates degree ``4n`` exactly.
    """
    return StateVector("weights", (ctx.frame.theta, ctx.frame.phi, husimi_weights(ctx, nu.payload)))


# ------------------------------------------------------------ hermitian spaces


@dataclass(frozen=True, eq=False)
class HermitianSpace:
    """Real coordinates for the self-adjoint part of a domain modulo the unit.

    ``lift`` maps coordinates to an element; ``pullback`` maps an element
    gradient (convention ``Re <G, dx>``) back to coordinates.
    """

    dim: int
    lift: Callable
    pullback: Callable | None = None


def hermitian_basis(d: int, traceless: bool = True):
    """Hilbert-Schmidt orthonormal hermitian matrices, as columns of ``(d*d, k)``."""
    cols = []
    r2 = 1 / np.sqrt(2)
    for i, j in itertools.combinations(range(d), 2):
        E = np.zeros((d, d), dtype=complex)
        E[i, j] = E[j, i] = r2
        cols.append(E.ravel())
        E = np.zeros((d, d), dtype=complex)
        E[i, j], E[j, i] = -1j * r2, 1j * r2
        cols.append(E.ravel())
    if not traceless:
        cols.append(np.eye(d, dtype=complex).ravel() / np.sqrt(d))
    for k in range(1, d):
        diag = np.zeros(d)
        diag[:k] = 1.0
        diag[k] = -k
        cols.append(np.diag(diag / np.sqrt(k * (k + 1))).astype(complex).ravel())
    return np.array(cols).T


def matrix_space(d: int) -> HermitianSpace:
    B = hermitian_basis(d)
    BH = B.conj().T
    return HermitianSpace(
        B.shape[1],
        lambda p: (B @ p).reshape(d, d),
        lambda G: np.real(BH @ np.asarray(G).reshape(-1)),
    )


def matrix_surrogate(irrep: SpinIrrep):
    """Coordinate-space smoothings of ``L_B`` on :func:`matrix_space`, for ``rho_L``."""
    d = irrep.d
    B = hermitian_basis(d)
    BH = B.conj().T

    def stage(p, n_dirs):
        vg = smooth_matrix_lipnorm(irrep, p, n_dirs)

        def inner(x):
            v, G = vg((B @ x).reshape(d, d))
            return v, np.real(BH @ G.reshape(-1))

        return inner

    return stage


def finite_space(k: int) -> HermitianSpace:
    """Real functions on ``k`` points modulo constants."""
    Q, _ = np.linalg.qr(np.vstack([np.ones(k), np.eye(k)[:-1]]).T)
    B = Q[:, 1:]
    return HermitianSpace(k - 1, lambda p: B @ p, lambda G: np.real(B.T @ np.asarray(G)))


def pair_space(ctx: BerezinContext, l_max: int) -> HermitianSpace:
    """Real functions of degree ``<= l_max`` paired with traceless hermitian
    matrices; the omitted direction is ``(c, c I)``."""
    Bf = real_basis(l_max)
    BT = hermitian_basis(ctx.d)
    nf = Bf.shape[1]
    d = ctx.d

    def lift(p):
        return PairElement(FunctionElement(l_max, Bf @ p[:nf]), (BT @ p[nf:]).reshape(d, d))

    return HermitianSpace(nf + BT.shape[1], lift)


@dataclass(frozen=True, eq=False)
class PairSurrogate:
    """Smooth stand-in for the combined seminorm on hermitian pairs.

    On a fixed point grid the gradient of ``f`` and the bridge rows
    ``f(x) <x| - <x| T`` are linear in the coordinates, so each evaluation is
    a handful of matrix-vector products.  Terms are ``p``-means over points
    (and directions for ``L_B``) joined by an ``l^p`` norm.
    """

    ctx: BerezinContext
    l_max: int
    gamma: float
    bridge_scale: float = 1.0

    def __post_init__(self):
        ctx = self.ctx
        frame = su2_frame(max(3, self.l_max, ctx.n))
        theta, phi = frame.theta, frame.phi
        Bf = real_basis(self.l_max)
        BT = hermitian_basis(ctx.d)
        nf = Bf.shape[1]
        Y = harmonic_matrix(self.l_max, theta, phi)
        grad_rows = np.concatenate([Y @ L @ Bf for L in angular_momentum_blocks(self.l_max)])
        s = ctx.irrep.coherent_states(theta, phi).conj()
        fvals = Y @ Bf
        # rows[i, k, :] . p = f(x_i) conj(s_ik) - (conj(s_i)^T T)_k
        W = np.zeros((len(theta), ctx.d, nf + BT.shape[1]), dtype=complex)
        W[:, :, :nf] = s[:, :, None] * fvals[:, None, :]
        BTm = BT.T.reshape(-1, ctx.d, ctx.d)
        W[:, :, nf:] = -np.einsum("ij,bjk->ikb", s, BTm)
        object.__setattr__(self, "_nf", nf)
        object.__setattr__(self, "_grad", grad_rows)
        object.__setattr__(self, "_gradH", np.ascontiguousarray(grad_rows.conj().T))
        object.__setattr__(self, "_npts", len(theta))
        W = W.reshape(-1, W.shape[-1])
        object.__setattr__(self, "_W", W)
        object.__setattr__(self, "_WH", np.ascontiguousarray(W.conj().T))
        object.__setattr__(self, "_BT", BT)

    @staticmethod
    def _pmean(v, p):
        top = float(v.max())
        if top <= 0:
            return 0.0, np.zeros_like(v)
        c = top * np.mean((v / top) ** p) ** (1.0 / p)
        return c, ((v / c) ** (p - 1)) / len(v)

    def stage(self, p: float, n_dirs: int):
        LBs = smooth_matrix_lipnorm(self.ctx.irrep, p, n_dirs)
        nf, npts, d = self._nf, self._npts, self.ctx.d
        BTH = self._BT.conj().T
        scale = self.bridge_scale / self.gamma

        def value_and_grad(x):
            # gradient modulus of the real function part
            g = (self._grad @ x[:nf]).reshape(3, npts)
            m = np.sqrt(np.sum(np.abs(g) ** 2, axis=0)) + 1e-300
            a, wa = self._pmean(m, p)
            ga = np.real(self._gradH @ ((wa / m) * g).reshape(-1))
            # smoothed L_B of the matrix part
            T = (self._BT @ x[nf:]).reshape(d, d)
            b, GT = LBs(T)
            gb = np.real(BTH @ GT.reshape(-1))
            # bridge rows
            r = (self._W @ x).reshape(npts, d)
            nr = np.linalg.norm(r, axis=1) + 1e-300
            c, wc = self._pmean(scale * nr, p)
            gc = scale * np.real(self._WH @ ((wc / nr)[:, None] * r).reshape(-1))
            terms = np.array([a, b, c])
            top = terms.max()
            if top <= 0:
                return 0.0, np.zeros_like(x)
            total = top * np.sum((terms / top) ** p) ** (1.0 / p)
            coef = (terms / total) ** (p - 1)
            grad = coef[2] * gc
            grad[:nf] += coef[0] * ga
            grad[nf:] += coef[1] * gb
            return float(total), grad

        return value_and_grad


# ----------------------------------------------------------------- the metric


@dataclass
class MetricReport:
    """Lower estimate of ``rho_L(mu, nu)`` with a witness ``a``: ``L(a) = 1``
    and ``(mu - nu)(a) = value``."""

    value: float
    certified_lower_bound: bool
    witness: object = field(repr=False)
    spread: float = 0.0
    unstable: bool = False

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "certifiedLowerBound": self.certified_lower_bound,
            "spread": self.spread,
            "unstable": self.unstable,
        }


def functional_vector(space: HermitianSpace, mu: StateVector, nu: StateVector):
    """Coordinates of ``a -> Re(mu(a) - nu(a))``."""
    out = np.zeros(space.dim)
    for k in range(space.dim):
        e = np.zeros(space.dim)
        e[k] = 1.0
        a = space.lift(e)
        out[k] = np.real(mu(a) - nu(a))
    return out


def rho_L(
    L: SeminormHandle,
    mu: StateVector,
    nu: StateVector,
    space: HermitianSpace,
    restarts: int = DEFAULT_RESTARTS,
    seed: int = 0,
    surrogate: Callable | None = None,
    schedule=SMOOTHING_SCHEDULE,
    polish: bool | None = None,
    warm_starts=(),
) -> MetricReport:
    """``sup { |mu(a) - nu(a)| : a = a*, L(a) <= 1 }`` by ratio maximization.

    The ratio ``|c . p| / L(lift(p))`` is homogeneous, so its supremum over
    coordinates is the distance.  ``surrogate(p, n_dirs)``, when given,
    supplies smooth coordinate-space stand-ins for ``L`` that the ascent
    climbs first; otherwise the exact subgradient of ``L`` is used.  The
    first restart starts from ``c`` itself, then from ``warm_starts``.
    """
    c = functional_vector(space, mu, nu)
    if np.linalg.norm(c) <= 1e-14:
        return MetricReport(0.0, True, space.lift(np.zeros(space.dim)))

    def objective(p):
        v = float(c @ p)
        return abs(v), np.sign(v) * c

    def exact(p):
        return float(L(space.lift(p)))

    if L.value_and_grad is not None and space.pullback is not None:

        def constraint(p):
            v, G = L.value_and_grad(space.lift(p))
            return v, space.pullback(G)

    else:

        def constraint(p):
            return exact(p), np.zeros_like(p)

    stages = []
    if surrogate is not None:
        stages = [Stage(objective, surrogate(pe, k)) for pe, k in schedule]
    if polish is None:
        polish = not stages
    problem = RatioProblem(
        objective,
        constraint,
        space.dim,
        seed=seed,
        restarts=restarts,
        warm_starts=[c / np.linalg.norm(c)] + [np.asarray(w, dtype=float) for w in warm_starts],
        stages=stages,
        polish=polish,
        name="rho_L",
    )
    est = ratio_maximize(problem)
    p = est.witness
    Lp = exact(p)
    if Lp <= 0:
        return MetricReport(float("inf"), True, space.lift(p))
    p = np.sign(c @ p) * p / Lp
    value = float(c @ p)
    return MetricReport(value, True, space.lift(p), est.spread, est.unstable)


def pair_rho(
    ctx: BerezinContext,
    gamma: float,
    mu: StateVector,
    nu: StateVector,
    l_max: int | None = None,
    restarts: int = 2,
    seed: int = 0,
    bridge_scale: float = 1.0,
) -> MetricReport:
    """``rho`` for the combined seminorm ``L_n`` on ``A + B^n`` (search over
    functions of degree ``<= l_max``, default ``n``)."""
    l_max = ctx.n if l_max is None else l_max
    L = combined_seminorm(ctx, gamma, l_max=l_max, bridge_scale=bridge_scale)
    space = pair_space(ctx, l_max)
    sur = PairSurrogate(ctx, l_max, gamma, bridge_scale)
    # (1, 0) separates the two summands; coordinate 0 is the constant function
    unit_a = np.zeros(space.dim)
    unit_a[0] = 1.0
    return rho_L(
        L, mu, nu, space, restarts=max(restarts, 2), seed=seed, surrogate=sur.stage, schedule=PAIR_SCHEDULE,
        warm_starts=[unit_a],
    )


# -------------------------------------------------------------- neighborhoods


def d18_states(ctx: BerezinContext, rng, n_random: int = 20, n_weights: int = 3, n_nodes: int = 3):
    """Sampled states: point masses and random weight vectors on ``A``; pure
    coherent states, the maximally mixed state and Ginibre densities on ``B``."""
    fr = ctx.frame
    nodes = [int(np.argmin(fr.theta)), int(np.argmax(fr.theta))]
    nodes += [int(k) for k in rng.choice(len(fr.theta), size=max(0, n_nodes - 2), replace=False)]
    states_A = [point_mass(0.0, 0.0)] + [point_mass(fr.theta[k], fr.phi[k]) for k in nodes]
    for _ in range(n_weights):
        w = rng.random(len(fr.theta))
        states_A.append(weights_state(fr.theta, fr.phi, w / w.sum()))
    states_B = [coherent_state(ctx.irrep, fr.theta[k], fr.phi[k]) for k in nodes]
    states_B.append(StateVector("density", np.eye(ctx.d, dtype=complex) / ctx.d))
    states_B += [random_density(rng, ctx.d) for _ in range(n_random)]
    return states_A, states_B


@dataclass
class NeighborhoodReport:
    n: int
    gamma: float
    a_to_b: list
    b_to_a: list
    bound_a_to_b: float
    bound_b_to_a: float
    bound_b_to_a_sound: float
    prox_bound: float

    @property
    def worst_a_to_b(self) -> float:
        return max(self.a_to_b, default=0.0)

    @property
    def worst_b_to_a(self) -> float:
        return max(self.b_to_a, default=0.0)

    def row(self) -> dict:
        return {
            "n": self.n,
            "dirA_to_B_worst": self.worst_a_to_b,
            "dirB_to_A_worst": self.worst_b_to_a,
            "theoreticalBound": self.prox_bound,
        }


def neighborhood_check(
    ctx: BerezinContext,
    constants: BridgeConstants,
    states_A,
    states_B,
    gamma: float | None = None,
    restarts: int = 2,
    seed: int = 0,
    l_max: int | None = None,
    slack: float = NEIGHBORHOOD_SLACK,
    bridge_scale: float = 1.0,
    raise_on_violation: bool = True,
) -> NeighborhoodReport:
    """Estimate ``rho(mu, mu o sigma)`` and ``rho(nu, nu o breve_sigma)`` on samples.

    The first is compared with the ``gamma`` inside ``L_n`` (tolerance 1e-6),
    the second with ``gammaA + deltaB`` up to ``slack``.  Because
    ``||f - sigma_T|| <= N(f, T) <= gamma`` on the unit ball, the bound that
    the triangle-inequality argument actually delivers for the second
    direction is ``gamma + deltaB``; it is reported alongside.
    """
    gamma = SAFETY_FACTOR * constants.gamma if gamma is None else gamma
    bound_b = constants.gammaA + constants.deltaB
    a_to_b, b_to_a = [], []
    for k, mu in enumerate(states_A):
        nu = pullback_state_A_to_B(ctx, mu)
        rep = pair_rho(ctx, gamma, mu, nu, l_max, restarts, seed + k, bridge_scale)
        a_to_b.append(rep.value)
        if raise_on_violation and rep.value > gamma * (1 + 1e-6):
            raise BoundViolation(f"rho(mu, mu o sigma) = {rep.value:.6g} exceeds gamma = {gamma:.6g}", rep.witness)
    for k, nu in enumerate(states_B):
        mu = pullback_state_B_to_A(ctx, nu)
        rep = pair_rho(ctx, gamma, nu, mu, l_max, restarts, seed + 1000 + k, bridge_scale)
        b_to_a.append(rep.value)
        if raise_on_violation and rep.value > bound_b * (1 + slack):
            raise BoundViolation(
                f"rho(nu, nu o breve_sigma) = {rep.value:.6g} exceeds gammaA + deltaB = {bound_b:.6g}", rep.witness
            )
    return NeighborhoodReport(
        ctx.n, gamma, a_to_b, b_to_a, gamma, bound_b, gamma + constants.deltaB, constants.proxBound
    )


# ------------------------------------------------------------------ radius


def quotient_radius(irrep: SpinIrrep, T, tol: float = 1e-10):
    """``(min_c ||T - c I||, holds)`` where ``holds`` is ``min_c ||T - cI|| <= pi L_B(T)``.

    For hermitian ``T`` the optimal ``c`` is real and the norm is unimodal in
    it, so a golden-section search over the spectral interval suffices; in
    general a simplex search over ``(Re c, Im c)`` follows.
    """
    T = np.asarray(T, dtype=complex)
    d = T.shape[0]
    I = np.eye(d)

    def norm_at(c):
        return float(np.linalg.norm(T - c * I, 2))

    H = (T + T.conj().T) / 2
    ev = np.linalg.eigvalsh(H)
    if ev[-1] - ev[0] <= tol:
        radius_real, c_real = norm_at(ev[0]), ev[0]
    else:
        res = minimize_scalar(norm_at, bracket=(ev[0], ev[-1]), method="golden", tol=tol)
        radius_real, c_real = float(res.fun), float(res.x)
    radius = radius_real
    if np.max(np.abs(T - T.conj().T)) > tol:
        res = minimize(
            lambda z: norm_at(z[0] + 1j * z[1]),
            [c_real, np.imag(np.trace(T)) / d],
            method="Nelder-Mead",
            options={"xatol": tol, "fatol": tol, "maxiter": 4000},
        )
        radius = min(radius, float(res.fun))
    LB = matrix_lipnorm(irrep)(T)
    return radius, bool(radius <= np.pi * LB * (1 + 1e-6))


# ------------------------------------------------------------ three points


def hausdorff_distance(dist, S1, S2) -> float:
    """Hausdorff distance between index sets of a finite metric space."""
    D = np.asarray(dist, dtype=float)[np.ix_(list(S1), list(S2))]
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


@dataclass
class FixtureReport:
    hausdorff: float
    lip_X: float
    lip_extension: float
    quotient_complex: float
    lip_X_real: float
    quotient_real: float
    lip_X_imag: float
    quotient_imag: float

    def to_json(self) -> dict:
        return {
            "hausdorff": self.hausdorff,
            "lipX": self.lip_X,
            "lipExtension": self.lip_extension,
            "quotientComplex": self.quotient_complex,
            "lipXReal": self.lip_X_real,
            "quotientReal": self.quotient_real,
            "lipXImag": self.lip_X_imag,
            "quotientImag": self.quotient_imag,
        }


def three_point_fixture() -> FixtureReport:
    """Three points at mutual distance 2 and a fourth point at distance 1 from each.

    The cube roots of unity on the three points have Lipschitz constant
    ``sqrt(3)/2``; every extension to the fourth point costs at least 1 since
    no point of the plane is closer than 1 to all three roots.  Real and
    imaginary parts separately extend without loss.
    """
    Z = np.full((4, 4), 2.0)
    Z[3, :] = Z[:, 3] = 1.0
    np.fill_diagonal(Z, 0.0)
    X = [0, 1, 2]
    zeta = np.exp(2j * np.pi * np.arange(3) / 3)
    LX = finite_metric_lipnorm(X, Z[:3, :3])
    LZ = finite_metric_lipnorm(range(4), Z)

    def fiber(values, complex_fiber):
        base = np.append(values, 0.0).astype(complex)
        e = np.zeros(4, dtype=complex)
        e[3] = 1.0
        return base, ([e, 1j * e] if complex_fiber else [e])

    q_c = quotient_minimize(LZ, lambda v: fiber(v, True), zeta).value
    q_r = quotient_minimize(LZ, lambda v: fiber(v, False), zeta.real).value
    q_i = quotient_minimize(LZ, lambda v: fiber(v, False), zeta.imag).value
    return FixtureReport(
        hausdorff=hausdorff_distance(Z, X, [3]),
        lip_X=LX(zeta),
        lip_extension=LZ(np.append(zeta, 0.0)),
        quotient_complex=q_c,
        lip_X_real=LX(zeta.real),
        quotient_real=q_r,
        lip_X_imag=LX(zeta.imag),
        quotient_imag=q_i,
    )
