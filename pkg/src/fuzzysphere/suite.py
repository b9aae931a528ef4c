"""Property checks run by ``fuzzysphere check``.

Each check samples random inputs from a seeded generator, evaluates a proven
inequality or identity, and reports the worst slack together with a witness
when it fails.  Slack is ``lhs - rhs`` scaled by ``rhs`` where that makes
sense, so a negative worst slack means every sample held with room.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .berezin import (
    BerezinContext,
    berezin_defect,
    contravariant_symbol,
    covariant_symbol,
    delta_A,
    kadison_schwarz_gap,
    reconstruction_error,
)
from .bridge import (
    SAFETY_FACTOR,
    BridgeConstants,
    PairElement,
    bridge_N,
    bridge_point_seminorm,
    combined_seminorm,
    matricial_check,
    msd_form,
)
from .errors import BoundViolation
from .functions import FunctionElement, Jet, search_points
from .groupmodel import sphere_angles, sphere_points, su2_axis_angle, su2_random, su2_rotation_matrix
from .seminorms import (
    SeminormHandle,
    Algebra,
    check_leibniz,
    function_lipnorm,
    jet_algebra,
    matrix_algebra,
    matrix_lipnorm,
)
from .statespace import d18_states, neighborhood_check, quotient_radius

QUOTIENT_SLACK = 0.02


@dataclass
class CheckResult:
    name: str
    n: int
    passed: bool
    worst: float
    trials: int
    witness: dict | None = field(default=None)

    def to_json(self) -> dict:
        out = {"name": self.name, "n": self.n, "passed": self.passed, "worst": self.worst, "trials": self.trials}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _matrix_json(T):
    T = np.asarray(T)
    return [[[float(z.real), float(z.imag)] for z in row] for row in T]


def random_matrix(rng, d: int, hermitian: bool = False):
    T = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    return (T + T.conj().T) / 2 if hermitian else T


def _invertible(rng, d: int):
    """Random matrix pushed away from singularity so inverses are meaningful."""
    T = random_matrix(rng, d)
    return T + (1.5 + np.linalg.norm(T, 2)) * np.exp(2j * np.pi * rng.random()) * np.eye(d)


def _invertible_function(rng, l_max: int):
    f = FunctionElement.random(rng, l_max, real=False, scale=0.3)
    return f + FunctionElement.constant((1.0 + 0.3 * np.sum(np.abs(f.coeffs))) * np.exp(2j * np.pi * rng.random()))


def pair_algebra(theta, phi, d: int) -> Algebra:
    """Pairs ``(jet, matrix)`` with the max of sup and operator norms."""
    jets = jet_algebra(theta, phi)
    mats = matrix_algebra(d)
    return Algebra(
        mul=lambda a, b: a * b,
        inverse=lambda a: a.inverse(),
        norm=lambda a: max(jets.norm(a.f), mats.norm(a.T)),
        one=lambda: PairElement(jets.one(), mats.one()),
        condition=lambda a: max(jets.condition(a.f), mats.condition(a.T)),
    )


def _leibniz_result(name, n, report):
    worst = max(report.worst_product_slack, report.worst_inverse_slack or -np.inf)
    return CheckResult(name, n, report.ok, float(worst), report.trials, report.violations[0] if report.violations else None)


# ------------------------------------------------------------------ Leibniz


def check_leibniz_LB(ctx: BerezinContext, rng, trials: int = 200) -> CheckResult:
    d = ctx.d
    rep = check_leibniz(
        matrix_lipnorm(ctx.irrep), lambda r: (_invertible(r, d), random_matrix(r, d)), trials, matrix_algebra(d), rng
    )
    return _leibniz_result("leibniz_L_B", ctx.n, rep)


def check_leibniz_LA(ctx: BerezinContext, rng, trials: int = 200, l_max: int | None = None) -> CheckResult:
    """``L_A`` on jets: value and first derivatives on a dense point set, so
    products and inverses are exact and the comparison is pointwise."""
    l_max = ctx.n if l_max is None else l_max
    theta, phi = search_points(l_max)
    LA = function_lipnorm(l_max)
    rep = check_leibniz(
        LA,
        lambda r: (Jet.of(_invertible_function(r, l_max), theta, phi), Jet.of(FunctionElement.random(r, l_max, real=False), theta, phi)),
        trials,
        jet_algebra(theta, phi),
        rng,
    )
    return _leibniz_result("leibniz_L_A", ctx.n, rep)


def _pair_sampler(ctx, theta, phi, l_max):
    def sample(r):
        a = PairElement(Jet.of(_invertible_function(r, l_max), theta, phi), _invertible(r, ctx.d))
        b = PairElement(Jet.of(FunctionElement.random(r, l_max, real=False), theta, phi), random_matrix(r, ctx.d))
        return a, b

    return sample


def check_leibniz_Nx(ctx: BerezinContext, rng, trials: int = 200, points: int = 3) -> CheckResult:
    """``N_x`` at a few random points, each against jets at that point."""
    worst, ok, witness, total = -np.inf, True, None, 0
    per = max(1, trials // points)
    for _ in range(points):
        u = rng.standard_normal(3)
        theta, phi = (float(v[0]) for v in sphere_angles((u / np.linalg.norm(u))[None, :]))
        Nx = bridge_point_seminorm(ctx, theta, phi)
        th, ph = np.array([theta]), np.array([phi])
        rep = check_leibniz(Nx, _pair_sampler(ctx, th, ph, ctx.n), per, pair_algebra(th, ph, ctx.d), rng)
        res = _leibniz_result("leibniz_N_x", ctx.n, rep)
        worst = max(worst, res.worst)
        total += per
        if not res.passed:
            ok, witness = False, res.witness
    return CheckResult("leibniz_N_x", ctx.n, ok, float(worst), total, witness)


def check_leibniz_Ln(ctx: BerezinContext, gamma: float, rng, trials: int = 200) -> CheckResult:
    """Combined ``L_n`` on pairs of jets and matrices."""
    theta, phi = search_points(ctx.n)
    L = combined_seminorm(ctx, gamma, l_max=ctx.n)
    rep = check_leibniz(L, _pair_sampler(ctx, theta, phi, ctx.n), trials, pair_algebra(theta, phi, ctx.d), rng)
    return _leibniz_result("leibniz_L_n", ctx.n, rep)


# ----------------------------------------------------------------- Berezin


def check_berezin_maps(ctx: BerezinContext, rng, trials: int = 50, tol: float = 1e-9) -> CheckResult:
    """Positivity, equivariance and adjointness of the two symbol maps."""
    d, n = ctx.d, ctx.n
    worst = -np.inf
    for _ in range(trials):
        g = FunctionElement.random(rng, n // 2 if n > 1 else 1, real=False)
        pos = g.product(g.conj()).padded(2 * n) if g.l_max * 2 <= 2 * n else None
        if pos is not None:
            worst = max(worst, -float(np.linalg.eigvalsh(contravariant_symbol(ctx, pos))[0]))
        G = random_matrix(rng, d)
        sym = covariant_symbol(ctx, G @ G.conj().T)
        theta, phi = search_points(n)
        worst = max(worst, -float(np.min(np.real(sym(theta, phi)))))
        # equivariance: symbol of U T U* at x equals symbol of T at R^{-1} x
        u = su2_random(rng)
        R = su2_rotation_matrix(u)
        axis, angle = su2_axis_angle(u)
        U = ctx.irrep.rotation(axis, angle)
        T = random_matrix(rng, d)
        x = sphere_points(theta, phi)
        t2, p2 = sphere_angles(x @ R)  # rows R^T x = R^{-1} x
        lhs = covariant_symbol(ctx, U @ T @ U.conj().T)(theta, phi)
        rhs = covariant_symbol(ctx, T)(t2, p2)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))) - tol)
        # adjointness: tr(breve_sigma_f^* T)/d = int conj(f) sigma_T
        f = FunctionElement.random(rng, n, real=False)
        left = np.vdot(contravariant_symbol(ctx, f), T) / d
        right = np.vdot(f.coeffs, covariant_symbol(ctx, T).coeffs)
        worst = max(worst, abs(left - right) - tol)
    return CheckResult("berezin_maps", n, worst <= tol, float(worst), trials)


def check_msd_identity(ctx: BerezinContext, rng, trials: int = 500, tol: float = 1e-10) -> CheckResult:
    """``||P(tr(PT) I - T)|| = (tr(P T T* P) - |tr(PT)|^2)^(1/2)``."""
    P = ctx.irrep.P
    worst = 0.0
    for _ in range(trials):
        T = random_matrix(rng, ctx.d)
        lhs = np.linalg.norm(P @ (np.trace(P @ T) * np.eye(ctx.d) - T), 2)
        worst = max(worst, abs(lhs - msd_form(ctx.irrep, T)))
    return CheckResult("msd_identity", ctx.n, worst <= tol, float(worst), trials)


def check_defect_bound(ctx: BerezinContext, rng, trials: int = 100, slack: float = 1e-6) -> CheckResult:
    """``sup|f - sigma(breve_sigma f)| <= deltaA L_A(f)`` for real ``f`` of degree ``<= n``."""
    dA = delta_A(ctx.n)[0]
    LA = function_lipnorm(ctx.n)
    worst, witness = -np.inf, None
    for _ in range(trials):
        f = FunctionElement.random(rng, ctx.n)
        lhs, rhs = berezin_defect(ctx, f), dA * LA(f)
        s = (lhs - rhs) / rhs
        if s > worst:
            worst, witness = s, f.to_json()
    return CheckResult("defect_bound", ctx.n, worst <= slack, float(worst), trials, witness if worst > slack else None)


def check_reconstruction_bound(ctx: BerezinContext, rng, trials: int = 100, slack: float = 1e-6) -> CheckResult:
    """``||T - breve_sigma(sigma_T)|| <= 2 deltaA L_B(T)``."""
    dA = delta_A(ctx.n)[0]
    LB = matrix_lipnorm(ctx.irrep)
    worst, witness = -np.inf, None
    for _ in range(trials):
        T = random_matrix(rng, ctx.d)
        lhs, rhs = reconstruction_error(ctx, T), 2 * dA * LB(T)
        s = (lhs - rhs) / rhs
        if s > worst:
            worst, witness = s, _matrix_json(T)
    return CheckResult(
        "reconstruction_bound", ctx.n, worst <= slack, float(worst), trials, witness if worst > slack else None
    )


def check_kadison_schwarz(ctx: BerezinContext, rng, trials: int = 100, tol: float = 1e-9) -> CheckResult:
    worst = np.inf
    for _ in range(trials):
        worst = min(worst, kadison_schwarz_gap(ctx, FunctionElement.random(rng, ctx.n)))
    return CheckResult("kadison_schwarz", ctx.n, worst >= -tol, float(worst), trials)


# -------------------------------------------------------------- bridge side


def check_matricial(ctx: BerezinContext, rng, trials: int = 100, q: int = 2) -> CheckResult:
    """``||F - sigma_T|| <= q N^{n,q}(F, T)`` on random block pairs."""
    worst, witness = -np.inf, None
    for _ in range(trials):
        F = [[FunctionElement.random(rng, ctx.n, real=False) for _ in range(q)] for _ in range(q)]
        T = random_matrix(rng, q * ctx.d)
        res = matricial_check(ctx, F, T)
        s = (res.gap - q * res.bridge) / max(q * res.bridge, 1e-300)
        if s > worst:
            worst = s
            witness = None if res.ok else {"gap": res.gap, "bridge": res.bridge}
    return CheckResult("matricial_bound", ctx.n, worst <= 1e-9, float(worst), trials, witness)


def check_radius(ctx: BerezinContext, rng, trials: int = 100) -> CheckResult:
    """``min_c ||T - c I|| <= pi L_B(T)`` on random hermitian ``T``."""
    LB = matrix_lipnorm(ctx.irrep)
    worst, ok = -np.inf, True
    for _ in range(trials):
        T = random_matrix(rng, ctx.d, hermitian=True)
        r, holds = quotient_radius(ctx.irrep, T)
        worst = max(worst, r / (np.pi * LB(T)) - 1)
        ok &= holds
    return CheckResult("radius_bound", ctx.n, bool(ok), float(worst), trials)


def check_quotient_witnesses(
    ctx: BerezinContext, constants: BridgeConstants, rng, trials: int = 100, gamma: float | None = None
) -> CheckResult:
    """``L_n(f, breve_sigma_f) <= L_A(f)`` and ``L_n(sigma_T, T) <= L_B(T)``
    (the second up to the optimizer slack in ``gamma``)."""
    gamma = SAFETY_FACTOR * constants.gamma if gamma is None else gamma
    L = combined_seminorm(ctx, gamma, l_max=ctx.n)
    LA = function_lipnorm(ctx.n)
    LB = matrix_lipnorm(ctx.irrep)
    worst_a = worst_b = -np.inf
    witness = None
    for _ in range(trials):
        f = FunctionElement.random(rng, ctx.n)
        s = L(PairElement(f, contravariant_symbol(ctx, f))) / LA(f) - 1
        if s > worst_a:
            worst_a = s
            if s > 1e-6:
                witness = {"kind": "function", "f": f.to_json()}
        T = random_matrix(rng, ctx.d, hermitian=True)
        s = L(PairElement(covariant_symbol(ctx, T), T)) / LB(T) - 1
        if s > worst_b:
            worst_b = s
            if s > QUOTIENT_SLACK:
                witness = {"kind": "matrix", "T": _matrix_json(T)}
    ok = worst_a <= 1e-6 and worst_b <= QUOTIENT_SLACK
    return CheckResult("quotient_witnesses", ctx.n, ok, float(max(worst_a, worst_b)), trials, witness)


def check_neighborhoods(
    ctx: BerezinContext,
    constants: BridgeConstants,
    rng,
    n_random: int = 20,
    restarts: int = 1,
    seed: int = 0,
    bridge_scale: float = 1.0,
) -> CheckResult:
    states_A, states_B = d18_states(ctx, rng, n_random=n_random)
    try:
        rep = neighborhood_check(
            ctx, constants, states_A, states_B, restarts=restarts, seed=seed, bridge_scale=bridge_scale
        )
    except BoundViolation as exc:
        witness = {"message": str(exc)}
        if isinstance(exc.witness, PairElement):
            witness["f"] = exc.witness.f.to_json()
            witness["T"] = _matrix_json(exc.witness.T)
        return CheckResult("neighborhoods", ctx.n, False, float("nan"), len(states_A) + len(states_B), witness)
    worst = max(rep.worst_a_to_b / rep.bound_a_to_b, rep.worst_b_to_a / rep.bound_b_to_a) - 1
    return CheckResult("neighborhoods", ctx.n, True, float(worst), len(states_A) + len(states_B))


def run_suite(ctx: BerezinContext, constants: BridgeConstants, seed: int, restarts: int = 1, n_random: int = 20, bridge_scale: float = 1.0):
    """All checks at one ``n``; generators are derived from ``(seed, n, index)``."""
    gamma = SAFETY_FACTOR * constants.gamma

    def rng(k):
        return np.random.default_rng([seed, ctx.n, k])

    return [
        check_leibniz_LB(ctx, rng(0)),
        check_leibniz_LA(ctx, rng(1)),
        check_leibniz_Nx(ctx, rng(2)),
        check_leibniz_Ln(ctx, gamma, rng(3)),
        check_berezin_maps(ctx, rng(4)),
        check_msd_identity(ctx, rng(5)),
        check_defect_bound(ctx, rng(6)),
        check_reconstruction_bound(ctx, rng(7)),
        check_kadison_schwarz(ctx, rng(8)),
        check_matricial(ctx, rng(9)),
        check_radius(ctx, rng(10)),
        check_quotient_witnesses(ctx, constants, rng(11)),
        check_neighborhoods(ctx, constants, rng(12), n_random=n_random, restarts=restarts, seed=seed, bridge_scale=bridge_scale),
    ]
