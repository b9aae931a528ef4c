import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fuzzysphere.berezin import berezin_context, contravariant_symbol, covariant_symbol
from fuzzysphere.bridge import BridgeConstants, PairElement, combined_seminorm
from fuzzysphere.errors import BoundViolation
from fuzzysphere.functions import FunctionElement
from fuzzysphere.repn import spin_irrep
from fuzzysphere.seminorms import finite_metric_lipnorm, matrix_lipnorm
from fuzzysphere.statespace import (
    PairSurrogate,
    StateVector,
    coherent_state,
    d18_states,
    density_state,
    discrete_state,
    finite_space,
    hausdorff_distance,
    hermitian_basis,
    matrix_space,
    matrix_surrogate,
    neighborhood_check,
    pair_rho,
    pair_space,
    pair_state,
    point_mass,
    pullback_state_A_to_B,
    pullback_state_B_to_A,
    quotient_radius,
    random_density,
    rho_L,
    three_point_fixture,
    weights_state,
)

seeds = st.integers(0, 2**32 - 1)


def bloch(rho):
    return np.real([rho[0, 1] + rho[1, 0], 1j * (rho[0, 1] - rho[1, 0]), rho[0, 0] - rho[1, 1]])


def matrix_rho(n, a, b, restarts=2):
    ir = spin_irrep(n)
    return rho_L(
        matrix_lipnorm(ir), a, b, matrix_space(n + 1), restarts=restarts, surrogate=matrix_surrogate(ir), polish=True
    )


def test_spin_up_down_distance():
    ir = spin_irrep(1)
    up, down = coherent_state(ir, 0.0, 0.0), coherent_state(ir, np.pi, 0.0)
    rep = matrix_rho(1, up, down)
    assert rep.value == pytest.approx(2.0, rel=1e-6)
    assert rep.certified_lower_bound
    # the witness attains the value at unit seminorm
    assert matrix_lipnorm(ir)(rep.witness) == pytest.approx(1.0, rel=1e-9)
    assert np.real(up(rep.witness) - down(rep.witness)) == pytest.approx(rep.value)


@settings(max_examples=10)
@given(seeds)
def test_spin_half_distance_is_bloch_distance(seed):
    r = np.random.default_rng(seed)
    a, b = random_density(r, 2), random_density(r, 2)
    expected = np.linalg.norm(bloch(a.payload) - bloch(b.payload))
    assert matrix_rho(1, a, b).value == pytest.approx(expected, rel=1e-6)


@settings(max_examples=3)
@given(seeds)
def test_pseudometric_axioms(seed):
    r = np.random.default_rng(seed)
    a, b, c = (random_density(r, 3) for _ in range(3))
    ab, ba = matrix_rho(2, a, b).value, matrix_rho(2, b, a).value
    assert ab == pytest.approx(ba, rel=1e-4)
    assert matrix_rho(2, a, a).value == 0.0
    ac, cb = matrix_rho(2, a, c).value, matrix_rho(2, c, b).value
    assert ab <= (ac + cb) * (1 + 1e-6)


def test_spin_one_poles_bounds():
    ir = spin_irrep(2)
    rep = matrix_rho(2, coherent_state(ir, 0, 0), coherent_state(ir, np.pi, 0))
    # J_z gives 2; the radius bound caps at 2 pi
    assert 2.0 - 1e-9 <= rep.value <= 2 * np.pi


def test_finite_metric_distances():
    D = np.array([[0, 1, 2], [1, 0, 1.5], [2, 1.5, 0]])
    L = finite_metric_lipnorm(range(3), D)
    space = finite_space(3)
    d = lambda a, b: rho_L(L, discrete_state(a), discrete_state(b), space, restarts=3).value
    assert d([1, 0, 0], [0, 0, 1]) == pytest.approx(2.0, rel=1e-6)
    assert d([0, 1, 0], [0, 0, 1]) == pytest.approx(1.5, rel=1e-6)
    # transport to a point mass: 0.5 * 2 + 0.5 * 1.5
    assert d([0.5, 0.5, 0], [0, 0, 1]) == pytest.approx(1.75, rel=1e-6)


def test_state_validation():
    with pytest.raises(ValueError):
        density_state(np.diag([0.5, 0.6]))
    with pytest.raises(ValueError):
        density_state(np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(ValueError):
        density_state(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        weights_state([0, 1], [0, 0], [0.7, 0.7])
    with pytest.raises(ValueError):
        discrete_state([1.2, -0.2])
    with pytest.raises(ValueError):
        pair_state(1.5, point_mass(0, 0), point_mass(1, 0))
    with pytest.raises(ValueError):
        StateVector("bogus", None)(1.0)


def test_state_evaluation(rng):
    f = FunctionElement.random(rng, 2, real=False)
    T = rng.standard_normal((3, 3))
    mu = weights_state([0.3, 1.0], [0.2, 2.0], [0.25, 0.75])
    assert mu(f) == pytest.approx(0.25 * f(0.3, 0.2)[0] + 0.75 * f(1.0, 2.0)[0])
    rho = random_density(rng, 3)
    assert rho(PairElement(f, T)) == pytest.approx(np.trace(rho.payload @ T))
    mix = pair_state(0.3, mu, rho)
    pair = PairElement(f, T)
    assert mix(pair) == pytest.approx(0.3 * mu(pair) + 0.7 * rho(pair))


@given(st.integers(1, 4), seeds)
def test_pullbacks_are_compositions(n, seed):
    r = np.random.default_rng(seed)
    ctx = berezin_context(n)
    T = r.standard_normal((n + 1, n + 1)) + 1j * r.standard_normal((n + 1, n + 1))
    w = r.random(4)
    mu = weights_state(r.uniform(0, np.pi, 4), r.uniform(0, 2 * np.pi, 4), w / w.sum())
    nu = pullback_state_A_to_B(ctx, mu)
    density_state(nu.payload)
    assert nu(T) == pytest.approx(mu(covariant_symbol(ctx, T)), abs=1e-10)
    rho = random_density(r, n + 1)
    back = pullback_state_B_to_A(ctx, rho)
    assert back.payload[2].min() >= -1e-14 and back.payload[2].sum() == pytest.approx(1.0)
    f = FunctionElement.random(r, n, real=False)
    assert back(f) == pytest.approx(rho(contravariant_symbol(ctx, f)), abs=1e-10)


@given(seeds, st.floats(0, 1))
def test_pullbacks_are_affine(seed, t):
    r = np.random.default_rng(seed)
    ctx = berezin_context(2)
    a, b = random_density(r, 3), random_density(r, 3)
    mixed = StateVector("density", t * a.payload + (1 - t) * b.payload)
    wa = pullback_state_B_to_A(ctx, a).payload[2]
    wb = pullback_state_B_to_A(ctx, b).payload[2]
    assert np.allclose(pullback_state_B_to_A(ctx, mixed).payload[2], t * wa + (1 - t) * wb, atol=1e-12)
    m1, m2 = point_mass(0.4, 1.0), point_mass(2.0, 3.0)
    th = np.array([0.4, 2.0])
    ph = np.array([1.0, 3.0])
    combo = pullback_state_A_to_B(ctx, weights_state(th, ph, [t, 1 - t])).payload
    sep = t * pullback_state_A_to_B(ctx, m1).payload + (1 - t) * pullback_state_A_to_B(ctx, m2).payload
    assert np.allclose(combo, sep, atol=1e-12)


def test_spaces():
    B = hermitian_basis(3)
    assert B.shape == (9, 8)
    assert np.allclose(B.conj().T @ B, np.eye(8), atol=1e-12)
    assert hermitian_basis(3, traceless=False).shape == (9, 9)
    fs = finite_space(4)
    v = fs.lift(np.array([1.0, -2.0, 0.5]))
    assert v.sum() == pytest.approx(0.0, abs=1e-12)
    ps = pair_space(berezin_context(2), 2)
    assert ps.dim == 9 + 8
    pair = ps.lift(np.arange(17.0))
    assert pair.f.is_real() and np.allclose(pair.T, pair.T.conj().T)


def test_pair_surrogate_gradient(rng):
    ctx = berezin_context(2)
    sur = PairSurrogate(ctx, 2, 1.9)
    vg = sur.stage(8.0, 20)
    x, h = rng.standard_normal(17), rng.standard_normal(17)
    v, g = vg(x)
    eps = 1e-6
    fd = (vg(x + eps * h)[0] - vg(x - eps * h)[0]) / (2 * eps)
    assert g @ h == pytest.approx(fd, rel=1e-4)
    assert vg(np.zeros(17))[0] == pytest.approx(0.0, abs=1e-200)
    # a sharp stage approaches the exact seminorm
    exact = combined_seminorm(ctx, 1.9, l_max=2)(pair_space(ctx, 2).lift(x))
    assert sur.stage(256.0, 150)(x)[0] == pytest.approx(exact, rel=0.1)


def test_pair_rho_attains_gamma_for_pullback():
    # (gamma 1, 0) has unit seminorm and separates mu from mu o sigma by gamma
    ctx = berezin_context(1)
    mu = point_mass(0.7, 0.3)
    rep = pair_rho(ctx, 1.9, mu, pullback_state_A_to_B(ctx, mu))
    assert 1.9 * (1 - 1e-9) <= rep.value <= 1.9 * (1 + 1e-6)


def _constants_n1():
    return BridgeConstants(1, 16 / 9, 1.0, 0.0, 3 * np.pi / 8, 2 / 3, 0.0, False)


def test_neighborhood_check_small():
    ctx = berezin_context(1)
    rng = np.random.default_rng(0)
    A, B = d18_states(ctx, rng, n_random=2, n_weights=1, n_nodes=2)
    rep = neighborhood_check(ctx, _constants_n1(), A[:2], B[:3], restarts=1)
    assert rep.worst_a_to_b <= rep.gamma * (1 + 1e-6)
    assert rep.worst_b_to_a <= rep.bound_b_to_a * 1.02
    assert set(rep.row()) == {"n", "dirA_to_B_worst", "dirB_to_A_worst", "theoreticalBound"}


def test_neighborhood_check_detects_fault():
    ctx = berezin_context(1)
    with pytest.raises(BoundViolation) as info:
        neighborhood_check(ctx, _constants_n1(), [point_mass(0.5, 0.5)], [], restarts=1, bridge_scale=0.5)
    assert info.value.witness is not None


def test_quotient_radius_examples():
    ir = spin_irrep(1)
    assert quotient_radius(ir, np.diag([3.0, 1.0]))[0] == pytest.approx(1.0, abs=1e-8)
    # nilpotent: ||N - cI|| is smallest at c = 0
    assert quotient_radius(ir, np.array([[0, 1], [0, 0]], dtype=complex))[0] == pytest.approx(1.0, abs=1e-7)
    assert quotient_radius(ir, 2j * np.eye(2) + np.diag([1.0, -1.0]))[0] == pytest.approx(1.0, abs=1e-7)
    r, ok = quotient_radius(spin_irrep(2), spin_irrep(2).Jz)
    assert r == pytest.approx(1.0, abs=1e-8) and ok


@given(st.integers(1, 5), seeds)
def test_radius_bound(n, seed):
    r = np.random.default_rng(seed)
    T = r.standard_normal((n + 1, n + 1)) + 1j * r.standard_normal((n + 1, n + 1))
    assert quotient_radius(spin_irrep(n), T)[1]


def test_hausdorff_and_fixture():
    D = np.array([[0, 1, 3], [1, 0, 2], [3, 2, 0]], dtype=float)
    assert hausdorff_distance(D, [0], [1, 2]) == 3.0
    assert hausdorff_distance(D, [0, 1], [0, 1]) == 0.0
    fx = three_point_fixture()
    assert fx.hausdorff == pytest.approx(1.0)
    assert fx.lip_X == pytest.approx(np.sqrt(3) / 2)
    assert fx.lip_extension == pytest.approx(1.0, abs=1e-6)
    assert fx.quotient_complex == pytest.approx(1.0, abs=1e-6)
    assert fx.quotient_real == pytest.approx(fx.lip_X_real, abs=1e-6)
    assert fx.quotient_imag == pytest.approx(fx.lip_X_imag, abs=1e-6)
    assert set(fx.to_json()) >= {"hausdorff", "lipX", "lipExtension"}
