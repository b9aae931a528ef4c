import numpy as np
import pytest
from hypothesis import given, strategies as st

from fuzzysphere.errors import DomainMismatch, NonMonotoneNorm, NotADerivation, NotAMetric
from fuzzysphere.functions import FunctionElement, cos_theta
from fuzzysphere.groupmodel import geodesic_distance, sphere_points
from fuzzysphere.repn import spin_irrep
from fuzzysphere.seminorms import (
    FINITE,
    STAR,
    amplify,
    check_leibniz,
    combine_max,
    combine_monotone,
    derivation_seminorm,
    finite_algebra,
    finite_metric_lipnorm,
    function_lipnorm,
    group_sup_matrix,
    hemisphere_directions,
    inner_derivation_seminorm,
    matrix_algebra,
    matrix_lipnorm,
    max_direction_norm,
    quotient_minimize,
    schatten_norm,
    smooth_matrix_lipnorm,
    star_closure,
    two_point_seminorm,
)

seeds = st.integers(0, 2**32 - 1)


def cplx(r, *shape):
    return r.standard_normal(shape) + 1j * r.standard_normal(shape)


def spin_half_oracle(T):
    # T = t.sigma with t = a + ib: sup ||[X.sigma/2, t.sigma]|| = sqrt(|a|^2 + |b|^2 + 2|a x b|)
    t = np.array([T[0, 1] + T[1, 0], 1j * (T[0, 1] - T[1, 0]), T[0, 0] - T[1, 1]]) / 2
    a, b = t.real, t.imag
    return np.sqrt(a @ a + b @ b + 2 * np.linalg.norm(np.cross(a, b)))


@given(seeds)
def test_matrix_lipnorm_spin_half_oracle(seed):
    T = cplx(np.random.default_rng(seed), 2, 2)
    T -= np.trace(T) / 2 * np.eye(2)
    assert matrix_lipnorm(spin_irrep(1))(T) == pytest.approx(spin_half_oracle(T), rel=1e-9)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_matrix_lipnorm_of_generator(n):
    ir = spin_irrep(n)
    L = matrix_lipnorm(ir)
    assert L(ir.Jz) == pytest.approx(n / 2, rel=1e-9)
    assert L(np.eye(n + 1)) == pytest.approx(0.0, abs=1e-14)


@given(seeds, st.floats(-3, 3))
def test_matrix_lipnorm_invariances(seed, c):
    r = np.random.default_rng(seed)
    ir = spin_irrep(3)
    L = matrix_lipnorm(ir)
    T = cplx(r, 4, 4)
    base = L(T)
    assert L(T + c * np.eye(4)) == pytest.approx(base, rel=1e-9)
    assert L(c * T) == pytest.approx(abs(c) * base, rel=1e-9, abs=1e-12)
    assert L(T.conj().T) == pytest.approx(base, rel=1e-9)
    U = ir.rotation(r.standard_normal(3), r.uniform(0, 6))
    assert L(U @ T @ U.conj().T) == pytest.approx(base, rel=1e-7)


@given(seeds)
def test_matrix_lipnorm_subgradient_inequality(seed):
    r = np.random.default_rng(seed)
    L = matrix_lipnorm(spin_irrep(2))
    T, S = cplx(r, 3, 3), cplx(r, 3, 3)
    v, G = L.value_and_grad(T)
    # convexity: L(S) >= L(T) + Re <G, S - T>
    assert L(S) >= v + np.real(np.vdot(G, S - T)) - 1e-8 * (1 + abs(v))


def test_group_sup_below_infinitesimal(rng):
    ir = spin_irrep(2)
    T = cplx(rng, 3, 3)
    assert group_sup_matrix(ir, T, rng, samples=200) <= matrix_lipnorm(ir)(T) * (1 + 1e-9)


def test_max_direction_norm_batched(rng):
    C = cplx(rng, 4, 3, 2, 2)
    vals = max_direction_norm(C)[0]
    single = [max_direction_norm(c)[0] for c in C]
    assert np.allclose(vals, single)


def test_schatten_norm_and_gradient(rng):
    M = cplx(rng, 4, 4)
    s = np.linalg.svd(M, compute_uv=False)
    v, G = schatten_norm(M, 3.0)
    assert v == pytest.approx(np.sum(s**3) ** (1 / 3))
    assert schatten_norm(M, 2.0)[0] == pytest.approx(np.linalg.norm(M))
    H = cplx(rng, 4, 4)
    h = 1e-6
    fd = (schatten_norm(M + h * H, 3.0)[0] - schatten_norm(M - h * H, 3.0)[0]) / (2 * h)
    assert np.real(np.vdot(G, H)) == pytest.approx(fd, rel=1e-5)


def test_smooth_lipnorm_gradient_and_limit(rng):
    ir = spin_irrep(2)
    vg = smooth_matrix_lipnorm(ir, 8.0, 30)
    T, H = cplx(rng, 3, 3), cplx(rng, 3, 3)
    v, G = vg(T)
    h = 1e-6
    fd = (vg(T + h * H)[0] - vg(T - h * H)[0]) / (2 * h)
    assert np.real(np.vdot(G, H)) == pytest.approx(fd, rel=1e-5)
    fine = smooth_matrix_lipnorm(ir, 256.0, 400)(T)[0]
    assert fine == pytest.approx(matrix_lipnorm(ir)(T), rel=0.03)
    assert vg(np.eye(3))[0] == 0.0


def test_hemisphere_directions():
    d = hemisphere_directions(50)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
    assert np.all(d[:, 2] >= 0)


def test_function_lipnorm_examples():
    L = function_lipnorm(3)
    assert L(cos_theta()) == pytest.approx(1.0, abs=1e-9)
    # x + iy = -sqrt(2) Y_11 (Condon-Shortley); Lipschitz constant 1
    f = FunctionElement.harmonic(1, 1, 1, scale=-np.sqrt(2 / 3))
    assert abs(f(np.pi / 2, 0.0)[0]) == pytest.approx(1.0)
    assert L(f) == pytest.approx(1.0, abs=1e-8)
    assert L(FunctionElement.constant(2.0, 2)) == pytest.approx(0.0, abs=1e-12)


@given(seeds)
def test_function_lipnorm_bounds_difference_quotients(seed):
    r = np.random.default_rng(seed)
    f = FunctionElement.random(r, 3, real=False)
    L = function_lipnorm(3)(f)
    t, p = r.uniform(0, np.pi, (2, 30)), r.uniform(0, 2 * np.pi, (2, 30))
    d = geodesic_distance(sphere_points(t[0], p[0]), sphere_points(t[1], p[1]))
    q = np.abs(f(t[0], p[0]) - f(t[1], p[1])) / d
    assert np.all(q <= L * (1 + 1e-7))


def test_function_lipnorm_subgradient(rng):
    L = function_lipnorm(3)
    f, g = FunctionElement.random(rng, 3, real=False), FunctionElement.random(rng, 3, real=False)
    v, G = L.value_and_grad(f)
    assert L(g) >= v + np.real(np.vdot(G, g.coeffs - f.coeffs)) - 1e-7


def test_finite_metric_lipnorm():
    D = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    L = finite_metric_lipnorm(range(3), D)
    assert L(np.array([0.0, 1.0, 2.0])) == pytest.approx(1.0)
    assert L(np.array([0.0, 3.0, 0.0])) == pytest.approx(3.0)
    v, g = L.value_and_grad(np.array([0.0, 3.0, 0.0]))
    assert v == pytest.approx(3.0) and np.sum(np.abs(g)) == pytest.approx(2.0)


@pytest.mark.parametrize(
    "D",
    [
        [[0, 1, 5], [1, 0, 1], [5, 1, 0]],
        [[0, 1], [2, 0]],
        [[0, 0], [0, 0]],
        [[1, 1], [1, 0]],
    ],
)
def test_finite_metric_rejects(D):
    D = np.array(D, dtype=float)
    with pytest.raises(NotAMetric):
        finite_metric_lipnorm(range(len(D)), D)


def test_combinators(rng):
    ir = spin_irrep(2)
    L = matrix_lipnorm(ir)
    M = combine_max([L, L.scaled(2.0)])
    T = cplx(rng, 3, 3)
    assert M(T) == pytest.approx(2 * L(T))
    assert FINITE in M.flags
    with pytest.raises(DomainMismatch):
        combine_max([L, function_lipnorm(2)])
    with pytest.raises(NonMonotoneNorm):
        combine_monotone([L, L], lambda v: abs(v[0] - v[1]))
    ok = combine_monotone([L, L.scaled(0.5)], lambda v: np.sqrt(np.sum(v**2)))
    assert ok(T) == pytest.approx(np.sqrt(1.25) * L(T))
    s = star_closure(L)
    assert STAR in s.flags and s(T) == pytest.approx(L(T), rel=1e-9)
    with pytest.raises(ValueError):
        L.scaled(-1)


def test_derivation_checks():
    D = np.diag([1.0, -1.0])
    sampler = lambda r: (cplx(r, 2, 2), cplx(r, 2, 2))
    L = inner_derivation_seminorm(D, sampler=sampler)
    assert L(np.array([[0, 1], [0, 0]], dtype=complex)) == pytest.approx(2.0)
    with pytest.raises(NotADerivation):
        derivation_seminorm(lambda T: T, lambda m: np.linalg.norm(m, 2), sampler=sampler)
    tp = two_point_seminorm(0, 2, 2.0)
    assert tp(np.array([1.0, 0.0, 4.0])) == pytest.approx(1.5)


def test_leibniz_matrix_lipnorm(rng):
    ir = spin_irrep(3)
    rep = check_leibniz(matrix_lipnorm(ir), lambda r: (cplx(r, 4, 4), cplx(r, 4, 4)), 50, matrix_algebra(4), rng)
    assert rep.ok and rep.inverse_applicable and rep.worst_product_slack <= 1e-9
    assert '"trials": 50' in rep.dumps()


def test_leibniz_detects_non_leibniz():
    # the sup norm itself is not a Leibniz seminorm on the product 1 * 1
    from fuzzysphere.seminorms import SeminormHandle

    bad = SeminormHandle("square", lambda a: float(np.max(np.abs(a))) ** 2, "finite:2")
    rep = check_leibniz(bad, lambda r: (np.full(2, 3.0), np.full(2, 3.0)), 3, finite_algebra(2))
    assert not rep.ok


def test_quotient_minimize_constant_fiber():
    L = lambda v: float(np.max(np.abs(v)))
    res = quotient_minimize(L, lambda a: (a, [np.ones_like(a)]), np.array([0.0, 1.0, 4.0]))
    assert res.value == pytest.approx(2.0, abs=1e-6) and res.converged
    assert res.minimizer[0] == pytest.approx(-2.0, abs=1e-4)


def test_amplify_q1_matches_base(rng):
    ir = spin_irrep(2)
    T = cplx(rng, 3, 3)
    assert amplify(ir, 1)(T) == pytest.approx(matrix_lipnorm(ir)(T), rel=1e-9)
    # block-diagonal copies do not raise the value
    assert amplify(ir, 2)(np.kron(np.eye(2), T)) == pytest.approx(matrix_lipnorm(ir)(T), rel=1e-9)
    F = np.array([[cos_theta(), FunctionElement.zero(1)], [FunctionElement.zero(1), cos_theta()]], dtype=object)
    assert amplify(1, 2)(F) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(ValueError):
        amplify(ir, 4)
