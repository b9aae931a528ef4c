import numpy as np
import pytest
from hypothesis import given, strategies as st

from fuzzysphere.functions import (
    FunctionElement,
    Jet,
    cos_theta,
    flat_index,
    gradient_modulus,
    harmonic_matrix,
    maximize_on_sphere,
    n_coeffs,
    real_basis,
)
from fuzzysphere.groupmodel import su2_frame

seeds = st.integers(0, 2**32 - 1)


def test_flat_index_layout():
    assert flat_index(0, 0) == 0
    assert [flat_index(1, m) for m in (-1, 0, 1)] == [1, 2, 3]
    assert n_coeffs(3) == 16


def test_harmonics_normalization():
    assert np.allclose(harmonic_matrix(0, [0.3], [1.0]), 1.0)
    frame = su2_frame(3)
    Y = harmonic_matrix(4, frame.theta, frame.phi)
    gram = (Y.conj() * frame.weights[:, None]).T @ Y
    assert np.allclose(gram, np.eye(n_coeffs(4)), atol=1e-12)


def test_cos_theta():
    f = cos_theta()
    for t in (0.0, 0.7, np.pi):
        assert f(t, 0.4)[0] == pytest.approx(np.cos(t))


@given(seeds, st.integers(0, 4))
def test_real_basis_gives_real_functions(seed, l_max):
    r = np.random.default_rng(seed)
    params = r.standard_normal(n_coeffs(l_max))
    f = FunctionElement.from_real_params(l_max, params)
    assert f.is_real()
    assert f.l2_norm() == pytest.approx(np.linalg.norm(params))
    B = real_basis(l_max)
    assert np.allclose(B.conj().T @ B, np.eye(n_coeffs(l_max)), atol=1e-12)


@given(seeds)
def test_algebra_pointwise(seed):
    r = np.random.default_rng(seed)
    f = FunctionElement.random(r, 2, real=False)
    g = FunctionElement.random(r, 3, real=False)
    t, p = r.uniform(0, np.pi, 5), r.uniform(0, 2 * np.pi, 5)
    assert np.allclose((f * g)(t, p), f(t, p) * g(t, p), atol=1e-10)
    assert np.allclose((f + g)(t, p), f(t, p) + g(t, p), atol=1e-12)
    assert np.allclose(f.conj()(t, p), np.conj(f(t, p)), atol=1e-12)
    assert (f * g).l_max == 5


def test_sup_norm_of_harmonic():
    # Y_10 = sqrt(3) cos(theta)
    f = FunctionElement.harmonic(1, 0, 2)
    assert f.sup_norm() == pytest.approx(np.sqrt(3), abs=1e-9)


def test_json_roundtrip(rng):
    f = FunctionElement.random(rng, 3, real=False)
    g = FunctionElement.from_json(f.to_json())
    assert np.allclose(f.coeffs, g.coeffs)


def test_from_samples_reproduces(rng):
    f = FunctionElement.random(rng, 3, real=False)
    frame = su2_frame(3)
    g = FunctionElement.from_samples(f.on_frame(frame), frame, 3)
    assert np.allclose(f.coeffs, g.coeffs, atol=1e-12)


def test_gradient_modulus_cases():
    # real vector: its length; v = (1, i, 0): sup |X_1 + i X_2| = 1
    assert gradient_modulus(np.array([[3.0], [4.0], [0.0]]))[0] == pytest.approx(5.0)
    assert gradient_modulus(np.array([[1.0], [1j], [0.0]]))[0] == pytest.approx(1.0)


@given(seeds)
def test_angular_derivative_matches_finite_difference(seed):
    # (L_z f)(x) = -i d/dphi f
    r = np.random.default_rng(seed)
    f = FunctionElement.random(r, 3, real=False)
    t, p, h = r.uniform(0.2, 3.0), r.uniform(0, 6), 1e-6
    d = (f(t, p + h) - f(t, p - h))[0] / (2 * h)
    assert f.angular_at(t, p)[2, 0] == pytest.approx(-1j * d, abs=1e-6)


def test_maximize_on_sphere_finds_peak():
    def func(t, p):
        return -((np.cos(t) - np.cos(1.1)) ** 2) - (np.cos(p - 2.0) - 1) ** 2

    val, (t, p) = maximize_on_sphere(func, 4)
    assert val == pytest.approx(0.0, abs=1e-10)
    assert t == pytest.approx(1.1, abs=1e-4) and p == pytest.approx(2.0, abs=1e-4)


def test_jet_product_and_inverse(rng):
    f = FunctionElement.random(rng, 2) + 5.0
    g = FunctionElement.random(rng, 2)
    t, p = rng.uniform(0, np.pi, 4), rng.uniform(0, 2 * np.pi, 4)
    jf, jg = Jet.of(f, t, p), Jet.of(g, t, p)
    prod = jf * jg
    assert np.allclose(prod.derivs, Jet.of(f * g, t, p).derivs, atol=1e-9)
    one = jf * jf.inverse()
    assert np.allclose(one.values, 1) and np.allclose(one.derivs, 0, atol=1e-12)
    assert np.allclose(jf.conj().derivs, Jet.of(f.conj(), t, p).derivs, atol=1e-10)
