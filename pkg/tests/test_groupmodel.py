import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from fuzzysphere.errors import BadLength, NonGroup
from fuzzysphere.groupmodel import (
    PAULI,
    check_su2_length_axioms,
    cyclic_group_spec,
    encode_complex_matrix,
    finite_group_load,
    geodesic_distance,
    haar_radius,
    radial_integral,
    radial_integral_checked,
    sphere_angles,
    sphere_points,
    su2_axis_angle,
    su2_element,
    su2_frame,
    su2_length_of,
    su2_random,
    su2_rotation_matrix,
    trivial_group_spec,
)

unit_vectors = arrays(float, 3, elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 0.1)


@given(unit_vectors, st.floats(0, 2 * np.pi))
def test_length_recovers_angle(axis, beta):
    assert su2_length_of(su2_element(axis, beta)) == pytest.approx(beta, abs=1e-9)


@given(unit_vectors, st.floats(0.01, 2 * np.pi - 0.01))
def test_axis_angle_roundtrip(axis, beta):
    u = su2_element(axis, beta)
    a, b = su2_axis_angle(u)
    assert np.allclose(su2_element(a, b), u, atol=1e-9)


def test_length_axioms_sampled(rng):
    report = check_su2_length_axioms(rng, n_samples=300)
    assert report["ok"] and report["positive"] > 0


@given(st.integers(0, 2**32 - 1))
def test_length_subadditive_and_conjugation_invariant(seed):
    r = np.random.default_rng(seed)
    x, y, z = su2_random(r, 3)
    assert su2_length_of(x @ y) <= su2_length_of(x) + su2_length_of(y) + 1e-9
    assert su2_length_of(z @ x @ z.conj().T) == pytest.approx(su2_length_of(x), abs=1e-9)
    assert su2_length_of(x.conj().T) == pytest.approx(su2_length_of(x), abs=1e-9)


def test_haar_radius_is_pi():
    # (1/pi) int_0^{2pi} beta sin^2(beta/2) dbeta = pi
    assert haar_radius() == pytest.approx(np.pi, abs=1e-12)


def test_haar_sampling_agrees_with_radius(rng):
    lengths = [su2_length_of(u) for u in su2_random(rng, 20000)]
    assert np.mean(lengths) == pytest.approx(np.pi, abs=0.05)


@pytest.mark.parametrize("band", [1, 2, 3, 5])
def test_frame_exact_on_even_moments(band):
    frame = su2_frame(band)
    assert frame.weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert frame.exactness_degree >= 4 * band
    z = np.cos(frame.theta)
    for k in range(0, 2 * band + 1):
        assert frame.integrate(z ** (2 * k)) == pytest.approx(1 / (2 * k + 1), abs=1e-13)


def test_frame_exact_on_mixed_monomial():
    frame = su2_frame(2)
    x, y, z = frame.points.T
    # int x^2 y^2 z^2 over the normalized sphere = 1/105
    assert frame.integrate(x**2 * y**2 * z**2) == pytest.approx(1 / 105, abs=1e-14)
    assert frame.integrate(x**3 * z) == pytest.approx(0.0, abs=1e-14)


def test_radial_integral_against_closed_forms():
    assert radial_integral(lambda t: np.ones_like(t)) == pytest.approx(1.0, abs=1e-14)
    # (1/2) int theta sin theta = pi/2
    val, err, ok = radial_integral_checked(lambda t: t)
    assert ok and val == pytest.approx(np.pi / 2, abs=1e-12)


@given(st.floats(0, np.pi), st.floats(0, 2 * np.pi - 1e-9))
def test_sphere_angles_roundtrip(theta, phi):
    p = sphere_points(theta, phi)
    assert np.linalg.norm(p) == pytest.approx(1.0)
    t2, f2 = sphere_angles(p)
    assert np.allclose(sphere_points(t2, f2), p, atol=1e-12)


def test_geodesic_distance_examples():
    e = np.eye(3)
    assert geodesic_distance(e[0], e[1]) == pytest.approx(np.pi / 2)
    assert geodesic_distance(e[2], -e[2]) == pytest.approx(np.pi)
    assert geodesic_distance(e[0], e[0]) == pytest.approx(0.0)


@given(st.integers(0, 2**32 - 1))
def test_rotation_matrix_is_homomorphism(seed):
    u, v = su2_random(np.random.default_rng(seed), 2)
    R = su2_rotation_matrix(u)
    assert np.allclose(R @ R.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(R) == pytest.approx(1.0)
    assert np.allclose(su2_rotation_matrix(u @ v), R @ su2_rotation_matrix(v), atol=1e-12)


def test_rotation_matrix_rotates_about_axis():
    R = su2_rotation_matrix(su2_element([0, 0, 1], np.pi / 2))
    assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-12)


def test_pauli_algebra():
    sx, sy, sz = PAULI
    assert np.allclose(sx @ sy, 1j * sz)


def test_cyclic_group_loads():
    z4 = finite_group_load(cyclic_group_spec(4))
    assert len(z4) == 4
    assert z4.haar_radius() == pytest.approx(1.0)  # lengths 0, 1, 2, 1
    assert np.array_equal(z4.inverse, [0, 3, 2, 1])


def test_trivial_group():
    g = finite_group_load(trivial_group_spec())
    assert len(g) == 1 and g.haar_radius() == 0.0


def test_json_string_spec():
    import json

    g = finite_group_load(json.dumps(cyclic_group_spec(3)))
    assert len(g) == 3


def test_non_group_rejected():
    spec = cyclic_group_spec(4)
    spec["elements"] = spec["elements"][:3]
    spec["lengths"] = spec["lengths"][:3]
    with pytest.raises(NonGroup):
        finite_group_load(spec)


def test_non_unitary_rejected():
    spec = {"elements": [encode_complex_matrix(np.eye(2)), encode_complex_matrix(2 * np.eye(2))], "lengths": [0, 1]}
    with pytest.raises(NonGroup):
        finite_group_load(spec)


@pytest.mark.parametrize(
    "lengths",
    [[0, 1, 5, 1], [0, 1, 2, 2], [0, 0, 2, 0], [1, 1, 2, 1], [0, -1, 0, -1]],
)
def test_bad_lengths_rejected(lengths):
    with pytest.raises(BadLength) as info:
        finite_group_load(cyclic_group_spec(4, lengths))
    assert info.value.witness is not None
