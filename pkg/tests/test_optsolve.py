import numpy as np
import pytest
from hypothesis import given, strategies as st

from fuzzysphere.errors import DimensionTooLarge
from fuzzysphere.optsolve import RatioProblem, Stage, brute_force_ratio, linear_problem, ratio_maximize, sphere_grid


def norm_vg(p):
    n = np.linalg.norm(p)
    return n, p / n if n > 0 else np.zeros_like(p)


def linear_map_problem(A, **kw):
    def obj(p):
        y = A @ p
        n = np.linalg.norm(y)
        return n, (A.T @ y) / n if n > 0 else np.zeros_like(p)

    def batch(P):
        return np.linalg.norm(P @ A.T, axis=1) / np.linalg.norm(P, axis=1)

    return RatioProblem(obj, norm_vg, A.shape[1], batch_ratio=batch, **kw)


def pmax_problem(dim, **kw):
    # local maxima: value 1 along e_1 and 0.5 along every other axis
    w = np.r_[1.0, np.full(dim - 1, 0.5)]

    def obj(p):
        a = np.abs(w * p)
        k = int(np.argmax(a))
        g = np.zeros_like(p)
        g[k] = w[k] * np.sign(p[k])
        return a[k], g

    return RatioProblem(obj, norm_vg, dim, **kw)


@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_top_singular_value(seed, dim):
    A = np.random.default_rng(seed).standard_normal((4, dim))
    est = ratio_maximize(linear_map_problem(A, restarts=3))
    assert est.value == pytest.approx(np.linalg.norm(A, 2), rel=1e-6)
    assert not est.unstable


@given(st.integers(0, 1000), st.floats(0.1, 10.0))
def test_scale_invariance(seed, c):
    A = np.random.default_rng(seed).standard_normal((3, 3))
    a = ratio_maximize(linear_map_problem(A, restarts=2, seed=seed)).value
    b = ratio_maximize(linear_map_problem(c * A, restarts=2, seed=seed)).value
    assert b == pytest.approx(c * a, rel=1e-6)


def test_more_restarts_never_lower():
    values = [ratio_maximize(pmax_problem(6, restarts=k, seed=3)).value for k in range(1, 12)]
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_determinism():
    a = ratio_maximize(pmax_problem(6, restarts=8, seed=7))
    b = ratio_maximize(pmax_problem(6, restarts=8, seed=7))
    assert a.values == b.values and np.array_equal(a.witness, b.witness)


def test_unstable_flag_on_spread():
    est = ratio_maximize(pmax_problem(3, restarts=12, seed=0))
    assert est.value == pytest.approx(1.0)
    assert est.spread > 0.02 and est.unstable


def test_warm_start_used_first():
    est = ratio_maximize(pmax_problem(8, restarts=1, warm_starts=[np.eye(8)[0] + 0.01]))
    assert est.value == pytest.approx(1.0)


def test_all_restarts_failed():
    zero = lambda p: (0.0, np.zeros_like(p))
    est = ratio_maximize(RatioProblem(zero, norm_vg, 3, restarts=2))
    assert est.all_failed and est.value == 0.0


def test_stages_continuation():
    A = np.random.default_rng(1).standard_normal((5, 4))

    def inf_obj(p):
        y = A @ p
        k = int(np.argmax(np.abs(y)))
        return abs(y[k]), np.sign(y[k]) * A[k]

    def smooth(q):
        def vg(p):
            y = A @ p
            m = np.max(np.abs(y))
            v = m * np.sum((np.abs(y) / m) ** q) ** (1 / q)
            return v, A.T @ (np.sign(y) * (np.abs(y) / v) ** (q - 1))

        return vg

    stages = [Stage(smooth(q), norm_vg) for q in (4, 16, 64)]
    prob = RatioProblem(inf_obj, norm_vg, 4, restarts=3, stages=stages)
    assert ratio_maximize(prob).value == pytest.approx(np.max(np.linalg.norm(A, axis=1)), rel=1e-6)


def test_linear_problem_lift():
    basis = np.array([[1.0, 0.0], [0.0, 1j], [0.0, 0.0]])
    obj = lambda x: (abs(x[0]), np.array([np.sign(x[0].real), 0, 0], dtype=complex))
    con = lambda x: (np.linalg.norm(x), x / np.linalg.norm(x))
    prob = linear_problem(obj, con, basis, (3,), restarts=2)
    assert ratio_maximize(prob).value == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_sphere_grid_on_sphere(dim):
    pts = sphere_grid(dim, 25)
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)


@pytest.mark.parametrize("resolution", [25, 50])
def test_brute_force_matches_singular_value(resolution):
    A = np.random.default_rng(5).standard_normal((3, 3))
    prob = linear_map_problem(A)
    assert brute_force_ratio(prob, resolution) == pytest.approx(np.linalg.norm(A, 2), rel=1e-6)
    assert brute_force_ratio(prob, resolution, polish=False) <= np.linalg.norm(A, 2) + 1e-12


def test_brute_force_guards():
    with pytest.raises(DimensionTooLarge):
        brute_force_ratio(linear_map_problem(np.eye(9)))
    with pytest.raises(ValueError):
        brute_force_ratio(linear_map_problem(np.eye(2)), resolution=10)
