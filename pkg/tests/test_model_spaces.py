import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinform.errors import GeometryError
from spinform.model_spaces import H3, R3, R4, S3, ambient_cov_deriv, metric, model_space, tangent_project


def test_minkowski_signature():
    assert metric(H3, [1, 0, 0, 0], [1, 0, 0, 0]) == -1


def test_sphere_orthogonality():
    assert metric(S3, [1, 0, 0, 0], [0, 1, 0, 0]) == 0


def test_euclidean_dot():
    assert metric(R3, [1, 2, 2], [1, 2, 2]) == 9


def test_dimension_mismatch():
    with pytest.raises(GeometryError):
        metric(R3, [1, 0, 0, 0], [1, 0, 0])


def test_killing_constants():
    assert R3.eta == 0 and R4.eta == 0
    assert S3.eta == 0.5 and H3.eta == 0.5j
    assert [model_space(k).curvature for k in ("R3", "S3", "H3")] == [0, 1, -1]
    with pytest.raises(GeometryError):
        model_space("S4")


def test_sphere_projection_removes_radial_part():
    np.testing.assert_allclose(tangent_project(S3, [1, 0, 0, 0], [1, 1, 0, 0]), [0, 1, 0, 0])


def test_hyperbolic_projection():
    np.testing.assert_allclose(tangent_project(H3, [1, 0, 0, 0], [1, 0, 1, 0]), [0, 0, 1, 0])


def test_flat_projection_is_identity():
    np.testing.assert_array_equal(tangent_project(R3, [0.3, 1, 2], [4, 5, 6]), [4, 5, 6])


def test_projection_rejects_points_off_the_space():
    with pytest.raises(GeometryError):
        tangent_project(S3, [1, 1, 0, 0], [0, 0, 1, 0])
    with pytest.raises(GeometryError):
        tangent_project(H3, [-1, 0, 0, 0], [0, 0, 1, 0])


def _sphere_point(a, b, c):
    return np.array([np.cos(a), np.sin(a) * np.cos(b), np.sin(a) * np.sin(b) * np.cos(c), np.sin(a) * np.sin(b) * np.sin(c)])


def _hyperboloid_point(a, b, c):
    x = np.array([np.sinh(a), np.cosh(a) * np.sinh(b), np.cosh(a) * np.cosh(b) * np.sinh(c)])
    return np.concatenate([[np.sqrt(1 + x @ x)], x])


angles = st.floats(min_value=0.1, max_value=3.0)
small = st.floats(min_value=-10, max_value=10)


@given(angles, angles, angles, st.lists(small, min_size=4, max_size=4))
def test_projection_idempotent_on_sphere(a, b, c, w):
    p = _sphere_point(a, b, c)
    once = tangent_project(S3, p, w)
    np.testing.assert_allclose(tangent_project(S3, p, once), once, atol=1e-13)
    assert abs(metric(S3, once, p)) < 1e-12


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.lists(small, min_size=4, max_size=4))
def test_projection_idempotent_on_hyperboloid(a, b, c, w):
    p = _hyperboloid_point(a, b, c)
    once = tangent_project(H3, p, w)
    np.testing.assert_allclose(tangent_project(H3, p, once), once, atol=1e-12)
    assert abs(metric(H3, once, p)) < 1e-11


DT = 1e-3
T = np.arange(-4, 5) * DT


def test_constant_field_is_parallel_in_flat_space():
    points = np.stack([T, 2 * T, np.zeros_like(T)], -1)
    vectors = np.tile([1.0, -2.0, 0.5], (len(T), 1))
    np.testing.assert_allclose(ambient_cov_deriv(R3, points, vectors, DT), 0, atol=1e-12)


def test_great_circle_is_a_geodesic():
    gamma = np.stack([np.cos(T), np.sin(T), 0 * T, 0 * T], -1)
    velocity = np.stack([-np.sin(T), np.cos(T), 0 * T, 0 * T], -1)
    accel = ambient_cov_deriv(S3, gamma, velocity, DT)
    assert np.abs(accel).max() < 1e-10


def test_result_is_tangent(rng):
    gamma = S3.renormalize(np.stack([np.cos(T), np.sin(T) * 0.6, np.sin(T) * 0.8, 0.2 + 0 * T], -1))
    field = rng.normal(size=(1, 4)) + np.outer(T, rng.normal(size=4))
    out = ambient_cov_deriv(S3, gamma, field, DT)
    assert np.abs(S3.metric(out, gamma[2:-2])).max() < 1e-10


def test_degenerate_sampling_rejected():
    with pytest.raises(GeometryError):
        ambient_cov_deriv(R3, np.zeros((5, 3)), np.zeros((5, 3)), 0.0)
    with pytest.raises(GeometryError):
        ambient_cov_deriv(R3, np.zeros((3, 3)), np.zeros((3, 3)), DT)


def _sectional_curvature(space, p, x, y, h=1e-2):
    """R(x, y, y, x) from second covariant derivatives of a parallel-ish frame.

    Takes the coordinate surface f(s, t) = exp_p(s x + t y) through geodesics
    and evaluates <D_s D_t d_t f - D_t D_s d_t f, d_s f> at the origin; this
    equals <R(d_s, d_t) d_t, d_s> = K for orthonormal x, y.
    """
    k = space.curvature

    def point(s, t):
        v = s * x + t * y
        r = np.sqrt(abs(metric(space, v, v)))
        if k > 0:
            return np.cos(r) * p + (np.sin(r) / r if r else 1.0) * v
        return np.cosh(r) * p + (np.sinh(r) / r if r else 1.0) * v

    def field_t(s, t, dt=1e-3):
        offs = np.arange(-2, 3) * dt
        pts = np.array([point(s, t + o) for o in offs])
        return (pts[0] - 8 * pts[1] + 8 * pts[3] - pts[4]) / (12 * dt)

    def cov_t_of_dt(s):
        offs = np.arange(-4, 5) * h
        pts = np.array([point(s, o) for o in offs])
        vecs = np.array([field_t(s, o) for o in offs])
        return ambient_cov_deriv(space, pts, vecs, h)[2]

    offs = np.arange(-4, 5) * h
    # D_s (D_t d_t f) along s at t = 0; geodesic t-lines make D_t d_t f = 0 there
    pts = np.array([point(o, 0.0) for o in offs])
    inner = np.array([cov_t_of_dt(o) for o in offs])
    ds_dt_dt = ambient_cov_deriv(space, pts, inner, h)[2]
    # D_t D_s d_t f: d_s f along t-line, differentiate in t twice covariantly
    def field_s(s, t, ds=1e-3):
        return (point(s - 2 * ds, t) - 8 * point(s - ds, t) + 8 * point(s + ds, t) - point(s + 2 * ds, t)) / (12 * ds)

    def cov_s_of_dt(t):
        # D_s d_t f = D_t d_s f (torsion free)
        offs_t = np.arange(-4, 5) * h
        pts_t = np.array([point(0.0, t + o) for o in offs_t])
        vecs_t = np.array([field_s(0.0, t + o) for o in offs_t])
        return ambient_cov_deriv(space, pts_t, vecs_t, h)[2]

    pts_t = np.array([point(0.0, o) for o in offs])
    dt_ds_dt = ambient_cov_deriv(space, pts_t, np.array([cov_s_of_dt(o) for o in offs]), h)[2]
    return metric(space, ds_dt_dt - dt_ds_dt, x)


def test_sphere_has_sectional_curvature_one():
    p = np.array([1.0, 0, 0, 0])
    x, y = np.array([0, 1.0, 0, 0]), np.array([0, 0, 0.6, 0.8])
    assert _sectional_curvature(S3, p, x, y) == pytest.approx(1.0, abs=1e-6)


def test_hyperbolic_space_has_sectional_curvature_minus_one():
    p = _hyperboloid_point(0.3, -0.2, 0.1)
    x = tangent_project(H3, p, [0, 1.0, 0, 0])
    x = x / np.sqrt(metric(H3, x, x))
    y = tangent_project(H3, p, [0, 0, 0, 1.0])
    y = y - metric(H3, y, x) * x
    y = y / np.sqrt(metric(H3, y, y))
    assert _sectional_curvature(H3, p, x, y) == pytest.approx(-1.0, abs=1e-6)
