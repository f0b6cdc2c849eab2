# SPDX-FileCopyrightText: 2024-present lachiewalker <lachiewalker1@hotmail.com>
#
# SPDX-License-Identifier: MIT
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quakebend.errors import GeometryError, PreconditionError
from quakebend.minkowski import (
    IsometryType,
    axial_rotation,
    check_isometry,
    classify,
    coordinate_rotation,
    embed,
    exp_lie,
    exp_point,
    fixed_points,
    form_residual,
    group_distance,
    hyperbolic_translation,
    inner,
    isometry_inverse,
    lie_generator,
    lie_residual,
    log_group,
    loxodromic_factorization,
    minkowski_form,
    origin,
    point_distance,
    random_isometry,
    reorthogonalize,
    rotation_generator,
    standard_boost,
    standard_generator,
    translation_length,
)


def boundary_point(rng, n):
    v = rng.normal(size=n)
    return np.append(v / np.linalg.norm(v), 1.0)


def endpoint_pair(rng, n):
    x = boundary_point(rng, n)
    y = boundary_point(rng, n)
    while np.linalg.norm(x - y) < 0.3:
        y = boundary_point(rng, n)
    return x, y


@pytest.mark.parametrize("n", [2, 3, 4])
def test_translation_at_zero_is_identity(n, rng):
    x, y = endpoint_pair(rng, n)
    assert np.allclose(hyperbolic_translation(x, y, 0.0), np.eye(n + 1), atol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_translation_fixes_its_endpoints(n, rng):
    x, y = endpoint_pair(rng, n)
    H = hyperbolic_translation(x, y, 0.8)
    assert form_residual(H) < 1e-12
    repelling, attracting = fixed_points(H)
    assert np.allclose(repelling, x, atol=1e-9)
    assert np.allclose(attracting, y, atol=1e-9)
    assert translation_length(H) == pytest.approx(0.8, abs=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_translation_fixes_the_complement(n, rng):
    x, y = endpoint_pair(rng, n)
    H = hyperbolic_translation(x, y, 1.3)
    w = rng.normal(size=n + 1)
    w = w - inner(w, y) / inner(x, y) * x - inner(w, x) / inner(x, y) * y
    assert np.allclose(H @ w, w, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0), st.integers(0, 2**16))
def test_translation_is_a_flow(s, t, seed):
    x, y = endpoint_pair(np.random.default_rng(seed), 3)
    product = hyperbolic_translation(x, y, s) @ hyperbolic_translation(x, y, t)
    assert np.allclose(product, hyperbolic_translation(x, y, s + t), rtol=1e-9, atol=1e-9)


def test_swapping_endpoints_inverts(rng):
    x, y = endpoint_pair(rng, 3)
    assert np.allclose(hyperbolic_translation(y, x, 0.5), hyperbolic_translation(x, y, -0.5), atol=1e-12)


def test_coincident_endpoints_rejected(rng):
    x = boundary_point(rng, 2)
    with pytest.raises(GeometryError):
        hyperbolic_translation(x, x, 1.0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_lie_generator(n, rng):
    x, y = endpoint_pair(rng, n)
    V = lie_generator(x, y)
    assert lie_residual(V) < 1e-12
    assert np.allclose(exp_lie(0.7 * V), hyperbolic_translation(x, y, 0.7), atol=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_standard_generator_exponentiates_to_boost(n):
    assert np.allclose(exp_lie(0.9 * standard_generator(n)), standard_boost(n, 0.9), atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_log_inverts_exp(n, rng):
    X = np.real(log_group(random_isometry(n, 0.4, rng)))
    assert lie_residual(X) < 1e-9
    assert np.allclose(log_group(exp_lie(X)), X, atol=1e-9)


def test_classify():
    assert classify(standard_boost(3, 0.5)) == IsometryType.LOXODROMIC
    assert classify(coordinate_rotation(3, 0.5)) == IsometryType.ELLIPTIC
    assert classify(standard_boost(2, 0.5) @ coordinate_rotation(2, 0.0)) == IsometryType.LOXODROMIC


def test_fixed_points_need_a_loxodromic():
    with pytest.raises(GeometryError):
        fixed_points(coordinate_rotation(2, 0.3))


def test_group_distance(rng):
    x, y = endpoint_pair(rng, 2)
    M = random_isometry(2, 0.5, rng)
    assert group_distance(M, M).value == pytest.approx(0.0, abs=1e-10)
    d = group_distance(np.eye(3), hyperbolic_translation(x, y, 0.4))
    assert not d.fallback
    assert d.value == pytest.approx(0.4 * np.linalg.norm(lie_generator(x, y)), rel=1e-8)


def test_group_distance_of_equal_matrices(rng):
    M = random_isometry(3, 0.8, rng)
    d = group_distance(M, M.copy())
    assert d.value == 0.0
    assert not d.fallback


def test_group_distance_dimension_mismatch():
    with pytest.raises(PreconditionError):
        group_distance(np.eye(3), np.eye(4))


def test_inverse_and_reorthogonalize(rng):
    M = random_isometry(4, 0.5, rng)
    assert np.allclose(isometry_inverse(M) @ M, np.eye(5), atol=1e-12)
    noisy = M + 1e-7 * rng.normal(size=M.shape)
    assert form_residual(noisy) > 1e-9
    fixed = reorthogonalize(noisy)
    assert form_residual(fixed) < 1e-12
    assert np.abs(fixed - M).max() < 1e-5


def test_check_isometry_rejects():
    with pytest.raises(GeometryError):
        check_isometry(2.0 * np.eye(3))
    with pytest.raises(GeometryError):
        check_isometry(-np.eye(3))


def test_points():
    p = exp_point(3, np.array([0.5, 0.0, 0.0]))
    assert inner(p, p) == pytest.approx(-1.0)
    assert point_distance(origin(3), p) == pytest.approx(0.5)
    assert np.allclose(standard_boost(3, 0.5) @ origin(3), p)


def test_loxodromic_factorization(rng):
    x, y = endpoint_pair(rng, 3)
    M = hyperbolic_translation(x, y, 1.1) @ axial_rotation(x, y, 0.4)
    sigma, theta = loxodromic_factorization(M)
    assert np.allclose(sigma @ theta, M, atol=1e-10)
    assert np.allclose(sigma, hyperbolic_translation(x, y, 1.1), atol=1e-8)
    assert np.allclose(theta @ x, x, atol=1e-8)
    assert np.allclose(theta @ y, y, atol=1e-8)


def test_rotation_generator_dimension_three(rng):
    x, y = endpoint_pair(rng, 3)
    J = rotation_generator(x, y)
    assert lie_residual(J) < 1e-12
    assert np.allclose(J @ x, 0.0, atol=1e-12)
    assert np.allclose(J @ y, 0.0, atol=1e-12)
    assert np.allclose(rotation_generator(y, x), -J, atol=1e-10)
    H = hyperbolic_translation(x, y, 0.6)
    assert np.allclose(H @ J, J @ H, atol=1e-10)
    R = axial_rotation(x, y, 2 * np.pi)
    assert np.allclose(R, np.eye(4), atol=1e-10)


def test_rotation_generator_dimension_four_needs_selector(rng):
    x, y = endpoint_pair(rng, 4)
    with pytest.raises(PreconditionError):
        rotation_generator(x, y)
    J = rotation_generator(x, y, selector=np.eye(5)[3])
    assert lie_residual(J) < 1e-12
    assert np.linalg.matrix_rank(J, tol=1e-9) == 2


def test_plane_has_no_axial_rotation(rng):
    x, y = endpoint_pair(rng, 2)
    with pytest.raises(PreconditionError):
        rotation_generator(x, y)


def test_embed_preserves_the_form(rng):
    M = random_isometry(2, 0.5, rng)
    for n in (3, 4):
        E = embed(M, n)
        assert form_residual(E) < 1e-12
        assert np.allclose(E @ minkowski_form(n) @ E.T, minkowski_form(n), atol=1e-12)


@pytest.mark.parametrize("distance", [0.5, 4.0, 8.0])
def test_reorthogonalize_never_raises_the_form_residual(rng, distance):
    M = random_isometry(2, 0.3, rng) @ standard_boost(2, distance)
    for noisy in (M, M + 1e-10 * np.linalg.norm(M) * rng.normal(size=M.shape)):
        assert form_residual(reorthogonalize(noisy)) <= form_residual(noisy)
