"""Linear algebra of SO+(n,1) in the hyperboloid model.

The form is eta = diag(1, ..., 1, -1) with the time coordinate last. Group elements and Lie
algebra elements are plain ``(n+1, n+1)`` float arrays; boundary points are null vectors
scaled so that the last coordinate is 1.
"""

import logging
from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np
import scipy.linalg

from quakebend.errors import GeometryError, LogBranchError, PreconditionError

logger = logging.getLogger(__name__)

TAU_FORM = 1e-9
TAU_SPEC = 1e-7
TAU_SEP = 1e-8


class IsometryType(str, Enum):
    LOXODROMIC = "loxodromic"
    ELLIPTIC = "elliptic"
    PARABOLIC_OR_BOUNDARY = "parabolic-or-boundary"


def minkowski_form(n: int) -> np.ndarray:
    form = np.eye(n + 1)
    form[n, n] = -1.0
    return form


def inner(u: np.ndarray, v: np.ndarray) -> float:
    return float(u[:-1] @ v[:-1] - u[-1] * v[-1])


def dimension_of(M: np.ndarray) -> int:
    return M.shape[-1] - 1


def isometry_inverse(M: np.ndarray) -> np.ndarray:
    """Inverse of a form-preserving matrix, computed as eta M^T eta."""
    eta = minkowski_form(dimension_of(M))
    return eta @ M.T @ eta


def form_residual(M: np.ndarray) -> float:
    eta = minkowski_form(dimension_of(M))
    return float(np.linalg.norm(M.T @ eta @ M - eta))


def lie_residual(X: np.ndarray) -> float:
    eta = minkowski_form(dimension_of(X))
    return float(np.linalg.norm(X.T @ eta + eta @ X))


def check_isometry(M: np.ndarray, tol: float = TAU_FORM) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] - 1 not in (2, 3, 4):
        raise GeometryError(f"Expected a square matrix of size 3, 4 or 5, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise GeometryError("Matrix has non-finite entries")
    residual = form_residual(M)
    if residual > tol * max(1.0, float(np.linalg.norm(M)) ** 2):
        raise GeometryError(f"Matrix does not preserve the Minkowski form (residual {residual:.3e})")
    if M[-1, -1] < 1.0 - tol or np.linalg.det(M) < 0:
        raise GeometryError("Matrix is not in the identity component SO+(n,1)")
    return M


def origin(n: int) -> np.ndarray:
    point = np.zeros(n + 1)
    point[n] = 1.0
    return point


def point_distance(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.arccosh(max(1.0, -inner(x, y))))


def normalize_point(x: np.ndarray) -> np.ndarray:
    """Rescale a future timelike vector onto the hyperboloid."""
    return x / np.sqrt(-inner(x, x))


def exp_point(n: int, tangent: np.ndarray) -> np.ndarray:
    """Exponential map at the origin; ``tangent`` has n spatial components."""
    tangent = np.asarray(tangent, dtype=float)
    r = float(np.linalg.norm(tangent))
    point = origin(n)
    if r == 0.0:
        return point
    point[:n] = np.sinh(r) * tangent / r
    point[n] = np.cosh(r)
    return point


def normalize_boundary(v: np.ndarray) -> np.ndarray:
    """Scale a null ray to last coordinate 1 with a unit spatial part."""
    v = np.real(np.asarray(v))
    if abs(v[-1]) < TAU_SEP:
        raise GeometryError(f"Vector {v} is not a future null ray")
    v = v / v[-1]
    spatial = v[:-1] / np.linalg.norm(v[:-1])
    return np.append(spatial, 1.0)


def angular_separation(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.arccos(np.clip(x[:-1] @ y[:-1], -1.0, 1.0)))


def _check_pair(x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x, y = normalize_boundary(x), normalize_boundary(y)
    if angular_separation(x, y) <= TAU_SEP:
        raise GeometryError("Coincident endpoints")
    return x, y


def reorthogonalize(M: np.ndarray, max_steps: int = 8) -> np.ndarray:
    """
    Projects M back onto the form-preserving matrices with the eta-polar iteration
    M <- M (3I - S) / 2, where S = eta M^T eta M.

    Each step squares the form residual. The iteration stops at the first step that does not
    reduce it, so the result is never further from SO+(n,1) than M itself.
    """
    n = dimension_of(M)
    eta = minkowski_form(n)
    identity = np.eye(n + 1)
    result = np.array(M, dtype=float)
    residual = form_residual(result)
    for _ in range(max_steps):
        if residual == 0.0:
            break
        S = eta @ result.T @ eta @ result
        candidate = result @ (3.0 * identity - S) / 2.0
        candidate_residual = form_residual(candidate)
        if candidate_residual >= residual:
            break
        result, residual = candidate, candidate_residual
    return result


def _fixes_interior_point(M: np.ndarray) -> bool:
    n = dimension_of(M)
    _, singular, vt = np.linalg.svd(M - np.eye(n + 1))
    fixed = vt[singular <= TAU_SPEC * (1.0 + np.linalg.norm(M))]
    if len(fixed) == 0:
        return False
    gram = fixed @ minkowski_form(n) @ fixed.T
    return bool(np.linalg.eigvalsh(gram).min() < -TAU_SPEC)


def classify(M: np.ndarray) -> IsometryType:
    moduli = np.abs(np.linalg.eigvals(M))
    if moduli.max() > 1.0 + TAU_SPEC:
        return IsometryType.LOXODROMIC
    if np.all(np.abs(moduli - 1.0) <= TAU_SPEC) and _fixes_interior_point(M):
        return IsometryType.ELLIPTIC
    return IsometryType.PARABOLIC_OR_BOUNDARY


def _dominant_eigenvector(M: np.ndarray):
    eigvals, eigvecs = np.linalg.eig(M)
    moduli = np.abs(eigvals)
    order = np.argsort(moduli, kind="stable")
    top, second = order[-1], order[-2]
    if moduli[top] <= 1.0 + TAU_SPEC:
        raise GeometryError(f"Isometry is not loxodromic (spectral radius {moduli[top]:.12g})")
    if moduli[top] - moduli[second] <= TAU_SPEC * moduli[top]:
        raise GeometryError("Extreme eigenvalues cluster; fixed points are not separated")
    return eigvals[top], eigvecs[:, top]


def fixed_points(M: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Boundary fixed points of a loxodromic isometry.

    Both points are dominant eigenvectors, of M and of its inverse.

    Returns:
        Tuple[np.ndarray, np.ndarray]: ``(repelling, attracting)`` boundary points.
    """
    _, attracting = _dominant_eigenvector(M)
    _, repelling = _dominant_eigenvector(isometry_inverse(M))
    return normalize_boundary(repelling), normalize_boundary(attracting)


def translation_length(M: np.ndarray) -> float:
    top, _ = _dominant_eigenvector(M)
    return float(np.log(np.abs(top)))


def hyperbolic_translation(x: np.ndarray, y: np.ndarray, t: float) -> np.ndarray:
    """
    The rotation-free translation H(x, y, t) along the geodesic from x to y.

    Args:
        x (np.ndarray): Repelling boundary point.
        y (np.ndarray): Attracting boundary point.
        t (float): Signed translation length; positive moves towards y.

    Returns:
        np.ndarray: y is an eigenvector with eigenvalue e^t, x with e^-t, and the
        eta-orthogonal complement of span(x, y) is fixed pointwise.
    """
    if not np.isfinite(t):
        raise GeometryError(f"Translation length must be finite, got {t}")
    x, y = _check_pair(x, y)
    n = len(x) - 1
    eta = minkowski_form(n)
    b = inner(x, y)
    return (
        np.eye(n + 1)
        + (np.expm1(t) / b) * np.outer(y, eta @ x)
        + (np.expm1(-t) / b) * np.outer(x, eta @ y)
    )


def lie_generator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """v(x, y) with exp(t v(x, y)) = H(x, y, t)."""
    x, y = _check_pair(x, y)
    eta = minkowski_form(len(x) - 1)
    return (np.outer(y, eta @ x) - np.outer(x, eta @ y)) / inner(x, y)


def loxodromic_factorization(M: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Split M = sigma @ theta with sigma a pure translation on M's axis and theta elliptic."""
    repelling, attracting = fixed_points(M)
    sigma = hyperbolic_translation(repelling, attracting, translation_length(M))
    theta = isometry_inverse(sigma) @ M
    return sigma, theta


def exp_lie(X: np.ndarray) -> np.ndarray:
    return scipy.linalg.expm(X)


def log_group(M: np.ndarray) -> np.ndarray:
    """Principal logarithm; raises LogBranchError off the principal branch."""
    eigvals = np.linalg.eigvals(M)
    angles = np.abs(np.angle(eigvals))
    if np.any(angles > np.pi - TAU_SPEC):
        raise LogBranchError("Matrix has an eigenvalue on the negative real axis")
    X = scipy.linalg.logm(M)
    if np.iscomplexobj(X):
        if np.abs(np.imag(X)).max() > TAU_SPEC * max(1.0, np.abs(X).max()):
            raise LogBranchError("Logarithm is not real")
        X = np.real(X)
    return np.asarray(X, dtype=float)


class GroupDistance(NamedTuple):
    value: float
    fallback: bool


def group_distance(M1: np.ndarray, M2: np.ndarray) -> GroupDistance:
    """Left-invariant distance ||log(M1^-1 M2)||_F, Frobenius distance off the log branch."""
    if M1.shape != M2.shape:
        raise PreconditionError(f"Dimension mismatch: {M1.shape} vs {M2.shape}")
    if np.array_equal(M1, M2):
        return GroupDistance(0.0, False)
    try:
        X = log_group(isometry_inverse(M1) @ M2)
    except LogBranchError:
        logger.warning("Principal log unavailable; falling back to Frobenius distance")
        return GroupDistance(float(np.linalg.norm(M1 - M2)), True)
    return GroupDistance(float(np.linalg.norm(X)), False)


def axis_complement_basis(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Rows form an eta-orthonormal basis of the spacelike complement of span(p, q)."""
    n = len(p) - 1
    b = inner(p, q)
    candidates = []
    for i in range(n + 1):
        e = np.zeros(n + 1)
        e[i] = 1.0
        candidates.append(e - inner(e, q) / b * p - inner(e, p) / b * q)
    candidates.sort(key=lambda w: -inner(w, w))
    basis: list[np.ndarray] = []
    for w in candidates:
        for u in basis:
            w = w - inner(w, u) * u
        norm = inner(w, w)
        if norm > 1e-6:
            basis.append(w / np.sqrt(norm))
        if len(basis) == n - 1:
            break
    return np.array(basis)


def _plane_generator(e: np.ndarray, f: np.ndarray) -> np.ndarray:
    eta = minkowski_form(len(e) - 1)
    return np.outer(f, eta @ e) - np.outer(e, eta @ f)


def rotation_generator(p: np.ndarray, q: np.ndarray, selector: np.ndarray | None = None) -> np.ndarray:
    """
    Unit generator of the rotations fixing the geodesic (p, q) pointwise.

    In dimension 3 the rotation plane is the whole complement, oriented so that
    det[e, f, p, q] > 0. In dimension 4 the plane is the part of the complement orthogonal
    to ``selector``, oriented by det[e, f, k, p, q] > 0.
    """
    p, q = _check_pair(p, q)
    n = len(p) - 1
    basis = axis_complement_basis(p, q)
    match n:
        case 2:
            raise PreconditionError("Hyperbolic plane isometries have no axial rotations")
        case 3:
            e, f = basis
            if np.linalg.det(np.column_stack([e, f, p, q])) < 0:
                f = -f
            return _plane_generator(e, f)
        case 4:
            if selector is None:
                raise PreconditionError("Dimension 4 rotations need a plane selector")
            k = sum(inner(np.asarray(selector, dtype=float), b) * b for b in basis)
            if inner(k, k) < 1e-12:
                raise PreconditionError("Plane selector is orthogonal to the axis complement")
            k = k / np.sqrt(inner(k, k))
            rest = sorted((b - inner(b, k) * k for b in basis), key=lambda w: -inner(w, w))
            e = rest[0] / np.sqrt(inner(rest[0], rest[0]))
            f = rest[1] - inner(rest[1], e) * e
            f = f / np.sqrt(inner(f, f))
            if np.linalg.det(np.column_stack([e, f, k, p, q])) < 0:
                f = -f
            return _plane_generator(e, f)
        case _:
            raise PreconditionError(f"Unsupported dimension {n}")


def axial_rotation(p: np.ndarray, q: np.ndarray, angle: float, selector: np.ndarray | None = None) -> np.ndarray:
    n = len(p) - 1
    if angle == 0.0:
        return np.eye(n + 1)
    J = rotation_generator(p, q, selector)
    return np.eye(n + 1) + np.sin(angle) * J + (1.0 - np.cos(angle)) * (J @ J)


def standard_generator(n: int) -> np.ndarray:
    E = np.zeros((n + 1, n + 1))
    E[0, n] = E[n, 0] = 1.0
    return E


def standard_boost(n: int, t: float) -> np.ndarray:
    M = np.eye(n + 1)
    M[0, 0] = M[n, n] = np.cosh(t)
    M[0, n] = M[n, 0] = np.sinh(t)
    return M


def coordinate_rotation(n: int, angle: float, i: int = 0, j: int = 1) -> np.ndarray:
    M = np.eye(n + 1)
    c, s = np.cos(angle), np.sin(angle)
    M[i, i] = M[j, j] = c
    M[i, j], M[j, i] = -s, s
    return M


def embed(M: np.ndarray, n: int) -> np.ndarray:
    """Block-embed an SO+(2,1) matrix into SO+(n,1) acting on coordinates 1, 2 and n+1."""
    if n == 2:
        return np.array(M, dtype=float)
    index = [0, 1, n]
    result = np.eye(n + 1)
    result[np.ix_(index, index)] = M
    return result


def random_isometry(n: int, scale: float, rng: np.random.Generator) -> np.ndarray:
    A = rng.normal(size=(n, n)) * scale
    b = rng.normal(size=n) * scale
    X = np.zeros((n + 1, n + 1))
    X[:n, :n] = (A - A.T) / 2
    X[:n, n] = b
    X[n, :n] = b
    return exp_lie(X)
