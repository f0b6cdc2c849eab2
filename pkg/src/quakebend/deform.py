"""Twist and bend deformations along weighted multicurves.

A deformation assigns to each lift L of a curve an isometry gamma(L) centralizing the lift's
element, and rewrites every group element by the gammas of the lifts its basepoint segment
crosses: E(A) = rho(A) gamma(L_k)^s_k ... gamma(L_1)^s_1 with L_1 nearest the basepoint.
"""

import logging
from dataclasses import dataclass, replace
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from quakebend.covering import (
    Crossing,
    OrientedCurve,
    ReferenceStructure,
    crossing_sequence,
    crossings_between,
    homotopic,
    intersection_number,
    validate_curve,
)
from quakebend.errors import GeometryError, PreconditionError
from quakebend.minkowski import (
    IsometryType,
    axial_rotation,
    axis_complement_basis,
    classify,
    fixed_points,
    hyperbolic_translation,
    inner,
    isometry_inverse,
    lie_generator,
    loxodromic_factorization,
    rotation_generator,
)
from quakebend.representation import TAU_HOM, Representation
from quakebend.surface_group import Word, parse_word

logger = logging.getLogger(__name__)

COMMUTATION_TOLERANCE = 1e-8

__all__ = [
    "CentralizerParameter",
    "OrientedCurve",
    "Representation",
    "WeightedMulticurve",
    "basepoint_conjugator",
    "deform",
    "deformation_factor",
    "evaluate_deformation",
    "gamma_base",
    "infinitesimal_cocycle",
    "reversed_curve",
    "validate_multicurve",
]


@dataclass(frozen=True)
class CentralizerParameter:
    """Translation along the axis plus an optional rotation about it.

    ``selector`` picks the rotation plane in dimension 4; when omitted there, the rotation
    axis of the curve element's elliptic part is used.
    """

    translation: float = 0.0
    angle: float = 0.0
    selector: Tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.translation) and np.isfinite(self.angle)):
            raise PreconditionError("Centralizer parameters must be finite")


@dataclass(frozen=True)
class WeightedMulticurve:
    components: Tuple[Tuple[OrientedCurve, CentralizerParameter], ...] = ()

    @classmethod
    def single(
        cls,
        core: Word | str,
        weight: float = 1.0,
        translation: float = 0.0,
        angle: float = 0.0,
        selector: Sequence[float] | None = None,
    ) -> "WeightedMulticurve":
        word = parse_word(core) if isinstance(core, str) else core
        parameter = CentralizerParameter(translation, angle, None if selector is None else tuple(selector))
        return cls(((OrientedCurve.from_word(word, weight), parameter),))

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[Tuple[OrientedCurve, CentralizerParameter]]:
        return iter(self.components)

    def __add__(self, other: "WeightedMulticurve") -> "WeightedMulticurve":
        return WeightedMulticurve(self.components + other.components)

    @property
    def curves(self) -> Tuple[OrientedCurve, ...]:
        return tuple(curve for curve, _ in self.components)

    def with_weights(self, weights: Sequence[float]) -> "WeightedMulticurve":
        if len(weights) != len(self.components):
            raise PreconditionError(f"Expected {len(self.components)} weights, got {len(weights)}")
        return WeightedMulticurve(
            tuple((replace(curve, weight=float(w)), p) for (curve, p), w in zip(self.components, weights))
        )

    def reversed(self) -> "WeightedMulticurve":
        return WeightedMulticurve(tuple((reversed_curve(curve), p) for curve, p in self.components))

    def to_dict(self) -> List[dict]:
        return [
            {
                "word": str(curve.core),
                "weight": curve.weight,
                "translation": p.translation,
                "angle": p.angle,
                "selector": None if p.selector is None else list(p.selector),
            }
            for curve, p in self.components
        ]


def reversed_curve(curve: OrientedCurve) -> OrientedCurve:
    return curve.reversed()


def _curve_axis(rho: Representation, curve: OrientedCurve) -> Tuple[np.ndarray, np.ndarray]:
    element = rho.evaluate(curve.core)
    if classify(element) is not IsometryType.LOXODROMIC:
        raise GeometryError(f"Curve '{curve.core}' is not loxodromic under the representation")
    return fixed_points(element)


def _default_selector(rho: Representation, curve: OrientedCurve) -> np.ndarray:
    """Rotation axis of the elliptic factor of rho(core) inside the axis complement."""
    element = rho.evaluate(curve.core)
    repelling, attracting = fixed_points(element)
    _, theta = loxodromic_factorization(element)
    basis = axis_complement_basis(repelling, attracting)
    restricted = np.array([[inner(u, theta @ v) for v in basis] for u in basis])
    if np.linalg.norm(restricted - np.eye(len(basis))) < 1e-9:
        raise PreconditionError(
            f"Curve '{curve.core}' has no rotational part; a plane selector is required in dimension 4"
        )
    eigvals, eigvecs = np.linalg.eig(restricted)
    fixed = np.real(eigvecs[:, np.argmin(np.abs(eigvals - 1.0))])
    return fixed @ basis


def _selector(rho: Representation, curve: OrientedCurve, parameter: CentralizerParameter) -> np.ndarray | None:
    if rho.dimension != 4 or parameter.angle == 0.0:
        return None
    if parameter.selector is not None:
        selector = np.asarray(parameter.selector, dtype=float)
        if selector.shape != (5,):
            raise PreconditionError(f"Plane selector must have 5 coordinates, got {selector.shape}")
        return selector
    return _default_selector(rho, curve)


def gamma_base(
    rho: Representation, curve: OrientedCurve, parameter: CentralizerParameter, t: float
) -> np.ndarray:
    """
    The centralizing isometry assigned to the axis of rho(core).

    Args:
        rho (Representation): Representation being deformed.
        curve (OrientedCurve): The curve; its attracting fixed point is the forward end.
        parameter (CentralizerParameter): Translation and rotation per unit weight.
        t (float): Deformation time.

    Returns:
        np.ndarray: H(p, q, t w translation) composed with the rotation by t w angle.
    """
    dimension = rho.dimension
    if t == 0.0:
        return np.eye(dimension + 1)
    if dimension == 2 and parameter.angle != 0.0:
        raise PreconditionError("Bending needs dimension at least 3")
    repelling, attracting = _curve_axis(rho, curve)
    scale = t * curve.weight
    gamma = hyperbolic_translation(repelling, attracting, scale * parameter.translation)
    if parameter.angle != 0.0:
        selector = _selector(rho, curve, parameter)
        gamma = gamma @ axial_rotation(repelling, attracting, scale * parameter.angle, selector)

    element = rho.evaluate(curve.core)
    defect = np.linalg.norm(gamma @ element - element @ gamma)
    if defect > COMMUTATION_TOLERANCE * max(1.0, np.linalg.norm(gamma) * np.linalg.norm(element)):
        raise PreconditionError(
            f"Rotation about '{curve.core}' does not commute with its element (defect {defect:.3e})",
            witness={"curve": str(curve.core), "defect": float(defect)},
        )
    return gamma


def lie_direction(rho: Representation, curve: OrientedCurve, parameter: CentralizerParameter) -> np.ndarray:
    """X_c: the derivative of gamma_base at t = 0."""
    repelling, attracting = _curve_axis(rho, curve)
    X = parameter.translation * lie_generator(repelling, attracting)
    if parameter.angle != 0.0:
        if rho.dimension == 2:
            raise PreconditionError("Bending needs dimension at least 3")
        X = X + parameter.angle * rotation_generator(repelling, attracting, _selector(rho, curve, parameter))
    return curve.weight * X


def _merged_crossings(
    mc: WeightedMulticurve, ref: ReferenceStructure, A: Word | None = None, segment=None
) -> List[Crossing]:
    merged: List[Crossing] = []
    for index, (curve, _) in enumerate(mc):
        if A is not None:
            crossings = crossing_sequence(A, curve, ref).crossings
        else:
            crossings = crossings_between(segment[0], segment[1], curve, ref)[0]
        merged.extend(replace(c, component=index) for c in crossings)
    merged.sort(key=lambda c: c.position)
    return merged


def _accumulate(rho: Representation, crossings: Sequence[Crossing], gammas) -> np.ndarray:
    product = np.eye(rho.dimension + 1)
    for crossing in crossings:
        gamma, gamma_inverse = gammas[crossing.component]
        conjugator = rho.evaluate(crossing.conjugator)
        factor = isometry_inverse(conjugator) @ (gamma if crossing.sign > 0 else gamma_inverse) @ conjugator
        product = factor @ product
    return product


def _gammas(rho: Representation, mc: WeightedMulticurve, t: float):
    gammas = []
    for curve, parameter in mc:
        gamma = gamma_base(rho, curve, parameter, t)
        gammas.append((gamma, isometry_inverse(gamma)))
    return gammas


def deformation_factor(
    rho: Representation, mc: WeightedMulticurve, t: float, A: Word, ref: ReferenceStructure
) -> np.ndarray:
    """rho(A)^-1 E(rho)(A), the ordered product of signed gammas along A.s segment."""
    if t == 0.0 or not len(mc) or not A:
        return np.eye(rho.dimension + 1)
    return _accumulate(rho, _merged_crossings(mc, ref, A=A), _gammas(rho, mc, t))


def evaluate_deformation(
    rho: Representation, mc: WeightedMulticurve, t: float, A: Word, ref: ReferenceStructure
) -> np.ndarray:
    """E(rho)(A) read off the crossings of A's own segment."""
    return rho.evaluate(A) @ deformation_factor(rho, mc, t, A, ref)


def deform(
    rho: Representation, mc: WeightedMulticurve, t: float, ref: ReferenceStructure, tol: float = TAU_HOM
) -> Representation:
    """
    Applies the deformation E to every generator.

    The images are re-orthogonalized; the raw products stay on ``raw_images``.

    Raises:
        HomomorphismError: The deformed relator residual reaches ``tol``.
    """
    if t == 0.0 or not len(mc):
        return rho
    if rho.genus != ref.genus:
        raise PreconditionError(f"Representation genus {rho.genus} does not match reference genus {ref.genus}")
    gammas = _gammas(rho, mc, t)
    images = []
    for A in rho.presentation.generator_words:
        crossings = _merged_crossings(mc, ref, A=A)
        logger.debug("Generator %s crosses %d lifts", A, len(crossings))
        images.append(rho.evaluate(A) @ _accumulate(rho, crossings, gammas))
    deformed = Representation(rho.presentation, tuple(images)).reorthogonalized()
    return deformed.validate(tol)


def infinitesimal_cocycle(rho: Representation, mc: WeightedMulticurve, A: Word, ref: ReferenceStructure) -> np.ndarray:
    """u(A) = sum of s_i Ad(rho(X_i)^-1) X_c over the crossings of A."""
    u = np.zeros((rho.dimension + 1, rho.dimension + 1))
    if not len(mc) or not A:
        return u
    directions = [lie_direction(rho, curve, parameter) for curve, parameter in mc]
    for crossing in _merged_crossings(mc, ref, A=A):
        conjugator = rho.evaluate(crossing.conjugator)
        u += crossing.sign * isometry_inverse(conjugator) @ directions[crossing.component] @ conjugator
    return u


def basepoint_conjugator(
    rho: Representation, mc: WeightedMulticurve, t: float, ref: ReferenceStructure, moved: ReferenceStructure
) -> np.ndarray:
    """
    The isometry g with E_moved(A) = g E(A) g^-1.

    It is the product of the signed gammas of the lifts crossed going from the old basepoint to
    the new one, later crossings on the left.
    """
    if not len(mc):
        return np.eye(rho.dimension + 1)
    crossings = _merged_crossings(mc, ref, segment=(ref.basepoint, moved.basepoint))
    return _accumulate(rho, crossings, _gammas(rho, mc, t))


def validate_multicurve(mc: WeightedMulticurve, ref: ReferenceStructure) -> WeightedMulticurve:
    """Each component simple; components pairwise disjoint and not homotopic."""
    for curve, _ in mc:
        validate_curve(curve, ref)
    curves = mc.curves
    for i, first in enumerate(curves):
        for second in curves[i + 1:]:
            if homotopic(first, second, ref):
                raise PreconditionError(f"Components '{first.core}' and '{second.core}' are homotopic")
            crossings = intersection_number(first, second, ref)
            if crossings:
                raise PreconditionError(
                    f"Components '{first.core}' and '{second.core}' intersect {crossings} times"
                )
    return mc
