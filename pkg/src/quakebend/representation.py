"""Surface group representations stored on generator images."""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from quakebend.errors import GeometryError, HomomorphismError, PreconditionError
from quakebend.minkowski import (
    TAU_FORM,
    GroupDistance,
    check_isometry,
    dimension_of,
    embed,
    group_distance,
    isometry_inverse,
    reorthogonalize,
)
from quakebend.surface_group import SurfacePresentation, Word

TAU_HOM = 1e-8
# Multiple of the rounding bound below which a relator residual certifies nothing.
ROUNDOFF_FACTOR = 16.0


@dataclass(frozen=True, eq=False)
class Representation:
    """A homomorphism from the surface group into SO+(n,1), stored on generators.

    ``raw_images`` keeps the unorthogonalized products of a deformation for diagnostics.
    """

    presentation: SurfacePresentation
    images: Tuple[np.ndarray, ...]
    raw_images: Tuple[np.ndarray, ...] | None = None
    _inverses: Dict[int, np.ndarray] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self) -> None:
        if len(self.images) != self.presentation.rank:
            raise GeometryError(
                f"Expected {self.presentation.rank} generator images, got {len(self.images)}"
            )
        shapes = {image.shape for image in self.images}
        if len(shapes) != 1:
            raise GeometryError(f"Generator images have mixed shapes: {shapes}")

    @classmethod
    def from_matrices(cls, genus: int, matrices: Sequence, tol: float = TAU_FORM) -> "Representation":
        images = tuple(check_isometry(np.array(m, dtype=float), tol) for m in matrices)
        return cls(SurfacePresentation(genus), images)

    @property
    def dimension(self) -> int:
        return dimension_of(self.images[0])

    @property
    def genus(self) -> int:
        return self.presentation.genus

    def _letter(self, index: int, exponent: int) -> np.ndarray:
        if exponent > 0:
            return self.images[index]
        if index not in self._inverses:
            self._inverses[index] = isometry_inverse(self.images[index])
        return self._inverses[index]

    def evaluate(self, word: Word) -> np.ndarray:
        result = np.eye(self.dimension + 1)
        for index, exponent in word:
            result = result @ self._letter(index, exponent)
        return result

    def relator_residual(self) -> float:
        relator = self.evaluate(self.presentation.relator)
        return float(np.linalg.norm(relator - np.eye(self.dimension + 1)))

    def relator_floor(self) -> float:
        """
        Rounding level of the relator product.

        Bounds the error of multiplying out the relator in floating point by the sum over factors
        of ||prefix|| ||factor|| ||suffix||, scaled by machine epsilon and ROUNDOFF_FACTOR.
        """
        factors = [self._letter(index, exponent) for index, exponent in self.presentation.relator]
        identity = np.eye(self.dimension + 1)
        prefixes, product = [], identity
        for m in factors:
            prefixes.append(np.linalg.norm(product))
            product = product @ m
        suffixes, product = [], identity
        for m in reversed(factors):
            suffixes.append(np.linalg.norm(product))
            product = m @ product
        suffixes.reverse()
        bound = sum(p * np.linalg.norm(m) * s for p, m, s in zip(prefixes, factors, suffixes))
        return float(ROUNDOFF_FACTOR * np.finfo(float).eps * bound)

    def validate(self, tol: float = TAU_HOM) -> "Representation":
        """Raises HomomorphismError unless the relator residual is below max(tol, relator_floor())."""
        residual = self.relator_residual()
        limit = max(tol, self.relator_floor())
        if residual >= limit:
            raise HomomorphismError(
                f"Relator residual {residual:.3e} exceeds {limit:.1e}",
                witness={"matrices": self.to_lists(), "residual": residual},
            )
        return self

    def conjugate(self, g: np.ndarray) -> "Representation":
        g_inv = isometry_inverse(g)
        return Representation(self.presentation, tuple(g @ m @ g_inv for m in self.images))

    def embedded(self, n: int) -> "Representation":
        return Representation(self.presentation, tuple(embed(m, n) for m in self.images))

    def reorthogonalized(self) -> "Representation":
        """Projected generator images, or the raw ones if projecting would raise the relator residual."""
        projected = Representation(
            self.presentation,
            tuple(reorthogonalize(m) for m in self.images),
            raw_images=self.images,
        )
        if projected.relator_residual() > self.relator_residual():
            return Representation(self.presentation, self.images, raw_images=self.images)
        return projected

    def to_lists(self) -> List[List[List[float]]]:
        return [m.tolist() for m in self.images]

    def distance(self, other: "Representation") -> GroupDistance:
        """Largest group distance between corresponding generator images."""
        if other.presentation != self.presentation:
            raise PreconditionError("Representations have different presentations")
        distances = [group_distance(m1, m2) for m1, m2 in zip(self.images, other.images)]
        return GroupDistance(max(d.value for d in distances), any(d.fallback for d in distances))
