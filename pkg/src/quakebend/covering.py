"""Crossings of geodesic segments with lifts of simple closed curves.

Everything here lives in the hyperboloid model of the hyperbolic plane, against a
reference Fuchsian structure. Group elements act on the left. A lift of the
curve with core ``c`` is encoded by a conjugator ``X``; the lift is the geodesic
``rho0(X)^-1 . axis(rho0(c))``, and ``X`` is determined up to the coset
``<c> X``. For the element ``A`` the segment runs from the basepoint ``x0`` to
``rho0(A)^-1 . x0``. That segment is the basepoint translate ``x0 . A`` in
right-action notation, and it is the choice that makes concatenation coherent.
"""

import logging
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Dict, List, Sequence, Tuple

import numpy as np

from quakebend.errors import BudgetExceededError, DegeneracyError, GeometryError, PreconditionError, WordError
from quakebend.minkowski import (
    TAU_SEP,
    IsometryType,
    classify,
    coordinate_rotation,
    exp_point,
    fixed_points,
    hyperbolic_translation,
    inner,
    isometry_inverse,
    minkowski_form,
    normalize_boundary,
    normalize_point,
    origin,
    point_distance,
    reorthogonalize,
    standard_boost,
    translation_length,
)
from quakebend.representation import Representation
from quakebend.surface_group import EMPTY, SurfacePresentation, Word, concat, cyclic_reduce, invert, is_cyclically_reduced

logger = logging.getLogger(__name__)

ETA = minkowski_form(2)
RELATOR_TOLERANCE = 1e-8
ENDPOINT_TOLERANCE = 1e-7
ORACLE_BUDGET = 10_000_000
# Tile centres are hashed on a grid of this spacing in the Poincare disk.
DISK_CELL = 1e-6
INTERSECTION_SHIFTS = (0.0, 0.37, 0.61, 0.13, 0.89)

Lift = Tuple[Word, np.ndarray, np.ndarray]
# Exponential coordinates of the default basepoint; the polygon centre itself is too symmetric.
DEFAULT_BASEPOINT = (0.0311, 0.0173)


@dataclass(frozen=True)
class OrientedCurve:
    core: Word
    weight: float = 1.0

    def __post_init__(self) -> None:
        if not self.core:
            raise WordError("Curve core must be nonempty")
        if not is_cyclically_reduced(self.core):
            raise WordError(f"Curve core '{self.core}' is not cyclically reduced")
        if not self.weight > 0:
            raise PreconditionError(f"Curve weight must be positive, got {self.weight}")

    @classmethod
    def from_word(cls, word: Word, weight: float = 1.0) -> "OrientedCurve":
        core, _ = cyclic_reduce(word)
        return cls(core, weight)

    def reversed(self) -> "OrientedCurve":
        return OrientedCurve.from_word(invert(self.core), self.weight)


@dataclass(frozen=True, eq=False)
class Crossing:
    """One lift met by a segment; ``repelling``/``attracting`` are the lift's endpoints."""

    conjugator: Word
    sign: int
    position: float
    repelling: np.ndarray
    attracting: np.ndarray
    component: int = 0


@dataclass(frozen=True)
class Certificate:
    candidates: int
    rejected: int
    min_clearance: float
    excluded: int = 0


@dataclass(frozen=True, eq=False)
class CrossingSequence:
    crossings: Tuple[Crossing, ...]
    curve: OrientedCurve
    element: Word
    certificate: Certificate | None = None

    def __len__(self) -> int:
        return len(self.crossings)

    def signs(self) -> List[int]:
        return [c.sign for c in self.crossings]


@dataclass(frozen=True, eq=False)
class ReferenceStructure:
    fuchsian: Representation
    basepoint: np.ndarray
    covering_radius: float
    _cache: Dict = field(default_factory=dict, init=False, repr=False)

    @property
    def genus(self) -> int:
        return self.fuchsian.genus

    @property
    def presentation(self) -> SurfacePresentation:
        return self.fuchsian.presentation


def regular_polygon_radius(n: int, interior_angle: float) -> float:
    """Circumradius of the regular n-gon with the given interior angle."""
    alpha = interior_angle / 2
    gamma = np.pi / n
    term = (np.cos(alpha) ** 2 - np.sin(gamma) ** 2) / (np.sin(alpha) * np.sin(gamma)) ** 2
    return float(np.arcsinh(np.sqrt(term)))


def regular_polygon_inradius(n: int, interior_angle: float) -> float:
    return float(np.arccosh(np.cos(interior_angle / 2) / np.sin(np.pi / n)))


def _side_pairing(angle: float, turn: float, inradius: float) -> np.ndarray:
    """Half turn about the edge midpoint in direction ``angle``, after a rotation by ``turn``."""
    boost = standard_boost(2, 2 * inradius)
    return reorthogonalize(coordinate_rotation(2, angle) @ boost @ coordinate_rotation(2, np.pi - angle + turn))


def regular_polygon_group(genus: int) -> Representation:
    """
    Side pairings of the regular 4g-gon with vertex angle pi/(2g).

    Edge m has its midpoint in direction m*pi/(2g). Generator a_i pairs edge 4i+2 with edge 4i,
    and b_i pairs edge 4i+1 with edge 4i+3. Going around the single vertex cycle reads off
    the relator a1 b1 A1 B1 ... ag bg Ag Bg.
    """
    sides = 4 * genus
    step = np.pi / (2 * genus)
    inradius = regular_polygon_inradius(sides, step)
    images = []
    for i in range(genus):
        a = _side_pairing(4 * i * step, -2 * step, inradius)
        b = _side_pairing((4 * i + 3) * step, 2 * step, inradius)
        images.extend([a, b])
    return Representation(SurfacePresentation(genus), tuple(images))


def reference_structure(
    genus: int,
    matrices: Sequence | None = None,
    basepoint: np.ndarray | None = None,
    covering_radius: float | None = None,
) -> ReferenceStructure:
    """
    Builds and validates a reference Fuchsian structure.

    Args:
        genus (int): Surface genus, at least 2.
        matrices (Sequence | None): Explicit SO+(2,1) generator images; defaults to the regular
            4g-gon group.
        basepoint (np.ndarray | None): Hyperboloid point, defaults to a point near the polygon centre.
        covering_radius (float | None): Radius such that balls around the orbit of the origin cover
            the plane. Exact for the default group; for explicit matrices it defaults to the largest
            generator displacement of the origin.

    Returns:
        ReferenceStructure: The validated structure.
    """
    if matrices is None:
        fuchsian = regular_polygon_group(genus)
        default_radius = regular_polygon_radius(4 * genus, np.pi / (2 * genus))
    else:
        try:
            fuchsian = Representation.from_matrices(genus, matrices)
        except GeometryError as e:
            raise PreconditionError(f"Failed to accept reference matrices: {e}") from e
        if fuchsian.dimension != 2:
            raise PreconditionError(f"Reference structure must lie in SO(2,1), got SO({fuchsian.dimension},1)")
        o = origin(2)
        default_radius = max(point_distance(o, m @ o) for m in fuchsian.images)

    residual = fuchsian.relator_residual()
    limit = max(RELATOR_TOLERANCE, fuchsian.relator_floor())
    if residual >= limit:
        raise PreconditionError(
            f"Reference relator residual {residual:.3e} exceeds {limit:.1e}",
            witness={"matrices": fuchsian.to_lists(), "residual": residual},
        )
    for symbol, image in zip(fuchsian.presentation.generators, fuchsian.images):
        if classify(image) is not IsometryType.LOXODROMIC:
            raise PreconditionError(f"Reference generator {symbol} is not loxodromic")

    point = exp_point(2, np.array(DEFAULT_BASEPOINT)) if basepoint is None else normalize_point(np.asarray(basepoint, dtype=float))
    radius = default_radius if covering_radius is None else float(covering_radius)
    logger.debug("Reference structure genus %d, covering radius %.6f", genus, radius)
    return ReferenceStructure(fuchsian, point, radius)


def exponential_coordinates(x: np.ndarray) -> np.ndarray:
    """Inverse of the exponential map at the origin."""
    r = point_distance(origin(2), x)
    if r == 0.0:
        return np.zeros(2)
    return r * x[:2] / np.linalg.norm(x[:2])


def basepoint_offset(ref: ReferenceStructure, vector: Sequence[float]) -> ReferenceStructure:
    """The same structure with ``vector`` added to the exponential coordinates of the basepoint."""
    moved = exponential_coordinates(ref.basepoint) + np.asarray(vector, dtype=float)
    return replace(ref, basepoint=exp_point(2, moved))


def axis(w: Word, ref: ReferenceStructure) -> Tuple[np.ndarray, np.ndarray]:
    """``(repelling, attracting)`` endpoints of the axis of rho0(w)."""
    return fixed_points(ref.fuchsian.evaluate(w))


def _geodesic_scale(normal: np.ndarray) -> float:
    return float(np.sqrt(normal @ ETA @ normal))


def distance_to_geodesic(x: np.ndarray, repelling: np.ndarray, attracting: np.ndarray) -> float:
    normal = np.cross(repelling, attracting)
    return float(np.arcsinh(abs(normal @ x) / _geodesic_scale(normal)))


def foot_on_geodesic(x: np.ndarray, repelling: np.ndarray, attracting: np.ndarray) -> np.ndarray:
    normal = np.cross(repelling, attracting)
    dual = ETA @ normal / _geodesic_scale(normal)
    return normalize_point(x - inner(x, dual) * dual)


def distance_to_segment(x: np.ndarray, start: np.ndarray, end: np.ndarray) -> float:
    if point_distance(start, end) < 1e-12:
        return point_distance(x, start)
    normal = np.cross(start, end)
    dual = ETA @ normal / _geodesic_scale(normal)
    offset = inner(x, dual)
    foot = normalize_point(x - offset * dual)
    coefficients = np.linalg.lstsq(np.column_stack([start, end]), foot, rcond=None)[0]
    if coefficients.min() >= 0:
        return float(np.arcsinh(abs(offset)))
    return min(point_distance(x, start), point_distance(x, end))


def _near_path(point: np.ndarray, path: Sequence[Tuple[np.ndarray, np.ndarray]], radius: float) -> bool:
    return min(distance_to_segment(point, start, end) for start, end in path) <= radius + 1e-9


def _orbit_near_path(
    ref: ReferenceStructure, path: Sequence[Tuple[np.ndarray, np.ndarray]], radius: float
) -> List[Tuple[Word, np.ndarray]]:
    """Elements Z whose tile centre rho0(Z).o lies within ``radius`` of a broken geodesic path.

    The path must start at the origin so that the identity seeds the search.
    """
    o = origin(2)
    rho0 = ref.fuchsian
    letters = [(letter, rho0._letter(*letter)) for letter in ref.presentation.letters]
    found = [(EMPTY, np.eye(3))]
    visited = {_disk_cell(o)}
    queue = deque(found)
    while queue:
        word, matrix = queue.popleft()
        for letter, image in letters:
            if word and word.letters[-1] == (letter[0], -letter[1]):
                continue
            candidate = matrix @ image
            centre = candidate @ o
            cell = _disk_cell(centre)
            if any((cell[0] + i, cell[1] + j) in visited for i in (-1, 0, 1) for j in (-1, 0, 1)):
                continue
            visited.add(cell)
            if _near_path(centre, path, radius):
                node = (Word(word.letters + (letter,)), candidate)
                found.append(node)
                queue.append(node)
    return found


def _disk_cell(centre: np.ndarray) -> Tuple[int, int]:
    disk = centre[:2] / (1.0 + centre[2])
    return int(np.floor(disk[0] / DISK_CELL)), int(np.floor(disk[1] / DISK_CELL))


def coset_representative(X: Word, core: Word) -> Word:
    """Shortlex-least word core^k X; every other k gives a longer word."""
    best = X
    reach = 2 * len(X) // len(core) + 2
    for step in (core, invert(core)):
        current = X
        for _ in range(reach):
            current = concat(step, current)
            if current.shortlex_key() < best.shortlex_key():
                best = current
    return best


@dataclass(frozen=True, eq=False)
class AxisPiece:
    """Part of one period of an axis, in the frame of the tile ``prefix``."""

    prefix: Word
    start: np.ndarray
    end: np.ndarray
    repelling: np.ndarray
    attracting: np.ndarray

    @property
    def direction(self) -> int:
        """+1 if the piece runs towards the attracting end, -1 if backwards, 0 if degenerate."""
        travel = _axis_coordinate(self.end, self) - _axis_coordinate(self.start, self)
        if abs(travel) < 1e-12:
            return 0
        return 1 if travel > 0 else -1


def _axis_coordinate(x: np.ndarray, piece: AxisPiece) -> float:
    return 0.5 * float(np.log(inner(x, piece.repelling) / inner(x, piece.attracting)))


def axis_pieces(core: Word, ref: ReferenceStructure, shift: float = 0.0) -> List[AxisPiece]:
    """
    Cuts one period of the axis of rho0(core) into one piece per letter.

    With P_k the prefix of length k, piece k joins the feet of P_k.o and P_{k+1}.o on the axis,
    both moved by ``shift`` along it. It is expressed in the frame of P_k, where the axis is the
    axis of the cyclic permutation of ``core`` starting at letter k+1. Every piece therefore
    stays near the origin, however long the curve is.
    """
    key = ("pieces", core, shift)
    if key not in ref._cache:
        letters = core.letters
        o = origin(2)
        starts, axes = [], []
        for k in range(len(letters)):
            repelling, attracting = axis(Word(letters[k:] + letters[:k]), ref)
            foot = foot_on_geodesic(o, repelling, attracting)
            starts.append(normalize_point(hyperbolic_translation(repelling, attracting, shift) @ foot))
            axes.append((repelling, attracting))
        pieces = []
        for k, letter in enumerate(letters):
            end = normalize_point(ref.fuchsian._letter(*letter) @ starts[(k + 1) % len(letters)])
            pieces.append(AxisPiece(Word(letters[:k]), starts[k], end, *axes[k]))
        ref._cache[key] = pieces
    return ref._cache[key]


def _merge_lift(lifts: List[Lift], word: Word, pair: Tuple[np.ndarray, np.ndarray]) -> None:
    """Adds a lift, keeping the shortlex-least conjugator when its endpoints are already present."""
    for i, (existing, r, a) in enumerate(lifts):
        if _same_endpoints(pair, (r, a)):
            if word.shortlex_key() < existing.shortlex_key():
                lifts[i] = (word, r, a)
            return
    lifts.append((word, pair[0], pair[1]))


def _lifts_through_tiles(core: Word, ref: ReferenceStructure, radius: float) -> List[Lift]:
    """Lifts of the curve within ``radius`` of the origin, as (conjugator, repelling, attracting)."""
    key = ("lifts", core, radius)
    if key not in ref._cache:
        o = origin(2)
        lifts: List[Lift] = []
        for piece in axis_pieces(core, ref):
            for word, matrix in _orbit_near_path(ref, [(o, piece.start), (piece.start, piece.end)], radius):
                if distance_to_geodesic(matrix @ o, piece.repelling, piece.attracting) > radius + 1e-9:
                    continue
                inverse = isometry_inverse(matrix)
                pair = (normalize_boundary(inverse @ piece.repelling), normalize_boundary(inverse @ piece.attracting))
                _merge_lift(lifts, coset_representative(concat(piece.prefix, word), core), pair)
        logger.debug("Curve %s: %d lifts pass the tile of the origin", core, len(lifts))
        ref._cache[key] = lifts
    return ref._cache[key]


def _same_endpoints(first: Tuple[np.ndarray, np.ndarray], second: Tuple[np.ndarray, np.ndarray]) -> bool:
    return bool(
        np.linalg.norm(first[0] - second[0]) < ENDPOINT_TOLERANCE
        and np.linalg.norm(first[1] - second[1]) < ENDPOINT_TOLERANCE
    )


def _crossing_geometry(
    start: np.ndarray, end: np.ndarray, repelling: np.ndarray, attracting: np.ndarray
) -> Tuple[int, float]:
    """Sign and position of a lift known to cross the segment."""
    normal = np.cross(repelling, attracting)
    f_start, f_end = normal @ start, normal @ end
    fraction = f_start / (f_start - f_end)
    point = normalize_point((1 - fraction) * start + fraction * end)
    along = end + inner(end, point) * point
    direction = attracting + inner(attracting, point) * point
    det = float(np.linalg.det(np.column_stack([along, direction, point])))
    if abs(det) <= TAU_SEP * np.sqrt(inner(along, along) * inner(direction, direction)):
        raise DegeneracyError("Segment is tangent to a lift")
    position = point_distance(start, point) / point_distance(start, end)
    return (1 if det > 0 else -1), position


def _check_clearance(start, end, normals, scales, words) -> float:
    clearance = np.arcsinh(np.minimum(np.abs(normals @ start), np.abs(normals @ end)) / scales)
    if len(clearance) and clearance.min() <= TAU_SEP:
        index = int(np.argmin(clearance))
        raise DegeneracyError(
            f"Segment endpoint lies on the lift with conjugator '{words[index]}'",
            witness={"start": start.tolist(), "end": end.tolist(), "conjugator": str(words[index])},
        )
    return float(clearance.min()) if len(clearance) else float("inf")


def crossings_between(
    start: np.ndarray,
    end: np.ndarray,
    curve: OrientedCurve,
    ref: ReferenceStructure,
    radius: float | None = None,
    exclude: Tuple[np.ndarray, np.ndarray] | None = None,
) -> Tuple[List[Crossing], Certificate]:
    """
    Ordered signed lifts of ``curve`` crossed by the geodesic segment [start, end].

    Candidates are the lifts through tiles whose centres lie within the covering radius of
    the segment; each candidate is then tested exactly. ``exclude`` drops a lift with the given
    endpoints in either orientation, which is how a curve's own axis is ignored.
    """
    radius = ref.covering_radius if radius is None else radius
    if point_distance(start, end) < 1e-12:
        return [], Certificate(0, 0, float("inf"))

    o = origin(2)
    tile_lifts = _lifts_through_tiles(curve.core, ref, radius)
    tiles = _orbit_near_path(ref, [(o, start), (start, end)], radius)
    if not tile_lifts:
        return [], Certificate(0, 0, float("inf"))

    lift_repelling = np.array([r for _, r, _ in tile_lifts])
    lift_attracting = np.array([a for _, _, a in tile_lifts])
    words: List[Word] = []
    rep, att = [], []
    for z_word, z_matrix in tiles:
        z_inverse = invert(z_word)
        words.extend(concat(y_word, z_inverse) for y_word, _, _ in tile_lifts)
        rep.append(lift_repelling @ z_matrix.T)
        att.append(lift_attracting @ z_matrix.T)
    rep = np.concatenate(rep)
    att = np.concatenate(att)
    normals = np.cross(rep, att)
    scales = np.sqrt(np.einsum("ki,ij,kj->k", normals, ETA, normals))

    keep = np.ones(len(words), dtype=bool)
    if exclude is not None:
        for k in range(len(words)):
            pair = (normalize_boundary(rep[k]), normalize_boundary(att[k]))
            if _same_endpoints(pair, exclude) or _same_endpoints(pair, exclude[::-1]):
                keep[k] = False
    kept = np.flatnonzero(keep)
    clearance = _check_clearance(start, end, normals[kept], scales[kept], [words[k] for k in kept])

    crossing = kept[(normals[kept] @ start) * (normals[kept] @ end) < 0]
    lifts: List[Lift] = []
    for k in crossing:
        pair = (normalize_boundary(rep[k]), normalize_boundary(att[k]))
        _merge_lift(lifts, coset_representative(words[k], curve.core), pair)

    crossings = []
    for word, r, a in lifts:
        sign, position = _crossing_geometry(start, end, r, a)
        crossings.append(Crossing(word, sign, position, r, a))
    crossings.sort(key=lambda c: c.position)
    certificate = Certificate(len(words), len(kept) - len(crossing), clearance, len(words) - len(kept))
    logger.debug(
        "Curve %s: %d candidates, %d crossings", curve.core, len(words), len(crossings)
    )
    return crossings, certificate


def segment_for(A: Word, ref: ReferenceStructure) -> Tuple[np.ndarray, np.ndarray]:
    start = ref.basepoint
    return start, isometry_inverse(ref.fuchsian.evaluate(A)) @ start


def crossing_sequence(
    A: Word, curve: OrientedCurve, ref: ReferenceStructure, radius: float | None = None
) -> CrossingSequence:
    key = ("sequence", A, curve.core, radius)
    if key not in ref._cache:
        if not A:
            ref._cache[key] = ([], Certificate(0, 0, float("inf")))
        else:
            start, end = segment_for(A, ref)
            ref._cache[key] = crossings_between(start, end, curve, ref, radius)
    crossings, certificate = ref._cache[key]
    sequence = CrossingSequence(tuple(crossings), curve, A, certificate)
    _assert_reduced(sequence)
    return sequence


def _assert_reduced(sequence: CrossingSequence) -> None:
    for left, right in zip(sequence.crossings, sequence.crossings[1:]):
        if right.position <= left.position:
            raise DegeneracyError("Crossing positions are not strictly increasing")
        if _same_endpoints((left.repelling, left.attracting), (right.repelling, right.attracting)):
            raise DegeneracyError("Crossing sequence repeats a lift")


def lift_endpoints(conjugator: Word, core: Word, ref: ReferenceStructure) -> Tuple[np.ndarray, np.ndarray]:
    transform = isometry_inverse(ref.fuchsian.evaluate(conjugator))
    repelling, attracting = axis(core, ref)
    return normalize_boundary(transform @ repelling), normalize_boundary(transform @ attracting)


def same_lift(first: Word, second: Word, core: Word, ref: ReferenceStructure) -> bool:
    """Whether two conjugators lie in the same coset of <core>."""
    return _same_endpoints(lift_endpoints(first, core, ref), lift_endpoints(second, core, ref))


def _intersection_data(c1: OrientedCurve, c2: OrientedCurve, ref: ReferenceStructure) -> Tuple[int, bool]:
    key = ("intersection", c1.core, c2.core)
    if key in ref._cache:
        return ref._cache[key]
    length = reference_translation(c1.core, ref)
    for shift in INTERSECTION_SHIFTS:
        total, excluded = 0, 0
        try:
            for piece in axis_pieces(c1.core, ref, shift * length):
                direction = piece.direction
                if not direction:
                    continue
                crossings, certificate = crossings_between(
                    piece.start, piece.end, c2, ref, exclude=(piece.repelling, piece.attracting)
                )
                total += direction * len(crossings)
                excluded += certificate.excluded
        except DegeneracyError:
            logger.debug("Shifting period pieces for %s, %s", c1.core, c2.core)
            continue
        break
    else:
        raise DegeneracyError(f"Could not place generic period pieces on the axis of '{c1.core}'")

    # A lift of c2 equal to the axis of c1 means the curves are homotopic.
    coincident = c1.core == c2.core or c1.core == invert(c2.core) or excluded > 0
    count = total // 2 if coincident else total
    ref._cache[key] = (count, coincident)
    return count, coincident


def reference_translation(core: Word, ref: ReferenceStructure) -> float:
    return translation_length(ref.fuchsian.evaluate(core))


def intersection_number(c1: OrientedCurve, c2: OrientedCurve, ref: ReferenceStructure) -> int:
    """Geometric intersection number of the geodesic representatives."""
    return _intersection_data(c1, c2, ref)[0]


def homotopic(c1: OrientedCurve, c2: OrientedCurve, ref: ReferenceStructure) -> bool:
    """Whether the two cores are freely homotopic up to orientation."""
    return _intersection_data(c1, c2, ref)[1]


def validate_curve(curve: OrientedCurve, ref: ReferenceStructure) -> OrientedCurve:
    ref.presentation.check(curve.core)
    if classify(ref.fuchsian.evaluate(curve.core)) is not IsometryType.LOXODROMIC:
        raise PreconditionError(f"Curve '{curve.core}' is not loxodromic in the reference structure")
    self_crossings = intersection_number(curve, curve, ref)
    if self_crossings:
        raise PreconditionError(f"Curve '{curve.core}' is not simple ({self_crossings} self-crossings)")
    return curve


def side_separation(crossings: Sequence[Crossing], start: np.ndarray, end: np.ndarray) -> int:
    """Number of crossings whose signed endpoints sit on the wrong side of the segment.

    With sign convention s, the endpoint the signed element moves towards (attracting for
    s = +1, repelling for s = -1) lies to the left of the directed segment.
    """
    normal = np.cross(start, end)
    violations = 0
    for crossing in crossings:
        forward, backward = crossing.attracting, crossing.repelling
        if crossing.sign < 0:
            forward, backward = backward, forward
        if normal @ forward <= 0 or normal @ backward >= 0:
            violations += 1
    return violations


def _reduced_words(presentation: SurfacePresentation, rho0: Representation, max_length: int, exact: bool):
    words = [EMPTY]
    matrices = [np.eye(3)]
    frontier = [(EMPTY, np.eye(3))]
    for _ in range(max_length):
        next_frontier = []
        for word, matrix in frontier:
            for letter in presentation.letters:
                if word and word.letters[-1] == (letter[0], -letter[1]):
                    continue
                node = (Word(word.letters + (letter,)), matrix @ rho0._letter(*letter))
                next_frontier.append(node)
        frontier = next_frontier
        if not exact:
            words.extend(word for word, _ in frontier)
            matrices.extend(matrix for _, matrix in frontier)
    if exact:
        return [w for w, _ in frontier], [m for _, m in frontier]
    return words, matrices


def oracle_word_count(rank: int, radius: int) -> int:
    letters = 2 * rank
    return 1 + sum(letters * (letters - 1) ** (k - 1) for k in range(1, radius + 1))


def brute_force_crossings(
    start: np.ndarray,
    end: np.ndarray,
    curve: OrientedCurve,
    ref: ReferenceStructure,
    radius: int = 8,
    budget: int = ORACLE_BUDGET,
) -> List[Crossing]:
    """
    Exhaustive search over all conjugates u c u^-1 with |u| <= radius.

    Words are split as head + tail and the tails are multiplied in one batch per head.
    """
    count = oracle_word_count(ref.presentation.rank, radius)
    if count > budget:
        raise BudgetExceededError(f"Oracle radius {radius} needs {count} words, budget is {budget}")
    presentation, rho0 = ref.presentation, ref.fuchsian
    repelling, attracting = axis(curve.core, ref)
    head_length = radius // 2
    heads, head_matrices = _reduced_words(presentation, rho0, head_length, exact=True)
    tails, tail_matrices = _reduced_words(presentation, rho0, radius - head_length, exact=False)
    shorter, shorter_matrices = _reduced_words(presentation, rho0, max(head_length - 1, 0), exact=False)
    tail_stack = np.array(tail_matrices)
    hits: set[Word] = set()

    def scan(prefix: Word, words: Sequence[Word], indices: np.ndarray, stack: np.ndarray) -> None:
        rep = stack @ repelling
        att = stack @ attracting
        normals = np.cross(rep, att)
        mask = (normals @ start) * (normals @ end) < 0
        for k in np.flatnonzero(mask):
            u = Word(prefix.letters + words[indices[k]].letters)
            hits.add(coset_representative(invert(u), curve.core))

    if head_length > 0:
        indices = np.array([k for k, w in enumerate(shorter) if len(w) < head_length])
        scan(EMPTY, shorter, indices, np.array(shorter_matrices)[indices])
    first_letters = [t.letters[0] if t else None for t in tails]
    allowed = {
        letter: np.array([k for k, first in enumerate(first_letters) if first != (letter[0], -letter[1])])
        for letter in presentation.letters
    }
    everything = np.arange(len(tails))
    for head, head_matrix in zip(heads, head_matrices):
        indices = allowed[head.letters[-1]] if head else everything
        scan(head, tails, indices, head_matrix @ tail_stack[indices])

    # Batched products only propose candidates; each coset representative is retested.
    lifts: List[Lift] = []
    for word in sorted(hits, key=Word.shortlex_key):
        pair = lift_endpoints(word, curve.core, ref)
        normal = np.cross(*pair)
        if (normal @ start) * (normal @ end) < 0:
            _merge_lift(lifts, word, pair)

    crossings = []
    for word, r, a in lifts:
        sign, position = _crossing_geometry(start, end, r, a)
        crossings.append(Crossing(word, sign, position, r, a))
    crossings.sort(key=lambda c: c.position)
    return crossings


def compare_crossings(found: Sequence[Crossing], expected: Sequence[Crossing]) -> List[Dict]:
    """Mismatches between two crossing lists, matched by lift endpoints."""
    mismatches = []
    unmatched = list(expected)
    for index, crossing in enumerate(found):
        match = next(
            (
                other for other in unmatched
                if _same_endpoints((crossing.repelling, crossing.attracting), (other.repelling, other.attracting))
            ),
            None,
        )
        if match is None:
            mismatches.append({"kind": "extra", "conjugator": str(crossing.conjugator), "sign": crossing.sign})
            continue
        unmatched.remove(match)
        if match.sign != crossing.sign:
            mismatches.append({"kind": "sign", "conjugator": str(crossing.conjugator)})
        if expected.index(match) != index:
            mismatches.append({"kind": "order", "conjugator": str(crossing.conjugator)})
    for other in unmatched:
        mismatches.append({"kind": "missing", "conjugator": str(other.conjugator), "sign": other.sign})
    return mismatches
