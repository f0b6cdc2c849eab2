"""Residual checks for the structural properties of deformations.

Every check returns a CheckResult that passes iff its residual is below the threshold in
THRESHOLDS. Counting checks use a threshold of 1, so they pass only with a residual of 0.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Sequence

import numpy as np

from quakebend.covering import (
    OrientedCurve,
    ReferenceStructure,
    basepoint_offset,
    brute_force_crossings,
    compare_crossings,
    crossing_sequence,
    homotopic,
    intersection_number,
    reference_structure,
    segment_for,
    side_separation,
)
from quakebend.deform import (
    CentralizerParameter,
    WeightedMulticurve,
    basepoint_conjugator,
    deform,
    deformation_factor,
    evaluate_deformation,
    gamma_base,
    infinitesimal_cocycle,
)
from quakebend.earthquake import weight_lipschitz
from quakebend.errors import LogBranchError, PreconditionError
from quakebend.minkowski import isometry_inverse, log_group, random_isometry
from quakebend.representation import Representation
from quakebend.surface_group import Word, concat, invert, parse_word, power

logger = logging.getLogger(__name__)

THRESHOLDS: Dict[str, float] = {
    "homomorphism": 1e-8,
    "inverse": 1e-9,
    "flow": 1e-8,
    "commutativity": 1e-8,
    "basepoint": 1e-8,
    "crossing_oracle": 1.0,
    "cocycle": 1e-9,
    "cocycle_first_order": 0.2,
    "conjugacy_invariance": 1e-8,
    "orientation": 1e-8,
    "quake_bend": 1e-8,
    "distinct": 0.5,
    "weight_lipschitz": 1.0,
    "side_separation": 1.0,
}

FIRST_ORDER_FLOOR = 1e-8
DISTINCT_SCALE = 1e-8


@dataclass
class CheckResult:
    name: str
    residual: float
    threshold: float
    passed: bool
    witness: Dict[str, Any] | None = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "residual": self.residual,
            "threshold": self.threshold,
            "passed": self.passed,
            "witness": self.witness,
            "details": self.details,
        }


def _result(name: str, residual: float, witness: Callable[[], Dict[str, Any]] | None = None, **details) -> CheckResult:
    threshold = THRESHOLDS[name]
    passed = bool(residual < threshold)
    if not passed:
        logger.warning("Check %s failed: residual %.3e, threshold %.1e", name, residual, threshold)
    return CheckResult(name, float(residual), threshold, passed, None if passed or witness is None else witness(), details)


def _witness(rho: Representation, mc: WeightedMulticurve | None = None, **extra) -> Callable[[], Dict[str, Any]]:
    def build() -> Dict[str, Any]:
        data: Dict[str, Any] = {"genus": rho.genus, "matrices": rho.to_lists()}
        if mc is not None:
            data["multicurve"] = mc.to_dict()
        data.update(extra)
        return data

    return build


def check_homomorphism(rep: Representation) -> CheckResult:
    return _result("homomorphism", rep.relator_residual(), _witness(rep))


def check_inverse(
    rho: Representation, mc: WeightedMulticurve, t: float, words: Sequence[Word], ref: ReferenceStructure
) -> CheckResult:
    residual = 0.0
    for A in words:
        forward = evaluate_deformation(rho, mc, t, A, ref)
        backward = evaluate_deformation(rho, mc, t, invert(A), ref)
        residual = max(residual, float(np.linalg.norm(backward - isometry_inverse(forward))))
    return _result("inverse", residual, _witness(rho, mc, t=t, words=[str(w) for w in words]))


def check_flow(rho: Representation, mc: WeightedMulticurve, s: float, t: float, ref: ReferenceStructure) -> CheckResult:
    """E_t(E_s(rho)) against E_{s+t}(rho), with gammas recomputed on E_s(rho)."""
    composed = deform(deform(rho, mc, s, ref), mc, t, ref)
    direct = deform(rho, mc, s + t, ref)
    distance = composed.distance(direct)
    return _result("flow", distance.value, _witness(rho, mc, s=s, t=t), fallback=distance.fallback)


def _check_commuting_gammas(
    rho: Representation, first: WeightedMulticurve, second: WeightedMulticurve, ref: ReferenceStructure
) -> None:
    for curve_a, p_a in first:
        for curve_b, p_b in second:
            if curve_a.core == curve_b.core or curve_a.core == curve_b.reversed().core:
                g_a = gamma_base(rho, curve_a, p_a, 1.0)
                g_b = gamma_base(rho, curve_b, p_b, 1.0)
                defect = float(np.linalg.norm(g_a @ g_b - g_b @ g_a))
                if defect > THRESHOLDS["commutativity"] * max(1.0, np.linalg.norm(g_a) * np.linalg.norm(g_b)):
                    raise PreconditionError(
                        f"Centralizer parameters on '{curve_a.core}' do not commute (defect {defect:.3e})",
                        witness={"first": first.to_dict(), "second": second.to_dict(), "defect": defect},
                    )
            elif homotopic(curve_a, curve_b, ref):
                raise PreconditionError(
                    f"Curves '{curve_a.core}' and '{curve_b.core}' are homotopic; use the same word"
                )
            elif intersection_number(curve_a, curve_b, ref):
                raise PreconditionError(f"Curves '{curve_a.core}' and '{curve_b.core}' intersect")


def check_commutativity(
    rho: Representation, first: WeightedMulticurve, second: WeightedMulticurve, ref: ReferenceStructure
) -> CheckResult:
    """Both application orders of two deformations whose gammas commute."""
    _check_commuting_gammas(rho, first, second, ref)
    one_way = deform(deform(rho, first, 1.0, ref), second, 1.0, ref)
    other_way = deform(deform(rho, second, 1.0, ref), first, 1.0, ref)
    distance = one_way.distance(other_way)
    return _result(
        "commutativity",
        distance.value,
        _witness(rho, first, second=second.to_dict()),
        fallback=distance.fallback,
    )


def check_basepoint(
    rho: Representation, mc: WeightedMulticurve, t: float, offset: Sequence[float], ref: ReferenceStructure
) -> CheckResult:
    moved = basepoint_offset(ref, offset)
    original = deform(rho, mc, t, ref)
    shifted = deform(rho, mc, t, moved)
    g = basepoint_conjugator(rho, mc, t, ref, moved)
    distance = shifted.distance(original.conjugate(g))
    return _result(
        "basepoint",
        distance.value,
        _witness(rho, mc, t=t, offset=list(offset)),
        conjugator_is_identity=bool(np.allclose(g, np.eye(len(g)))),
    )


def check_crossing_oracle(
    words: Sequence[Word],
    curves: Sequence[OrientedCurve],
    ref: ReferenceStructure,
    oracle_radius: int = 8,
    search_radius: float | None = None,
) -> CheckResult:
    """Covering-radius enumeration against the exhaustive conjugator search."""
    mismatches: List[Dict[str, Any]] = []
    compared = 0
    for A in words:
        if not A:
            continue
        start, end = segment_for(A, ref)
        for curve in curves:
            found = crossing_sequence(A, curve, ref, radius=search_radius).crossings
            expected = brute_force_crossings(start, end, curve, ref, oracle_radius)
            compared += len(expected)
            for mismatch in compare_crossings(found, expected):
                mismatches.append({"word": str(A), "curve": str(curve.core), **mismatch})
    return _result(
        "crossing_oracle",
        len(mismatches),
        lambda: {"mismatches": mismatches, "oracle_radius": oracle_radius, "search_radius": search_radius},
        compared=compared,
    )


def check_cocycle(
    rho: Representation, mc: WeightedMulticurve, A: Word, B: Word, ref: ReferenceStructure
) -> CheckResult:
    """u(AB) = Ad(rho(B)^-1) u(A) + u(B)."""
    rho_b = rho.evaluate(B)
    predicted = isometry_inverse(rho_b) @ infinitesimal_cocycle(rho, mc, A, ref) @ rho_b + infinitesimal_cocycle(
        rho, mc, B, ref
    )
    residual = float(np.linalg.norm(infinitesimal_cocycle(rho, mc, concat(A, B), ref) - predicted))
    return _result("cocycle", residual, _witness(rho, mc, A=str(A), B=str(B)))


def _first_order_error(rho, mc, A, h, ref, u) -> float:
    return float(np.linalg.norm(log_group(deformation_factor(rho, mc, h, A, ref)) / h - u))


def check_cocycle_first_order(
    rho: Representation, mc: WeightedMulticurve, A: Word, ref: ReferenceStructure, h: float = 1e-4
) -> CheckResult:
    """The finite-difference error of u(A) halves when h halves."""
    u = infinitesimal_cocycle(rho, mc, A, ref)
    try:
        error = _first_order_error(rho, mc, A, h, ref, u)
        half_error = _first_order_error(rho, mc, A, h / 2, ref, u)
    except LogBranchError as e:
        raise LogBranchError(f"Finite difference step {h} is too large: {e}") from e
    if error < FIRST_ORDER_FLOOR:
        return _result("cocycle_first_order", 0.0, error=error, half_error=half_error, ratio=None)
    ratio = error / half_error if half_error > 0 else float("inf")
    return _result(
        "cocycle_first_order",
        abs(ratio - 2.0) / 2.0,
        _witness(rho, mc, A=str(A), h=h),
        error=error,
        half_error=half_error,
        ratio=ratio,
    )


def check_conjugacy_invariance(
    rho: Representation, mc: WeightedMulticurve, t: float, ref: ReferenceStructure, max_power: int = 5
) -> CheckResult:
    """Relative trace change of E(c^k) against rho(c^k) for each curve core."""
    residual = 0.0
    for curve in mc.curves:
        for k in range(1, max_power + 1):
            word = power(curve.core, k)
            before = np.trace(rho.evaluate(word))
            after = np.trace(evaluate_deformation(rho, mc, t, word, ref))
            residual = max(residual, abs(after - before) / max(1.0, abs(before)))
    return _result("conjugacy_invariance", residual, _witness(rho, mc, t=t))


def check_orientation(rho: Representation, mc: WeightedMulticurve, t: float, ref: ReferenceStructure) -> CheckResult:
    distance = deform(rho, mc, t, ref).distance(deform(rho, mc.reversed(), t, ref))
    return _result("orientation", distance.value, _witness(rho, mc, t=t))


def check_quake_bend(
    rho: Representation, curve: OrientedCurve, parameter: CentralizerParameter, t: float, ref: ReferenceStructure
) -> CheckResult:
    """A combined twist and bend equals the pure twist followed by the pure bend, in either order."""
    combined = WeightedMulticurve(((curve, parameter),))
    twist = WeightedMulticurve(((curve, CentralizerParameter(parameter.translation, 0.0, parameter.selector)),))
    bend = WeightedMulticurve(((curve, CentralizerParameter(0.0, parameter.angle, parameter.selector)),))
    direct = deform(rho, combined, t, ref)
    residual = max(
        direct.distance(deform(deform(rho, twist, t, ref), bend, t, ref)).value,
        direct.distance(deform(deform(rho, bend, t, ref), twist, t, ref)).value,
    )
    return _result("quake_bend", residual, _witness(rho, combined, t=t))


def check_distinct(
    rho: Representation, first: WeightedMulticurve, second: WeightedMulticurve, t: float, ref: ReferenceStructure
) -> CheckResult:
    """Deformations along disjoint non-homotopic curves differ; residual 1/(1 + d/1e-8)."""
    for a in first.curves:
        for b in second.curves:
            if homotopic(a, b, ref) or intersection_number(a, b, ref):
                raise PreconditionError(f"Curves '{a.core}' and '{b.core}' must be disjoint and not homotopic")
    distance = deform(rho, first, t, ref).distance(deform(rho, second, t, ref)).value
    return _result(
        "distinct",
        1.0 / (1.0 + distance / DISTINCT_SCALE),
        _witness(rho, first, second=second.to_dict(), t=t),
        distance=distance,
    )


def check_weight_lipschitz(
    rho: Representation, mc: WeightedMulticurve, delta: float, ref: ReferenceStructure
) -> CheckResult:
    """|log2(ratio) - 1| for the distance ratio under halving the weight step."""
    report = weight_lipschitz(rho, mc, delta, ref)
    residual = 0.0 if report.ratio is None else abs(np.log2(report.ratio) - 1.0)
    return _result(
        "weight_lipschitz",
        residual,
        _witness(rho, mc, delta=delta),
        constant=report.constant,
        ratio=report.ratio,
    )


def check_side_separation(mc: WeightedMulticurve, words: Sequence[Word], ref: ReferenceStructure) -> CheckResult:
    violations = 0
    for A in words:
        if not A:
            continue
        start, end = segment_for(A, ref)
        for curve in mc.curves:
            violations += side_separation(crossing_sequence(A, curve, ref).crossings, start, end)
    return _result("side_separation", violations, lambda: {"multicurve": mc.to_dict(), "words": [str(w) for w in words]})


def reference_fixture(genus: int = 2) -> ReferenceStructure:
    return reference_structure(genus)


def bent_fixture(n: int, bend: float, seed: int, ref: ReferenceStructure | None = None) -> Representation:
    """
    The reference group placed in SO(n,1), bent along a1 and conjugated by a seeded random isometry.

    Args:
        n (int): Target dimension, 2 to 4; bending needs n >= 3.
        bend (float): Bending angle along a1.
        seed (int): Seed for the conjugating isometry.
        ref (ReferenceStructure | None): Reference structure, genus 2 by default.

    Returns:
        Representation: A purely loxodromic representation that is Fuchsian only when ``bend`` is 0.
    """
    ref = ref or reference_fixture()
    rho = ref.fuchsian.embedded(n)
    if bend and n >= 3:
        selector = tuple(np.eye(n + 1)[n - 1]) if n == 4 else None
        rho = deform(rho, WeightedMulticurve.single("a1", angle=bend, selector=selector), 1.0, ref)
    rng = np.random.default_rng(seed)
    return rho.conjugate(random_isometry(n, 0.3, rng)).reorthogonalized()


@dataclass
class SuiteOptions:
    t: float = 1.0
    flow: tuple = (0.3, 0.3)
    offset: tuple = (1e-3, 2e-3)
    oracle_words: tuple = ("a1", "b1", "a2", "b2", "a1 b1", "B1 a2")
    oracle_radius: int = 6
    cocycle_words: tuple = ("b1", "a2 b1")
    h: float = 1e-4
    delta: float = 1e-3
    distinct_with: str | None = "a2"
    checks: tuple | None = None


SUITE_ORDER = (
    "homomorphism",
    "inverse",
    "flow",
    "commutativity",
    "basepoint",
    "crossing_oracle",
    "cocycle",
    "cocycle_first_order",
    "conjugacy_invariance",
    "orientation",
    "quake_bend",
    "distinct",
    "weight_lipschitz",
    "side_separation",
)


def _partner(rho: Representation, mc: WeightedMulticurve) -> WeightedMulticurve:
    """Parameters on the same curves whose gammas commute with those of ``mc``."""
    if rho.dimension == 3:
        return WeightedMulticurve(tuple((c, CentralizerParameter(0.0, 0.1)) for c, _ in mc))
    return WeightedMulticurve(
        tuple((c, CentralizerParameter(0.5 * p.translation, 0.5 * p.angle, p.selector)) for c, p in mc)
    )


def run_suite(
    rho: Representation, mc: WeightedMulticurve, ref: ReferenceStructure, options: SuiteOptions | None = None
) -> List[CheckResult]:
    """Runs the selected checks in a fixed order."""
    options = options or SuiteOptions()
    selected = options.checks or SUITE_ORDER
    unknown = set(selected) - set(SUITE_ORDER)
    if unknown:
        raise PreconditionError(f"Unknown checks: {sorted(unknown)}")
    genus = ref.genus
    generators = ref.presentation.generator_words
    t = options.t
    results: List[CheckResult] = []
    for name in SUITE_ORDER:
        if name not in selected:
            continue
        logger.info("Running check %s", name)
        match name:
            case "homomorphism":
                results.append(check_homomorphism(deform(rho, mc, t, ref, tol=float("inf"))))
            case "inverse":
                results.append(check_inverse(rho, mc, t, generators, ref))
            case "flow":
                results.append(check_flow(rho, mc, options.flow[0], options.flow[1], ref))
            case "commutativity":
                results.append(check_commutativity(rho, mc, _partner(rho, mc), ref))
            case "basepoint":
                results.append(check_basepoint(rho, mc, t, options.offset, ref))
            case "crossing_oracle":
                words = [parse_word(w, genus) for w in options.oracle_words]
                results.append(check_crossing_oracle(words, mc.curves, ref, options.oracle_radius))
            case "cocycle":
                A, B = (parse_word(w, genus) for w in options.cocycle_words)
                results.append(check_cocycle(rho, mc, A, B, ref))
            case "cocycle_first_order":
                A = parse_word(options.cocycle_words[0], genus)
                results.append(check_cocycle_first_order(rho, mc, A, ref, options.h))
            case "conjugacy_invariance":
                results.append(check_conjugacy_invariance(rho, mc, t, ref))
            case "orientation":
                results.append(check_orientation(rho, mc, t, ref))
            case "quake_bend" | "distinct" if not len(mc):
                logger.info("Skipping %s for an empty multicurve", name)
                continue
            case "quake_bend":
                if rho.dimension != 3:
                    logger.info("Skipping quake_bend outside dimension 3")
                    continue
                curve, parameter = mc.components[0]
                angle = parameter.angle or 0.1
                results.append(check_quake_bend(rho, curve, CentralizerParameter(parameter.translation, angle), t, ref))
            case "distinct":
                if options.distinct_with is None:
                    continue
                other = WeightedMulticurve(
                    ((OrientedCurve.from_word(parse_word(options.distinct_with, genus)), mc.components[0][1]),)
                )
                clash = any(
                    homotopic(a, b, ref) or intersection_number(a, b, ref)
                    for a in mc.curves
                    for b in other.curves
                )
                if clash:
                    logger.info("Skipping distinct: '%s' meets the multicurve", options.distinct_with)
                    continue
                results.append(check_distinct(rho, mc, other, t, ref))
            case "weight_lipschitz":
                results.append(check_weight_lipschitz(rho, mc, options.delta, ref))
            case "side_separation":
                results.append(check_side_separation(mc, generators, ref))
    return results
