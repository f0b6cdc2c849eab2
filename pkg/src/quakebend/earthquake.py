"""Earthquakes as limits of deformations along weighted multicurves.

Every step deforms the original representation; the sequence is certified by its Cauchy tail.
"""

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from quakebend.covering import (
    OrientedCurve,
    ReferenceStructure,
    crossing_sequence,
    reference_translation,
    segment_for,
    side_separation,
)
from quakebend.deform import CentralizerParameter, WeightedMulticurve, deform, validate_multicurve
from quakebend.errors import PreconditionError
from quakebend.representation import Representation
from quakebend.surface_group import EMPTY, Word, concat, cyclic_reduce, invert, power

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_MAX_STEPS = 16
DIVERGENCE_FACTOR = 10.0
MONOTONE_SLACK = 1e-12


class Verdict(str, Enum):
    CONVERGED = "converged"
    BUDGET_EXHAUSTED = "budget-exhausted"
    DIVERGING = "diverging"


@dataclass(frozen=True)
class LaminationApproximation:
    """Either an explicit multicurve sequence or a Dehn twist recipe T_d^k(c), k = 1..count."""

    sequence: Tuple[WeightedMulticurve, ...] = ()
    seed_curve: Word | None = None
    twisting_curve: Word | None = None
    count: int = 0
    parameter: CentralizerParameter = CentralizerParameter(translation=1.0)

    @property
    def kind(self) -> str:
        return "recipe" if self.seed_curve is not None else "explicit"

    @classmethod
    def recipe(
        cls, seed_curve: Word, twisting_curve: Word, count: int, parameter: CentralizerParameter | None = None
    ) -> "LaminationApproximation":
        if count < 0:
            raise PreconditionError(f"Recipe count must be non-negative, got {count}")
        return cls(
            seed_curve=seed_curve,
            twisting_curve=twisting_curve,
            count=count,
            parameter=parameter or CentralizerParameter(translation=1.0),
        )


@dataclass(frozen=True)
class StepDistance:
    step: int
    distance: float
    fallback: bool


@dataclass(eq=False)
class ConvergenceReport:
    distances: List[StepDistance]
    verdict: Verdict
    final: Representation
    steps: int
    side_violations: int = 0
    truncated: str | None = None
    elapsed: float = field(default=0.0, compare=False)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "step": [d.step for d in self.distances],
                "distance": [d.distance for d in self.distances],
                "fallback": [d.fallback for d in self.distances],
            }
        )


@dataclass(frozen=True)
class LipschitzReport:
    constant: float
    ratio: float | None
    distance: float
    half_distance: float
    passed: bool


def _twist_images(d: Word, k: int, genus: int) -> dict:
    if len(d) != 1:
        raise PreconditionError(f"Unsupported twisting curve '{d}'; use a single generator a_i or b_i")
    index, _ = d.letters[0]
    if index >= 2 * genus:
        raise PreconditionError(f"Twisting curve '{d}' is outside genus {genus}")
    other = index + 1 if index % 2 == 0 else index - 1
    return {other: concat(Word.generator(other), power(Word.generator(index), k))}


def dehn_twist_word(w: Word, d: Word | OrientedCurve, k: int, ref: ReferenceStructure) -> Word:
    """
    Image of ``w`` under the k-fold Dehn twist along a standard generator curve.

    Twisting along a_i sends b_i to b_i a_i^k, twisting along b_i sends a_i to a_i b_i^k, and
    every other generator is fixed. Both preserve the relator letter for letter.
    """
    if k == 0:
        return w
    if isinstance(d, OrientedCurve):
        d = d.core
    images = _twist_images(d, k, ref.genus)
    result = EMPTY
    for index, exponent in w:
        image = images.get(index, Word.generator(index))
        result = concat(result, image if exponent > 0 else invert(image))
    return result


def build_sequence(la: LaminationApproximation, ref: ReferenceStructure) -> List[WeightedMulticurve]:
    if la.kind == "explicit":
        sequence = list(la.sequence)
    else:
        sequence = []
        for k in range(1, la.count + 1):
            core, _ = cyclic_reduce(dehn_twist_word(la.seed_curve, la.twisting_curve, k, ref))
            weight = 1.0 / reference_translation(core, ref)
            sequence.append(
                WeightedMulticurve.single(core, weight, la.parameter.translation, la.parameter.angle, la.parameter.selector)
            )
    for mc in sequence:
        validate_multicurve(mc, ref)
    return sequence


def _side_violations(mc: WeightedMulticurve, ref: ReferenceStructure) -> int:
    violations = 0
    for A in ref.presentation.generator_words:
        start, end = segment_for(A, ref)
        for curve in mc.curves:
            violations += side_separation(crossing_sequence(A, curve, ref).crossings, start, end)
    return violations


def _verdict(distances: Sequence[float], tol: float, truncated: bool) -> Verdict:
    for j in range(len(distances) - 2):
        if distances[j + 2] > tol and distances[j + 2] >= DIVERGENCE_FACTOR * distances[j]:
            return Verdict.DIVERGING
    if truncated or not distances:
        return Verdict.BUDGET_EXHAUSTED
    tail = distances[-3:]
    monotone = all(b <= a + MONOTONE_SLACK for a, b in zip(tail, tail[1:]))
    if distances[-1] < tol and monotone:
        return Verdict.CONVERGED
    return Verdict.BUDGET_EXHAUSTED


def earthquake_limit(
    rho: Representation,
    la: LaminationApproximation,
    tol: float,
    ref: ReferenceStructure,
    max_steps: int = DEFAULT_MAX_STEPS,
    max_seconds: float | None = None,
) -> ConvergenceReport:
    """
    Deforms rho along every multicurve of the approximation and tests the Cauchy tail.

    Args:
        rho (Representation): Original representation; each step starts from it.
        la (LaminationApproximation): The sequence or recipe.
        tol (float): Threshold on the last successive distance.
        ref (ReferenceStructure): Reference structure for the crossing combinatorics.
        max_steps (int): Steps beyond this are dropped.
        max_seconds (float | None): Wall-clock cap.

    Returns:
        ConvergenceReport: Successive max-generator distances, verdict and the final representation.
    """
    sequence = build_sequence(la, ref)
    if not sequence:
        raise PreconditionError("Earthquake sequence is empty")
    truncated = None
    if len(sequence) > max_steps:
        logger.warning("Truncating earthquake sequence from %d to %d steps", len(sequence), max_steps)
        sequence = sequence[:max_steps]
        truncated = "max_steps"

    started = time.monotonic()
    previous: Representation | None = None
    distances: List[StepDistance] = []
    violations = 0
    steps = 0
    for k, mc in enumerate(sequence, start=1):
        if k > 1 and max_seconds is not None and time.monotonic() - started > max_seconds:
            logger.warning("Earthquake stopped after %d steps at the %.1fs wall-clock cap", steps, max_seconds)
            truncated = "max_seconds"
            break
        current = deform(rho, mc, 1.0, ref)
        violations += _side_violations(mc, ref)
        if previous is not None:
            d = previous.distance(current)
            distances.append(StepDistance(k - 1, d.value, d.fallback))
            logger.debug("Step %d: distance %.3e", k - 1, d.value)
        previous = current
        steps = k

    verdict = _verdict([d.distance for d in distances], tol, truncated is not None)
    logger.info("Earthquake verdict %s after %d steps", verdict.value, steps)
    return ConvergenceReport(
        distances, verdict, previous, steps, violations, truncated, time.monotonic() - started
    )


def weight_lipschitz(
    rho: Representation, mc: WeightedMulticurve, delta: float, ref: ReferenceStructure
) -> LipschitzReport:
    """Measures C in d(E_w, E_{w+delta}) <= C r delta and checks linear scaling under halving."""
    if delta <= 0:
        raise PreconditionError(f"Weight step must be positive, got {delta}")
    weights = np.array([curve.weight for curve in mc.curves])
    base = deform(rho, mc, 1.0, ref)
    distance = base.distance(deform(rho, mc.with_weights(weights + delta), 1.0, ref)).value
    half_distance = base.distance(deform(rho, mc.with_weights(weights + delta / 2), 1.0, ref)).value
    components = max(len(mc), 1)
    constant = distance / (components * delta)
    if half_distance == 0.0:
        return LipschitzReport(constant, None, distance, half_distance, distance == 0.0)
    ratio = distance / half_distance
    return LipschitzReport(constant, ratio, distance, half_distance, 1.0 <= ratio <= 4.0)


def sequence_distance(first: ConvergenceReport, second: ConvergenceReport) -> float:
    return first.final.distance(second.final).value
