import logging
import time
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from quakebend import __version__
from quakebend.config import CurveConfig, RunConfig, config_hash
from quakebend.covering import (
    ReferenceStructure,
    basepoint_offset,
    brute_force_crossings,
    compare_crossings,
    crossing_sequence,
    reference_structure,
    segment_for,
    side_separation,
)
from quakebend.deform import CentralizerParameter, WeightedMulticurve, deform, validate_multicurve
from quakebend.earthquake import LaminationApproximation, earthquake_limit, sequence_distance
from quakebend.errors import CheckFailure, ConfigError, DegeneracyError, QuakebendError
from quakebend.limitset import circle_fit_deviation, limitset_cloud, plot_cloud
from quakebend.report_handler import ReportHandler
from quakebend.representation import Representation
from quakebend.surface_group import parse_word
from quakebend.verify import THRESHOLDS, CheckResult, SuiteOptions, bent_fixture, check_homomorphism, run_suite

logger = logging.getLogger(__name__)

COMMANDS = ("deform", "earthquake", "verify", "crossings", "limitset")
RETRY_OFFSETS = (
    (1e-3, 0.0),
    (0.0, 1e-3),
    (-1e-3, 0.0),
    (0.0, -1e-3),
    (2e-3, 2e-3),
)
DEFAULT_CURVE = CurveConfig(word="a1", translation=0.5)


def build_multicurve(curves: List[CurveConfig], genus: int) -> WeightedMulticurve:
    components = []
    for curve in curves:
        mc = WeightedMulticurve.single(
            parse_word(curve.word, genus), curve.weight, curve.translation, curve.angle, curve.selector
        )
        components.extend(mc.components)
    return WeightedMulticurve(tuple(components))


def build_reference(cfg: RunConfig, offset: Tuple[float, float] = (0.0, 0.0)) -> ReferenceStructure:
    """Reference structure from the config, twisted if asked, with the basepoint moved by ``offset``."""
    ref = reference_structure(cfg.genus, matrices=cfg.reference.matrices)
    if cfg.reference.twists:
        twists = WeightedMulticurve(
            tuple(
                component
                for word, amount in sorted(cfg.reference.twists.items())
                for component in WeightedMulticurve.single(parse_word(word, cfg.genus), translation=amount).components
            )
        )
        validate_multicurve(twists, ref)
        twisted = deform(ref.fuchsian, twists, 1.0, ref)
        ref = reference_structure(cfg.genus, matrices=twisted.images)
    base = np.array(cfg.reference.basepoint or (0.0, 0.0)) + np.array(offset)
    if np.any(base):
        ref = basepoint_offset(ref, base)
    return ref


def build_representation(cfg: RunConfig, ref: ReferenceStructure) -> Representation:
    n = cfg.representation.dimension
    match cfg.representation.source:
        case "reference":
            return ref.fuchsian.embedded(n)
        case "explicit":
            rho = Representation.from_matrices(cfg.genus, cfg.representation.matrices)
            if rho.dimension != n:
                raise ConfigError(
                    f"representation.matrices are in SO({rho.dimension},1) but dimension is {n}"
                )
            return rho.validate(cfg.tolerances.homomorphism)
        case "bent":
            return bent_fixture(n, cfg.representation.bend, cfg.seed, ref)
    raise ConfigError(f"Unknown representation source '{cfg.representation.source}'")


def _crossing_summary(rho_ref: ReferenceStructure, mc: WeightedMulticurve) -> Dict[str, Any]:
    summary = {}
    for A in rho_ref.presentation.generator_words:
        entries = []
        for index, curve in enumerate(mc.curves):
            for crossing in crossing_sequence(A, curve, rho_ref).crossings:
                entries.append(
                    {"curve": index, "conjugator": str(crossing.conjugator), "sign": crossing.sign,
                     "position": crossing.position}
                )
        entries.sort(key=lambda e: e["position"])
        summary[str(A)] = entries
    return summary


def run_deform(cfg: RunConfig, ref: ReferenceStructure, handler: ReportHandler) -> Dict[str, Any]:
    rho = build_representation(cfg, ref)
    mc = validate_multicurve(build_multicurve(cfg.curves or [DEFAULT_CURVE], cfg.genus), ref)
    deformed = deform(rho, mc, cfg.deform.t, ref, tol=cfg.tolerances.homomorphism)
    check = check_homomorphism(deformed)
    return {
        "checks": [check.to_dict()],
        "result": {
            "input": rho.to_lists(),
            "output": deformed.to_lists(),
            "multicurve": mc.to_dict(),
            "t": cfg.deform.t,
            "crossings": _crossing_summary(ref, mc),
        },
        "summary": {"relator_residual": check.residual, "components": len(mc)},
    }


def _explicit_sequence(steps: List[List[CurveConfig]], genus: int) -> Tuple[WeightedMulticurve, ...]:
    return tuple(build_multicurve(step, genus) for step in steps)


def run_earthquake(cfg: RunConfig, ref: ReferenceStructure, handler: ReportHandler) -> Dict[str, Any]:
    rho = build_representation(cfg, ref)
    eq = cfg.earthquake
    if eq.kind == "recipe":
        la = LaminationApproximation.recipe(
            parse_word(eq.seed_curve, cfg.genus),
            parse_word(eq.twisting_curve, cfg.genus),
            eq.count,
            CentralizerParameter(eq.translation, eq.angle),
        )
    else:
        la = LaminationApproximation(sequence=_explicit_sequence(eq.sequence, cfg.genus))
    report = earthquake_limit(rho, la, eq.tol, ref, eq.max_steps, eq.max_seconds)
    handler.write_frame_csv(report.to_frame(), "convergence.csv")
    check = check_homomorphism(report.final)
    converged = report.verdict.value == "converged"
    result = {
        "verdict": report.verdict.value,
        "distances": [d.distance for d in report.distances],
        "steps": report.steps,
        "side_violations": report.side_violations,
        "truncated": report.truncated,
        "final": report.final.to_lists(),
    }
    if eq.compare:
        other = earthquake_limit(
            rho, LaminationApproximation(sequence=_explicit_sequence(eq.compare, cfg.genus)), eq.tol, ref,
            eq.max_steps, eq.max_seconds,
        )
        result["sequence_distance"] = sequence_distance(report, other)
    return {
        "checks": [check.to_dict()],
        "result": result,
        "summary": {"verdict": report.verdict.value, "steps": report.steps,
                    "last_distance": result["distances"][-1] if report.distances else None},
        "passed": check.passed and converged and report.side_violations == 0,
        "timings": {"earthquake": report.elapsed},
    }


def run_verify(cfg: RunConfig, ref: ReferenceStructure, handler: ReportHandler) -> Dict[str, Any]:
    rho = build_representation(cfg, ref)
    mc = validate_multicurve(build_multicurve(cfg.curves or [DEFAULT_CURVE], cfg.genus), ref)
    v = cfg.verify
    options = SuiteOptions(
        t=cfg.deform.t,
        flow=tuple(v.flow),
        offset=tuple(v.offset),
        oracle_words=tuple(v.oracle_words),
        oracle_radius=v.oracle_radius,
        cocycle_words=tuple(v.cocycle_words),
        h=v.h,
        delta=v.delta,
        distinct_with=v.distinct_with,
        checks=None if v.checks is None else tuple(v.checks),
    )
    results = run_suite(rho, mc, ref, options)
    return {
        "checks": [r.to_dict() for r in results],
        "result": {"multicurve": mc.to_dict()},
        "summary": {"checks": len(results), "failed": sum(not r.passed for r in results)},
    }


def run_crossings(cfg: RunConfig, ref: ReferenceStructure, handler: ReportHandler) -> Dict[str, Any]:
    mc = validate_multicurve(build_multicurve(cfg.curves or [DEFAULT_CURVE], cfg.genus), ref)
    sequences = []
    mismatches = 0
    violations = 0
    for text in cfg.crossings.words:
        A = parse_word(text, cfg.genus)
        if not A:
            continue
        start, end = segment_for(A, ref)
        for curve in mc.curves:
            sequence = crossing_sequence(A, curve, ref)
            violations += side_separation(sequence.crossings, start, end)
            entry = {
                "word": str(A),
                "curve": str(curve.core),
                "crossings": [
                    {"conjugator": str(c.conjugator), "sign": c.sign, "position": c.position}
                    for c in sequence.crossings
                ],
            }
            if cfg.crossings.oracle_radius is not None:
                expected = brute_force_crossings(start, end, curve, ref, cfg.crossings.oracle_radius)
                found = compare_crossings(sequence.crossings, expected)
                mismatches += len(found)
                entry["oracle_mismatches"] = found
            sequences.append(entry)
    checks = [CheckResult("side_separation", float(violations), THRESHOLDS["side_separation"], violations == 0)]
    if cfg.crossings.oracle_radius is not None:
        details = {"oracle_radius": cfg.crossings.oracle_radius}
        checks.append(
            CheckResult("crossing_oracle", float(mismatches), THRESHOLDS["crossing_oracle"], mismatches == 0, details=details)
        )
    return {
        "checks": [check.to_dict() for check in checks],
        "result": {"sequences": sequences},
        "summary": {"sequences": len(sequences), "crossings": sum(len(s["crossings"]) for s in sequences)},
    }


def run_limitset(cfg: RunConfig, ref: ReferenceStructure, handler: ReportHandler) -> Dict[str, Any]:
    rho = build_representation(cfg, ref)
    if cfg.curves:
        mc = validate_multicurve(build_multicurve(cfg.curves, cfg.genus), ref)
        rho = deform(rho, mc, cfg.deform.t, ref, tol=cfg.tolerances.homomorphism)
    points = limitset_cloud(rho, cfg.limitset.depth, cfg.limitset.max_words)
    handler.write_cloud_csv(points)
    plot = None
    if cfg.limitset.plot and len(points):
        plot = plot_cloud(points, handler.path("limitset.svg"), f"config-sha256: {handler.digest}")
    deviation = circle_fit_deviation(points)
    return {
        "checks": [],
        "result": {"points": len(points), "circle_fit_deviation": deviation, "plot": plot is not None},
        "summary": {"points": len(points), "circle_fit_deviation": deviation},
    }


RUNNERS: Dict[str, Callable[[RunConfig, ReferenceStructure, ReportHandler], Dict[str, Any]]] = {
    "deform": run_deform,
    "earthquake": run_earthquake,
    "verify": run_verify,
    "crossings": run_crossings,
    "limitset": run_limitset,
}


class QuakebendApp:
    """Runs one command against a validated config and writes its artifacts."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.digest = config_hash(cfg)
        self.handler = ReportHandler(self.digest, cfg.output.dir)

    def _execute(self, command: str) -> Tuple[Dict[str, Any], List[List[float]]]:
        runner = RUNNERS[command]
        retries: List[List[float]] = []
        try:
            return runner(self.cfg, build_reference(self.cfg), self.handler), retries
        except DegeneracyError as e:
            last = e
            logger.warning("Degenerate configuration (%s); retrying with a moved basepoint", e)
        for offset in RETRY_OFFSETS:
            retries.append(list(offset))
            logger.warning("Retrying %s with basepoint offset %s", command, offset)
            try:
                return runner(self.cfg, build_reference(self.cfg, offset), self.handler), retries
            except DegeneracyError as e:
                last = e
        raise last

    def run(self, command: str) -> int:
        """
        Runs ``command`` and writes report.json, report.txt and timings.json.

        Returns:
            int: 0 when every internal check passed, otherwise the check-failure exit code.

        Raises:
            QuakebendError: After writing witness.json, for any module error.
        """
        if command not in RUNNERS:
            raise ConfigError(f"Unknown command '{command}'")
        started = time.monotonic()
        try:
            body, retries = self._execute(command)
        except QuakebendError as e:
            self.handler.write_witness(e, e.witness)
            raise
        timings = {"total": time.monotonic() - started, **body.pop("timings", {})}
        passed = body.pop("passed", all(check["passed"] for check in body["checks"]))
        report = {
            "command": command,
            "version": __version__,
            "config": self.cfg.model_dump(mode="json"),
            "retries": retries,
            "passed": passed,
            **body,
        }
        self.handler.write_report(report)
        self.handler.write_text_report(report)
        self.handler.write_timings(timings)
        logger.info("Wrote %s report to %s", command, self.handler.out_dir)
        if not passed:
            failed = [check for check in body["checks"] if not check["passed"]]
            error = CheckFailure(f"Checks failed: {', '.join(c['name'] for c in failed) or command}")
            logger.error("%s", error)
            self.handler.write_witness(error, {"checks": failed, "result": body.get("summary", {})})
            return error.exit_code
        return 0
