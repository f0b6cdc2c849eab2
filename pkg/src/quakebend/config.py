"""Run configuration: TOML text validated into a RunConfig."""

import hashlib
import json
import tomllib
from pathlib import Path
from typing import Dict, List, Literal, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from quakebend.errors import ConfigError
from quakebend.surface_group import parse_word


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CurveConfig(StrictModel):
    word: str
    weight: float = Field(1.0, gt=0)
    translation: float = 0.0
    angle: float = 0.0
    selector: List[float] | None = None


class RepresentationConfig(StrictModel):
    source: Literal["reference", "explicit", "bent"] = "reference"
    dimension: int = Field(2, ge=2, le=4)
    matrices: List[List[List[float]]] | None = None
    bend: float = 0.2


class ReferenceConfig(StrictModel):
    matrices: List[List[List[float]]] | None = None
    twists: Dict[str, float] = {}
    basepoint: Tuple[float, float] | None = None


class DeformConfig(StrictModel):
    t: float = 1.0


class EarthquakeConfig(StrictModel):
    kind: Literal["recipe", "explicit"] = "recipe"
    seed_curve: str = "b1"
    twisting_curve: str = "a1"
    count: int = Field(8, ge=0)
    translation: float = 1e-3
    angle: float = 0.0
    sequence: List[List[CurveConfig]] = []
    compare: List[List[CurveConfig]] = []
    tol: float = Field(1e-6, gt=0)
    max_steps: int = Field(16, ge=1)
    max_seconds: float | None = Field(None, gt=0)


class VerifyConfig(StrictModel):
    checks: List[str] | None = None
    flow: Tuple[float, float] = (0.3, 0.3)
    offset: Tuple[float, float] = (1e-3, 2e-3)
    oracle_words: List[str] = ["a1", "b1", "a2", "b2", "a1 b1", "B1 a2"]
    oracle_radius: int = Field(6, ge=0, le=8)
    cocycle_words: Tuple[str, str] = ("b1", "a2 b1")
    h: float = Field(1e-4, gt=0)
    delta: float = Field(1e-3, gt=0)
    distinct_with: str | None = "a2"


class CrossingsConfig(StrictModel):
    words: List[str] = ["a1", "b1"]
    oracle_radius: int | None = Field(None, ge=0, le=8)


class LimitsetConfig(StrictModel):
    depth: int = Field(4, ge=0)
    max_words: int = Field(200_000, gt=0)
    plot: bool = True


class TolerancesConfig(StrictModel):
    homomorphism: float = Field(1e-8, gt=0)


class OutputConfig(StrictModel):
    dir: str | None = None


class RunConfig(StrictModel):
    genus: int = Field(2, ge=2)
    seed: int = 0
    representation: RepresentationConfig = RepresentationConfig()
    reference: ReferenceConfig = ReferenceConfig()
    curves: List[CurveConfig] = []
    deform: DeformConfig = DeformConfig()
    earthquake: EarthquakeConfig = EarthquakeConfig()
    verify: VerifyConfig = VerifyConfig()
    crossings: CrossingsConfig = CrossingsConfig()
    limitset: LimitsetConfig = LimitsetConfig()
    tolerances: TolerancesConfig = TolerancesConfig()
    output: OutputConfig = OutputConfig()

    @field_validator("curves")
    @classmethod
    def _nonempty_words(cls, curves: List[CurveConfig]) -> List[CurveConfig]:
        for curve in curves:
            if not curve.word.strip():
                raise ValueError("curve word must be nonempty")
        return curves

    @model_validator(mode="after")
    def _check_words(self) -> "RunConfig":
        words = [c.word for c in self.curves]
        words += [self.earthquake.seed_curve, self.earthquake.twisting_curve]
        words += [c.word for step in self.earthquake.sequence + self.earthquake.compare for c in step]
        words += self.verify.oracle_words + list(self.verify.cocycle_words) + self.crossings.words
        words += list(self.reference.twists)
        if self.verify.distinct_with is not None:
            words.append(self.verify.distinct_with)
        for word in words:
            parse_word(word, self.genus)
        for word in [c.word for c in self.curves] + [self.earthquake.seed_curve, self.earthquake.twisting_curve]:
            if not parse_word(word, self.genus):
                raise ValueError(f"curve word '{word}' reduces to the empty word")

        n = self.representation.dimension
        for curve in self.curves:
            if n == 2 and curve.angle != 0.0:
                raise ValueError(f"curve '{curve.word}' has a bending angle but dimension is 2")
            if curve.selector is not None and len(curve.selector) != n + 1:
                raise ValueError(f"curve '{curve.word}' selector needs {n + 1} coordinates")
        if self.representation.source == "explicit" and self.representation.matrices is None:
            raise ValueError("representation.matrices is required for source 'explicit'")
        if self.representation.source == "bent" and n == 2:
            raise ValueError("representation source 'bent' needs dimension 3 or 4")
        if self.earthquake.kind == "explicit" and not self.earthquake.sequence:
            raise ValueError("earthquake.sequence is required for kind 'explicit'")
        return self


def _location(error: Dict) -> str:
    return ".".join(str(part) for part in error["loc"]) or "<root>"


def parse_config(text: str, source: str = "<string>") -> RunConfig:
    """
    Parses and validates TOML configuration text.

    Args:
        text (str): TOML document.
        source (str): Name used in error messages.

    Returns:
        RunConfig: The validated configuration.
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Failed to parse config '{source}': {e}") from e
    return validate_config(data, source)


def validate_config(data: Dict, source: str = "<string>") -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(f"{_location(err)}: {err['msg']}" for err in e.errors())
        raise ConfigError(f"Invalid config '{source}': {problems}") from e


def load_config(path: Path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Failed to read config '{path}': {e}") from e
    return parse_config(text, str(path))


def apply_overrides(
    cfg: RunConfig, seed: int | None = None, out: str | None = None, tol: float | None = None
) -> RunConfig:
    """Command-line flags take precedence over the file."""
    data = cfg.model_dump()
    if seed is not None:
        data["seed"] = seed
    if out is not None:
        data["output"]["dir"] = out
    if tol is not None:
        data["earthquake"]["tol"] = tol
    return validate_config(data, "<command line>")


def config_hash(cfg: RunConfig) -> str:
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
