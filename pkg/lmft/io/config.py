import json
import zlib
import numpy as np
from typing import Any, Dict, List, Literal, Optional
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError
from lmft.covariance import CovExpr
from lmft.gpr import FitOptions, ObjectiveForm, WeightingMode
from lmft.kernels import KernelSpec
from lmft.pipeline.seeding import SeedStrategy, SeedStrategyFactory
from lmft.io.series_io import read_json
from lmft.synth import ClassSpec
from lmft.utils import constants as CONST
from lmft.utils.errors import ValidationError


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class KernelConfig(StrictModel):
    family: str
    h: Optional[float] = None
    k: Optional[int] = None
    n: Optional[int] = None

    @model_validator(mode="after")
    def _check(self):
        self.to_spec()
        return self

    def to_spec(self) -> KernelSpec:
        return KernelSpec.from_dict(self.model_dump(exclude_none=True))


class ClassConfig(StrictModel):
    label: str
    noise_variance: float
    period: float
    amplitude: float = 1.0
    jitter: float = 0.05

    def to_spec(self) -> ClassSpec:
        return ClassSpec.from_dict(self.model_dump())


class GeneratorConfig(StrictModel):
    kind: Literal["variable_noise", "variable_period", "labeled_segments"]
    n: Optional[int] = Field(default=None, ge=10)
    classes: Optional[List[ClassConfig]] = None
    per_class: int = Field(default=10, ge=0)
    seg_len: int = Field(default=200, ge=2)
    test_fraction: float = Field(default=0.5, gt=0, lt=1)

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "labeled_segments" and (not self.classes or len(self.classes) < 2):
            raise ValueError("labeled_segments needs at least 2 classes")
        return self


class DataConfig(StrictModel):
    path: Optional[str] = None
    manifest: Optional[str] = None
    generator: Optional[GeneratorConfig] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        given = [name for name in ("path", "manifest", "generator") if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"data needs exactly one of path, manifest or generator (got {given})")
        return self

    @property
    def is_corpus(self) -> bool:
        return self.manifest is not None or (
            self.generator is not None and self.generator.kind == "labeled_segments")


class StrategyConfig(StrictModel):
    variant: Literal["fixed", "neighbor", "multiseed", "neighbor_plus_exemplar"] = "fixed"
    theta0: Optional[List[float]] = None
    count: int = Field(default=CONST.MULTISEED_COUNT, ge=1)
    lo: float = Field(default=CONST.MULTISEED_LO, gt=0)
    hi: float = Field(default=CONST.MULTISEED_HI, gt=0)
    exemplar_seed_count: int = Field(default=CONST.EXEMPLAR_SEED_COUNT, ge=1)
    global_reseed_count: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check(self):
        if not self.lo < self.hi:
            raise ValueError(f"seed range needs lo < hi, got [{self.lo}, {self.hi}]")
        return self

    def to_strategy(self, rng_seed: int) -> SeedStrategy:
        data = self.model_dump(exclude_none=True)
        data["rng_seed"] = rng_seed
        return SeedStrategyFactory.from_dict(data)


class QueryConfig(StrictModel):
    grid: Literal["all", "stride", "explicit"] = "all"
    stride: int = Field(default=1, ge=1)
    times: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check(self):
        if self.grid == "explicit":
            if not self.times:
                raise ValueError("explicit query grid needs a non-empty 'times' list")
            if any(b < a for a, b in zip(self.times, self.times[1:])):
                raise ValueError("explicit query times must be sorted")
        return self

    def resolve(self, times: np.ndarray, stride_override: Optional[int] = None) -> np.ndarray:
        """Query times for a series sampled at ``times``."""
        match self.grid:
            case "explicit":
                return np.asarray(self.times, dtype=float)
            case "stride":
                return np.asarray(times[::stride_override or self.stride], dtype=float)
            case _:
                if stride_override:
                    return np.asarray(times[::stride_override], dtype=float)
                return np.asarray(times, dtype=float)


class SmoothingConfig(StrictModel):
    method: Literal["nw", "loess"] = "nw"
    kernel: KernelConfig


class ClassificationConfig(StrictModel):
    scale: bool = True
    window: Optional[int] = Field(default=None, ge=0)
    positive: Optional[str] = None
    features: bool = True


class ExperimentConfig(StrictModel):
    """
    One experiment, versioned by ``schema_version``. Unknown keys are rejected at every
    level. All randomness derives from ``rng_seed``.
    """

    schema_version: Literal[1] = CONST.CONFIG_SCHEMA_VERSION
    data: DataConfig
    kernel: KernelConfig
    covariance: Dict[str, Any]
    strategy: StrategyConfig = StrategyConfig()
    query: QueryConfig = QueryConfig()
    weighting_mode: Literal["full_diagonal", "noise_only"] = "full_diagonal"
    objective_form: Literal["full", "simplified"] = "simplified"
    smoothing: Optional[SmoothingConfig] = None
    classification: Optional[ClassificationConfig] = None
    output: str = "lmft_out"
    rng_seed: int = 0
    threads: Optional[int] = Field(default=None, ge=1)

    @field_validator("covariance")
    @classmethod
    def _check_covariance(cls, value: Dict[str, Any]) -> Dict[str, Any]:
        try:
            expr = CovExpr.from_dict(value)
        except ValidationError as e:
            raise ValueError(e.message)
        if expr.n_free == 0:
            raise ValueError("covariance needs at least one Free parameter to extract")
        return value

    def cov_expr(self) -> CovExpr:
        return CovExpr.from_dict(self.covariance)

    def fit_options(self) -> FitOptions:
        return FitOptions(mode=WeightingMode.try_parse(self.weighting_mode),
                          form=ObjectiveForm.try_parse(self.objective_form))

    def seed_strategy(self) -> SeedStrategy:
        return self.strategy.to_strategy(component_seed(self.rng_seed, "strategy"))

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True)


def component_seed(rng_seed: int, component: str) -> int:
    """Independent, reproducible seed for one named component of a run."""
    sequence = np.random.SeedSequence([int(rng_seed) & 0xFFFFFFFF, zlib.crc32(component.encode())])
    return int(sequence.generate_state(1)[0])


def _flatten_errors(e: PydanticValidationError) -> List[Dict[str, Any]]:
    return [{"loc": ".".join(str(p) for p in err["loc"]), "message": err["msg"]} for err in e.errors()]


def parse_config(data: Dict[str, Any]) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ValidationError("Config must be a JSON object")
    version = data.get("schema_version", CONST.CONFIG_SCHEMA_VERSION)
    if version != CONST.CONFIG_SCHEMA_VERSION:
        raise ValidationError(f"Unsupported config schema_version {version}",
                              {"supported": CONST.CONFIG_SCHEMA_VERSION})
    try:
        return ExperimentConfig.model_validate(data)
    except PydanticValidationError as e:
        errors = _flatten_errors(e)
        first = errors[0] if errors else {"loc": "", "message": str(e)}
        raise ValidationError(f"Invalid config at '{first['loc']}': {first['message']}",
                              {"errors": errors})


def load_config(path: str) -> ExperimentConfig:
    return parse_config(read_json(path))
