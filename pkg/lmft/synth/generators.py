import numpy as np
from enum import Enum
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple
from lmft.pipeline.series import TimeSeries
from lmft.utils.errors import ValidationError

VARIABLE_NOISE_LENGTH = 1000
VARIABLE_NOISE_WINDOW = (450, 550)
VARIABLE_NOISE_HIGH = 5.0
VARIABLE_PERIOD_LENGTH = 1001


class GeneratorKind(Enum):
    VARIABLE_NOISE = "variable_noise"
    VARIABLE_PERIOD = "variable_period"
    LABELED_SEGMENTS = "labeled_segments"

    @staticmethod
    def try_parse(value: str) -> "GeneratorKind":
        match str(value).lower().replace("-", "_"):
            case "variable_noise":
                return GeneratorKind.VARIABLE_NOISE
            case "variable_period":
                return GeneratorKind.VARIABLE_PERIOD
            case "labeled_segments":
                return GeneratorKind.LABELED_SEGMENTS
            case _:
                raise ValidationError(f"Unknown generator kind: {value}")


@dataclass(frozen=True)
class ClassSpec:
    """Sine wave class: each segment perturbs the parameters by a relative ``jitter``."""

    label: str
    noise_variance: float
    period: float
    amplitude: float = 1.0
    jitter: float = 0.05

    def __post_init__(self):
        if self.noise_variance < 0 or self.period <= 0 or self.amplitude < 0 or self.jitter < 0:
            raise ValidationError(f"Invalid class spec {self}")

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> "ClassSpec":
        return ClassSpec(label=str(data["label"]), noise_variance=float(data["noise_variance"]),
                         period=float(data["period"]), amplitude=float(data.get("amplitude", 1.0)),
                         jitter=float(data.get("jitter", 0.05)))

    def to_dict(self) -> Dict[str, Any]:
        return {"label": self.label, "noise_variance": self.noise_variance, "period": self.period,
                "amplitude": self.amplitude, "jitter": self.jitter}


@dataclass(frozen=True)
class GeneratorSpec:
    kind: GeneratorKind
    rng_seed: int = 0
    n: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.kind, GeneratorKind):
            object.__setattr__(self, "kind", GeneratorKind.try_parse(self.kind))
        if self.n is not None and self.n < 10:
            raise ValidationError(f"Generator length must be >= 10, got {self.n}")


def variable_noise_core(x) -> np.ndarray:
    return 10.0 * np.sin(2.0 * np.pi * np.asarray(x, dtype=float) / 50.0)


def variable_noise_variance(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    lo, hi = VARIABLE_NOISE_WINDOW
    return np.where((x >= lo) & (x <= hi), VARIABLE_NOISE_HIGH, 1.0)


def gen_variable_noise(seed: int = 0, n: int = VARIABLE_NOISE_LENGTH) -> TimeSeries:
    """Sine of period 50 with unit noise variance, raised to 5 on [450, 550]."""
    if n < 10:
        raise ValidationError(f"Generator length must be >= 10, got {n}")
    rng = np.random.default_rng(seed)
    x = np.arange(n, dtype=float)
    noise = rng.normal(size=n) * np.sqrt(variable_noise_variance(x))
    return TimeSeries(x, variable_noise_core(x) + noise, ["y"])


def variable_period_core(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return 10.0 * np.sin(2.0 * np.pi * x ** 2 / 20000.0)


def gen_variable_period(seed: int = 0, n: int = VARIABLE_PERIOD_LENGTH) -> TimeSeries:
    """Chirp whose local period 20000 / (2|x|) shrinks away from x = 0, unit noise throughout."""
    if n < 10:
        raise ValidationError(f"Generator length must be >= 10, got {n}")
    rng = np.random.default_rng(seed)
    x = np.arange(n, dtype=float) - (n - 1) // 2
    return TimeSeries(x, variable_period_core(x) + rng.normal(size=n), ["y"])


def gen_labeled_segments(class_specs: Sequence[ClassSpec], per_class: int, seg_len: int,
                         seed: int = 0) -> List[Tuple[TimeSeries, str]]:
    if len(class_specs) < 2:
        raise ValidationError(f"Need at least 2 classes, got {len(class_specs)}")
    if per_class < 0 or seg_len < 2:
        raise ValidationError(f"Invalid corpus size: per_class={per_class}, seg_len={seg_len}")
    rng = np.random.default_rng(seed)
    x = np.arange(seg_len, dtype=float)
    corpus = []
    for spec in class_specs:
        for _ in range(per_class):
            scale = 1.0 + spec.jitter * rng.normal(size=3)
            variance = spec.noise_variance * abs(scale[0])
            period = spec.period * max(abs(scale[1]), 1e-3)
            amplitude = spec.amplitude * abs(scale[2])
            phase = rng.uniform(0.0, 2.0 * np.pi)
            y = amplitude * np.sin(2.0 * np.pi * x / period + phase)
            y = y + rng.normal(size=seg_len) * np.sqrt(variance)
            corpus.append((TimeSeries(x.copy(), y, ["y"]), spec.label))
    return corpus


def generate(spec: GeneratorSpec) -> TimeSeries:
    match spec.kind:
        case GeneratorKind.VARIABLE_NOISE:
            return gen_variable_noise(spec.rng_seed, spec.n or VARIABLE_NOISE_LENGTH)
        case GeneratorKind.VARIABLE_PERIOD:
            return gen_variable_period(spec.rng_seed, spec.n or VARIABLE_PERIOD_LENGTH)
        case _:
            raise ValidationError(f"{spec.kind.value} produces a labeled corpus; use gen_labeled_segments")
