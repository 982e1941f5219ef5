import numpy as np
from enum import Enum
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple
from lmft.covariance import CovExpr
from lmft.gpr.fit import FitResult, log_uniform_seeds
from lmft.utils import constants as CONST
from lmft.utils.errors import ValidationError


class SeedVariant(Enum):
    FIXED = "fixed"
    NEIGHBOR = "neighbor"
    MULTISEED = "multiseed"
    NEIGHBOR_PLUS_EXEMPLAR = "neighbor_plus_exemplar"


@dataclass
class SeedContext:
    """What a strategy may use to seed one local fit."""

    channel: int
    query_index: int
    previous: Optional[np.ndarray] = None
    exemplar: Optional[FitResult] = None


def _theta(expr: CovExpr, theta0: Optional[Sequence[float]]) -> np.ndarray:
    if theta0 is None:
        return expr.free_values()
    theta = np.asarray(theta0, dtype=float).ravel()
    if theta.size != expr.n_free:
        raise ValidationError(f"Seed has {theta.size} values for {expr.n_free} free parameters")
    return theta


@dataclass(frozen=True)
class SeedStrategy:
    """
    How the optimizer is seeded at each query point.

    fixed: one seed everywhere (``theta0``, or the expression's own Free values).
    neighbor: the previous query's optimum, falling back to ``theta0`` at the first query.
    multiseed: ``count`` log-uniform seeds in [lo, hi], drawn per cell from ``rng_seed``.
    neighbor_plus_exemplar: the neighbor seed plus the optimum of an exemplar fit made with
    ``exemplar_seed_count`` seeds; when the exemplar seed wins and ``global_reseed_count`` > 0
    a fresh multiseed fit with that many seeds is added.
    """

    variant: SeedVariant
    theta0: Optional[Tuple[float, ...]] = None
    count: int = CONST.MULTISEED_COUNT
    lo: float = CONST.MULTISEED_LO
    hi: float = CONST.MULTISEED_HI
    rng_seed: int = 0
    exemplar_seed_count: int = CONST.EXEMPLAR_SEED_COUNT
    global_reseed_count: int = 0

    def __post_init__(self):
        if not isinstance(self.variant, SeedVariant):
            object.__setattr__(self, "variant", SeedStrategyFactory.parse_variant(self.variant))
        if self.theta0 is not None:
            theta0 = tuple(float(v) for v in np.atleast_1d(self.theta0))
            if any(not np.isfinite(v) or v <= 0 for v in theta0):
                raise ValidationError(f"theta0 values must be finite and > 0, got {theta0}")
            object.__setattr__(self, "theta0", theta0)
        if self.count < 1:
            raise ValidationError(f"MultiSeed count must be >= 1, got {self.count}")
        if not 0 < self.lo < self.hi:
            raise ValidationError(f"MultiSeed range needs 0 < lo < hi, got [{self.lo}, {self.hi}]")
        if self.exemplar_seed_count < 1:
            raise ValidationError(f"exemplar_seed_count must be >= 1, got {self.exemplar_seed_count}")
        if self.global_reseed_count < 0:
            raise ValidationError(f"global_reseed_count must be >= 0, got {self.global_reseed_count}")

    @property
    def is_sequential(self) -> bool:
        return self.variant in (SeedVariant.NEIGHBOR, SeedVariant.NEIGHBOR_PLUS_EXEMPLAR)

    @property
    def needs_exemplar(self) -> bool:
        return self.variant == SeedVariant.NEIGHBOR_PLUS_EXEMPLAR

    def cell_rng(self, channel: int, query_index: int) -> np.random.Generator:
        return np.random.default_rng([self.rng_seed, channel, query_index])

    def seeds(self, expr: CovExpr, context: SeedContext) -> Tuple[List[np.ndarray], List[str]]:
        match self.variant:
            case SeedVariant.FIXED:
                return [_theta(expr, self.theta0)], ["fixed"]
            case SeedVariant.NEIGHBOR:
                if context.previous is None:
                    return [_theta(expr, self.theta0)], ["fixed"]
                return [context.previous], ["neighbor"]
            case SeedVariant.MULTISEED:
                rng = self.cell_rng(context.channel, context.query_index)
                seeds = log_uniform_seeds(rng, self.count, expr.n_free, self.lo, self.hi)
                return seeds, [f"multiseed[{i}]" for i in range(self.count)]
            case SeedVariant.NEIGHBOR_PLUS_EXEMPLAR:
                if context.exemplar is None:
                    raise ValidationError("neighbor_plus_exemplar needs an exemplar fit")
                first = context.previous if context.previous is not None else _theta(expr, self.theta0)
                origin = "neighbor" if context.previous is not None else "fixed"
                return [first, context.exemplar.theta], [origin, "exemplar"]
        raise ValidationError(f"Unsupported seed strategy: {self.variant}")

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {"variant": self.variant.value}
        if self.theta0 is not None:
            result["theta0"] = list(self.theta0)
        if self.variant == SeedVariant.MULTISEED:
            result.update({"count": self.count, "lo": self.lo, "hi": self.hi, "rng_seed": self.rng_seed})
        if self.variant == SeedVariant.NEIGHBOR_PLUS_EXEMPLAR:
            result.update({
                "exemplar_seed_count": self.exemplar_seed_count,
                "global_reseed_count": self.global_reseed_count,
                "lo": self.lo,
                "hi": self.hi,
                "rng_seed": self.rng_seed,
            })
        return result


class SeedStrategyFactory:

    @staticmethod
    def parse_variant(value: str) -> SeedVariant:
        match str(value).lower().replace("-", "_"):
            case "fixed":
                return SeedVariant.FIXED
            case "neighbor" | "neighbour":
                return SeedVariant.NEIGHBOR
            case "multiseed" | "multi_seed":
                return SeedVariant.MULTISEED
            case "neighbor_plus_exemplar" | "exemplar":
                return SeedVariant.NEIGHBOR_PLUS_EXEMPLAR
            case _:
                raise ValidationError(f"Unknown seed strategy: {value}")

    @staticmethod
    def fixed(theta0: Optional[Sequence[float]] = None) -> SeedStrategy:
        return SeedStrategy(SeedVariant.FIXED, theta0=None if theta0 is None else tuple(theta0))

    @staticmethod
    def neighbor(theta0_fallback: Optional[Sequence[float]] = None) -> SeedStrategy:
        return SeedStrategy(SeedVariant.NEIGHBOR,
                            theta0=None if theta0_fallback is None else tuple(theta0_fallback))

    @staticmethod
    def multiseed(count: int = CONST.MULTISEED_COUNT, lo: float = CONST.MULTISEED_LO,
                  hi: float = CONST.MULTISEED_HI, rng_seed: int = 0) -> SeedStrategy:
        return SeedStrategy(SeedVariant.MULTISEED, count=count, lo=lo, hi=hi, rng_seed=rng_seed)

    @staticmethod
    def neighbor_plus_exemplar(exemplar_seed_count: int = CONST.EXEMPLAR_SEED_COUNT,
                               global_reseed_count: int = 0, rng_seed: int = 0,
                               lo: float = CONST.MULTISEED_LO,
                               hi: float = CONST.MULTISEED_HI) -> SeedStrategy:
        return SeedStrategy(SeedVariant.NEIGHBOR_PLUS_EXEMPLAR,
                            exemplar_seed_count=exemplar_seed_count,
                            global_reseed_count=global_reseed_count,
                            rng_seed=rng_seed, lo=lo, hi=hi)

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> SeedStrategy:
        data = dict(data)
        if "variant" not in data:
            raise ValidationError("Seed strategy is missing 'variant'")
        allowed = {"variant", "theta0", "count", "lo", "hi", "rng_seed",
                   "exemplar_seed_count", "global_reseed_count"}
        unknown = set(data) - allowed
        if unknown:
            raise ValidationError(f"Unknown seed strategy keys: {sorted(unknown)}")
        variant = SeedStrategyFactory.parse_variant(data.pop("variant"))
        if data.get("theta0") is not None:
            data["theta0"] = tuple(data["theta0"])
        return SeedStrategy(variant, **data)
