"""
Stability of extracted parameters along a sweep.

Two one-dimensional loss families show how seeding decides whether the located optimum moves
continuously with the data. ``neighbor_quartic`` is seeded with the previous optimum and jumps
when the tracked minimum collides with a maximum; ``fixed_quartic`` is seeded at the same
point every time and jumps when the seed crosses the ridge between two minima.
"""

import numpy as np
from enum import Enum
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple
from lmft.utils import constants as CONST
from lmft.utils.errors import ValidationError
from lmft.utils.logging import logger

NUDGE = 1e-6
DESCENT_MAX_ITERATIONS = 10000
DESCENT_TOLERANCE = 1e-9
ARMIJO = 1e-4
MAX_STEP = 0.05


class DemoFamily(Enum):
    NEIGHBOR_QUARTIC = "neighbor_quartic"
    FIXED_QUARTIC = "fixed_quartic"

    @staticmethod
    def try_parse(value: str) -> "DemoFamily":
        match str(value).lower().replace("-", "_"):
            case "neighbor_quartic" | "neighbor":
                return DemoFamily.NEIGHBOR_QUARTIC
            case "fixed_quartic" | "fixed":
                return DemoFamily.FIXED_QUARTIC
            case _:
                raise ValidationError(f"Unknown seed demo family: {value}")


def neighbor_quartic(h: float, k: float) -> Tuple[Callable, Callable, Callable]:
    """3x^4 - 4(k+h)x^3 + 6khx^2, stationary at 0, h and k."""
    f = lambda x: 3 * x ** 4 - 4 * (k + h) * x ** 3 + 6 * k * h * x ** 2
    df = lambda x: 12 * x * (x - h) * (x - k)
    d2f = lambda x: 36 * x ** 2 - 24 * (k + h) * x + 12 * k * h
    return f, df, d2f


def fixed_quartic(h: float) -> Tuple[Callable, Callable, Callable]:
    """(x-h)^4 - 2(x-h)^2, minima at h-1 and h+1, maximum at h."""
    f = lambda x: (x - h) ** 4 - 2 * (x - h) ** 2
    df = lambda x: 4 * (x - h) ** 3 - 4 * (x - h)
    d2f = lambda x: 12 * (x - h) ** 2 - 4
    return f, df, d2f


def gradient_descent(f: Callable, df: Callable, x0: float,
                     max_iterations: int = DESCENT_MAX_ITERATIONS,
                     tolerance: float = DESCENT_TOLERANCE) -> float:
    x = float(x0)
    for _ in range(max_iterations):
        g = float(df(x))
        if abs(g) < tolerance:
            break
        step = min(1.0, MAX_STEP / abs(g))
        fx = f(x)
        while f(x - step * g) > fx - ARMIJO * step * g * g:
            step *= 0.5
            if step < 1e-300:
                return x
        x = x - step * g
    return x


def _seed(x0: float, df: Callable, d2f: Callable) -> float:
    # a seed resting on a maximum or saddle would never move
    if abs(df(x0)) < DESCENT_TOLERANCE and d2f(x0) <= 0:
        return x0 + NUDGE
    return x0


def flag_jumps(optima: Sequence[float], factor: float = CONST.JUMP_FACTOR) -> List[int]:
    """Indices i where |optima[i] - optima[i-1]| exceeds ``factor`` x the median step."""
    optima = np.asarray(optima, dtype=float)
    if optima.size < 2:
        return []
    steps = np.abs(np.diff(optima))
    threshold = factor * max(float(np.median(steps)), 1e-9)
    return [int(i) + 1 for i in np.flatnonzero(steps > threshold)]


@dataclass
class SeedDemoResult:
    family: DemoFamily
    params: np.ndarray
    optima: np.ndarray
    jumps: List[int]

    @property
    def jump_count(self) -> int:
        return len(self.jumps)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family.value,
            "params": self.params.tolist(),
            "optima": self.optima.tolist(),
            "jumps": list(self.jumps),
            "jump_count": self.jump_count,
        }


def straight_path(start: Tuple[float, float], end: Tuple[float, float], steps: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, steps)[:, None]
    return (1 - t) * np.asarray(start, dtype=float) + t * np.asarray(end, dtype=float)


def default_grid(family: DemoFamily, persistent: bool = False) -> np.ndarray:
    if family == DemoFamily.NEIGHBOR_QUARTIC:
        if persistent:
            return straight_path((1.0, -1.0), (2.0, -1.0), 56)
        return straight_path((0.95, -1.35), (1.5, 2.5), 56)
    return np.linspace(-0.5, 0.5, 41)


def seed_demo(family, grid: Optional[Sequence] = None, seed: Optional[float] = None,
              persistent: bool = False) -> SeedDemoResult:
    """
    Locate an optimum at every step of a parameter sweep and flag discontinuities.

    neighbor_quartic sweeps (h, k) pairs; the first step is seeded at ``seed`` (default
    h + 0.25) and every later step at the previous optimum. fixed_quartic sweeps h and seeds
    every step at ``seed`` (default 0).
    """
    family = family if isinstance(family, DemoFamily) else DemoFamily.try_parse(family)
    params = default_grid(family, persistent) if grid is None else np.asarray(grid, dtype=float)
    if params.size == 0:
        raise ValidationError("seed_demo needs a non-empty grid")

    optima = []
    if family == DemoFamily.NEIGHBOR_QUARTIC:
        params = params.reshape(-1, 2)
        x = float(params[0, 0] + 0.25) if seed is None else float(seed)
        for h, k in params:
            f, df, d2f = neighbor_quartic(h, k)
            x = gradient_descent(f, df, _seed(x, df, d2f))
            optima.append(x)
    else:
        params = params.ravel()
        x0 = 0.0 if seed is None else float(seed)
        for h in params:
            f, df, d2f = fixed_quartic(h)
            optima.append(gradient_descent(f, df, _seed(x0, df, d2f)))

    optima = np.asarray(optima)
    jumps = flag_jumps(optima)
    logger.info(f"seed demo {family.value}: {len(optima)} steps, {len(jumps)} jump(s) at {jumps}")
    return SeedDemoResult(family, params, optima, jumps)
