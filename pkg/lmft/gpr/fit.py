import numpy as np
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence
from scipy.optimize import minimize
from lmft.covariance import CovExpr, as_points
from lmft.gpr.weighted import (
    ObjectiveForm,
    WeightingMode,
    WeightsLike,
    weighted_log_marginal_and_grad,
)
from lmft.utils import constants as CONST
from lmft.utils.errors import FitError, LmftError, NumericalError, ValidationError
from lmft.utils.logging import logger

FAILED_OBJECTIVE = 1e25


@dataclass(frozen=True)
class FitOptions:
    mode: WeightingMode = WeightingMode.FULL_DIAGONAL
    form: ObjectiveForm = ObjectiveForm.SIMPLIFIED
    max_iterations: int = CONST.MAX_ITERATIONS
    gradient_tolerance: float = CONST.GRADIENT_TOLERANCE
    lower: float = CONST.PARAM_LOWER
    upper: float = CONST.PARAM_UPPER

    def __post_init__(self):
        object.__setattr__(self, "mode", WeightingMode.try_parse(self.mode))
        object.__setattr__(self, "form", ObjectiveForm.try_parse(self.form))
        if self.max_iterations < 1:
            raise ValidationError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not 0 < self.lower < self.upper:
            raise ValidationError(f"Invalid parameter bounds [{self.lower}, {self.upper}]")


@dataclass
class FitResult:
    expr: CovExpr
    log_marginal: float
    converged: bool
    iterations: int
    seed_origin: str
    objective_form: ObjectiveForm
    weighting_mode: WeightingMode = WeightingMode.FULL_DIAGONAL
    seed_index: int = 0
    failed_restarts: int = 0

    @property
    def theta(self) -> np.ndarray:
        return self.expr.free_values()

    def parameters(self) -> Dict[str, float]:
        return self.expr.parameter_values()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "expr": self.expr.to_dict(),
            "log_marginal": self.log_marginal,
            "converged": self.converged,
            "iterations": self.iterations,
            "seed_origin": self.seed_origin,
            "objective_form": self.objective_form.value,
            "weighting_mode": self.weighting_mode.value,
            "failed_restarts": self.failed_restarts,
        }


@dataclass
class _Restart:
    index: int
    origin: str
    theta: Optional[np.ndarray] = None
    value: float = -np.inf
    converged: bool = False
    iterations: int = 0
    error: Optional[str] = None


def log_uniform_seeds(rng: np.random.Generator, count: int, n_free: int,
                      lo: float = CONST.MULTISEED_LO, hi: float = CONST.MULTISEED_HI) -> List[np.ndarray]:
    """``count`` seed vectors with every coordinate drawn log-uniformly from [lo, hi]."""
    if count < 1:
        raise ValidationError(f"Seed count must be >= 1, got {count}")
    if not 0 < lo <= hi:
        raise ValidationError(f"Invalid seed range [{lo}, {hi}]")
    exponents = rng.uniform(np.log(lo), np.log(hi), size=(count, n_free))
    return [np.exp(row) for row in exponents]


def _run_restart(expr: CovExpr, X: np.ndarray, y: np.ndarray, w: WeightsLike,
                 seed: np.ndarray, opts: FitOptions, restart: _Restart) -> _Restart:
    log_lower, log_upper = np.log(opts.lower), np.log(opts.upper)
    z0 = np.clip(np.log(seed), log_lower, log_upper)

    def objective(z: np.ndarray):
        try:
            value, grad = weighted_log_marginal_and_grad(
                expr.with_free_values(np.exp(z)), X, y, w, opts.mode, opts.form)
        except NumericalError:
            return FAILED_OBJECTIVE, np.zeros_like(z)
        if not np.isfinite(value) or not np.all(np.isfinite(grad)):
            return FAILED_OBJECTIVE, np.zeros_like(z)
        return -value, -grad

    try:
        weighted_log_marginal_and_grad(expr.with_free_values(np.exp(z0)), X, y, w, opts.mode, opts.form)
    except NumericalError as e:
        restart.error = e.message
        return restart

    result = minimize(
        objective,
        z0,
        jac=True,
        method="L-BFGS-B",
        bounds=[(log_lower, log_upper)] * len(z0),
        options={"maxiter": opts.max_iterations, "gtol": opts.gradient_tolerance},
    )
    restart.iterations = int(result.nit)
    if result.fun >= FAILED_OBJECTIVE or not np.isfinite(result.fun):
        restart.error = f"optimizer ended in an infeasible region: {result.message}"
        return restart
    restart.theta = np.exp(result.x)
    restart.value = float(-result.fun)
    restart.converged = bool(result.success)
    return restart


def fit(expr: CovExpr, X, y, w: WeightsLike, seeds: Sequence[Sequence[float]],
        opts: Optional[FitOptions] = None, seed_origins: Optional[Sequence[str]] = None) -> FitResult:
    """
    Maximize the weighted log marginal likelihood over log of the Free parameters.

    Every seed is a restart of the quasi-Newton ascent; the best finite result wins and ties
    go to the earlier seed. ``seed_origins`` labels each seed in the result (default
    ``multiseed[i]``).
    """
    opts = opts or FitOptions()
    if expr.n_free == 0:
        raise ValidationError("Nothing to optimize: every covariance parameter is Fixed")
    if len(seeds) == 0:
        raise ValidationError("fit needs at least one seed")
    X = as_points(X)
    y = np.asarray(y, dtype=float).ravel()
    if y.size != len(X):
        raise ValidationError(f"{y.size} observations for {len(X)} points")
    if seed_origins is None:
        seed_origins = [f"multiseed[{i}]" for i in range(len(seeds))]

    restarts: List[_Restart] = []
    for i, seed in enumerate(seeds):
        seed = np.asarray(seed, dtype=float).ravel()
        if seed.size != expr.n_free or np.any(~np.isfinite(seed)) or np.any(seed <= 0):
            raise ValidationError(f"Seed {i} must hold {expr.n_free} positive finite values",
                                  {"seed": seed.tolist()})
        restart = _Restart(index=i, origin=seed_origins[i])
        try:
            _run_restart(expr, X, y, w, seed, opts, restart)
        except LmftError as e:
            if isinstance(e, ValidationError):
                raise
            restart.error = e.message
        logger.trace(f"restart {i} ({restart.origin}): value={restart.value:.6g} "
                     f"iterations={restart.iterations} error={restart.error}")
        restarts.append(restart)

    succeeded = [r for r in restarts if r.error is None and np.isfinite(r.value)]
    if not succeeded:
        raise FitError("Every restart of the fit failed",
                       {"restarts": [{"index": r.index, "origin": r.origin, "error": r.error}
                                     for r in restarts]})
    best = succeeded[0]
    for r in succeeded[1:]:
        if r.value > best.value:
            best = r
    return FitResult(
        expr=expr.with_free_values(best.theta),
        log_marginal=best.value,
        converged=best.converged,
        iterations=best.iterations,
        seed_origin=best.origin,
        objective_form=opts.form,
        weighting_mode=opts.mode,
        seed_index=best.index,
        failed_restarts=len(restarts) - len(succeeded),
    )


def fit_multiseed(expr: CovExpr, X, y, w: WeightsLike, rng: np.random.Generator,
                  count: int = CONST.MULTISEED_COUNT, lo: float = CONST.MULTISEED_LO,
                  hi: float = CONST.MULTISEED_HI, opts: Optional[FitOptions] = None,
                  origin: str = "multiseed") -> FitResult:
    seeds = log_uniform_seeds(rng, count, expr.n_free, lo, hi)
    origins = [f"{origin}[{i}]" for i in range(count)]
    return fit(expr, X, y, w, seeds, opts, origins)
