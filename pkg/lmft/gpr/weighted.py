import numpy as np
from enum import Enum
from dataclasses import dataclass
from typing import List, Tuple, Union
from scipy.linalg import cho_factor, cho_solve, solve_triangular, LinAlgError
from lmft.covariance import (
    CovExpr,
    as_points,
    cov_matrix,
    cov_matrix_and_grad,
    cross_cov,
    noise_diagonal,
    noise_diagonal_and_grad,
    prior_diagonal,
)
from lmft.utils import constants as CONST
from lmft.utils.errors import InsufficientSupportError, NumericalError, ValidationError
from lmft.utils.logging import logger

LOG_2PI = float(np.log(2.0 * np.pi))


class WeightingMode(Enum):
    FULL_DIAGONAL = "full_diagonal"
    NOISE_ONLY = "noise_only"

    @staticmethod
    def try_parse(value: Union[str, "WeightingMode"]) -> "WeightingMode":
        if isinstance(value, WeightingMode):
            return value
        match str(value).lower():
            case "full_diagonal" | "full":
                return WeightingMode.FULL_DIAGONAL
            case "noise_only" | "noise":
                return WeightingMode.NOISE_ONLY
            case _:
                raise ValidationError(f"Unknown weighting mode: {value}")


class ObjectiveForm(Enum):
    FULL = "full"
    SIMPLIFIED = "simplified"

    @staticmethod
    def try_parse(value: Union[str, "ObjectiveForm"]) -> "ObjectiveForm":
        if isinstance(value, ObjectiveForm):
            return value
        match str(value).lower():
            case "full":
                return ObjectiveForm.FULL
            case "simplified":
                return ObjectiveForm.SIMPLIFIED
            case _:
                raise ValidationError(f"Unknown objective form: {value}")


@dataclass(frozen=True)
class WeightVector:
    """
    Per-point weights of one local fit.

    ``w`` keeps the full length of the data; dropped entries hold 0. ``retained`` lists the
    indices that take part in the fit. When ``normalized`` the retained weights average 1.
    """

    w: np.ndarray
    retained: np.ndarray
    normalized: bool = True

    @staticmethod
    def from_raw(raw, normalize: bool = True,
                 drop_threshold: float = CONST.DROP_THRESHOLD) -> "WeightVector":
        raw = np.asarray(raw, dtype=float).ravel()
        if not np.all(np.isfinite(raw)):
            raise ValidationError("Weights must be finite")
        if np.any(raw < 0):
            raise ValidationError("Weights must be nonnegative")
        keep = raw >= drop_threshold
        if not np.any(keep):
            raise InsufficientSupportError("Every weight is below the drop threshold",
                                           {"n_points": int(raw.size)})
        w = np.where(keep, raw, 0.0)
        if normalize:
            w = w / w[keep].mean()
        return WeightVector(w=w, retained=np.flatnonzero(keep), normalized=normalize)

    @staticmethod
    def ones(n: int) -> "WeightVector":
        return WeightVector(w=np.ones(n), retained=np.arange(n), normalized=True)

    @property
    def values(self) -> np.ndarray:
        """Weights of the retained points, in ``retained`` order."""
        return self.w[self.retained]

    @property
    def n_retained(self) -> int:
        return int(self.retained.size)

    def mean(self) -> float:
        return float(self.values.mean())


WeightsLike = Union[WeightVector, np.ndarray, List[float], None]


def _weights_array(w: WeightsLike, n: int) -> np.ndarray:
    if w is None:
        return np.ones(n)
    values = w.values if isinstance(w, WeightVector) else np.asarray(w, dtype=float).ravel()
    if values.size != n:
        raise ValidationError(f"{values.size} weights for {n} points; drop zero-weight points first")
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise ValidationError("Retained weights must be finite and > 0")
    return values


@dataclass
class CholeskyFactor:
    factor: Tuple[np.ndarray, bool]
    jitter: float = 0.0

    @property
    def lower(self) -> np.ndarray:
        return np.tril(self.factor[0])

    def solve(self, b: np.ndarray) -> np.ndarray:
        return cho_solve(self.factor, b)

    def log_det(self) -> float:
        return float(2.0 * np.sum(np.log(np.diag(self.factor[0]))))

    def inverse(self) -> np.ndarray:
        return cho_solve(self.factor, np.eye(self.factor[0].shape[0]))


def cholesky(Sigma: np.ndarray) -> CholeskyFactor:
    """
    Cholesky factor with jitter escalation.

    Jitter starts at ``JITTER_START * mean(diag)`` and grows by ``JITTER_FACTOR`` up to
    ``JITTER_MAX * mean(diag)``; past that a NumericalError carries the ladder tried.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    if Sigma.ndim != 2 or Sigma.shape[0] != Sigma.shape[1]:
        raise ValidationError(f"Covariance must be square, got shape {Sigma.shape}")
    if not np.all(np.isfinite(Sigma)):
        raise NumericalError("Covariance matrix has non-finite entries")
    try:
        return CholeskyFactor(cho_factor(Sigma, lower=True, check_finite=False), 0.0)
    except LinAlgError:
        pass

    scale = float(np.mean(np.diag(Sigma)))
    if not scale > 0:
        scale = 1.0
    tried = []
    relative = CONST.JITTER_START
    while relative <= CONST.JITTER_MAX * (1 + 1e-9):
        jitter = relative * scale
        tried.append(jitter)
        try:
            factor = cho_factor(Sigma + jitter * np.eye(len(Sigma)), lower=True, check_finite=False)
            logger.trace(f"cholesky succeeded with jitter {jitter:.3e}")
            return CholeskyFactor(factor, jitter)
        except LinAlgError:
            relative *= CONST.JITTER_FACTOR
    raise NumericalError("Covariance is not positive definite even with maximum jitter",
                         {"jitter_tried": tried, "n": int(len(Sigma))})


def log_gauss_pdf(y, Sigma) -> float:
    """Zero-mean multivariate Gaussian log density."""
    y = np.asarray(y, dtype=float).ravel()
    Sigma = np.atleast_2d(np.asarray(Sigma, dtype=float))
    if Sigma.shape != (y.size, y.size):
        raise ValidationError(f"Dimension mismatch: y has {y.size} entries, Sigma is {Sigma.shape}")
    chol = cholesky(Sigma)
    return _log_gauss_from_factor(y, chol)


def _log_gauss_from_factor(y: np.ndarray, chol: CholeskyFactor) -> float:
    alpha = chol.solve(y)
    return float(-0.5 * y @ alpha - 0.5 * chol.log_det() - 0.5 * y.size * LOG_2PI)


def _diagonal_terms(expr: CovExpr, X: np.ndarray, K: np.ndarray,
                    mode: WeightingMode) -> np.ndarray:
    if mode == WeightingMode.FULL_DIAGONAL:
        return np.diag(K).copy()
    return noise_diagonal(expr, X)


def weighted_cov(expr: CovExpr, X, w: WeightsLike = None,
                 mode: Union[str, WeightingMode] = WeightingMode.FULL_DIAGONAL) -> np.ndarray:
    """K with the diagonal reduced by ((w_i - 1) / w_i) * d_i."""
    mode = WeightingMode.try_parse(mode)
    X = as_points(X)
    weights = _weights_array(w, len(X))
    K = cov_matrix(expr, X)
    d = _diagonal_terms(expr, X, K, mode)
    return K - np.diag(((weights - 1.0) / weights) * d)


def _correction(weights: np.ndarray, d: np.ndarray) -> Tuple[float, np.ndarray]:
    # -sum((w_i - 1)/2 * log d_i); points with w_i = 1 contribute nothing
    active = weights != 1.0
    if np.any(d[active] <= 0):
        raise ValidationError("The full objective needs a positive diagonal term at every weighted "
                              "point; noise_only mode requires a white-noise component")
    coefficients = np.where(active, 0.5 * (weights - 1.0), 0.0)
    safe = np.where(active, d, 1.0)
    return float(-np.sum(coefficients * np.log(safe))), coefficients / safe


def weighted_log_marginal_and_grad(expr: CovExpr, X, y, w: WeightsLike = None,
                                   mode: Union[str, WeightingMode] = WeightingMode.FULL_DIAGONAL,
                                   form: Union[str, ObjectiveForm] = ObjectiveForm.SIMPLIFIED,
                                   ) -> Tuple[float, np.ndarray]:
    """
    Weighted log marginal likelihood and its gradient with respect to log of each Free
    parameter, in ``expr.free_names()`` order.
    """
    mode = WeightingMode.try_parse(mode)
    form = ObjectiveForm.try_parse(form)
    X = as_points(X)
    y = np.asarray(y, dtype=float).ravel()
    if y.size != len(X):
        raise ValidationError(f"{y.size} observations for {len(X)} points")
    weights = _weights_array(w, len(X))
    shrink = (weights - 1.0) / weights

    K, dK = cov_matrix_and_grad(expr, X)
    if mode == WeightingMode.FULL_DIAGONAL:
        d = np.diag(K).copy()
        dd = [np.diag(g).copy() for g in dK]
    else:
        d, dd = noise_diagonal_and_grad(expr, X)

    Sigma = K - np.diag(shrink * d)
    chol = cholesky(Sigma)
    alpha = chol.solve(y)
    value = float(-0.5 * y @ alpha - 0.5 * chol.log_det() - 0.5 * y.size * LOG_2PI)

    inner = np.outer(alpha, alpha) - chol.inverse()
    grad = np.empty(len(dK))
    for j, (dK_j, dd_j) in enumerate(zip(dK, dd)):
        dSigma = dK_j - np.diag(shrink * dd_j)
        grad[j] = 0.5 * np.sum(inner * dSigma)

    if form == ObjectiveForm.FULL:
        correction, factors = _correction(weights, d)
        value += correction
        for j, dd_j in enumerate(dd):
            grad[j] -= float(np.sum(factors * dd_j))
    return value, grad


def weighted_log_marginal(expr: CovExpr, X, y, w: WeightsLike = None,
                          mode: Union[str, WeightingMode] = WeightingMode.FULL_DIAGONAL,
                          form: Union[str, ObjectiveForm] = ObjectiveForm.SIMPLIFIED) -> float:
    mode = WeightingMode.try_parse(mode)
    form = ObjectiveForm.try_parse(form)
    X = as_points(X)
    weights = _weights_array(w, len(X))
    K = cov_matrix(expr, X)
    d = _diagonal_terms(expr, X, K, mode)
    Sigma = K - np.diag(((weights - 1.0) / weights) * d)
    value = log_gauss_pdf(y, Sigma)
    if form == ObjectiveForm.FULL:
        value += _correction(weights, d)[0]
    return value


def log_marginal(expr: CovExpr, X, y) -> float:
    """Unweighted GP log marginal likelihood."""
    return weighted_log_marginal(expr, X, y, None)


def predict(fitted, X_train, y, w: WeightsLike, X_star,
            mode: Union[str, WeightingMode, None] = None,
            include_noise: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """
    Zero-mean GP posterior at ``X_star``.

    ``fitted`` is a FitResult or a CovExpr. The training block uses the weighted covariance.
    The returned variance is of the latent function unless ``include_noise`` is set.
    """
    expr = fitted.expr if hasattr(fitted, "expr") else fitted
    if getattr(fitted, "converged", True) is False:
        logger.warning(f"predict: fit from {fitted.seed_origin} did not converge; using its last parameters")
    if mode is None:
        mode = getattr(fitted, "weighting_mode", WeightingMode.FULL_DIAGONAL)
    X_train = as_points(X_train)
    X_star = as_points(X_star)
    y = np.asarray(y, dtype=float).ravel()

    Sigma = weighted_cov(expr, X_train, w, mode)
    chol = cholesky(Sigma)
    K_star = cross_cov(expr, X_train, X_star)
    mean = K_star.T @ chol.solve(y)
    v = solve_triangular(chol.lower, K_star, lower=True, check_finite=False)
    prior = prior_diagonal(expr, X_star, include_noise)
    variance = np.maximum(prior - np.sum(v ** 2, axis=0), 0.0)
    return mean, variance
