import numpy as np
from enum import Enum
from dataclasses import dataclass
from typing import Any, Dict, Optional
from lmft.utils.errors import ValidationError


class KernelFamily(Enum):
    TRICUBE = "tricube"
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"
    DIRICHLET = "dirichlet"
    KNN_TRICUBE = "knn_tricube"
    KNN_UNIFORM = "knn_uniform"

    @property
    def is_knn(self) -> bool:
        return self in (KernelFamily.KNN_TRICUBE, KernelFamily.KNN_UNIFORM)

    @staticmethod
    def try_parse(value: str) -> "KernelFamily":
        match str(value).lower():
            case "tricube":
                return KernelFamily.TRICUBE
            case "uniform":
                return KernelFamily.UNIFORM
            case "gaussian":
                return KernelFamily.GAUSSIAN
            case "dirichlet":
                return KernelFamily.DIRICHLET
            case "knn_tricube":
                return KernelFamily.KNN_TRICUBE
            case "knn_uniform":
                return KernelFamily.KNN_UNIFORM
            case _:
                raise ValidationError(f"Unknown kernel family: {value}")


@dataclass(frozen=True)
class KernelSpec:
    """
    Locality weighting kernel.

    ``h`` is the bandwidth of the fixed-bandwidth families, ``k`` the neighbour count of
    the knn families and ``n`` the order of the Dirichlet kernel.
    """

    family: KernelFamily
    h: Optional[float] = None
    k: Optional[int] = None
    n: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.family, KernelFamily):
            object.__setattr__(self, "family", KernelFamily.try_parse(self.family))
        if self.family.is_knn:
            if self.k is None or int(self.k) != self.k or self.k < 1:
                raise ValidationError(f"{self.family.value} kernel needs an integer k >= 1, got {self.k}")
        elif self.family == KernelFamily.DIRICHLET:
            if self.n is None or int(self.n) != self.n or self.n < 1:
                raise ValidationError(f"dirichlet kernel needs an integer n >= 1, got {self.n}")
        else:
            if self.h is None or not np.isfinite(self.h) or self.h <= 0:
                raise ValidationError(f"{self.family.value} kernel needs a bandwidth h > 0, got {self.h}")

    @property
    def has_finite_support(self) -> bool:
        return self.family in (
            KernelFamily.TRICUBE,
            KernelFamily.UNIFORM,
            KernelFamily.KNN_TRICUBE,
            KernelFamily.KNN_UNIFORM,
        )

    def to_dict(self) -> Dict[str, Any]:
        result: Dict[str, Any] = {"family": self.family.value}
        if self.h is not None:
            result["h"] = float(self.h)
        if self.k is not None:
            result["k"] = int(self.k)
        if self.n is not None:
            result["n"] = int(self.n)
        return result

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> "KernelSpec":
        unknown = set(data) - {"family", "h", "k", "n"}
        if unknown:
            raise ValidationError(f"Unknown kernel keys: {sorted(unknown)}")
        if "family" not in data:
            raise ValidationError("Kernel config is missing 'family'")
        return KernelSpec(
            family=KernelFamily.try_parse(data["family"]),
            h=data.get("h"),
            k=data.get("k"),
            n=data.get("n"),
        )


def _as_points(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        return X.reshape(1, 1)
    if X.ndim == 1:
        return X.reshape(-1, 1)
    return X


def _as_point(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float)).ravel()


def tricube(d: np.ndarray, h: float) -> np.ndarray:
    u = np.asarray(d, dtype=float) / h
    return np.where(u < 1.0, (1.0 - np.clip(u, 0.0, 1.0) ** 3) ** 3, 0.0)


def uniform(d: np.ndarray, h: float) -> np.ndarray:
    return np.where(np.asarray(d, dtype=float) < h, 1.0, 0.0)


def gaussian(d: np.ndarray, h: float) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    return np.exp(-(d ** 2) / h)


def dirichlet(d: np.ndarray, n: int) -> np.ndarray:
    # sin applies to squared distances as written; the removable singularities take the limit 2n+1
    x = np.asarray(d, dtype=float) ** 2
    denominator = np.sin(x / 2.0)
    singular = np.isclose(denominator, 0.0, atol=1e-15)
    safe = np.where(singular, 1.0, denominator)
    return np.where(singular, 2.0 * n + 1.0, np.sin((n + 0.5) * x) / safe)


def _profile(spec: KernelSpec, d: np.ndarray) -> np.ndarray:
    match spec.family:
        case KernelFamily.TRICUBE:
            return tricube(d, spec.h)
        case KernelFamily.UNIFORM:
            return uniform(d, spec.h)
        case KernelFamily.GAUSSIAN:
            return gaussian(d, spec.h)
        case KernelFamily.DIRICHLET:
            return dirichlet(d, spec.n)
        case _:
            raise ValidationError(f"{spec.family.value} kernel needs the dataset; use kernel_weights")


def eval_kernel(spec: KernelSpec, x, q) -> float:
    """Weight of data point ``x`` for query ``q`` under a fixed-bandwidth kernel."""
    x = _as_point(x)
    q = _as_point(q)
    if x.shape != q.shape:
        raise ValidationError(f"Point dimensions differ: {x.shape} vs {q.shape}")
    d = float(np.linalg.norm(x - q))
    return float(_profile(spec, np.array([d]))[0])


def knn_bandwidth(distances: np.ndarray, k: int) -> float:
    if k > len(distances):
        raise ValidationError(f"knn kernel needs k <= {len(distances)} points, got k={k}")
    return float(np.partition(distances, k - 1)[k - 1])


def kernel_weights(spec: KernelSpec, X, q) -> np.ndarray:
    """
    Raw (unnormalized) weights of every point in ``X`` for query ``q``.

    knn families use the distance to the k-th nearest point as a variable bandwidth;
    points tied at that distance all receive the boundary weight.
    """
    X = _as_points(X)
    if len(X) == 0:
        raise ValidationError("kernel_weights needs at least one point")
    q = _as_point(q)
    if X.shape[1] != q.shape[0]:
        raise ValidationError(f"Point dimensions differ: {X.shape[1]} vs {q.shape[0]}")
    distances = np.linalg.norm(X - q, axis=1)

    if not spec.family.is_knn:
        return _profile(spec, distances)

    bandwidth = knn_bandwidth(distances, spec.k)
    if bandwidth == 0.0:
        return np.where(distances == 0.0, 1.0, 0.0)
    if spec.family == KernelFamily.KNN_UNIFORM:
        return np.where(distances <= bandwidth, 1.0, 0.0)
    return tricube(distances, bandwidth)


def weight_matrix(spec: KernelSpec, X, queries) -> np.ndarray:
    """Rows are queries, columns are data points."""
    queries = _as_points(queries)
    return np.vstack([kernel_weights(spec, X, q) for q in queries])
