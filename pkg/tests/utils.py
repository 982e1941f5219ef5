import numpy as np
from pathlib import Path

ROOT_DIR = Path(__file__).parent.parent


def random_spd(rng: np.random.Generator, n: int, floor: float = 0.5) -> np.ndarray:
    A = rng.normal(size=(n, n))
    return A @ A.T + floor * np.eye(n)


def finite_difference(fn, theta: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central differences of a scalar function of a vector."""
    theta = np.asarray(theta, dtype=float)
    grad = np.zeros_like(theta)
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = step
        grad[j] = (fn(theta + e) - fn(theta - e)) / (2.0 * step)
    return grad


def _paths(n: int, m: int):
    """Every monotone warping path from (0, 0) to (n-1, m-1) with unit steps."""
    if n == 1 and m == 1:
        yield [(0, 0)]
        return
    for di, dj in ((1, 0), (0, 1), (1, 1)):
        if n - di >= 1 and m - dj >= 1:
            for path in _paths(n - di, m - dj):
                yield path + [(n - 1, m - 1)]


def brute_force_dtw(a, b) -> float:
    a = np.asarray(a, dtype=float).reshape(len(a), -1)
    b = np.asarray(b, dtype=float).reshape(len(b), -1)
    return min(sum(float(np.linalg.norm(a[i] - b[j])) for i, j in path)
               for path in _paths(len(a), len(b)))
