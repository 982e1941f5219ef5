import numpy as np
from typing import Optional
from scipy.spatial.distance import cdist
from lmft.utils.errors import ValidationError


def _as_sequence(a) -> np.ndarray:
    if hasattr(a, "values") and hasattr(a, "times"):
        a = a.values
    elif hasattr(a, "features") and hasattr(a, "query_times"):
        a = a.features
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    return a


def dtw(a, b, window: Optional[int] = None) -> float:
    """
    Dynamic time warping distance with the symmetric match/insert/delete step and both
    endpoints aligned. Local cost is the Euclidean distance between channel vectors.
    ``window`` optionally restricts |i - j| (a Sakoe-Chiba band); off by default.
    """
    a = _as_sequence(a)
    b = _as_sequence(b)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValidationError("dtw needs nonempty sequences")
    if a.shape[1] != b.shape[1]:
        raise ValidationError(f"Channel mismatch: {a.shape[1]} vs {b.shape[1]}")
    n, m = a.shape[0], b.shape[0]
    if window is not None:
        if window < 0:
            raise ValidationError(f"window must be >= 0, got {window}")
        window = max(window, abs(n - m))

    cost = cdist(a, b)
    D = np.full((n + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, n + 1):
        lo, hi = 1, m
        if window is not None:
            lo, hi = max(1, i - window), min(m, i + window)
        for j in range(lo, hi + 1):
            D[i, j] = min(D[i - 1, j - 1], D[i - 1, j], D[i, j - 1]) + cost[i - 1, j - 1]
    return float(D[n, m])


def dtw_matrix(test, train, window: Optional[int] = None) -> np.ndarray:
    """Rows are test items, columns are training items."""
    return np.array([[dtw(a, b, window) for b in train] for a in test]).reshape(len(test), len(train))
