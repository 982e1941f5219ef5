import numpy as np
from typing import Sequence
from lmft.kernels import KernelSpec, kernel_weights, weight_matrix
from lmft.utils import constants as CONST
from lmft.utils.errors import InsufficientSupportError, ValidationError


def _columns(xs, ys) -> tuple:
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float)
    squeeze = ys.ndim == 1
    if squeeze:
        ys = ys.reshape(-1, 1)
    if ys.shape[0] != xs.size:
        raise ValidationError(f"{ys.shape[0]} rows of values for {xs.size} xs")
    return xs, ys, squeeze


def nw_smooth(xs, ys, kernel: KernelSpec, query_times: Sequence[float]) -> np.ndarray:
    """Nadaraya-Watson local mean of every column of ``ys`` at each query."""
    xs, ys, squeeze = _columns(xs, ys)
    queries = np.asarray(query_times, dtype=float).ravel()
    W = weight_matrix(kernel, xs, queries)
    totals = W.sum(axis=1)
    empty = np.flatnonzero(~(np.abs(totals) > 0))
    if empty.size:
        q = float(queries[empty[0]])
        raise InsufficientSupportError(f"Zero total kernel weight at query {q:g}",
                                       {"query": q, "query_index": int(empty[0])})
    result = (W @ ys) / totals[:, None]
    return result[:, 0] if squeeze else result


def loess(xs, ys, kernel: KernelSpec, query_times: Sequence[float]) -> np.ndarray:
    """
    Local linear regression: at each query, the weighted least-squares line through the
    in-support points, evaluated at the query.
    """
    xs, ys, squeeze = _columns(xs, ys)
    queries = np.asarray(query_times, dtype=float).ravel()
    result = np.empty((queries.size, ys.shape[1]))
    for i, q in enumerate(queries):
        w = kernel_weights(kernel, xs, q)
        support = np.flatnonzero(w >= CONST.DROP_THRESHOLD)
        if np.unique(xs[support]).size < 2:
            raise InsufficientSupportError(
                f"Degenerate local design at query {q:g}: fewer than 2 distinct points in support",
                {"query": float(q), "n_points": int(support.size)})
        sqrt_w = np.sqrt(w[support])
        # centred on q, so the intercept is the fitted value at q
        design = np.column_stack([xs[support] - q, np.ones(support.size)]) * sqrt_w[:, None]
        coefficients, *_ = np.linalg.lstsq(design, ys[support] * sqrt_w[:, None], rcond=None)
        result[i] = coefficients[1]
    return result[:, 0] if squeeze else result
