import numpy as np
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
from lmft.covariance import CovExpr
from lmft.gpr import FitOptions, FitResult, WeightVector, fit, fit_multiseed, log_uniform_seeds, predict
from lmft.kernels import KernelFamily, KernelSpec, kernel_weights
from lmft.pipeline.seeding import SeedContext, SeedStrategy, SeedVariant
from lmft.pipeline.series import CellDiagnostics, FeatureSeries, TimeSeries
from lmft.utils import constants as CONST
from lmft.utils.errors import InsufficientSupportError, LmftError, ValidationError
from lmft.utils.logging import logger


@dataclass
class LocalProblem:
    X: np.ndarray
    y: np.ndarray
    weights: WeightVector


def _check_pipeline_kernel(kernel: KernelSpec):
    # dirichlet weights can be negative
    if kernel.family == KernelFamily.DIRICHLET:
        raise ValidationError("The dirichlet kernel cannot weight a local fit", {"family": kernel.family.value})


def local_problem(q: float, series: TimeSeries, channel: int, kernel: KernelSpec,
                  min_points: int = 1) -> LocalProblem:
    """Kernel weights at ``q`` with dropped points removed and the rest normalized to mean 1."""
    raw = kernel_weights(kernel, series.times, q)
    weights = WeightVector.from_raw(raw)
    if weights.n_retained < min_points:
        raise InsufficientSupportError(
            f"Only {weights.n_retained} points in kernel support at q={q:g}, need {min_points}",
            {"q": float(q), "n_points": weights.n_retained, "required": min_points})
    idx = weights.retained
    return LocalProblem(series.times[idx], series.values[idx, channel], weights)


def lmft_at(q: float, series: TimeSeries, channel: int, kernel: KernelSpec, expr: CovExpr,
            strategy: SeedStrategy, opts: Optional[FitOptions] = None,
            context: Optional[SeedContext] = None) -> Tuple[np.ndarray, FitResult]:
    """
    Fit the locally weighted GP at ``q`` and return its Free parameters as features.

    ``context`` carries the neighbor optimum and exemplar fit for sequential strategies; it
    defaults to a context with neither.
    """
    opts = opts or FitOptions()
    if expr.n_free == 0:
        raise ValidationError("Covariance expression has no Free parameters to extract")
    _check_pipeline_kernel(kernel)
    channel = series.channel_index(channel)
    context = context or SeedContext(channel=channel, query_index=0)
    if strategy.needs_exemplar and context.exemplar is None:
        context.exemplar = fit_exemplar(series, channel, expr, kernel=kernel, q=q,
                                        seed_count=strategy.exemplar_seed_count,
                                        lo=strategy.lo, hi=strategy.hi,
                                        rng_seed=strategy.rng_seed, opts=opts)

    problem = local_problem(q, series, channel, kernel, min_points=2 * expr.n_free)
    seeds, origins = strategy.seeds(expr, context)
    result = fit(expr, problem.X, problem.y, problem.weights, seeds, opts, origins)

    if (strategy.variant == SeedVariant.NEIGHBOR_PLUS_EXEMPLAR and result.seed_origin == "exemplar"
            and strategy.global_reseed_count > 0):
        rng = strategy.cell_rng(context.channel, context.query_index)
        reseeded = fit_multiseed(expr, problem.X, problem.y, problem.weights, rng,
                                 strategy.global_reseed_count, strategy.lo, strategy.hi, opts)
        logger.debug(f"global reseed at q={q:g}: {reseeded.log_marginal:.6g} vs {result.log_marginal:.6g}")
        if reseeded.log_marginal > result.log_marginal:
            result = reseeded
    return result.theta, result


def lmft_predict_at(q: float, series: TimeSeries, channel: int, kernel: KernelSpec, expr: CovExpr,
                    strategy: SeedStrategy, opts: Optional[FitOptions] = None,
                    include_noise: bool = False) -> Tuple[float, float]:
    """Posterior mean and variance at ``q`` of the model fitted locally at ``q``."""
    opts = opts or FitOptions()
    channel = series.channel_index(channel)
    _, result = lmft_at(q, series, channel, kernel, expr, strategy, opts)
    problem = local_problem(q, series, channel, kernel)
    mean, variance = predict(result, problem.X, problem.y, problem.weights, np.array([q]),
                             opts.mode, include_noise)
    return float(mean[0]), float(variance[0])


def default_exemplar_window(series: TimeSeries, kernel: KernelSpec, q: float,
                            max_points: int = 256) -> np.ndarray:
    """Indices of the exemplar segment: the kernel support at ``q``, at most ``max_points`` nearest."""
    raw = kernel_weights(kernel, series.times, q)
    support = np.flatnonzero(raw >= CONST.DROP_THRESHOLD)
    if support.size > max_points:
        order = np.argsort(np.abs(series.times[support] - q), kind="stable")
        support = np.sort(support[order[:max_points]])
    return support


def fit_exemplar(series: TimeSeries, channel: int, expr: CovExpr,
                 window: Optional[Tuple[float, float]] = None,
                 seed_count: int = CONST.EXEMPLAR_SEED_COUNT,
                 lo: float = CONST.MULTISEED_LO, hi: float = CONST.MULTISEED_HI,
                 rng_seed: int = 0, opts: Optional[FitOptions] = None,
                 kernel: Optional[KernelSpec] = None, q: Optional[float] = None) -> FitResult:
    """
    Unweighted fit on one segment with ``seed_count`` log-uniform seeds.

    The segment is ``window`` (inclusive time bounds) when given, else the kernel support
    around ``q`` (the middle of the series by default).
    """
    opts = opts or FitOptions()
    channel = series.channel_index(channel)
    if window is not None:
        mask = (series.times >= window[0]) & (series.times <= window[1])
        idx = np.flatnonzero(mask)
    elif kernel is not None:
        centre = float(series.times[series.n_times // 2]) if q is None else float(q)
        idx = default_exemplar_window(series, kernel, centre)
    else:
        idx = np.arange(series.n_times)
    if idx.size < 2 * max(expr.n_free, 1):
        raise InsufficientSupportError(f"Exemplar segment holds {idx.size} points",
                                       {"n_points": int(idx.size)})
    rng = np.random.default_rng([rng_seed, channel])
    seeds = log_uniform_seeds(rng, seed_count, expr.n_free, lo, hi)
    origins = [f"exemplar[{i}]" for i in range(seed_count)]
    result = fit(expr, series.times[idx], series.values[idx, channel], None, seeds, opts, origins)
    logger.info(f"exemplar fit for channel {series.channel_names[channel]}: "
                f"{result.parameters()} (log marginal {result.log_marginal:.6g})")
    result.seed_origin = "exemplar"
    return result


def log2_grid(lo_exp: int, hi_exp: int) -> np.ndarray:
    """2**lo_exp, 2**(lo_exp + 1), ..., 2**hi_exp."""
    if hi_exp < lo_exp:
        raise ValidationError(f"Empty grid: {lo_exp} > {hi_exp}")
    return 2.0 ** np.arange(lo_exp, hi_exp + 1, dtype=float)


def _cell(q: float, query_index: int, series: TimeSeries, channel: int, kernel: KernelSpec,
          expr: CovExpr, strategy: SeedStrategy, opts: FitOptions,
          context: SeedContext) -> Tuple[Optional[np.ndarray], CellDiagnostics]:
    diag = CellDiagnostics(query_index=query_index, channel=series.channel_names[channel])
    try:
        theta, result = lmft_at(q, series, channel, kernel, expr, strategy, opts, context)
    except LmftError as e:
        if type(e) is ValidationError:
            raise
        logger.error(f"fit failed at q={q:g} channel={diag.channel}: {e.message}")
        diag.failed = True
        diag.error = e.message
        return None, diag

    weights = WeightVector.from_raw(kernel_weights(kernel, series.times, q))
    diag.converged = result.converged
    diag.log_marginal = result.log_marginal
    diag.seed_origin = result.seed_origin
    diag.iterations = result.iterations
    diag.n_points = weights.n_retained
    diag.weight_mean = weights.mean()
    logger.trace(f"q={q:g} channel={diag.channel} theta={theta} origin={result.seed_origin}")
    return theta, diag


def _run_channel_sequential(query_times: np.ndarray, series: TimeSeries, channel: int,
                            kernel: KernelSpec, expr: CovExpr, strategy: SeedStrategy,
                            opts: FitOptions) -> List[Tuple[Optional[np.ndarray], CellDiagnostics]]:
    exemplar = None
    if strategy.needs_exemplar:
        centre = float(query_times[len(query_times) // 2])
        try:
            exemplar = fit_exemplar(series, channel, expr, kernel=kernel, q=centre,
                                    seed_count=strategy.exemplar_seed_count, lo=strategy.lo,
                                    hi=strategy.hi, rng_seed=strategy.rng_seed, opts=opts)
        except LmftError as e:
            if type(e) is ValidationError:
                raise
            logger.error(f"exemplar fit failed for channel {series.channel_names[channel]}: {e.message}")
            return [(None, CellDiagnostics(query_index=i, channel=series.channel_names[channel],
                                           failed=True, error=f"exemplar: {e.message}"))
                    for i in range(len(query_times))]
    cells = []
    previous = None
    for i, q in enumerate(query_times):
        context = SeedContext(channel=channel, query_index=i, previous=previous, exemplar=exemplar)
        theta, diag = _cell(q, i, series, channel, kernel, expr, strategy, opts, context)
        if theta is not None:
            previous = theta
        cells.append((theta, diag))
    return cells


def _fill_failures(cells: List[Tuple[Optional[np.ndarray], CellDiagnostics]],
                   n_free: int) -> np.ndarray:
    # failed cells copy the nearest successful query, the earlier one on ties
    values = np.full((len(cells), n_free), np.nan)
    ok = [i for i, (theta, _) in enumerate(cells) if theta is not None]
    for i, (theta, diag) in enumerate(cells):
        if theta is not None:
            values[i] = theta
        elif ok:
            nearest = min(ok, key=lambda j: (abs(j - i), j))
            values[i] = cells[nearest][0]
            diag.filled_from = nearest
    return values


def extract(series: TimeSeries, query_times: Sequence[float], kernel: KernelSpec, expr: CovExpr,
            strategy: SeedStrategy, opts: Optional[FitOptions] = None,
            threads: int = 1) -> FeatureSeries:
    """
    Local model feature transformation of every channel at every query time.

    Sequential strategies walk each channel's queries in ascending order; the others fan
    out over ``threads`` workers. Per-cell failures are logged and filled, never fatal.
    """
    opts = opts or FitOptions()
    if expr.n_free == 0:
        raise ValidationError("Covariance expression has no Free parameters to extract")
    _check_pipeline_kernel(kernel)
    query_times = np.asarray(query_times, dtype=float).ravel()
    if query_times.size == 0:
        raise ValidationError("extract needs at least one query time")
    if np.any(np.diff(query_times) < 0):
        raise ValidationError("query_times must be sorted")
    threads = max(1, int(threads))
    names = expr.free_names()
    logger.info(f"extract: {query_times.size} queries x {series.n_channels} channels, "
                f"{len(names)} free parameter(s), strategy={strategy.variant.value}, threads={threads}")

    per_channel: Dict[int, List[Tuple[Optional[np.ndarray], CellDiagnostics]]] = {}
    with ThreadPoolExecutor(max_workers=threads) as executor:
        if strategy.is_sequential:
            futures = {c: executor.submit(_run_channel_sequential, query_times, series, c, kernel,
                                          expr, strategy, opts)
                       for c in range(series.n_channels)}
            per_channel = {c: f.result() for c, f in futures.items()}
        else:
            for c in range(series.n_channels):
                futures = [executor.submit(_cell, q, i, series, c, kernel, expr, strategy, opts,
                                           SeedContext(channel=c, query_index=i))
                           for i, q in enumerate(query_times)]
                per_channel[c] = [f.result() for f in futures]

    blocks = []
    diagnostics: List[CellDiagnostics] = []
    for c in range(series.n_channels):
        blocks.append(_fill_failures(per_channel[c], len(names)))
        diagnostics.extend(diag for _, diag in per_channel[c])
    features = np.hstack(blocks)
    feature_names = [f"{channel}.{name}" for channel in series.channel_names for name in names]
    failed = sum(d.failed for d in diagnostics)
    if failed:
        logger.warning(f"extract: {failed} of {len(diagnostics)} cells failed and were filled")
    logger.event(f"extract finished: {features.shape[0]} rows x {features.shape[1]} features")
    return FeatureSeries(query_times, features, feature_names, diagnostics)
