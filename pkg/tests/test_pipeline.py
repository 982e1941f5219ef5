import numpy as np
import pytest
from scipy.stats import spearmanr
from lmft.covariance import CovExpr
from lmft.gpr import FitOptions
from lmft.kernels import KernelSpec
from lmft.pipeline import (
    SeedContext,
    SeedStrategyFactory,
    SeedVariant,
    TimeSeries,
    extract,
    fit_exemplar,
    lmft_at,
    lmft_predict_at,
    local_problem,
    log2_grid,
    nw_smooth,
)
from lmft.synth import gen_variable_noise, gen_variable_period
from lmft.utils.errors import InsufficientSupportError, ValidationError


def noise_series(n=300, variance=2.0, channels=1, seed=0) -> TimeSeries:
    rng = np.random.default_rng(seed)
    values = rng.normal(size=(n, channels)) * np.sqrt(variance)
    return TimeSeries(np.arange(n, dtype=float), values, [f"ch{i}" for i in range(channels)])


def contrived_variance_expr() -> CovExpr:
    return CovExpr.cn(64, free=False) * CovExpr.rbf(2, free=False) + CovExpr.wn(1.0)


def test_white_noise_feature_tracks_variance():
    series = noise_series(n=1000, variance=3.0)
    theta, result = lmft_at(500.0, series, 0, KernelSpec("tricube", h=400.0), CovExpr.wn(1.0),
                            SeedStrategyFactory.fixed())
    print(f"feature {theta[0]:.4f}, log marginal {result.log_marginal:.4f}")
    assert abs(theta[0] - 3.0) / 3.0 < 0.2
    assert result.seed_origin == "fixed"


def test_uniform_kernel_spanning_series_gives_constant_feature():
    series = noise_series(n=60)
    features = extract(series, [10.0, 30.0, 50.0], KernelSpec("uniform", h=1000.0), CovExpr.wn(1.0),
                       SeedStrategyFactory.fixed())
    column = features.features[:, 0]
    assert np.allclose(column, column[0], rtol=1e-9)


def test_local_problem_normalizes_weights():
    series = noise_series(n=100)
    problem = local_problem(50.0, series, 0, KernelSpec("tricube", h=10.0))
    assert problem.X.size == 19
    assert problem.weights.mean() == pytest.approx(1.0, abs=1e-12)


def test_insufficient_support_rejected():
    series = noise_series(n=50)
    expr = CovExpr.cn(1.0) * CovExpr.rbf(1.0) + CovExpr.wn(1.0)
    with pytest.raises(InsufficientSupportError):
        lmft_at(25.0, series, 0, KernelSpec("tricube", h=3.0), expr, SeedStrategyFactory.fixed())


def test_extract_column_layout():
    series = noise_series(n=80, channels=3)
    expr = CovExpr.cn(1.0, free=False) * CovExpr.rbf(3.0, free=False) + CovExpr.wn(1.0)
    features = extract(series, series.times[::20], KernelSpec("tricube", h=20.0), expr,
                       SeedStrategyFactory.fixed(), threads=2)
    assert features.features.shape == (4, 3)
    assert features.feature_names == ["ch0.wn", "ch1.wn", "ch2.wn"]
    assert np.all(features.features > 0)
    assert len(features.diagnostics) == 12
    assert all(d.weight_mean == pytest.approx(1.0, abs=1e-12) for d in features.diagnostics)


def test_extract_rejects_fixed_only_expression():
    series = noise_series(n=30)
    with pytest.raises(ValidationError):
        extract(series, [10.0], KernelSpec("tricube", h=20.0), CovExpr.wn(1.0, free=False),
                SeedStrategyFactory.fixed())


def test_extract_is_deterministic_across_threads():
    series = noise_series(n=120, channels=2, seed=4)
    expr = CovExpr.cn(1.0) + CovExpr.wn(1.0)
    strategy = SeedStrategyFactory.multiseed(count=3, lo=1e-2, hi=1e2, rng_seed=17)
    kernel = KernelSpec("tricube", h=30.0)
    one = extract(series, series.times[::15], kernel, expr, strategy, threads=1)
    four = extract(series, series.times[::15], kernel, expr, strategy, threads=4)
    assert np.array_equal(one.features, four.features)


def test_locality_of_finite_support_kernels():
    series = noise_series(n=200, seed=5)
    kernel = KernelSpec("tricube", h=15.0)
    queries = [40.0, 60.0, 80.0]
    perturbed = series.values.copy()
    perturbed[150:] += 100.0
    other = TimeSeries(series.times, perturbed, series.channel_names)
    expr = CovExpr.wn(1.0)
    a = extract(series, queries, kernel, expr, SeedStrategyFactory.fixed())
    b = extract(other, queries, kernel, expr, SeedStrategyFactory.fixed())
    assert np.array_equal(a.features, b.features)


def test_failed_cells_take_nearest_success():
    series = noise_series(n=100)
    times = np.concatenate([series.times[:40], series.times[60:]])
    gapped = TimeSeries(times, np.concatenate([series.values[:40], series.values[60:]]), ["ch0"])
    expr = CovExpr.cn(1.0) + CovExpr.wn(1.0)
    features = extract(gapped, [30.0, 45.0, 50.0, 70.0], KernelSpec("tricube", h=4.0), expr,
                       SeedStrategyFactory.fixed())
    failed = [d.query_index for d in features.failed_cells]
    assert failed == [1, 2]
    assert np.array_equal(features.features[1], features.features[0])
    assert np.array_equal(features.features[2], features.features[3])
    assert features.diagnostics[1].filled_from == 0
    assert features.diagnostics[2].filled_from == 3


def test_unsorted_queries_rejected():
    with pytest.raises(ValidationError):
        extract(noise_series(n=30), [20.0, 10.0], KernelSpec("tricube", h=20.0), CovExpr.wn(1.0),
                SeedStrategyFactory.fixed())


def test_dirichlet_kernel_rejected_for_local_fits():
    series = noise_series(n=30)
    kernel = KernelSpec("dirichlet", n=3)
    with pytest.raises(ValidationError):
        extract(series, [10.0], kernel, CovExpr.wn(1.0), SeedStrategyFactory.fixed())
    with pytest.raises(ValidationError):
        lmft_at(10.0, series, 0, kernel, CovExpr.wn(1.0), SeedStrategyFactory.fixed())


def test_neighbor_strategy_seeds_from_previous_optimum():
    strategy = SeedStrategyFactory.neighbor([2.0])
    expr = CovExpr.wn(1.0)
    seeds, origins = strategy.seeds(expr, SeedContext(0, 0))
    assert origins == ["fixed"] and seeds[0].tolist() == [2.0]
    seeds, origins = strategy.seeds(expr, SeedContext(0, 1, previous=np.array([0.7])))
    assert origins == ["neighbor"] and seeds[0].tolist() == [0.7]
    assert strategy.is_sequential


def test_multiseed_cells_are_independent_and_reproducible():
    strategy = SeedStrategyFactory.multiseed(count=4, rng_seed=3)
    expr = CovExpr.cn(1.0) + CovExpr.wn(1.0)
    a, origins = strategy.seeds(expr, SeedContext(0, 5))
    b, _ = strategy.seeds(expr, SeedContext(0, 5))
    c, _ = strategy.seeds(expr, SeedContext(1, 5))
    assert origins == [f"multiseed[{i}]" for i in range(4)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert not np.array_equal(a[0], c[0])


def test_strategy_from_dict():
    strategy = SeedStrategyFactory.from_dict({"variant": "multiseed", "count": 25, "lo": 1e-10, "hi": 1e10})
    assert strategy.variant == SeedVariant.MULTISEED
    assert strategy.to_dict()["count"] == 25
    with pytest.raises(ValidationError):
        SeedStrategyFactory.from_dict({"variant": "multiseed", "lo": 10.0, "hi": 1.0})
    with pytest.raises(ValidationError):
        SeedStrategyFactory.from_dict({"variant": "random_walk"})


def test_exemplar_fit_and_neighbor_plus_exemplar():
    series = noise_series(n=200, variance=2.0, seed=6)
    expr = CovExpr.cn(1.0) + CovExpr.wn(1.0)
    exemplar = fit_exemplar(series, 0, expr, window=(0.0, 99.0), seed_count=8, lo=1e-2, hi=1e2)
    assert exemplar.seed_origin == "exemplar"
    strategy = SeedStrategyFactory.neighbor_plus_exemplar(exemplar_seed_count=8, global_reseed_count=2,
                                                          lo=1e-2, hi=1e2)
    features = extract(series, series.times[20:181:40], KernelSpec("tricube", h=40.0), expr, strategy)
    assert features.features.shape == (5, 2)
    origins = {d.seed_origin for d in features.diagnostics}
    assert origins <= {"fixed", "neighbor", "exemplar"} | {f"multiseed[{i}]" for i in range(2)}
    assert not features.failed_cells


def test_exemplar_freeze_length_scale():
    series = TimeSeries(np.arange(120.0), np.sin(np.arange(120.0) / 5.0), ["y"])
    expr = CovExpr.cn(1.0) * CovExpr.rbf(2.0) + CovExpr.wn(0.1)
    exemplar = fit_exemplar(series, "y", expr, seed_count=4, lo=1e-1, hi=1e1)
    frozen = expr.freeze(["rbf_l"], {"rbf_l": exemplar.parameters()["rbf_l"]})
    assert frozen.free_names() == ["cn", "wn"]


def test_predict_at_returns_local_mean():
    x = np.arange(100.0)
    series = TimeSeries(x, 3.0 * np.sin(x / 8.0), ["y"])
    expr = CovExpr.cn(4.0) * CovExpr.rbf(6.0, free=False) + CovExpr.wn(0.01)
    mean, variance = lmft_predict_at(50.0, series, 0, KernelSpec("tricube", h=25.0), expr,
                                     SeedStrategyFactory.fixed())
    assert mean == pytest.approx(3.0 * np.sin(50.0 / 8.0), abs=0.05)
    assert variance >= 0


def test_log2_grid():
    assert log2_grid(-2, 2).tolist() == [0.25, 0.5, 1.0, 2.0, 4.0]
    with pytest.raises(ValidationError):
        log2_grid(3, 1)


@pytest.mark.slow
def test_contrived_variance_feature_rises_in_noisy_window():
    series = gen_variable_noise(0)
    queries = series.times[::5]
    features = extract(series, queries, KernelSpec("tricube", h=120.0), contrived_variance_expr(),
                       SeedStrategyFactory.fixed(), threads=4)
    wn = features.features[:, 0]
    inside = wn[(queries >= 460) & (queries <= 540)].mean()
    outside = wn[(queries >= 100) & (queries <= 400)].mean()
    print(f"inside {inside:.3f} outside {outside:.3f}")
    assert inside >= 3.0 * outside


@pytest.mark.slow
def test_contrived_period_feature_follows_distance_from_centre():
    series = gen_variable_period(0)
    expr = CovExpr.cn(1.0) * CovExpr.ss(10.0, 1.0, l_free=False) + CovExpr.wn(1.0, free=False)
    queries = series.times[::10]
    strategy = SeedStrategyFactory.multiseed(count=25, lo=1e-10, hi=1e10, rng_seed=0)
    features = extract(series, queries, KernelSpec("tricube", h=120.0), expr, strategy, threads=8)
    period = features.features[:, features.feature_names.index("y.ss_p")]
    smoothed = nw_smooth(queries, period, KernelSpec("tricube", h=120.0), queries)
    rho = spearmanr(smoothed, -np.abs(queries)).statistic
    print(f"spearman {rho:.3f}")
    assert rho > 0.3


@pytest.mark.slow
def test_full_diagonal_and_noise_only_both_run_on_contrived_data():
    series = gen_variable_noise(1)
    queries = series.times[100:900:100]
    for mode in ("full_diagonal", "noise_only"):
        features = extract(series, queries, KernelSpec("tricube", h=120.0), contrived_variance_expr(),
                           SeedStrategyFactory.fixed(), FitOptions(mode=mode), threads=4)
        assert np.all(np.isfinite(features.features))
