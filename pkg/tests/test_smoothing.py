import numpy as np
import pytest
from lmft.kernels import KernelSpec
from lmft.pipeline import loess, nw_smooth
from lmft.synth import gen_variable_noise
from lmft.utils.errors import InsufficientSupportError, ValidationError


def test_constant_input_stays_constant():
    xs = np.arange(50.0)
    ys = np.full(50, 4.2)
    for smoother in (nw_smooth, loess):
        out = smoother(xs, ys, KernelSpec("tricube", h=7.0), [0.0, 12.5, 49.0])
        assert np.allclose(out, 4.2, rtol=0, atol=1e-12)


def test_wide_uniform_kernel_gives_global_mean():
    rng = np.random.default_rng(0)
    xs = np.arange(30.0)
    ys = rng.normal(size=30)
    out = nw_smooth(xs, ys, KernelSpec("uniform", h=1e6), [3.0, 17.0])
    assert np.allclose(out, ys.mean(), rtol=0, atol=1e-12)


def test_loess_reproduces_lines_exactly():
    xs = np.linspace(0, 20, 41)
    ys = 2.0 * xs + 1.0
    queries = [0.0, 3.3, 10.0, 20.0]
    out = loess(xs, ys, KernelSpec("tricube", h=5.0), queries)
    assert np.allclose(out, 2.0 * np.array(queries) + 1.0, rtol=0, atol=1e-9)


def test_loess_two_points_interpolates():
    out = loess([0.0, 1.0], [0.0, 2.0], KernelSpec("uniform", h=10.0), [0.5])
    assert out[0] == pytest.approx(1.0, abs=1e-12)


def test_multi_column_shape():
    xs = np.arange(20.0)
    ys = np.column_stack([xs, -xs, np.ones(20)])
    out = nw_smooth(xs, ys, KernelSpec("tricube", h=4.0), [5.0, 10.0])
    assert out.shape == (2, 3)
    assert np.allclose(out[:, 0], [5.0, 10.0])
    assert np.allclose(out[:, 1], [-5.0, -10.0])


def test_noisy_sine_is_denoised():
    rng = np.random.default_rng(1)
    xs = np.arange(400.0)
    truth = np.sin(xs / 40.0)
    ys = truth + 0.3 * rng.normal(size=400)
    interior = xs[50:350]
    for smoother in (nw_smooth, loess):
        out = smoother(xs, ys, KernelSpec("tricube", h=15.0), interior)
        rmse = float(np.sqrt(np.mean((out - truth[50:350]) ** 2)))
        print(f"{smoother.__name__}: rmse {rmse:.4f}")
        assert rmse < 0.15


def test_zero_weight_query_rejected():
    with pytest.raises(InsufficientSupportError):
        nw_smooth(np.arange(10.0), np.ones(10), KernelSpec("tricube", h=1.0), [100.0])
    with pytest.raises(InsufficientSupportError):
        loess(np.arange(10.0), np.ones(10), KernelSpec("tricube", h=1.0), [4.0])


def test_mismatched_rows_rejected():
    with pytest.raises(ValidationError):
        nw_smooth(np.arange(10.0), np.ones(9), KernelSpec("tricube", h=3.0), [4.0])


@pytest.mark.slow
def test_refining_query_grid_shrinks_adjacent_differences():
    series = gen_variable_noise(0)
    kernel = KernelSpec("tricube", h=60.0)
    largest = []
    for spacing in (8.0, 4.0, 2.0, 1.0):
        queries = np.arange(100.0, 900.0 + spacing / 2, spacing)
        out = nw_smooth(series.times, series.values[:, 0], kernel, queries)
        largest.append(float(np.abs(np.diff(out)).max()))
    print(f"max adjacent differences {largest}")
    for coarse, fine in zip(largest, largest[1:]):
        assert coarse >= 1.5 * fine
