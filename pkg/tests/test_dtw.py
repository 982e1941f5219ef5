import numpy as np
import pytest
from lmft.evaluation import dtw, dtw_matrix
from lmft.pipeline import TimeSeries
from lmft.utils.errors import ValidationError
from .utils import brute_force_dtw


def test_dtw_examples():
    assert dtw([1, 2, 3], [1, 2, 2, 3]) == 0.0
    assert dtw([0], [1, 2]) == 3.0
    assert dtw([0, 0], [0, 0]) == 0.0
    assert dtw([[0, 0], [3, 4]], [[0, 0]]) == 5.0


def test_dtw_matches_brute_force():
    rng = np.random.default_rng(0)
    for trial in range(400):
        channels = 1 + trial % 2
        a = rng.normal(size=(rng.integers(1, 7), channels))
        b = rng.normal(size=(rng.integers(1, 7), channels))
        assert dtw(a, b) == pytest.approx(brute_force_dtw(a, b), abs=1e-12)


def test_dtw_symmetric_and_accepts_series():
    rng = np.random.default_rng(1)
    a = rng.normal(size=9)
    b = rng.normal(size=5)
    assert dtw(a, b) == pytest.approx(dtw(b, a), abs=1e-12)
    series = TimeSeries(np.arange(9.0), a, ["y"])
    assert dtw(series, b) == dtw(a, b)


def test_window_never_undercuts_full_dtw():
    rng = np.random.default_rng(2)
    a = rng.normal(size=12)
    b = rng.normal(size=10)
    full = dtw(a, b)
    assert dtw(a, b, window=100) == full
    assert dtw(a, b, window=0) >= full


def test_dtw_invalid_input():
    with pytest.raises(ValidationError):
        dtw([], [1.0])
    with pytest.raises(ValidationError):
        dtw(np.zeros((3, 2)), np.zeros((3, 1)))
    with pytest.raises(ValidationError):
        dtw([1.0], [1.0], window=-1)


def test_dtw_matrix_shape():
    D = dtw_matrix([[0.0, 1.0], [2.0]], [[0.0], [1.0], [5.0]])
    assert D.shape == (2, 3)
    assert D[1, 2] == 3.0
