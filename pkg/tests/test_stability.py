import numpy as np
import pytest
from lmft.pipeline import DemoFamily, flag_jumps, gradient_descent, seed_demo
from lmft.pipeline.stability import _seed, fixed_quartic, neighbor_quartic
from lmft.utils.errors import ValidationError


def test_neighbor_sweep_jumps_once():
    result = seed_demo("neighbor_quartic")
    print(result.jumps, result.optima[result.jumps[0] - 1:result.jumps[0] + 1])
    assert result.jump_count == 1
    assert 36 <= result.jumps[0] <= 42
    assert result.optima[result.jumps[0]] == pytest.approx(0.0, abs=1e-6)


def test_persistent_sweep_is_continuous():
    result = seed_demo(DemoFamily.NEIGHBOR_QUARTIC, persistent=True)
    assert result.jump_count == 0
    assert np.allclose(result.optima, result.params[:, 0], atol=1e-6)


def test_fixed_seed_jumps_when_ridge_crosses_seed():
    result = seed_demo("fixed")
    assert result.jumps == [21]
    h = result.params
    assert np.allclose(result.optima[:21], h[:21] + 1, atol=1e-6)
    assert np.allclose(result.optima[21:], h[21:] - 1, atol=1e-6)
    assert result.to_dict()["jump_count"] == 1


def test_fixed_quartic_seed_on_maximum_is_nudged():
    f, df, d2f = fixed_quartic(0.0)
    assert _seed(0.0, df, d2f) > 0.0
    assert gradient_descent(f, df, _seed(0.0, df, d2f)) == pytest.approx(1.0, abs=1e-8)
    assert gradient_descent(f, df, -0.3) == pytest.approx(-1.0, abs=1e-8)


def test_neighbor_quartic_stationary_points():
    _, df, _ = neighbor_quartic(1.5, -0.5)
    for x in (0.0, 1.5, -0.5):
        assert df(x) == 0.0


def test_flag_jumps():
    assert flag_jumps([0, 1, 2, 3, 20, 21]) == [4]
    assert flag_jumps([5.0, 5.0, 5.0]) == []
    assert flag_jumps([1.0]) == []


def test_unknown_family_rejected():
    with pytest.raises(ValidationError):
        seed_demo("cubic")
    with pytest.raises(ValidationError):
        seed_demo("fixed", grid=[])
