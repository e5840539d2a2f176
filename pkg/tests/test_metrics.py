import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ta_explore.metrics import baseline_threshold, episodes_to_threshold, moving_average, plateau, trend_slope

series = st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=200)


def test_moving_average_examples():
    x = np.arange(1.0, 11.0)
    assert moving_average(x, 3)[4] == 4.0
    assert moving_average(x, 3)[0] == 1.0 and moving_average(x, 3)[1] == 1.5
    assert np.array_equal(moving_average(np.full(80, 2.5)), np.full(80, 2.5))
    with pytest.raises(ValueError):
        moving_average(x, 0)
    assert moving_average([], 5).size == 0


@given(x=series)
def test_window_one_is_identity(x):
    assert np.allclose(moving_average(x, 1), x, rtol=0, atol=1e-9 * max(1.0, max(map(abs, x))))


@given(x=series, w=st.integers(1, 60))
def test_moving_average_matches_direct_mean(x, w):
    ma = moving_average(x, w)
    direct = [np.mean(x[max(0, i - w + 1): i + 1]) for i in range(len(x))]
    assert np.allclose(ma, direct, rtol=1e-9, atol=1e-6)


def test_episodes_to_threshold():
    curve = np.linspace(1.0, 0.0, 11)
    assert episodes_to_threshold(curve, 0.5, maximize=False, window=1) == 5
    assert episodes_to_threshold(-curve, -0.5, maximize=True, window=1) == 5
    assert episodes_to_threshold(curve, -1.0, maximize=False, window=1) is None


def test_baseline_threshold_sides():
    assert baseline_threshold([-100.0] * 5, maximize=True) == pytest.approx(-105.0)
    assert baseline_threshold([0.2] * 5, maximize=False) == pytest.approx(0.21)
    assert plateau(np.arange(10.0), tail=4) == 7.5


def test_trend_slope():
    assert trend_slope([1.0, 3.0, 5.0]) == pytest.approx(2.0)
    assert trend_slope([4.0, 4.0], x=[100.0, 200.0]) == 0.0
