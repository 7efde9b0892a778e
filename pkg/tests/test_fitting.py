import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from herzlab.fitting import fit_envelope, upper_hull


def test_exact_power_law():
    x = -np.linspace(0, 5, 30)
    rep = fit_envelope(x, 0.4 * x + np.log(3.0))
    assert rep.delta == pytest.approx(0.4, abs=1e-12)
    assert rep.C == pytest.approx(3.0, rel=1e-12)
    assert rep.envelope_violations == 0 and rep.passed
    assert rep.residual == pytest.approx(0.0, abs=1e-12)


def test_clamp_and_flag():
    x = -np.linspace(0, 3, 10)
    rep = fit_envelope(x, 1.5 * x, clamp=True)
    assert rep.flagged and rep.delta == 1.0 and rep.delta_raw == pytest.approx(1.5)
    rep = fit_envelope(x, 1.5 * x)
    assert rep.delta == pytest.approx(1.5)


@pytest.mark.parametrize(
    "x, y",
    [([0.0], [0.0]), ([0.0, 0.0], [1.0, 2.0]), ([0.0, np.nan], [0.0, 1.0])],
)
def test_degenerate_inputs(x, y):
    with pytest.raises(ValueError):
        fit_envelope(x, y)


@given(st.integers(0, 2**31), st.integers(3, 60))
def test_envelope_covers_cloud(seed, n):
    rng = np.random.default_rng(seed)
    x = -rng.exponential(2.0, n)
    x[0] = 0.0
    y = 0.5 * x + rng.normal(0, 0.3, n)
    rep = fit_envelope(x, y)
    assert rep.envelope_violations == 0
    assert np.all(rep.delta * x + np.log(rep.C) >= y - 1e-9 * np.maximum(1, np.abs(y)))


@given(st.integers(0, 2**31))
def test_upper_hull_points_above_chords(seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=30), rng.normal(size=30)
    h = upper_hull(x, y)
    hx, hy = x[h], y[h]
    assert np.all(np.diff(hx) >= 0)
    assert np.all(y <= np.interp(x, hx, hy) + 1e-12)
