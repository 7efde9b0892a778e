import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from herzlab.exponent import (
    VariableExponent,
    conjugate,
    essential_bounds,
    harmonic_average,
    lh_constants,
    lh_infinity_constant,
    lh_local_constant,
    scale,
)
from herzlab.grid import GridSpec, Region, build_grid


@pytest.fixture
def g():
    return build_grid(GridSpec(1, 0, 3, 64))


def test_constant_bounds(g):
    assert essential_bounds(VariableExponent.constant(2.0, g)) == (2.0, 2.0)


def test_rational_bounds_against_dense_sampling(g):
    p = VariableExponent.from_preset("rational:3,1", g)
    dense = np.linspace(-8, 8, 200001)
    vals = 3 - 1 / (1 + dense**2)
    lo, hi = essential_bounds(p)
    assert lo == pytest.approx(vals.min(), abs=g.h**2)
    assert hi == pytest.approx(vals.max(), abs=1e-3)
    assert hi == pytest.approx(3 - 1 / 65, abs=1e-3)


def test_ramp_bounds(g):
    lo, hi = essential_bounds(VariableExponent.from_preset("ramp:2,3", g))
    assert lo == pytest.approx(2.0, abs=g.h)
    assert hi == 3.0


def test_exponent_must_exceed_one(g):
    with pytest.raises(ValueError, match="exceed 1"):
        VariableExponent.constant(1.0, g)


@pytest.mark.parametrize("p0, expected", [(2.0, 2.0), (4.0, 4.0 / 3.0), (3.0, 1.5)])
def test_conjugate_values(g, p0, expected):
    assert np.allclose(conjugate(VariableExponent.constant(p0, g)).values, expected, rtol=1e-15)


@given(st.floats(1.05, 20.0), st.floats(0.0, 5.0))
def test_conjugate_involution(a, b):
    g = build_grid(GridSpec(1, 0, 2, 8))
    p = VariableExponent.from_preset(f"ramp:{a},{a + b}", g)
    back = conjugate(conjugate(p)).values
    assert np.max(np.abs(back - p.values) / p.values) <= 1e-12


def test_scale_window(g):
    p = VariableExponent.constant(2.0, g)
    assert np.all(scale(p, 0.75).values == 1.5)
    assert scale(p, 1.0) is p
    with pytest.raises(ValueError, match="1/p_-<r<1"):
        scale(p, 0.4)


def test_harmonic_average_examples(g):
    ball = Region.ball((0.0,), 2.0)
    assert harmonic_average(VariableExponent.constant(3.0, g), ball) == pytest.approx(3.0, rel=1e-14)
    split = VariableExponent.from_function(lambda x: np.where(x[..., 0] < 0, 2.0, 6.0), g)
    assert harmonic_average(split, ball) == pytest.approx(3.0, rel=1e-12)


def test_harmonic_average_constant_across_radii(g):
    p = VariableExponent.constant(2.0, g)
    for r in (0.25, 0.5, 1.0, 4.0):
        assert harmonic_average(p, Region.ball((0.0,), r)) == pytest.approx(2.0, rel=1e-14)


def test_harmonic_average_empty_ball(g):
    p = VariableExponent.constant(2.0, g)
    with pytest.raises(ValueError, match="empty"):
        harmonic_average(p, Region.ball((g.axis[0] + g.h / 2,), g.h / 8))


@given(st.floats(-6.0, 6.0), st.floats(0.1, 2.0))
def test_harmonic_average_between_extremes(c, r):
    g = build_grid(GridSpec(1, 0, 3, 16))
    p = VariableExponent.from_preset("rational:3,1.5", g)
    ball = Region.ball((c,), r)
    mask = ball.to_mask(g)
    pb = harmonic_average(p, ball)
    assert p.values[mask].min() * (1 - 1e-14) <= pb <= p.values[mask].max() * (1 + 1e-14)


def test_lh_constants_constant_exponent(g):
    p = VariableExponent.constant(2.0, g)
    assert lh_constants(p, g) == (0.0, 0.0)


def test_lh_infinity_ramp_against_dense_scan(g):
    p = VariableExponent.from_preset("ramp:2,3", g)
    dense = np.linspace(0, 8, 400001)
    oracle = np.max((1 - np.minimum(1, dense)) * np.log(np.e + dense))
    assert lh_infinity_constant(p) == pytest.approx(oracle, rel=0.02)
    assert oracle == pytest.approx(1.0, rel=1e-9)


def test_lh_local_ramp_stable_and_matches_exhaustive_scan():
    g = build_grid(GridSpec(1, 0, 2, 16))
    p = VariableExponent.from_preset("ramp:2,3", g)
    x = g.axis
    d = np.abs(x[:, None] - x[None, :])
    ok = (d > 0) & (d <= 0.5)
    exhaustive = np.max(np.abs(p.values[:, None] - p.values[None, :])[ok] * -np.log(d[ok]))
    est = [lh_local_constant(p, pair_budget=b) for b in (1024, 2048, 4096, 8192)]
    assert all(e <= exhaustive * (1 + 1e-12) for e in est)
    assert est[-1] >= 0.9 * exhaustive
    assert est[-1] <= 1.0


def test_lh_missing_p_infinity():
    g = build_grid(GridSpec(1, 0, 2, 8))
    p = VariableExponent(g, np.full(g.shape, 2.0))
    assert lh_local_constant(p) == 0.0
    with pytest.raises(ValueError, match="p_infinity"):
        lh_constants(p)


@given(st.integers(0, 1000), st.integers(1, 6))
def test_lh_local_monotone_in_budget(seed, k):
    g = build_grid(GridSpec(1, 0, 2, 16))
    p = VariableExponent.from_preset("rational:3,1.5", g)
    small = lh_local_constant(p, pair_budget=256 * k, seed=seed, chunk=256)
    large = lh_local_constant(p, pair_budget=256 * (k + 1), seed=seed, chunk=256)
    assert large >= small


def test_unknown_preset(g):
    with pytest.raises(ValueError, match="unknown exponent preset"):
        VariableExponent.from_preset("wiggle:2", g)
