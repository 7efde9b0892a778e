import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from herzlab.balls import (
    BallFamily,
    RangeExtrema,
    ball_nodes,
    centered_window_sums,
    family_sums_and_extrema,
    ladder_radii,
    nested_ball_pairs,
)
from herzlab.grid import GridSpec, build_grid

G1 = build_grid(GridSpec(1, 0, 3, 8))
G2 = build_grid(GridSpec(2, 1, 2, 4))


def brute_mask(grid, center, radius):
    d2 = np.sum((grid.coords - np.asarray(center)) ** 2, axis=-1)
    return d2 < radius * radius


def test_ladder_radii_even_steps_exact():
    r = ladder_radii(G1)
    assert r[0] == 2 * G1.h
    assert np.all(r[::2] == 2 * G1.h * 2.0 ** np.arange(r[::2].size))
    assert r[-1] <= 2.0 ** (G1.spec.k_max + 1)
    assert np.allclose(r[1:] / r[:-1], np.sqrt(2))


def test_family_validation():
    with pytest.raises(ValueError):
        BallFamily(np.zeros((1, 1)), np.array([0.0]))
    assert len(BallFamily.origin(G1)) == ladder_radii(G1).size


@given(st.floats(-7.5, 7.5), st.floats(0.05, 6.0))
def test_ball_nodes_1d_matches_brute_force(c, r):
    sl = ball_nodes(G1, [c], r)
    mask = np.zeros(G1.shape, bool)
    mask[sl] = True
    assert np.array_equal(mask, brute_mask(G1, [c], r))


@given(st.floats(-3.5, 3.5), st.floats(-3.5, 3.5), st.floats(0.05, 4.0))
def test_ball_nodes_2d_matches_brute_force(cx, cy, r):
    assert np.array_equal(ball_nodes(G2, [cx, cy], r), brute_mask(G2, [cx, cy], r))


@pytest.mark.parametrize("grid", [G1, G2])
def test_family_sums_and_extrema_against_brute_force(grid):
    rng = np.random.default_rng(0)
    f = rng.uniform(0.5, 2.0, grid.shape)
    fam = BallFamily.ladder(grid, stride=5)
    counts, (sums,), (mx, mn) = family_sums_and_extrema(grid, fam, [f], f)
    ref = set()
    for c, r in fam.balls():
        m = brute_mask(grid, c, r)
        if m.any():
            ref.add((int(m.sum()), round(f[m].sum(), 9), f[m].max(), f[m].min()))
    got = {(int(a), round(b, 9), c, d) for a, b, c, d in zip(counts, sums, mx, mn)}
    assert got == ref


@given(st.integers(0, 2**31), st.integers(1, 200))
def test_range_extrema(seed, n):
    a = np.random.default_rng(seed).normal(size=n)
    rng = np.random.default_rng(seed + 1)
    lo = rng.integers(0, n, 20)
    hi = lo + 1 + rng.integers(0, n - lo)
    mx, mn = RangeExtrema(a).query(lo, hi)
    for i in range(20):
        assert mx[i] == a[lo[i]:hi[i]].max() and mn[i] == a[lo[i]:hi[i]].min()


@pytest.mark.parametrize("grid", [G1, G2])
@pytest.mark.parametrize("radius", [0.1, 0.25, 0.7, 1.0, 2.3])
def test_centered_window_sums_against_brute_force(grid, radius):
    f = np.random.default_rng(1).normal(size=grid.shape)
    got = centered_window_sums(f, grid, radius)
    flat = grid.coords.reshape(-1, grid.dim)
    want = np.array([f[brute_mask(grid, c, radius)].sum() for c in flat]).reshape(grid.shape)
    assert np.allclose(got, want, atol=1e-12)


@pytest.mark.parametrize("origin", [True, False])
@pytest.mark.parametrize("grid", [G1, G2])
def test_nested_pairs_are_nested_and_in_domain(grid, origin):
    L = grid.spec.half_width
    for cb, rb, ce, re in nested_ball_pairs(grid, 100, seed=3, origin=origin):
        assert re <= rb * (1 + 1e-12)
        assert np.linalg.norm(np.asarray(ce) - cb) + re <= rb * (1 + 1e-12)
        assert np.all(np.abs(cb) + rb <= L * (1 + 1e-12)) or origin
        eb, ee = brute_mask(grid, cb, rb), brute_mask(grid, ce, re)
        assert not np.any(ee & ~eb)


def test_nested_pairs_deterministic():
    a = nested_ball_pairs(G1, 10, seed=5)
    b = nested_ball_pairs(G1, 10, seed=5)
    assert all(x[1] == y[1] and x[3] == y[3] for x, y in zip(a, b))
