import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from herzlab.exponent import VariableExponent
from herzlab.grid import GridFunction, GridSpec, build_grid
from herzlab.norms import (
    HerzParams,
    ModularQuery,
    associate_norm,
    dual_norm_estimate,
    herz_norm,
    herz_norm_report,
    herz_sum,
    logsumexp,
    luxemburg_norm,
    modular,
    norm_array,
    pairing,
    weighted_norm,
)
from herzlab.weights import Weight

G = build_grid(GridSpec(1, 0, 3, 16))
seeds = st.integers(0, 2**32 - 1)


def rand_fn(seed, grid=G):
    return GridFunction(grid, np.random.default_rng(seed).normal(size=grid.shape))


@pytest.mark.parametrize("p0", [1.5, 2.0, 3.0, 4.0])
def test_constant_exponent_closed_form(p0):
    w = Weight.power(0.25, G)
    for i in range(5):
        f = rand_fn(i)
        exact = (np.sum(np.abs(f.values) ** p0 * w.values) * G.cell) ** (1 / p0)
        assert weighted_norm(f, VariableExponent.constant(p0, G), w) == pytest.approx(exact, rel=1e-9)


def test_indicator_closed_form():
    f = G.sample(lambda x: (np.abs(x[..., 0]) <= 1).astype(float))
    assert weighted_norm(f, 3.0) == pytest.approx(2 ** (1 / 3), rel=1e-10)


def test_zero_function():
    assert weighted_norm(G.zeros(), VariableExponent.constant(2.0, G)) == 0.0


def test_exponent_below_one_is_quasi_norm_solver():
    f = rand_fn(1)
    exact = (np.sum(np.abs(f.values) ** 0.5) * G.cell) ** 2
    assert norm_array(f.values, 0.5, None, G.cell) == pytest.approx(exact, rel=1e-9)


def test_doubling_and_modular_brackets_agree():
    p = VariableExponent.from_preset("rational:3,1.5", G)
    f = rand_fn(2)
    a = luxemburg_norm(ModularQuery(f, p), bracket="modular")
    b = luxemburg_norm(ModularQuery(f, p), bracket="doubling")
    assert a == pytest.approx(b, rel=1e-9)
    with pytest.raises(ValueError):
        luxemburg_norm(ModularQuery(f, p), bracket="bogus")


def test_logsumexp_matches_direct_sum():
    t = np.array([-3.0, 0.5, 2.0])
    assert logsumexp(t) == pytest.approx(np.log(np.exp(t).sum()), rel=1e-15)
    assert np.isfinite(logsumexp(np.array([1000.0, 1000.0])))


def test_weight_must_be_positive():
    with pytest.raises(ValueError, match="strictly positive"):
        weighted_norm(rand_fn(0), 2.0, np.zeros(G.shape))


def test_mismatched_grids_rejected():
    other = build_grid(GridSpec(1, 0, 3, 8))
    with pytest.raises(ValueError, match="share one grid"):
        ModularQuery(rand_fn(0), VariableExponent.constant(2.0, other))


@pytest.mark.parametrize("preset", ["const:2", "ramp:2,3", "rational:3,1.5"])
@given(seed=seeds)
def test_unit_sphere_modular(preset, seed):
    p = VariableExponent.from_preset(preset, G)
    w = Weight.power(0.3, G)
    f = rand_fn(seed)
    n = luxemburg_norm(ModularQuery(f, p, w))
    rho = modular(ModularQuery(f, p, w), n)
    assert 1 - 1e-8 <= rho <= 1


@given(seed=seeds, c=st.floats(1e-3, 1e3))
def test_absolute_homogeneity(seed, c):
    p = VariableExponent.from_preset("ramp:2,3", G)
    f = rand_fn(seed)
    assert weighted_norm(c * f, p) == pytest.approx(c * weighted_norm(f, p), rel=1e-8)


@given(a=seeds, b=seeds)
def test_triangle_inequality(a, b):
    p = VariableExponent.from_preset("rational:3,1.5", G)
    w = Weight.power(-0.4, G)
    f, g = rand_fn(a), rand_fn(b)
    assert weighted_norm(f + g, p, w) <= (weighted_norm(f, p, w) + weighted_norm(g, p, w)) * (1 + 1e-9)


@given(seed=seeds)
def test_lattice_monotone(seed):
    p = VariableExponent.from_preset("ramp:1.5,4", G)
    f = rand_fn(seed)
    g = GridFunction(G, np.abs(f.values) * np.random.default_rng(seed + 1).uniform(0, 1, G.shape))
    assert weighted_norm(g, p) <= weighted_norm(f, p) * (1 + 1e-10)


@pytest.mark.parametrize("preset", ["const:2", "ramp:2,3", "rational:4,2"])
@given(a=seeds, b=seeds)
def test_generalized_holder(preset, a, b):
    p = VariableExponent.from_preset(preset, G)
    w = Weight.power(0.5, G)
    f, g = rand_fn(a), rand_fn(b)
    lhs = pairing(abs(f), abs(g))
    assert lhs <= 2 * weighted_norm(f, p, w) * associate_norm(g, p, w)


def test_dual_estimate_constant_exponent_is_sharp():
    p = VariableExponent.constant(2.0, G)
    f = rand_fn(3)
    est = dual_norm_estimate(f, p, trial_budget=4)
    assert est == pytest.approx(weighted_norm(f, 2.0), rel=1e-8)


@given(seed=seeds)
def test_dual_estimate_below_holder_bound(seed):
    p = VariableExponent.from_preset("ramp:2,3", G)
    w = Weight.power(0.2, G)
    f = rand_fn(seed)
    est = dual_norm_estimate(f, p, w, trial_budget=6, seed=seed)
    assert est <= 2 * associate_norm(f, p, w) * (1 + 1e-9)
    assert est >= associate_norm(f, p, w) / 4


def test_herz_sum_oracle():
    val, frac = herz_sum([0, 1, 2], [1.0, 2.0, 4.0], alpha=-1.0, q=2.0)
    assert val == pytest.approx(np.sqrt(3.0), rel=1e-15)
    assert frac == pytest.approx(2 / 3)


def test_herz_equals_lebesgue_when_alpha_zero_and_q_equals_p():
    g = build_grid(GridSpec(1, -1, 3, 16))
    p = VariableExponent.constant(2.0, g)
    f = GridFunction(g, np.where(g.covered_mask(True), rand_fn(4, g).values, 0.0))
    assert herz_norm(f, HerzParams(0.0, 2.0, p)) == pytest.approx(weighted_norm(f, p), rel=1e-9)


def test_herz_single_shell_scaling():
    g = build_grid(GridSpec(1, -1, 3, 16))
    p = VariableExponent.constant(2.0, g)
    f = GridFunction(g, g.shell_mask(2).astype(float))
    base = herz_norm(f, HerzParams(0.0, 1.0, p))
    assert herz_norm(f, HerzParams(0.5, 1.0, p)) == pytest.approx(2.0 ** (0.5 * 2) * base, rel=1e-12)
    assert base == pytest.approx(2.0, rel=1e-9)


def test_herz_report_nonhomogeneous_indices():
    g = build_grid(GridSpec(1, -1, 3, 16))
    rep = herz_norm_report(g.ones(), HerzParams(0.0, 1.0, VariableExponent.constant(2.0, g)), homogeneous=False)
    assert rep.indices == [0, 1, 2, 3]
    assert rep.shell_norms[0] == pytest.approx(np.sqrt(2.0), rel=1e-9)


@given(seed=seeds)
def test_herz_quasi_triangle_small_q(seed):
    g = build_grid(GridSpec(1, -1, 3, 16))
    params = HerzParams(0.2, 0.5, VariableExponent.from_preset("ramp:2,3", g))
    f, h = rand_fn(seed, g), rand_fn(seed + 7, g)
    bound = 2 ** (1 / 0.5 - 1) * (herz_norm(f, params) + herz_norm(h, params))
    assert herz_norm(f + h, params) <= bound * (1 + 1e-9)


def test_herz_q_must_be_positive():
    with pytest.raises(ValueError):
        HerzParams(0.0, 0.0, VariableExponent.constant(2.0, G))
