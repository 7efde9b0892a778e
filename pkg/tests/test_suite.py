import numpy as np
import pytest

from herzlab.grid import GridSpec, build_grid
from herzlab.suite import FAMILIES, build_suite


def test_ids_and_family_cycle():
    s = build_suite(8, seed=1, dim=1, k_min=-1, k_max=3)
    assert [f.function_id for f in s[:4]] == ["bump-000", "shell-001", "lacunary-002", "smooth-003"]


def test_members_independent_of_count():
    g = build_grid(GridSpec(1, -1, 3, 16))
    a = build_suite(3, seed=4, dim=1, k_min=-1, k_max=3)
    b = build_suite(9, seed=4, dim=1, k_min=-1, k_max=3)
    for x, y in zip(a, b):
        assert np.array_equal(x.on(g).values, y.on(g).values)


@pytest.mark.parametrize("dim, spec", [(1, GridSpec(1, -1, 3, 16)), (2, GridSpec(2, 1, 3, 2))])
def test_members_nonzero_finite_and_resamplable(dim, spec):
    g = build_grid(spec)
    fine = build_grid(spec.refined(2))
    for fn in build_suite(12, seed=0, dim=dim, k_min=spec.k_min, k_max=spec.k_max):
        v = fn.on(g).values
        assert np.all(np.isfinite(v)) and np.any(v != 0)
        assert fn.on(fine).values.shape == fine.shape


def test_mask_cuts_support():
    g = build_grid(GridSpec(1, -1, 3, 16))
    fn = build_suite(1, seed=0, dim=1, k_min=-1, k_max=3, families=("smooth",))[0]
    mask = g.shell_mask(2)
    assert np.all(fn.on(g, mask).values[~mask] == 0)


def test_validation():
    with pytest.raises(ValueError, match="unknown suite family"):
        build_suite(2, 0, 1, 0, 3, families=("bump", "spline"))
    with pytest.raises(ValueError):
        build_suite(0, 0, 1, 0, 3)
    assert set(FAMILIES) == {"bump", "shell", "lacunary", "smooth"}
