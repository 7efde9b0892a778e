"""Weights, Muckenhoupt-type constants and the power-weight zoo.

Presets (usable in experiment configs):

``const:<c>``
    w = c
``power:<a>``
    w = |x|**a (finite at every node because nodes avoid the origin)
``product:<w1>,<w2>``
    w = w1 * w2**(1 - p), which needs an exponent ``p``

Every class constant is a maximum over a :class:`~herzlab.balls.BallFamily`,
so it is a lower estimate of the true supremum.  Finiteness is judged by
:func:`refinement_verdict`, which watches the estimate as the grid is refined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .balls import BallFamily, ball_nodes, family_sums_and_extrema, iter_ball_nodes, nested_ball_pairs
from .exponent import VariableExponent
from .fitting import FitReport, fit_envelope
from .grid import Grid, GridFunction, Region, build_grid
from .norms import norm_array

__all__ = [
    "BallFamily",
    "FinitenessVerdict",
    "Weight",
    "a1_constant",
    "a1_measure_comparison",
    "ap_constant",
    "apvar_constant",
    "atilde_constant",
    "construct_weight",
    "refinement_verdict",
    "verdict_family",
    "weighted_measure",
]


def _simple_recipe(preset: str) -> Callable[[Grid], np.ndarray]:
    kind, _, arg = preset.partition(":")
    kind = kind.strip()
    try:
        v = float(arg)
    except ValueError:
        raise ValueError(f"weight preset {preset!r} needs one number") from None
    if kind == "const":
        if not v > 0:
            raise ValueError("constant weight must be positive")
        return lambda g: np.full(g.shape, v)
    if kind == "power":
        return lambda g: g.radius**v
    raise ValueError(f"unknown weight preset {preset!r}")


@dataclass(frozen=True, eq=False)
class Weight:
    """Strictly positive, finite samples of a weight on a grid."""

    grid: Grid
    values: np.ndarray
    descriptor: str = "custom"
    recipe: Optional[Callable[[Grid], np.ndarray]] = field(default=None, repr=False)

    def __post_init__(self):
        vals = np.array(np.broadcast_to(self.values, self.grid.shape), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"weight {self.descriptor} has non-finite samples")
        if not np.all(vals > 0):
            raise ValueError(f"weight {self.descriptor} must be strictly positive")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_preset(cls, preset: str, grid: Grid, p: Optional[VariableExponent] = None) -> "Weight":
        kind, _, args = preset.partition(":")
        if kind.strip() == "product":
            parts = args.split(",")
            if len(parts) != 2:
                raise ValueError(f"product preset {preset!r} needs two simple weights")
            if p is None:
                raise ValueError("product weight needs an exponent p")
            w1 = cls.from_preset(parts[0], grid)
            w2 = cls.from_preset(parts[1], grid)
            return construct_weight(w1, w2, p)
        recipe = _simple_recipe(preset)
        return cls(grid, recipe(grid), preset, recipe)

    @classmethod
    def constant(cls, c: float, grid: Grid) -> "Weight":
        return cls.from_preset(f"const:{c}", grid)

    @classmethod
    def power(cls, a: float, grid: Grid) -> "Weight":
        return cls.from_preset(f"power:{a}", grid)

    @classmethod
    def from_function(cls, fn, grid: Grid, descriptor: str = "custom") -> "Weight":
        recipe = lambda g: np.asarray(fn(g.coords), dtype=float).reshape(g.shape)  # noqa: E731
        return cls(grid, recipe(grid), descriptor, recipe)

    def on(self, grid: Grid) -> "Weight":
        if grid == self.grid:
            return self
        if self.recipe is None:
            raise ValueError("weight has no recipe and cannot be resampled")
        return Weight(grid, self.recipe(grid), self.descriptor, self.recipe)

    def as_function(self) -> GridFunction:
        return GridFunction(self.grid, self.values)


def construct_weight(w1: Weight, w2: Weight, p: VariableExponent) -> Weight:
    """Pointwise ``w1 * w2**(1 - p)``."""
    grid = w1.grid
    w2 = w2.on(grid)
    p = p.on(grid)
    recipe = None
    if w1.recipe is not None and w2.recipe is not None and p.recipe is not None:
        r1, r2, rp = w1.recipe, w2.recipe, p.recipe
        recipe = lambda g: r1(g) * r2(g) ** (1.0 - rp(g))  # noqa: E731
    desc = f"product:{w1.descriptor},{w2.descriptor}"
    return Weight(grid, w1.values * w2.values ** (1.0 - p.values), desc, recipe)


def weighted_measure(w: Weight, region: Region) -> float:
    """``w(S) = int_S w``."""
    mask = region.to_mask(w.grid)
    return float(np.sum(w.values[mask])) * w.grid.cell


# ---------------------------------------------------------------------------
# class constants


def a1_constant(w: Weight, family: BallFamily) -> float:
    """``max_B (avg_B w) * max_B (1/w)``."""
    counts, (sums,), (_, mn) = family_sums_and_extrema(w.grid, family, [w.values], w.values)
    return float(np.max(sums / counts / mn))


def ap_constant(w: Weight, p0: float, family: BallFamily) -> float:
    """``max_B (avg_B w) (avg_B w^(-1/(p0-1)))^(p0-1)``."""
    if not p0 > 1:
        raise ValueError(f"A_p constant needs p0 > 1, got {p0}")
    dual = w.values ** (-1.0 / (p0 - 1.0))
    counts, (s1, s2), _ = family_sums_and_extrema(w.grid, family, [w.values, dual])
    vals = np.log(s1 / counts) + (p0 - 1.0) * np.log(s2 / counts)
    return float(np.exp(vals.max()))


def apvar_constant(w: Weight, p: VariableExponent, family: BallFamily) -> float:
    """``max_B |B|^-1 ||w^(1/p) chi_B||_p ||w^(-1/p) chi_B||_p'``."""
    grid = w.grid
    pv = p.on(grid).values
    pc = pv / (pv - 1.0)
    wv = w.values
    w_dual = wv ** (-1.0 / (pv - 1.0))  # |w^(-1/p)|^p'
    best = 0.0
    for _, _, idx in iter_ball_nodes(grid, family):
        e, ec = pv[idx], pc[idx]
        ones = np.ones(e.size)
        vol = e.size * grid.cell
        a = norm_array(ones, e, wv[idx], grid.cell)
        b = norm_array(ones, ec, w_dual[idx], grid.cell)
        best = max(best, a * b / vol)
    return best


def atilde_constant(w: Weight, p: VariableExponent, family: BallFamily) -> float:
    """``max_B |B|^(-p_B) ||w chi_B||_1 ||w^-1 chi_B||_{p'/p}`` with the harmonic average ``p_B``.

    The exponent ``p'/p = 1/(p-1)`` may be below one; the norm is then a
    quasi-norm, evaluated by the same modular solver.
    """
    grid = w.grid
    pv = p.on(grid).values
    e_all = 1.0 / (pv - 1.0)
    wv = w.values
    w_dual = wv ** (-e_all)  # |w^-1|^(p'/p)
    best = -np.inf
    for _, _, idx in iter_ball_nodes(grid, family):
        e = e_all[idx]
        n_nodes = e.size
        vol = n_nodes * grid.cell
        p_b = 1.0 / float(np.mean(1.0 / pv[idx]))
        l1 = float(np.sum(wv[idx])) * grid.cell
        q = norm_array(np.ones(n_nodes), e, w_dual[idx], grid.cell)
        best = max(best, -p_b * np.log(vol) + np.log(l1) + np.log(q))
    return float(np.exp(best))


# ---------------------------------------------------------------------------
# finiteness under refinement


@dataclass
class FinitenessVerdict:
    values: list
    resolutions: list
    growth: list
    divergent: bool

    @property
    def finite(self) -> bool:
        return not self.divergent


def verdict_family(grid: Grid, centers_per_axis: int = 16) -> BallFamily:
    """Origin plus a fixed physical set of node centers, on the full radius ladder."""
    stride = max(1, grid.n_axis // centers_per_axis)
    return BallFamily.ladder(grid, stride=stride, include_origin=True)


def refinement_verdict(estimator: Callable[[Grid], float], grid: Grid, levels: int = 4,
                       factor: float = 1.25) -> FinitenessVerdict:
    """Evaluate ``estimator`` on ``levels`` successive grid doublings.

    The constant is declared divergent when it grows by at least ``factor``
    over every one of the last three refinements (the minimum ball radius
    halves at each step).
    """
    if levels < 4:
        raise ValueError("refinement verdict needs at least 4 levels")
    values, res = [], []
    g = grid
    for i in range(levels):
        if i:
            g = build_grid(g.spec.refined(2))
        values.append(float(estimator(g)))
        res.append(g.spec.points_per_unit)
    growth = [b / a if a > 0 else np.inf for a, b in zip(values, values[1:])]
    divergent = all(gr >= factor for gr in growth[-3:]) or not np.all(np.isfinite(values))
    return FinitenessVerdict(values, res, growth, bool(divergent))


# ---------------------------------------------------------------------------
# measure comparison


def a1_measure_comparison(w: Weight, trials: int = 200, seed: int = 0, origin: bool = True) -> FitReport:
    """Envelope ``w(E)/w(B) <= C (|E|/|B|)^delta`` over sampled pairs ``E subset B``.

    Always includes ``E = B``; pairs with empty ``E`` are skipped.  ``delta``
    is clamped to ``(0, 1]``; the unclamped value is in ``delta_raw``.
    """
    grid = w.grid
    xs, ys = [0.0], [0.0]
    for cb, rb, ce, re in nested_ball_pairs(grid, trials, seed, origin):
        ib = ball_nodes(grid, cb, rb)
        ie = ball_nodes(grid, ce, re)
        nb = np.ones(grid.shape)[ib].sum()
        ne = np.ones(grid.shape)[ie].sum()
        if ne == 0 or nb == 0:
            continue
        xs.append(float(np.log(ne / nb)))
        ys.append(float(np.log(np.sum(w.values[ie]) / np.sum(w.values[ib]))))
    return fit_envelope(np.array(xs), np.array(ys), clamp=True)

