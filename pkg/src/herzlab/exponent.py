"""Variable exponents p(.) sampled on a grid.

Presets (usable in experiment configs):

``const:<v>``
    p = v
``ramp:<a>,<b>``
    p = a + min(1, |x|) (b - a)
``rational:<a>,<b>``
    p = a - b / (1 + |x|^2)
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .grid import Grid, Region


def _parse_numbers(text: str, count: int, preset: str) -> list[float]:
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) != count:
        raise ValueError(f"exponent preset {preset!r} expects {count} number(s)")
    return [float(p) for p in parts]


def exponent_recipe(preset: str) -> tuple[Callable[[Grid], np.ndarray], float]:
    """Return ``(sampler, p_infinity)`` for a preset name."""
    kind, _, args = preset.partition(":")
    kind = kind.strip()
    if kind == "const":
        (v,) = _parse_numbers(args, 1, preset)
        return (lambda g: np.full(g.shape, v)), v
    if kind == "ramp":
        a, b = _parse_numbers(args, 2, preset)
        return (lambda g: a + np.minimum(1.0, g.radius) * (b - a)), b
    if kind == "rational":
        a, b = _parse_numbers(args, 2, preset)
        return (lambda g: a - b / (1.0 + g.radius**2)), a
    raise ValueError(f"unknown exponent preset {preset!r}")


@dataclass(frozen=True, eq=False)
class VariableExponent:
    """An exponent in the class P(R^n): ``1 < p_minus <= p_plus < inf`` on the grid."""

    grid: Grid
    values: np.ndarray
    p_infinity: Optional[float] = None
    descriptor: str = "custom"
    recipe: Optional[Callable[[Grid], np.ndarray]] = None

    def __post_init__(self):
        vals = np.array(np.broadcast_to(self.values, self.grid.shape), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ValueError("exponent values must be finite")
        if not vals.min() > 1.0:
            raise ValueError(f"exponent must exceed 1 everywhere (p_minus = {vals.min()})")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_preset(cls, preset: str, grid: Grid, p_infinity: Optional[float] = None) -> "VariableExponent":
        recipe, p_inf = exponent_recipe(preset)
        return cls(grid, recipe(grid), p_inf if p_infinity is None else p_infinity, preset, recipe)

    @classmethod
    def constant(cls, value: float, grid: Grid) -> "VariableExponent":
        return cls.from_preset(f"const:{value}", grid)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], grid: Grid,
                      p_infinity: Optional[float] = None, descriptor: str = "custom") -> "VariableExponent":
        recipe = lambda g: np.asarray(fn(g.coords), dtype=float).reshape(g.shape)  # noqa: E731
        return cls(grid, recipe(grid), p_infinity, descriptor, recipe)

    def on(self, grid: Grid) -> "VariableExponent":
        """Resample on another grid (needs a recipe)."""
        if grid == self.grid:
            return self
        if self.recipe is None:
            raise ValueError("exponent has no recipe and cannot be resampled")
        return VariableExponent(grid, self.recipe(grid), self.p_infinity, self.descriptor, self.recipe)

    @cached_property
    def p_minus(self) -> float:
        return float(self.values.min())

    @cached_property
    def p_plus(self) -> float:
        return float(self.values.max())

    @property
    def is_constant(self) -> bool:
        return self.p_minus == self.p_plus


def essential_bounds(p: VariableExponent, grid: Optional[Grid] = None) -> tuple[float, float]:
    """(min, max) of ``p`` over the grid nodes."""
    if grid is not None:
        p = p.on(grid)
    return p.p_minus, p.p_plus


def conjugate(p: VariableExponent) -> VariableExponent:
    """Pointwise ``p' = p / (p - 1)``."""
    recipe = None
    if p.recipe is not None:
        base = p.recipe
        recipe = lambda g: base(g) / (base(g) - 1.0)  # noqa: E731
    p_inf = None if p.p_infinity is None else p.p_infinity / (p.p_infinity - 1.0)
    return VariableExponent(p.grid, p.values / (p.values - 1.0), p_inf, f"conj({p.descriptor})", recipe)


def scale(p: VariableExponent, r: float) -> VariableExponent:
    """Pointwise ``r p``; requires ``r p_minus > 1`` (the window ``1/p_- < r < 1``)."""
    if not r * p.p_minus > 1.0:
        raise ValueError(f"r = {r} violates 1/p_-<r<1 (r * p_minus = {r * p.p_minus} <= 1)")
    if r == 1:
        return p
    recipe = None
    if p.recipe is not None:
        base = p.recipe
        recipe = lambda g: r * base(g)  # noqa: E731
    p_inf = None if p.p_infinity is None else r * p.p_infinity
    return VariableExponent(p.grid, r * p.values, p_inf, f"{r}*{p.descriptor}", recipe)


def harmonic_average(p: VariableExponent, ball: Region, grid: Optional[Grid] = None) -> float:
    """``p_B = ((1/|B|) int_B 1/p)^(-1)``."""
    grid = p.grid if grid is None else grid
    mask = ball.to_mask(grid)
    if not mask.any():
        raise ValueError("harmonic average over an empty ball")
    return 1.0 / float(np.mean(1.0 / p.on(grid).values[mask]))


def _pair_chunk(rng: np.random.Generator, grid: Grid, size: int, max_off: int):
    first = rng.integers(0, grid.n_axis, size=(size, grid.dim))
    off = rng.integers(-max_off, max_off + 1, size=(size, grid.dim))
    second = np.clip(first + off, 0, grid.n_axis - 1)
    return first, second


def lh_local_constant(p: VariableExponent, grid: Optional[Grid] = None, pair_budget: int = 4096,
                      seed: int = 0, chunk: int = 1024) -> float:
    """Sampled lower estimate of the local log-Hölder constant.

    Maximizes ``|p(x) - p(y)| * (-log|x - y|)`` over all axis-neighbour pairs
    plus seeded random node pairs with ``0 < |x - y| <= 1/2``.  Pairs are drawn
    in fixed-size seeded chunks, so a larger budget only adds pairs and the
    estimate is nondecreasing in ``pair_budget``.
    """
    grid = p.grid if grid is None else grid
    vals = p.on(grid).values
    max_off = max(int(np.floor(0.5 / grid.h)), 1)

    c_local = 0.0
    if grid.h <= 0.5:
        for axis in range(grid.dim):
            diff = np.abs(np.diff(vals, axis=axis))
            c_local = max(c_local, float(diff.max()) * -np.log(grid.h))

    drawn = 0
    i = 0
    while drawn < pair_budget:
        size = min(chunk, pair_budget - drawn)
        rng = np.random.default_rng([seed, i])
        a, b = _pair_chunk(rng, grid, chunk, max_off)
        a, b = a[:size], b[:size]
        d = np.sqrt(np.sum(((a - b) * grid.h) ** 2, axis=1))
        ok = (d > 0) & (d <= 0.5)
        if ok.any():
            va = vals[tuple(a[ok].T)]
            vb = vals[tuple(b[ok].T)]
            c_local = max(c_local, float(np.max(np.abs(va - vb) * -np.log(d[ok]))))
        drawn += size
        i += 1
    return c_local


def lh_infinity_constant(p: VariableExponent, grid: Optional[Grid] = None) -> float:
    """``max |p(x) - p_inf| log(e + |x|)`` over the nodes."""
    if p.p_infinity is None:
        raise ValueError("p_infinity is required for the decay constant")
    grid = p.grid if grid is None else grid
    vals = p.on(grid).values
    return float(np.max(np.abs(vals - p.p_infinity) * np.log(np.e + grid.radius)))


def lh_constants(p: VariableExponent, grid: Optional[Grid] = None, pair_budget: int = 4096,
                 seed: int = 0) -> tuple[float, float]:
    """``(C_local, C_infinity)``; these are lower estimates of the true suprema."""
    c_inf = lh_infinity_constant(p, grid)
    return lh_local_constant(p, grid, pair_budget, seed), c_inf
