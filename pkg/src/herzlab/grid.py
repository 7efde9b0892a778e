"""Truncated uniform sampling of R^n, dyadic regions and midpoint quadrature.

Nodes sit at cell midpoints, ``x_i = (i + 1/2) h - 2**k_max`` on every axis, so
no node ever coincides with the origin and power weights ``|x|**a`` with
``a < 0`` stay finite.  The sampled domain is the cube ``[-2**k_max, 2**k_max]^n``;
the dyadic ball ``B_{k_max}`` is inscribed in it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

MAX_SAMPLES = 2**26


@dataclass(frozen=True)
class GridSpec:
    dim: int
    k_min: int
    k_max: int
    points_per_unit: int

    @property
    def h(self) -> float:
        return 1.0 / self.points_per_unit

    @property
    def half_width(self) -> float:
        return 2.0**self.k_max

    @property
    def nodes_per_axis(self) -> int:
        return int(round(2 * self.half_width * self.points_per_unit))

    def validate(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if int(self.points_per_unit) != self.points_per_unit or self.points_per_unit < 1:
            raise ValueError(f"points_per_unit must be a positive integer, got {self.points_per_unit}")
        if not self.k_min < self.k_max:
            raise ValueError(f"k_min < k_max violated: k_min={self.k_min}, k_max={self.k_max}")
        if 2.0**self.k_min < 4 * self.h:
            raise ValueError(
                f"innermost shell unresolved: 2**k_min = {2.0**self.k_min} < 4h = {4 * self.h}"
            )
        n_axis = 2 * self.half_width * self.points_per_unit
        if abs(n_axis - round(n_axis)) > 1e-9:
            raise ValueError("2**k_max * points_per_unit must be an integer")
        total = int(round(n_axis)) ** self.dim
        if total > MAX_SAMPLES:
            raise ValueError(f"total sample count {total} exceeds the 2**26 bound")

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.dim, self.k_min, self.k_max, self.points_per_unit * factor)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "k_min": self.k_min,
            "k_max": self.k_max,
            "points_per_unit": self.points_per_unit,
        }


def shell_index(radius: np.ndarray) -> np.ndarray:
    """Smallest integer ``k`` with ``radius <= 2**k`` (exact, via frexp)."""
    mant, expo = np.frexp(np.asarray(radius, dtype=float))
    return (expo - (mant == 0.5)).astype(np.int64)


class Grid:
    """Immutable node set built from a :class:`GridSpec`."""

    def __init__(self, spec: GridSpec):
        spec.validate()
        self.spec = spec
        self.dim = spec.dim
        self.h = spec.h
        self.n_axis = spec.nodes_per_axis
        self.shape = (self.n_axis,) * self.dim
        axis = (np.arange(self.n_axis) + 0.5) / spec.points_per_unit - spec.half_width
        axis.setflags(write=False)
        self.axis = axis
        self.cell = self.h**self.dim

    def __repr__(self) -> str:
        return f"Grid({self.spec})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and other.spec == self.spec

    def __hash__(self) -> int:
        return hash(self.spec)

    @property
    def size(self) -> int:
        return self.n_axis**self.dim

    @cached_property
    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``shape + (dim,)``."""
        if self.dim == 1:
            out = self.axis[:, None].copy()
        else:
            xx, yy = np.meshgrid(self.axis, self.axis, indexing="ij")
            out = np.stack([xx, yy], axis=-1)
        out.setflags(write=False)
        return out

    @cached_property
    def radius(self) -> np.ndarray:
        if self.dim == 1:
            r = np.abs(self.axis)
        else:
            r = np.hypot(self.coords[..., 0], self.coords[..., 1])
        r.setflags(write=False)
        return r

    @cached_property
    def shell(self) -> np.ndarray:
        s = shell_index(self.radius)
        s.setflags(write=False)
        return s

    def refined(self, factor: int = 2) -> "Grid":
        return build_grid(self.spec.refined(factor))

    # dyadic masks -------------------------------------------------------
    def dyadic_ball_mask(self, k: int) -> np.ndarray:
        """Closed ball ``B_k = {|x| <= 2**k}``."""
        return self.shell <= k

    def shell_mask(self, k: int) -> np.ndarray:
        """``D_k = B_k minus B_{k-1}``."""
        return self.shell == k

    def nonhom_shell_mask(self, m: int) -> np.ndarray:
        """``C_0 = B_0`` and ``C_m = D_m`` for ``m >= 1``."""
        if m == 0:
            return self.shell <= 0
        return self.shell == m

    def covered_mask(self, homogeneous: bool = True) -> np.ndarray:
        if homogeneous:
            return (self.shell >= self.spec.k_min) & (self.shell <= self.spec.k_max)
        return self.shell <= self.spec.k_max

    def node_index(self, point) -> tuple:
        """Index of the node nearest to ``point``."""
        pt = np.atleast_1d(np.asarray(point, dtype=float))
        idx = np.clip(
            np.floor((pt + self.spec.half_width) * self.spec.points_per_unit).astype(int),
            0,
            self.n_axis - 1,
        )
        return tuple(int(i) for i in idx)

    def sample(self, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        """Evaluate ``fn`` on node coordinates (shape ``shape + (dim,)``)."""
        return GridFunction(self, np.asarray(fn(self.coords), dtype=float))

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.shape))

    def ones(self) -> "GridFunction":
        return GridFunction(self, np.ones(self.shape))


_GRID_CACHE: dict = {}


def build_grid(spec: GridSpec) -> Grid:
    """Return the (cached) grid for ``spec``; raises ``ValueError`` on bad specs."""
    spec.validate()
    grid = _GRID_CACHE.get(spec)
    if grid is None:
        if len(_GRID_CACHE) > 32:
            _GRID_CACHE.clear()
        grid = _GRID_CACHE[spec] = Grid(spec)
    return grid


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real samples on a grid.  The sample array is frozen after construction."""

    grid: Grid
    values: np.ndarray
    unit: str = "dimensionless"

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise ValueError(f"sample shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function samples must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def _coerce(self, other):
        if isinstance(other, GridFunction):
            if other.grid.spec != self.grid.spec:
                raise ValueError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - self._coerce(other))

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFunction(self.grid, self.values / self._coerce(other))

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __abs__(self):
        return GridFunction(self.grid, np.abs(self.values))

    def restrict(self, mask: np.ndarray) -> "GridFunction":
        return GridFunction(self.grid, np.where(mask, self.values, 0.0))

    def shifted(self, offset) -> "GridFunction":
        """Translate by an integer node offset, filling vacated nodes with zero."""
        offset = tuple(np.atleast_1d(offset).astype(int))
        out = np.zeros_like(self.values)
        src, dst = [], []
        for s, n in zip(offset, self.values.shape):
            if s >= 0:
                src.append(slice(0, n - s))
                dst.append(slice(s, n))
            else:
                src.append(slice(-s, n))
                dst.append(slice(0, n + s))
        out[tuple(dst)] = self.values[tuple(src)]
        return GridFunction(self.grid, out)


@dataclass(frozen=True, eq=False)
class Region:
    """A ball, a dyadic shell ``D_k``, a non-homogeneous shell ``C_m`` or a node mask."""

    kind: str
    center: Optional[tuple] = None
    radius: Optional[float] = None
    index: Optional[int] = None
    nodes: Optional[np.ndarray] = field(default=None, repr=False)
    closed: bool = False

    @classmethod
    def ball(cls, center, radius: float, closed: bool = False) -> "Region":
        if not radius > 0:
            raise ValueError(f"ball radius must be positive, got {radius}")
        return cls("ball", center=tuple(np.atleast_1d(center).astype(float)), radius=float(radius), closed=closed)

    @classmethod
    def dyadic_ball(cls, k: int, dim: int = 1) -> "Region":
        return cls.ball((0.0,) * dim, 2.0**k, closed=True)

    @classmethod
    def shell(cls, k: int) -> "Region":
        return cls("shell", index=int(k))

    @classmethod
    def nonhom_shell(cls, m: int) -> "Region":
        if m < 0:
            raise ValueError("non-homogeneous shell index must be >= 0")
        return cls("nonhom_shell", index=int(m))

    @classmethod
    def mask(cls, nodes: np.ndarray) -> "Region":
        return cls("mask", nodes=np.asarray(nodes, dtype=bool))

    @classmethod
    def whole(cls) -> "Region":
        return cls("whole")

    def to_mask(self, grid: Grid) -> np.ndarray:
        if self.kind == "whole":
            return np.ones(grid.shape, dtype=bool)
        if self.kind == "ball":
            c = np.asarray(self.center, dtype=float)
            if c.size != grid.dim:
                raise ValueError("ball center dimension does not match grid")
            L = grid.spec.half_width
            if np.any(np.abs(c) + self.radius > L * (1 + 1e-12)):
                raise ValueError(f"ball(center={self.center}, radius={self.radius}) leaves the domain [-{L}, {L}]^n")
            if np.all(c == 0):
                d = grid.radius
            else:
                d = np.sqrt(np.sum((grid.coords - c) ** 2, axis=-1))
            return d <= self.radius if self.closed else d < self.radius
        if self.kind == "shell":
            if not grid.spec.k_min <= self.index <= grid.spec.k_max:
                raise ValueError(f"shell index {self.index} outside [{grid.spec.k_min}, {grid.spec.k_max}]")
            return grid.shell_mask(self.index)
        if self.kind == "nonhom_shell":
            if self.index > grid.spec.k_max:
                raise ValueError(f"shell index {self.index} exceeds k_max={grid.spec.k_max}")
            return grid.nonhom_shell_mask(self.index)
        if self.kind == "mask":
            if self.nodes.shape != grid.shape:
                raise ValueError("mask shape does not match grid")
            return self.nodes
        raise ValueError(f"unknown region kind {self.kind!r}")


def measure(region: Region, grid: Grid) -> float:
    """Node count times ``h**n``."""
    return float(np.count_nonzero(region.to_mask(grid))) * grid.cell


def integrate(f: GridFunction, region: Optional[Region] = None) -> float:
    """Midpoint Riemann sum of ``f`` over ``region`` (whole grid by default)."""
    vals = f.values
    if region is not None:
        vals = vals[region.to_mask(f.grid)]
    return float(np.sum(vals)) * f.grid.cell


def shell_decompose(f: GridFunction, homogeneous: bool = True) -> list[GridFunction]:
    """Split ``f`` into ``f chi_k`` (k_min..k_max) or ``f chi_{C_m}`` (0..k_max)."""
    grid = f.grid
    if homogeneous:
        ks = range(grid.spec.k_min, grid.spec.k_max + 1)
        return [f.restrict(grid.shell_mask(k)) for k in ks]
    return [f.restrict(grid.nonhom_shell_mask(m)) for m in range(0, grid.spec.k_max + 1)]
