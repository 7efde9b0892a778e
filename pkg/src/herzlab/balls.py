"""Ball families and fast per-ball reductions on grids.

Balls here are open, ``{y : |x - y| < r}``, and are clipped to the sampled
cube; averages are taken over the clipped node set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .grid import Grid

SQRT2 = np.sqrt(2.0)


def ladder_radii(grid: Grid, min_radius: Optional[float] = None, max_radius: Optional[float] = None) -> np.ndarray:
    """Radii ``2h * sqrt(2)**j`` from ``min_radius`` (default 2h) up to ``2**(k_max+1)``."""
    r_lo = 2 * grid.h
    r_hi = 2.0 ** (grid.spec.k_max + 1) if max_radius is None else max_radius
    j_max = int(np.floor(2 * np.log2(r_hi / r_lo) + 1e-9))
    radii = r_lo * SQRT2 ** np.arange(j_max + 1)
    # snap even powers to exact binary values
    even = np.arange(j_max + 1) % 2 == 0
    radii[even] = r_lo * 2.0 ** (np.arange(j_max + 1)[even] // 2)
    if min_radius is not None:
        radii = radii[radii >= min_radius * (1 - 1e-12)]
    return radii


@dataclass(frozen=True, eq=False)
class BallFamily:
    """The finite search space standing in for "sup over all balls"."""

    centers: np.ndarray  # shape (m, dim)
    radii: np.ndarray

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.centers, dtype=float))
        radii = np.sort(np.asarray(self.radii, dtype=float))
        if centers.shape[0] == 0 or radii.size == 0:
            raise ValueError("ball family must be nonempty")
        if np.any(radii <= 0):
            raise ValueError("ball radii must be positive")
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    @classmethod
    def ladder(
        cls,
        grid: Grid,
        stride: int = 8,
        include_origin: bool = True,
        exhaustive: bool = False,
        min_radius: Optional[float] = None,
        max_radius: Optional[float] = None,
    ) -> "BallFamily":
        """Node centers (every ``stride``-th node per axis, or all) on the sqrt(2) radius ladder."""
        step = 1 if exhaustive else stride
        idx = np.arange(step // 2, grid.n_axis, step)
        sub = grid.axis[idx]
        if grid.dim == 1:
            centers = sub[:, None]
        else:
            xx, yy = np.meshgrid(sub, sub, indexing="ij")
            centers = np.stack([xx.ravel(), yy.ravel()], axis=-1)
        if include_origin:
            centers = np.vstack([np.zeros((1, grid.dim)), centers])
        return cls(centers, ladder_radii(grid, min_radius, max_radius))

    @classmethod
    def origin(cls, grid: Grid, min_radius: Optional[float] = None, max_radius: Optional[float] = None) -> "BallFamily":
        return cls(np.zeros((1, grid.dim)), ladder_radii(grid, min_radius, max_radius))

    def __len__(self) -> int:
        return self.centers.shape[0] * self.radii.size

    def balls(self) -> Iterator[tuple[np.ndarray, float]]:
        for c in self.centers:
            for r in self.radii:
                yield c, float(r)


# ---------------------------------------------------------------------------
# 1D range machinery


def ranges_1d(grid: Grid, centers: np.ndarray, radii: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Half-open node ranges ``[lo, hi)`` of every (center, radius) pair, flattened center-major."""
    c = np.asarray(centers, dtype=float).reshape(-1)[:, None]
    r = np.asarray(radii, dtype=float)[None, :]
    lo = np.searchsorted(grid.axis, (c - r).ravel(), side="right")
    hi = np.searchsorted(grid.axis, (c + r).ravel(), side="left")
    return lo, hi


class RangeExtrema:
    """Sparse tables answering range max/min queries in O(1)."""

    def __init__(self, values: np.ndarray):
        a = np.asarray(values, dtype=float).ravel()
        self._max = [a]
        self._min = [a]
        j = 1
        while (1 << j) <= a.size:
            half = 1 << (j - 1)
            pm, pn = self._max[-1], self._min[-1]
            self._max.append(np.maximum(pm[:-half], pm[half:]))
            self._min.append(np.minimum(pn[:-half], pn[half:]))
            j += 1

    def query(self, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        lo = np.asarray(lo)
        hi = np.asarray(hi)
        length = np.maximum(hi - lo, 1)
        level = np.floor(np.log2(length)).astype(int)
        mx = np.empty(lo.shape)
        mn = np.empty(lo.shape)
        for lv in np.unique(level):
            sel = level == lv
            a, b = lo[sel], hi[sel] - (1 << lv)
            mx[sel] = np.maximum(self._max[lv][a], self._max[lv][b])
            mn[sel] = np.minimum(self._min[lv][a], self._min[lv][b])
        return mx, mn


def prefix(values: np.ndarray) -> np.ndarray:
    out = np.zeros(values.size + 1)
    np.cumsum(values.ravel(), out=out[1:])
    return out


def nested_ball_pairs(grid: Grid, trials: int, seed: int, origin: bool = False) -> list:
    """Seeded ``(center_B, r_B, center_E, r_E)`` with ``E`` geometrically inside ``B``.

    ``origin=True`` draws concentric balls about the origin; otherwise ``B``
    sits anywhere inside the cube and ``E`` anywhere inside ``B``.
    """
    rng = np.random.default_rng(seed)
    L = grid.spec.half_width
    r_lo = 4 * grid.h
    pairs = []
    for _ in range(trials):
        if origin:
            c = np.zeros(grid.dim)
            r_b = float(np.exp(rng.uniform(np.log(r_lo), np.log(L))))
            r_e = float(np.exp(rng.uniform(np.log(r_lo), np.log(r_b))))
            pairs.append((c, r_b, c, r_e))
        else:
            r_b = float(np.exp(rng.uniform(np.log(r_lo), np.log(L / 2))))
            c = rng.uniform(-(L - r_b), L - r_b, size=grid.dim)
            r_e = float(np.exp(rng.uniform(np.log(r_lo / 2), np.log(r_b))))
            # offset of E's center inside B so that E stays inside B
            d = rng.standard_normal(grid.dim)
            d *= rng.uniform(0, r_b - r_e) / max(np.linalg.norm(d), 1e-300)
            pairs.append((c, r_b, c + d, r_e))
    return pairs


# ---------------------------------------------------------------------------
# generic per-ball node sets


def ball_nodes(grid: Grid, center: np.ndarray, radius: float):
    """Index object selecting the clipped ball's nodes (slice in 1D, boolean mask in 2D)."""
    center = np.asarray(center, dtype=float).ravel()
    if grid.dim == 1:
        lo = int(np.searchsorted(grid.axis, center[0] - radius, side="right"))
        hi = int(np.searchsorted(grid.axis, center[0] + radius, side="left"))
        return slice(lo, hi)
    sl = []
    for d in range(2):
        lo = int(np.searchsorted(grid.axis, center[d] - radius, side="right"))
        hi = int(np.searchsorted(grid.axis, center[d] + radius, side="left"))
        sl.append(slice(lo, hi))
    dx = grid.axis[sl[0]][:, None] - center[0]
    dy = grid.axis[sl[1]][None, :] - center[1]
    local = dx * dx + dy * dy < radius * radius
    mask = np.zeros(grid.shape, dtype=bool)
    mask[sl[0], sl[1]] = local
    return mask


def iter_ball_nodes(grid: Grid, family: BallFamily, dedupe: bool = True):
    """Yield ``(center, radius, index)`` for every ball with a nonempty node set."""
    seen = set()
    for c, r in family.balls():
        idx = ball_nodes(grid, c, r)
        if grid.dim == 1:
            if idx.stop <= idx.start:
                continue
            key = (idx.start, idx.stop)
        else:
            if not idx.any():
                continue
            key = np.packbits(idx).tobytes() if dedupe else None
        if dedupe:
            if key in seen:
                continue
            seen.add(key)
        yield c, r, idx


def family_sums_and_extrema(grid: Grid, family: BallFamily, sum_fields: list, ext_field=None):
    """Per-ball node counts, sums of each field and (max, min) of ``ext_field``.

    Returns ``(counts, [sums...], (max, min) or None)`` over nonempty balls.
    """
    if grid.dim == 1:
        lo, hi = ranges_1d(grid, family.centers[:, 0], family.radii)
        keep = hi > lo
        pairs = np.unique(np.stack([lo[keep], hi[keep]], axis=1), axis=0)
        lo, hi = pairs[:, 0], pairs[:, 1]
        counts = (hi - lo).astype(float)
        sums = []
        for fld in sum_fields:
            P = prefix(np.asarray(fld, dtype=float))
            sums.append(P[hi] - P[lo])
        ext = None
        if ext_field is not None:
            ext = RangeExtrema(ext_field).query(lo, hi)
        return counts, sums, ext
    counts, sums, mx, mn = [], [[] for _ in sum_fields], [], []
    for _, _, idx in iter_ball_nodes(grid, family):
        counts.append(float(np.count_nonzero(idx)))
        for s, fld in zip(sums, sum_fields):
            s.append(float(np.sum(fld[idx])))
        if ext_field is not None:
            vals = ext_field[idx]
            mx.append(vals.max())
            mn.append(vals.min())
    ext = (np.array(mx), np.array(mn)) if ext_field is not None else None
    return np.array(counts), [np.array(s) for s in sums], ext


# ---------------------------------------------------------------------------
# centered windows at every node


def half_width_nodes(radius: float, h: float) -> int:
    """Largest integer ``m`` with ``m h < radius``."""
    m = int(np.ceil(radius / h - 1e-12)) - 1
    return max(m, 0)


def disk_row_widths(radius: float, h: float) -> list[tuple[int, int]]:
    """Row offsets ``a`` and half widths ``w`` with ``(a^2 + b^2) h^2 < r^2`` iff ``|b| <= w``."""
    rho2 = (radius / h) ** 2
    m = half_width_nodes(radius, h)
    out = []
    for a in range(-m, m + 1):
        s = rho2 - a * a
        if s <= 0:
            continue
        w = int(np.ceil(np.sqrt(s) - 1e-12)) - 1
        if (w + 1) ** 2 < s - 1e-9:
            w += 1
        out.append((a, max(w, 0)))
    return out


def centered_window_sums(values: np.ndarray, grid: Grid, radius: float) -> np.ndarray:
    """Sum of ``values`` over the open ball of ``radius`` around every node (zero outside the grid)."""
    vals = np.asarray(values, dtype=float)
    if grid.dim == 1:
        m = half_width_nodes(radius, grid.h)
        n = vals.size
        P = prefix(vals)
        i = np.arange(n)
        return P[np.minimum(i + m + 1, n)] - P[np.maximum(i - m, 0)]
    n0, n1 = vals.shape
    P = np.zeros((n0, n1 + 1))
    np.cumsum(vals, axis=1, out=P[:, 1:])
    cols = np.arange(n1)
    out = np.zeros_like(vals)
    cache = {}
    for a, w in disk_row_widths(radius, grid.h):
        if abs(a) >= n0:
            continue
        rows = cache.get(w)
        if rows is None:
            rows = cache[w] = P[:, np.minimum(cols + w + 1, n1)] - P[:, np.maximum(cols - w, 0)]
        if a >= 0:
            out[: n0 - a] += rows[a:]
        else:
            out[-a:] += rows[: n0 + a]
    return out
