"""Maximal operator, Rubio de Francia iteration and the intrinsic square function.

The square function is computed on a finite cone quadrature and with a finite
kernel dictionary, so ``s_beta`` is a lower approximation of ``S_beta``:

    S~(x)^2 = sum_j dlog(t) h^n t_j^-n  sum_{|x-y| < t_j}  A(y, t_j)^2
    A(y, t) = max_phi |f * phi_t(y)|,   phi_t(y) = t^-n phi(y / t)
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import fft as sfft
from scipy import ndimage

from .balls import BallFamily, centered_window_sums, ladder_radii
from .grid import Grid, GridFunction

# ---------------------------------------------------------------------------
# maximal operator


def _radii(grid: Grid, family) -> np.ndarray:
    if family is None:
        return ladder_radii(grid)
    if isinstance(family, BallFamily):
        return family.radii
    return np.asarray(family, dtype=float)


def maximal_array(values: np.ndarray, grid: Grid, radii: Sequence[float]) -> np.ndarray:
    a = np.abs(np.asarray(values, dtype=float))
    ones = np.ones(grid.shape)
    out = np.zeros(grid.shape)
    for r in radii:
        avg = centered_window_sums(a, grid, r) / centered_window_sums(ones, grid, r)
        np.maximum(out, avg, out=out)
    # prefix-sum cancellation can leave tiny negatives where |f| vanishes
    np.maximum(out, 0.0, out=out)
    return out


def maximal(f: GridFunction, family=None) -> GridFunction:
    """Centered maximal function over the family's radius ladder.

    Balls are clipped to the grid and averages use the clipped node count.
    Only the radii of ``family`` are used; every node is a center.
    """
    return GridFunction(f.grid, maximal_array(f.values, f.grid, _radii(f.grid, family)))


# ---------------------------------------------------------------------------
# Rubio de Francia


@dataclass(frozen=True)
class RubioConfig:
    A: float
    K: int = 20

    def __post_init__(self):
        if not self.A >= 1:
            raise ValueError(f"operator-norm surrogate A must be >= 1, got {self.A}")
        if self.K < 1:
            raise ValueError("truncation order K must be >= 1")

    @property
    def tail_bound(self) -> float:
        return float((2 * self.A) ** (-self.K))


@dataclass
class RubioResult:
    Rg: GridFunction
    tau: float
    tail_bound: float
    iterates: list = field(default_factory=list, repr=False)


def rubio_francia(g: GridFunction, cfg: RubioConfig, family=None, keep_iterates: bool = False) -> RubioResult:
    """``Rg = sum_{k<=K} M^k|g| / (2A)^k`` and its truncation slack.

    ``tau = max (M^{K+1}g / (2A)^{K+1}) / Rg``, which gives
    ``M(Rg) <= 2A Rg (1 + tau)`` by sublinearity of ``M``.
    """
    grid = g.grid
    radii = _radii(grid, family)
    cur = np.abs(g.values)
    total = cur.copy()
    iterates = [cur] if keep_iterates else []
    scale = 1.0
    for _ in range(cfg.K):
        cur = maximal_array(cur, grid, radii)
        scale /= 2 * cfg.A
        total = total + cur * scale
        if keep_iterates:
            iterates.append(cur)
        if not (np.all(np.isfinite(total)) and scale > 0):
            raise OverflowError("Rubio de Francia series left the floating-point range")
    last = maximal_array(cur, grid, radii)
    if keep_iterates:
        iterates.append(last)
    nxt = last * (scale / (2 * cfg.A))
    pos = total > 0
    tau = float(np.max(nxt[pos] / total[pos])) if pos.any() else 0.0
    if not np.isfinite(tau):
        raise OverflowError("Rubio de Francia slack is not finite")
    return RubioResult(GridFunction(grid, total), tau, cfg.tail_bound, iterates)


def iterate_growth(g: GridFunction, norm, K: int = 20, family=None) -> float:
    """``max_k norm(M^{k+1} g) / norm(M^k g)``, so ``norm(M^k g) <= A^k norm(g)`` for the returned ``A``."""
    radii = _radii(g.grid, family)
    cur = np.abs(g.values)
    prev = norm(GridFunction(g.grid, cur))
    best = 1.0
    for _ in range(K):
        cur = maximal_array(cur, g.grid, radii)
        nrm = norm(GridFunction(g.grid, cur))
        if prev > 0:
            best = max(best, nrm / prev)
        prev = nrm
    return best


# ---------------------------------------------------------------------------
# kernel dictionary


def _bump(sq: np.ndarray, m: int) -> np.ndarray:
    return np.where(sq < 1.0, np.clip(1.0 - sq, 0.0, None) ** m, 0.0)


@dataclass(frozen=True)
class Kernel:
    """``c (b_m((x - x0)/rho) - b_m((x + x0)/rho))`` with ``b_m(x) = (1 - |x|^2)_+^m``."""

    m: int
    x0: tuple
    rho: float
    c: float = 1.0

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        x0 = np.asarray(self.x0)
        d_minus = np.sum((pts - x0) ** 2, axis=-1) / self.rho**2
        d_plus = np.sum((pts + x0) ** 2, axis=-1) / self.rho**2
        return self.c * (_bump(d_minus, self.m) - _bump(d_plus, self.m))

    def scaled(self, c: float) -> "Kernel":
        return Kernel(self.m, self.x0, self.rho, c)


def reference_points(dim: int, per_axis: Optional[int] = None) -> np.ndarray:
    """Midpoint lattice on ``[-1.25, 1.25]^dim`` used for validation."""
    n = per_axis or (401 if dim == 1 else 41)
    ax = -1.25 + (np.arange(n) + 0.5) * (2.5 / n)
    if dim == 1:
        return ax[:, None]
    xx, yy = np.meshgrid(ax, ax, indexing="ij")
    return np.stack([xx.ravel(), yy.ravel()], axis=-1)


def holder_seminorm(values: np.ndarray, points: np.ndarray, beta: float, chunk: int = 512) -> float:
    """Exhaustive pair scan of ``|phi(x) - phi(x')| / |x - x'|^beta``."""
    v = np.asarray(values, dtype=float)
    best = 0.0
    for s in range(0, v.size, chunk):
        d = np.sqrt(np.sum((points[s:s + chunk, None, :] - points[None, :, :]) ** 2, axis=-1))
        dv = np.abs(v[s:s + chunk, None] - v[None, :])
        ok = d > 0
        best = max(best, float(np.max(dv[ok] / d[ok] ** beta)))
    return best


@dataclass(frozen=True, eq=False)
class KernelDictionary:
    beta: float
    kernels: tuple
    seed: int
    dim: int
    ref_points: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.kernels)

    @property
    def key(self) -> tuple:
        return (self.beta, self.dim, tuple(self.kernels))

    def prefix(self, size: int) -> "KernelDictionary":
        if not 1 <= size <= len(self):
            raise ValueError(f"prefix size {size} outside [1, {len(self)}]")
        return KernelDictionary(self.beta, self.kernels[:size], self.seed, self.dim, self.ref_points)

    def check(self, kernel: Kernel) -> list[str]:
        """Names of the violated constraints (empty when the kernel is admissible)."""
        pts = self.ref_points
        vals = kernel(pts)
        bad = []
        outside = np.sum(pts**2, axis=-1) > 1.0
        if np.any(vals[outside] != 0):
            bad.append("support")
        cell = (2.5 / round(len(pts) ** (1 / self.dim))) ** self.dim
        if abs(float(np.sum(vals)) * cell) > 1e-8:
            bad.append("mean")
        if holder_seminorm(vals, pts, self.beta) > 1.0:
            bad.append("holder")
        return bad

    def validate(self) -> None:
        for i, k in enumerate(self.kernels):
            bad = self.check(k)
            if bad:
                raise ValueError(f"kernel {i} violates {', '.join(bad)}")

    def dump_csv(self, path) -> None:
        """Rows ``(kernel_id, x[, y], value)`` on the reference lattice inside the unit ball."""
        pts = self.ref_points
        inside = np.sum(pts**2, axis=-1) <= 1.0
        cols = ["x", "y"][: self.dim]
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["kernel_id", *cols, "value"])
            for i, k in enumerate(self.kernels):
                vals = k(pts[inside])
                for pt, v in zip(pts[inside], vals):
                    wr.writerow([i, *(f"{c:.17g}" for c in pt), f"{v:.17g}"])


def _draw_kernel(seed: int, i: int, dim: int) -> Kernel:
    rng = np.random.default_rng([seed, i])
    m = int(rng.integers(1, 5))
    s = rng.uniform(0.15, 0.6)
    direction = rng.standard_normal(dim)
    direction /= np.linalg.norm(direction)
    rho = rng.uniform(0.25, 1.0) * (1.0 - s)
    return Kernel(m, tuple(float(v) for v in s * direction), float(rho))


def build_dictionary(beta: float, size: int, seed: int = 0, dim: int = 1,
                     ref_per_axis: Optional[int] = None) -> KernelDictionary:
    """Seeded antisymmetric bump differences, each rescaled to Hölder seminorm 0.99.

    Candidate ``i`` depends only on ``(seed, i)``, so a larger dictionary
    always extends a smaller one with the same seed.
    """
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    if size < 1:
        raise ValueError("dictionary size must be >= 1")
    pts = reference_points(dim, ref_per_axis)
    shell = KernelDictionary(beta, (), seed, dim, pts)
    kernels = []
    attempts = 4 * size
    for i in range(attempts):
        raw = _draw_kernel(seed, i, dim)
        semi = holder_seminorm(raw(pts), pts, beta)
        if not semi > 0:
            continue
        k = raw.scaled(0.99 / semi)
        if shell.check(k):
            continue
        kernels.append(k)
        if len(kernels) == size:
            break
    if len(kernels) < size:
        raise ValueError(f"only {len(kernels)} of {size} kernels passed validation")
    return KernelDictionary(beta, tuple(kernels), seed, dim, pts)


# ---------------------------------------------------------------------------
# cone quadrature


class ConeQuadrature:
    """Scales ``t_j = t_min * 2**(j/4)`` covering ``[t_min, t_max]``."""

    ratio = 2.0**0.25

    def __init__(self, grid: Grid, t_min: Optional[float] = None, t_max: Optional[float] = None):
        self.grid = grid
        self.t_min = 2 * grid.h if t_min is None else float(t_min)
        self.t_max = 2.0 ** (grid.spec.k_max + 1) if t_max is None else float(t_max)
        if not 0 < self.t_min <= self.t_max:
            raise ValueError("cone quadrature needs 0 < t_min <= t_max")
        j_max = int(np.ceil(4 * np.log2(self.t_max / self.t_min) - 1e-9))
        j = np.arange(j_max + 1)
        t = self.t_min * 2.0 ** (j / 4)
        t[j % 4 == 0] = self.t_min * 2.0 ** (j[j % 4 == 0] // 4)
        self.t = t
        self.log_step = np.log(self.ratio)

    def __len__(self) -> int:
        return self.t.size

    def level_weight(self, t: float) -> float:
        """``dlog(t) h^n / t^n``."""
        n = self.grid.dim
        return self.log_step * self.grid.cell / t**n

    def contains(self, t: float) -> bool:
        return self.t_min * (1 - 1e-12) <= t <= self.t[-1] * (1 + 1e-12)

    @property
    def key(self) -> tuple:
        return (self.grid.spec, self.t_min, self.t_max)


# ---------------------------------------------------------------------------
# A_beta and S~_beta


def kernel_stencil(kernel: Kernel, t: float, grid: Grid) -> np.ndarray:
    """``t^-n phi(z/t) h^n`` at node offsets ``z``; odd-sized and centered."""
    m = int(np.ceil(t / grid.h))
    off = np.arange(-m, m + 1) * grid.h
    if grid.dim == 1:
        pts = off[:, None]
    else:
        xx, yy = np.meshgrid(off, off, indexing="ij")
        pts = np.stack([xx, yy], axis=-1)
    return kernel(pts / t) * (grid.cell / t**grid.dim)


def _fft_convolve_many(values: np.ndarray, stencils: list, cache: dict) -> list:
    shape = values.shape
    L = stencils[0].shape[0]
    m = L // 2
    nfft = tuple(sfft.next_fast_len(n + L - 1, real=True) for n in shape)
    F = cache.get(nfft)
    if F is None:
        F = cache[nfft] = sfft.rfftn(values, nfft)
    out = []
    core = tuple(slice(m, m + n) for n in shape)
    for K in stencils:
        full = sfft.irfftn(F * sfft.rfftn(K, nfft), nfft)
        out.append(full[core])
    return out


def _window_sums_direct(values: np.ndarray, grid: Grid, t: float) -> np.ndarray:
    m = int(np.ceil(t / grid.h))
    off = np.arange(-m, m + 1) * grid.h
    if grid.dim == 1:
        foot = np.abs(off) < t
    else:
        foot = off[:, None] ** 2 + off[None, :] ** 2 < t * t
    return ndimage.correlate(values, foot.astype(float), mode="constant", cval=0.0)


class SquareFunction:
    """Reusable evaluator of ``S~_beta`` for one grid, dictionary and cone."""

    def __init__(self, grid: Grid, dictionary: KernelDictionary, cone: Optional[ConeQuadrature] = None,
                 method: str = "auto"):
        if method not in ("auto", "direct", "fft"):
            raise ValueError(f"unknown convolution method {method!r}")
        if dictionary.dim != grid.dim:
            raise ValueError("dictionary dimension does not match grid")
        self.grid = grid
        self.dictionary = dictionary
        self.cone = cone or ConeQuadrature(grid)
        self.method = method
        self._stencils: dict = {}

    def stencils(self, t: float) -> list:
        st = self._stencils.get(t)
        if st is None:
            st = self._stencils[t] = [kernel_stencil(k, t, self.grid) for k in self.dictionary.kernels]
        return st

    def _use_fft(self, t: float) -> bool:
        if self.method != "auto":
            return self.method == "fft"
        L = 2 * int(np.ceil(t / self.grid.h)) + 1
        return L ** self.grid.dim > 48

    def a_field(self, values: np.ndarray, t: float, cache: Optional[dict] = None) -> np.ndarray:
        """``A(y, t)`` at every node ``y``."""
        cache = {} if cache is None else cache
        stencils = self.stencils(t)
        if self._use_fft(t):
            convs = _fft_convolve_many(values, stencils, cache)
        else:
            convs = [ndimage.convolve(values, K, mode="constant", cval=0.0) for K in stencils]
        out = np.abs(convs[0])
        for c in convs[1:]:
            np.maximum(out, np.abs(c), out=out)
        return out

    def squared(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        total = np.zeros(self.grid.shape)
        cache: dict = {}
        for t in self.cone.t:
            a2 = self.a_field(values, t, cache) ** 2
            if self._use_fft(t):
                win = centered_window_sums(a2, self.grid, t)
            else:
                win = _window_sums_direct(a2, self.grid, t)
            total += self.cone.level_weight(t) * np.maximum(win, 0.0)
        return total

    def __call__(self, f: GridFunction) -> GridFunction:
        if f.grid != self.grid:
            raise ValueError("function lives on a different grid")
        return GridFunction(self.grid, np.sqrt(self.squared(f.values)))


_SQ_CACHE: dict = {}


def square_function(grid: Grid, dictionary: KernelDictionary, cone: Optional[ConeQuadrature] = None,
                    method: str = "auto") -> SquareFunction:
    cone = cone or ConeQuadrature(grid)
    key = (cone.key, dictionary.key, method)
    sq = _SQ_CACHE.get(key)
    if sq is None:
        if len(_SQ_CACHE) > 8:
            _SQ_CACHE.clear()
        sq = _SQ_CACHE[key] = SquareFunction(grid, dictionary, cone, method)
    return sq


def s_beta(f: GridFunction, dictionary: KernelDictionary, cone: Optional[ConeQuadrature] = None,
           method: str = "auto") -> GridFunction:
    """Quadrature of the cone integral of ``A_beta f`` against ``dy dt / t^(n+1)``."""
    return square_function(f.grid, dictionary, cone, method)(f)


def a_beta_field(f: GridFunction, t: float, dictionary: KernelDictionary, method: str = "auto") -> GridFunction:
    sq = square_function(f.grid, dictionary, None, method)
    return GridFunction(f.grid, sq.a_field(f.values, t))


def a_beta(f: GridFunction, y, t: float, dictionary: KernelDictionary,
           cone: Optional[ConeQuadrature] = None) -> float:
    """``max_phi |f * phi_t(y)|`` at the node ``y`` (index tuple or coordinates)."""
    grid = f.grid
    cone = cone or ConeQuadrature(grid)
    if not cone.contains(t):
        raise ValueError(f"t = {t} outside the cone ladder [{cone.t_min}, {cone.t[-1]}]")
    idx = tuple(y) if isinstance(y, tuple) and all(isinstance(i, (int, np.integer)) for i in y) \
        else grid.node_index(y)
    diff = grid.coords[idx] - grid.coords  # y - z
    best = 0.0
    for k in dictionary.kernels:
        vals = k(diff / t) * (grid.cell / t**grid.dim)
        best = max(best, abs(float(np.sum(f.values * vals))))
    return best
