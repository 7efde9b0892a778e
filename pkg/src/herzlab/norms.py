"""Modulars, Luxemburg norms, associate norms and weighted Herz norms.

Every norm here is computed from the weighted modular

    rho(f / lam) = sum_i |f_i / lam|**p_i * w_i * h**n

by bracketing followed by bisection on ``log(lam)``.  Exponents may be any
positive numbers, so the same solver also evaluates quasi-norms such as
``L^{p'(.)/p(.)}`` whose exponent can dip below one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .exponent import VariableExponent, conjugate
from .grid import Grid, GridFunction

RTOL = 1e-10
MAX_BISECT = 64
_LN2 = np.log(2.0)

ExponentLike = Union[VariableExponent, float, np.ndarray]


def logsumexp(t: np.ndarray) -> float:
    m = t.max()
    return float(m + np.log(np.sum(np.exp(t - m))))


def exponent_array(p: ExponentLike, grid: Grid) -> np.ndarray:
    if isinstance(p, VariableExponent):
        return p.on(grid).values
    arr = np.broadcast_to(np.asarray(p, dtype=float), grid.shape)
    if not np.all(arr > 0):
        raise ValueError("modular exponents must be positive")
    return arr


def weight_array(w, grid: Grid) -> Optional[np.ndarray]:
    if w is None:
        return None
    if hasattr(w, "on"):
        return w.on(grid).values
    return np.broadcast_to(np.asarray(w, dtype=float), grid.shape)


# ---------------------------------------------------------------------------
# array-level solver


def _log_terms(values, exps, weight, cell):
    """``log(|f|^p w h^n)`` over the active nodes, and the active exponents."""
    a = np.abs(np.asarray(values, dtype=float)).ravel()
    e = np.broadcast_to(np.asarray(exps, dtype=float), np.shape(values)).ravel()
    active = a > 0
    if weight is not None:
        wt = np.broadcast_to(np.asarray(weight, dtype=float), np.shape(values)).ravel()
        active &= wt > 0
        wt = wt[active]
    a = a[active]
    e = e[active]
    terms = e * np.log(a) + np.log(cell)
    if weight is not None:
        terms = terms + np.log(wt)
    return terms, e


def modular_array(values, exps, weight=None, cell: float = 1.0, lam: float = 1.0) -> float:
    """``sum |f/lam|^p w * cell`` for raw arrays."""
    if not lam > 0:
        raise ValueError("lambda must be positive")
    terms, e = _log_terms(values, exps, weight, cell)
    if terms.size == 0:
        return 0.0
    return float(np.exp(logsumexp(terms - e * np.log(lam))))


def norm_array(values, exps, weight=None, cell: float = 1.0, rtol: float = RTOL,
               bracket: str = "modular") -> float:
    """Luxemburg norm ``inf{lam > 0 : rho(f/lam) <= 1}`` for raw arrays.

    ``bracket="modular"`` starts from the interval implied by
    ``lam**-p_plus rho(f) <= rho(f/lam) <= lam**-p_minus rho(f)`` (for lam >= 1, reversed below),
    which is exact for constant exponents; ``bracket="doubling"`` starts from
    ``[1, 1]``.  Either way the bracket is then widened by doubling/halving
    until it straddles the root, and bisected to relative width ``rtol``.
    The upper end is returned, so ``rho(f/result) <= 1``.
    """
    vals = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite samples")
    terms, e = _log_terms(vals, exps, weight, cell)
    if terms.size == 0:
        return 0.0

    def g(loglam: float) -> float:
        return float(logsumexp(terms - e * loglam))

    if bracket == "modular":
        log_rho0 = g(0.0)
        cands = (log_rho0 / e.min(), log_rho0 / e.max())
        a, b = min(cands) - 1e-12, max(cands) + 1e-12
    elif bracket == "doubling":
        a = b = 0.0
    else:
        raise ValueError(f"unknown bracket mode {bracket!r}")
    while g(b) > 0:
        b += _LN2
    while g(a) <= 0:
        a -= _LN2
    tol = np.log1p(rtol)
    for _ in range(MAX_BISECT):
        if b - a <= tol:
            break
        mid = 0.5 * (a + b)
        if g(mid) <= 0:
            b = mid
        else:
            a = mid
    return float(np.exp(b))


# ---------------------------------------------------------------------------
# grid-level API


@dataclass(frozen=True, eq=False)
class ModularQuery:
    f: GridFunction
    p: ExponentLike
    w: Optional[object] = None

    def __post_init__(self):
        grid = self.f.grid
        for other in (self.p, self.w):
            g = getattr(other, "grid", None)
            if g is not None and g.spec != grid.spec:
                raise ValueError("f, p and w must share one grid")

    @property
    def grid(self) -> Grid:
        return self.f.grid

    def arrays(self):
        return self.f.values, exponent_array(self.p, self.grid), weight_array(self.w, self.grid)


def modular(query: ModularQuery, lam: float = 1.0) -> float:
    """``int |f(x)/lam|^p(x) w(x) dx`` over the grid."""
    f, e, w = query.arrays()
    return modular_array(f, e, w, query.grid.cell, lam)


def luxemburg_norm(query: ModularQuery, **kwargs) -> float:
    f, e, w = query.arrays()
    return norm_array(f, e, w, query.grid.cell, **kwargs)


def _checked_weight(w, grid: Grid) -> Optional[np.ndarray]:
    wv = weight_array(w, grid)
    if wv is not None and not np.all(wv > 0):
        raise ValueError("weight must be strictly positive at every node")
    return wv


def weighted_norm(f: GridFunction, p: ExponentLike, w=None) -> float:
    """``||f||_{L^p(.)(w)} = ||f w^(1/p)||_{L^p(.)}``, via the weighted modular."""
    grid = f.grid
    wv = _checked_weight(w, grid)
    return norm_array(f.values, exponent_array(p, grid), wv, grid.cell)


def associate_norm(g: GridFunction, p: VariableExponent, w=None) -> float:
    """``||g w^(-1/p)||_{L^p'(.)}``, the associate norm of ``L^p(.)(w)``."""
    grid = g.grid
    pv = exponent_array(p, grid)
    wv = _checked_weight(w, grid)
    vals = g.values if wv is None else g.values * wv ** (-1.0 / pv)
    return norm_array(vals, pv / (pv - 1.0), None, grid.cell)


def pairing(f: GridFunction, g: GridFunction) -> float:
    if f.grid.spec != g.grid.spec:
        raise ValueError("pairing needs a shared grid")
    return float(np.sum(f.values * g.values)) * f.grid.cell


# ---------------------------------------------------------------------------
# Herz norms


@dataclass(frozen=True, eq=False)
class HerzParams:
    alpha: float
    q: float
    p: VariableExponent
    w: Optional[object] = None
    r: Optional[float] = None
    delta: Optional[float] = None

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError(f"Herz exponent q must be positive, got {self.q}")

    def on(self, grid: Grid) -> "HerzParams":
        w = None if self.w is None else self.w.on(grid)
        return HerzParams(self.alpha, self.q, self.p.on(grid), w, self.r, self.delta)

    def with_alpha(self, alpha: float) -> "HerzParams":
        return HerzParams(alpha, self.q, self.p, self.w, self.r, self.delta)


@dataclass
class HerzNorm:
    value: float
    indices: list
    shell_norms: list
    boundary_fraction: float = field(default=0.0)


def shell_indices(grid: Grid, homogeneous: bool = True) -> list[int]:
    if homogeneous:
        return list(range(grid.spec.k_min, grid.spec.k_max + 1))
    return list(range(0, grid.spec.k_max + 1))


def shell_mask(grid: Grid, k: int, homogeneous: bool = True) -> np.ndarray:
    return grid.shell_mask(k) if homogeneous else grid.nonhom_shell_mask(k)


def herz_sum(indices, shell_norms, alpha: float, q: float) -> tuple[float, float]:
    """``(sum 2^(alpha k q) N_k^q)^(1/q)`` and the boundary-shell mass fraction."""
    ks = np.asarray(indices, dtype=float)
    nk = np.asarray(shell_norms, dtype=float)
    terms = 2.0 ** (alpha * ks * q) * nk**q
    total = float(terms.sum())
    if total == 0:
        return 0.0, 0.0
    frac = float((terms[0] + (terms[-1] if terms.size > 1 else 0.0)) / total)
    return total ** (1.0 / q), frac


def herz_norm_report(f: GridFunction, params: HerzParams, homogeneous: bool = True) -> HerzNorm:
    grid = f.grid
    pv = exponent_array(params.p, grid)
    wv = _checked_weight(params.w, grid)
    idx = shell_indices(grid, homogeneous)
    norms = []
    for k in idx:
        m = shell_mask(grid, k, homogeneous)
        norms.append(norm_array(f.values[m], pv[m], None if wv is None else wv[m], grid.cell))
    value, frac = herz_sum(idx, norms, params.alpha, params.q)
    return HerzNorm(value, idx, norms, frac)


def herz_norm(f: GridFunction, params: HerzParams, homogeneous: bool = True) -> float:
    """Homogeneous (shells D_k, k_min..k_max) or non-homogeneous (C_m, 0..k_max) Herz norm.

    For ``0 < q < 1`` this is only a quasi-norm.
    """
    return herz_norm_report(f, params, homogeneous).value


# ---------------------------------------------------------------------------
# duality


def dual_norm_estimate(f: GridFunction, p: VariableExponent, w=None, trial_budget: int = 16,
                       seed: int = 0) -> float:
    """Lower estimate of ``||f||_{X'}`` for ``X = L^p(.)(w)``.

    Maximizes ``|int f g|`` over trial functions normalized in ``X``: first
    ``g = f / ||f||_X``, then the Hölder-extremal profile
    ``sign(F) |F|^(p'-1) w^(-1/p)`` with ``F = f w^(-1/p)``, then seeded
    random distortions of that profile.
    """
    grid = f.grid
    if not np.any(f.values):
        return 0.0
    pv = exponent_array(p, grid)
    wv = _checked_weight(w, grid)
    wv = np.ones(grid.shape) if wv is None else wv
    rng = np.random.default_rng(seed)

    def score(g_vals: np.ndarray) -> float:
        nrm = norm_array(g_vals, pv, wv, grid.cell)
        if nrm == 0:
            return 0.0
        return abs(float(np.sum(f.values * g_vals)) * grid.cell) / nrm

    best = score(f.values)
    if trial_budget <= 1:
        return best
    F = f.values * wv ** (-1.0 / pv)
    pc = pv / (pv - 1.0)
    extremal = np.sign(F) * np.abs(F) ** (pc - 1.0) * wv ** (-1.0 / pv)
    best = max(best, score(extremal))
    for _ in range(trial_budget - 2):
        s = rng.uniform(0.25, 2.0)
        noise = np.exp(0.3 * rng.standard_normal(grid.shape))
        trial = np.sign(F) * np.abs(F) ** (s * (pc - 1.0)) * noise * wv ** (-1.0 / pv)
        best = max(best, score(trial))
    return best


def conjugate_values(p: ExponentLike, grid: Grid) -> np.ndarray:
    if isinstance(p, VariableExponent):
        return conjugate(p.on(grid)).values
    pv = exponent_array(p, grid)
    return pv / (pv - 1.0)
