"""Seeded test-function suites.

Every suite member is a continuous recipe on coordinates rather than a
sample array, so the same function can be resampled on refined grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .grid import Grid, GridFunction

FAMILIES = ("bump", "shell", "lacunary", "smooth")


@dataclass(frozen=True, eq=False)
class SuiteFunction:
    function_id: str
    recipe: Callable[[np.ndarray], np.ndarray]

    def on(self, grid: Grid, mask=None) -> GridFunction:
        vals = np.asarray(self.recipe(grid.coords), dtype=float).reshape(grid.shape)
        if mask is not None:
            vals = np.where(mask, vals, 0.0)
        return GridFunction(grid, vals)


def _radius(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(x**2, axis=-1))


def _bump(center, width, amp):
    c = np.asarray(center)

    def fn(x):
        r2 = np.sum((x - c) ** 2, axis=-1) / width**2
        return amp * np.where(r2 < 1, (1 - np.minimum(r2, 1)) ** 2, 0.0)

    return fn


def _shell(k: int, amp: float):
    lo, hi = 2.0 ** (k - 1), 2.0**k
    return lambda x: amp * ((_radius(x) > lo) & (_radius(x) <= hi))


def _lacunary(ks: Sequence[int], amps: Sequence[float]):
    def fn(x):
        r = _radius(x)
        out = np.zeros(r.shape)
        for k, a in zip(ks, amps):
            out += a * ((r > 2.0 ** (k - 1)) & (r <= 2.0**k))
        return out

    return fn


def _smooth(centers: np.ndarray, widths: np.ndarray, amps: np.ndarray):
    def fn(x):
        out = np.zeros(x.shape[:-1])
        for c, s, a in zip(centers, widths, amps):
            out += a * np.exp(-np.sum((x - c) ** 2, axis=-1) / (2 * s * s))
        return out

    return fn


def build_suite(count: int, seed: int, dim: int, k_min: int, k_max: int,
                families: Sequence[str] = FAMILIES) -> list[SuiteFunction]:
    """``count`` functions cycling through ``families``; member ``i`` depends only on ``(seed, i)``."""
    for fam in families:
        if fam not in FAMILIES:
            raise ValueError(f"unknown suite family {fam!r}")
    if count < 1:
        raise ValueError("suite needs at least one function")
    L = 2.0**k_max
    out = []
    for i in range(count):
        fam = families[i % len(families)]
        rng = np.random.default_rng([seed, i])
        if fam == "bump":
            k = int(rng.integers(k_min + 1, k_max))
            width = 2.0**k * rng.uniform(0.25, 0.6)
            d = rng.standard_normal(dim)
            center = d / np.linalg.norm(d) * rng.uniform(0, 2.0**k)
            center *= min(1.0, (L - width) / max(np.linalg.norm(center), 1e-300))
            fn = _bump(center, width, rng.uniform(0.5, 2.0))
        elif fam == "shell":
            fn = _shell(int(rng.integers(k_min + 1, k_max + 1)), rng.uniform(0.5, 2.0))
        elif fam == "lacunary":
            n_terms = int(rng.integers(2, 5))
            ks = rng.choice(np.arange(k_min + 1, k_max + 1), size=min(n_terms, k_max - k_min), replace=False)
            amps = 2.0 ** (-rng.uniform(-1.0, 1.0, size=ks.size) * ks)
            fn = _lacunary(tuple(int(k) for k in ks), tuple(amps))
        else:
            n_terms = int(rng.integers(2, 6))
            centers = rng.uniform(-L / 2, L / 2, size=(n_terms, dim))
            widths = 2.0 ** rng.uniform(k_min, k_max - 2, size=n_terms)
            amps = rng.normal(size=n_terms)
            fn = _smooth(centers, widths, amps)
        out.append(SuiteFunction(f"{fam}-{i:03d}", fn))
    return out
