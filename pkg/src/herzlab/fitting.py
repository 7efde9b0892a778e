"""One-sided power-law envelopes ``y <= delta * x + log C`` on log-log clouds."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class FitReport:
    C: float
    delta: float
    residual: float
    sample_count: int
    envelope_violations: int
    delta_raw: float = float("nan")
    flagged: bool = False
    x: np.ndarray = field(default=None, repr=False)
    y: np.ndarray = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.envelope_violations == 0 and np.isfinite(self.residual) and np.isfinite(self.C)


def upper_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the upper convex hull vertices, left to right."""
    order = np.lexsort((y, x))
    hull: list[int] = []
    for i in order:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (x[b] - x[a]) * (y[i] - y[a]) - (y[b] - y[a]) * (x[i] - x[a])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.array(hull, dtype=int)


def fit_envelope(x, y, clamp: bool = False, tol: float = 1e-9) -> FitReport:
    """Envelope with the largest slope that keeps every point on or below it.

    The line is pinned at the top point of the rightmost column (``x`` closest
    to zero, typically ``E = B`` or ``k = l``); its slope is the smallest chord
    slope to any other point, i.e. the maximal ``delta`` admitting zero
    violations there.  ``log C`` is then the smallest intercept covering the
    whole cloud.  ``x`` and ``y`` are natural logs.  With ``clamp`` the slope
    is forced into ``(0, 1]`` and the raw value kept in ``delta_raw``.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size or x.size < 2:
        raise ValueError("envelope fit needs at least two samples")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("envelope fit received non-finite samples")
    x_a = x.max()
    right = x >= x_a - 1e-12
    y_a = y[right].max()
    others = ~right
    if not others.any():
        raise ValueError("envelope fit needs samples at more than one abscissa")
    delta_raw = float(np.min((y_a - y[others]) / (x_a - x[others])))
    delta = delta_raw
    flagged = not 0 < delta_raw <= 1
    if clamp:
        delta = float(np.clip(delta_raw, 1e-12, 1.0))
    log_c = float(np.max(y - delta * x))
    gap = delta * x + log_c - y
    violations = int(np.count_nonzero(gap < -tol * np.maximum(1.0, np.abs(y))))
    hull = upper_hull(x, y)
    residual = float(np.sqrt(np.mean(gap[hull] ** 2)))
    return FitReport(
        C=float(np.exp(log_c)),
        delta=delta,
        residual=residual,
        sample_count=int(x.size),
        envelope_violations=violations,
        delta_raw=delta_raw,
        flagged=flagged,
        x=x,
        y=y,
    )
