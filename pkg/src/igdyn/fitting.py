"""Least-squares exponential-rate fits shared by the Jacobi and entropy code."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NonPositiveIntensity, WindowTooShort

MIN_WINDOW_SAMPLES = 10


class LineFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float
    n_samples: int


def fit_line(taus, ys, window=None) -> LineFit:
    """Ordinary least squares ``y = slope * tau + intercept`` restricted to ``window``."""
    taus = np.asarray(taus, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if window is not None:
        lo, hi = window
        mask = (taus >= lo) & (taus <= hi)
        taus, ys = taus[mask], ys[mask]
    if taus.size < MIN_WINDOW_SAMPLES:
        raise WindowTooShort(
            f"fit window holds {taus.size} samples, need at least {MIN_WINDOW_SAMPLES}"
        )
    slope, intercept = np.polyfit(taus, ys, 1)
    resid = ys - (slope * taus + intercept)
    ss_tot = np.sum((ys - ys.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return LineFit(float(slope), float(intercept), float(r2), int(taus.size))


def fit_log_slope(taus, values, window=None, error=NonPositiveIntensity) -> LineFit:
    """Fit ``ln(values)`` against ``taus``; ``error`` is raised on non-positive values in the window."""
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is not None:
        lo, hi = window
        mask = (taus >= lo) & (taus <= hi)
        taus, values = taus[mask], values[mask]
    if taus.size and np.any(~(values > 0)):
        raise error("series must be strictly positive on the fit window")
    return fit_line(taus, np.log(values) if taus.size else values)
