"""Least-squares slopes of log2-magnitudes against dyadic scale."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    window: tuple
    max_residual: float
    n_points: int
    degenerate: bool = False


def fit_slope(x, magnitudes, noise_floor: float = 0.0, min_points: int = 2) -> SlopeFit:
    """Fit ``log2(magnitudes) ~ slope * x + intercept``.

    Points with magnitude at or below ``noise_floor`` are excluded and mark the
    fit as degenerate. The largest deviation from the fitted line is kept.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(magnitudes, dtype=float)
    keep = y > noise_floor
    if keep.sum() < min_points:
        raise ValueError(f"only {int(keep.sum())} usable points above the noise floor")
    xs, ly = x[keep], np.log2(y[keep])
    slope, intercept = np.polyfit(xs, ly, 1)
    resid = np.abs(ly - (slope * xs + intercept))
    return SlopeFit(float(slope), float(intercept), (float(xs.min()), float(xs.max())),
                    float(resid.max()), int(keep.sum()), degenerate=bool((~keep).any()))
