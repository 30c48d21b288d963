"""Input checks for the array-facing estimator API."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .torus import GridSpec, SampledField


def grid_for_length(length: int, dim: int) -> GridSpec:
    """Grid whose ``N^dim`` equals ``length``."""
    N = int(round(length ** (1.0 / dim)))
    if N**dim != length:
        raise ValueError(f"{length} samples do not form a {dim}-dimensional cube")
    return GridSpec(dim, N)


def check_fields(X, dim: int, grid: GridSpec | None = None):
    """Validate a 2-D array with one flattened field per row.

    Returns the checked array and the grid; if ``grid`` is given the row
    length must match it.
    """
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_all_finite=True)
    g = grid_for_length(X.shape[1], dim)
    if grid is not None and g != grid:
        raise ValueError(f"rows describe {g}, estimator was fitted on {grid}")
    return X, g


def iter_fields(X: np.ndarray, grid: GridSpec):
    for row in X:
        yield SampledField(grid, row)
