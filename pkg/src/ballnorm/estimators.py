"""scikit-learn style wrappers: rows of ``X`` are flattened fields on one grid."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_fields, iter_fields
from .averaging import AverageSpec, ball_difference
from .filters import band_project, build_bank
from .harness import decay_slope, default_slope_window
from .norms import NormParams, default_scale_range, norm, smallest_ball_scale
from .torus import lp_norm


class _FieldTransformer(TransformerMixin, BaseEstimator):
    dim = 1

    def fit(self, X, y=None):
        X, self.grid_ = check_fields(X, self.dim)
        self.n_features_in_ = X.shape[1]
        self._setup()
        return self

    def _setup(self):
        pass

    def transform(self, X):
        check_is_fitted(self, "grid_")
        X, _ = check_fields(X, self.dim, self.grid_)
        return np.array([self._row(f) for f in iter_fields(X, self.grid_)])


class BallDifferenceProfile(_FieldTransformer):
    """Features ``||f - B_{l,2^-k} f||_p`` for ``k`` in ``scales``.

    Parameters
    ----------
    ell : int
        Order of the average.
    p : float
        Exponent of the norm, ``> 1``; ``inf`` allowed.
    scales : sequence of int, optional
        Dyadic scales; defaults to the ball scales the grid supports.
    dim : int
        Dimension of the fields.
    """

    def __init__(self, ell=1, p=2.0, scales=None, dim=1):
        self.ell = ell
        self.p = p
        self.scales = scales
        self.dim = dim

    def _setup(self):
        if self.scales is None:
            self.scales_ = list(default_scale_range(self.grid_, self.ell, "ball"))
        else:
            self.scales_ = [int(k) for k in self.scales]
            if min(self.scales_) < smallest_ball_scale(self.ell):
                raise ValueError("a scale puts the widest ball past pi")

    def _row(self, f):
        return [lp_norm(ball_difference(f, AverageSpec(self.ell, 2.0 ** (-k))), self.p) for k in self.scales_]


class LittlewoodPaleyProfile(_FieldTransformer):
    """Features ``||phi_{2^-k} * f||_p`` for ``k`` in ``scales``."""

    def __init__(self, p=2.0, scales=None, dim=1):
        self.p = p
        self.scales = scales
        self.dim = dim

    def _setup(self):
        self.bank_ = build_bank(self.grid_)
        self.scales_ = list(self.scales) if self.scales is not None else list(default_scale_range(self.grid_))

    def _row(self, f):
        return [lp_norm(band_project(f, k, self.bank_), self.p) for k in self.scales_]


class FunctionSpaceNorm(_FieldTransformer):
    """One feature per field: its Besov or Triebel-Lizorkin norm."""

    def __init__(self, space="besov", alpha=1.0, p=2.0, q=2.0, ell=1, method="classical",
                 homogeneous=True, dim=1):
        self.space = space
        self.alpha = alpha
        self.p = p
        self.q = q
        self.ell = ell
        self.method = method
        self.homogeneous = homogeneous
        self.dim = dim

    def _setup(self):
        self.params_ = NormParams(self.space, self.alpha, self.p, self.q, self.ell, self.method,
                                  self.homogeneous)
        self.bank_ = build_bank(self.grid_)

    def _row(self, f):
        return [norm(f, self.params_, self.bank_).aggregate]


class SmoothnessEstimator(RegressorMixin, BaseEstimator):
    """Estimate the smoothness exponent of each field from its ball-difference decay.

    ``predict`` returns minus the fitted slope of ``log2 ||f - B_{l,2^-k} f||_p``,
    which saturates at ``2*ell``.
    """

    def __init__(self, ell=2, p=2.0, window=None, dim=1):
        self.ell = ell
        self.p = p
        self.window = window
        self.dim = dim

    def fit(self, X, y=None):
        X, self.grid_ = check_fields(X, self.dim)
        self.n_features_in_ = X.shape[1]
        self.window_ = tuple(self.window) if self.window is not None else default_slope_window(self.grid_)
        return self

    def predict(self, X):
        check_is_fitted(self, "grid_")
        X, _ = check_fields(X, self.dim, self.grid_)
        return np.array([-decay_slope(f, self.ell, self.p, self.window_).slope
                         for f in iter_fields(X, self.grid_)])
