"""Ball averages ``B_t``, order-2l averages ``B_{l,t}`` and ball differences.

Three independent routes are provided:

* spectral: one multiplier pass on the torus (the production path);
* spatial: equal-weight means of the grid samples inside each ball, an
  oracle with its own O(h) error;
* pointwise: Gauss quadrature over balls in R^n around a single point, used
  for polynomial reproduction and Taylor-decay checks where periodicity would
  get in the way.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import ndimage

from .multipliers import (BodySpec, QuadratureRule, average_weights, cube_hat, m_ell_cube,
                          table_for_grid)
from .slopes import SlopeFit, fit_slope
from .torus import (GridSpec, SampledField, filter_field, filter_field_general)

BALL = "ball"


def _body(body: Optional[BodySpec], dim: int) -> BodySpec:
    if body is None:
        return BodySpec(BALL, dim)
    if body.dim != dim:
        raise ValueError(f"body dimension {body.dim} does not match field dimension {dim}")
    return body


@dataclass(frozen=True)
class AverageSpec:
    """Order ``ell`` average at radius ``t``.

    On the torus the widest ball ``ell*t`` must stay below pi; pass
    ``periodic=False`` for pointwise work on R^n where no such limit exists.
    """

    ell: int
    t: float
    body: Optional[BodySpec] = None
    periodic: bool = True

    def __post_init__(self):
        if int(self.ell) != self.ell or self.ell < 1:
            raise ValueError(f"average order must be a positive integer, got {self.ell}")
        if not self.t > 0:
            raise ValueError(f"radius must be positive, got {self.t}")
        if self.periodic and self.ell * self.t >= np.pi:
            raise ValueError(f"ell * t = {self.ell * self.t:.4g} must stay below pi")


@dataclass(frozen=True)
class CentralDifferenceSpec:
    order: int
    step: float

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError("order must be a positive integer")


@dataclass(frozen=True)
class PointProbe:
    """A point in R^n, a per-axis quadrature order and a payload callable.

    ``payload`` maps points of shape ``(..., n)`` to values. If it exposes a
    ``degree`` attribute the quadrature order is checked against it.
    """

    center: tuple
    order: int
    payload: Callable = field(compare=False)

    @property
    def dim(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class Monomial:
    """``prod_i x_i^{e_i}``, evaluated exactly at arbitrary points."""

    exponents: tuple

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def __call__(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        out = np.ones(y.shape[:-1])
        for i, e in enumerate(self.exponents):
            if e:
                out = out * y[..., i] ** e
        return out


# ---------------------------------------------------------------------------
# spectral path


def _ball_symbol(grid: GridSpec, t: float, body: BodySpec):
    if body.kind == BALL:
        return table_for_grid("ball_hat", 1, grid, float(t))
    return None


def ball_average_spectral(f: SampledField, t: float, body: Optional[BodySpec] = None) -> SampledField:
    """``B_t f`` as a multiplier pass with ``I_hat(t |m|)`` (or the cube transform)."""
    body = _body(body, f.grid.dim)
    if not 0 <= t < np.pi:
        raise ValueError(f"radius {t} outside [0, pi)")
    if t == 0:
        return f
    if body.kind == BALL:
        return filter_field(f, _ball_symbol(f.grid, t, body))
    return filter_field_general(f, lambda *m: cube_hat(t * np.stack(m, axis=-1)))


def higher_average(f: SampledField, spec: AverageSpec, method: str = "multiplier") -> SampledField:
    """``B_{l,t} f``.

    ``method="combination"`` sums the weighted ``B_{jt} f``; ``"multiplier"``
    applies ``m_l(t|m|)`` in one pass.
    """
    body = _body(spec.body, f.grid.dim)
    if method == "combination":
        out = None
        for j, w in enumerate(average_weights(spec.ell), start=1):
            term = w * ball_average_spectral(f, j * spec.t, body)
            out = term if out is None else out + term
        return out
    if method != "multiplier":
        raise ValueError(f"unknown method {method!r}")
    if body.kind == BALL:
        return filter_field(f, table_for_grid("m_ell", spec.ell, f.grid, float(spec.t)))
    return filter_field_general(f, lambda *m: m_ell_cube(spec.ell, spec.t * np.stack(m, axis=-1)))


def ball_difference(f: SampledField, spec: AverageSpec, method: str = "multiplier") -> SampledField:
    """``f - B_{l,t} f``; the multiplier route applies ``A_l(t|m|)`` directly."""
    body = _body(spec.body, f.grid.dim)
    if method == "combination":
        return f - higher_average(f, spec, "combination")
    if method != "multiplier":
        raise ValueError(f"unknown method {method!r}")
    if body.kind == BALL:
        return filter_field(f, table_for_grid("A_ell", spec.ell, f.grid, float(spec.t)))
    return filter_field_general(f, lambda *m: 1.0 - m_ell_cube(spec.ell, spec.t * np.stack(m, axis=-1)))


# ---------------------------------------------------------------------------
# spatial oracle


@lru_cache(maxsize=128)
def ball_stencil(grid: GridSpec, radius: float, kind: str = BALL) -> np.ndarray:
    """Integer offsets within periodic distance ``radius`` (inclusive)."""
    K = int(math.floor(radius / grid.spacing + 1e-9))
    K = min(K, grid.n_samples // 2 - 1)
    axis = np.arange(-K, K + 1)
    offs = np.stack(np.meshgrid(*([axis] * grid.dim), indexing="ij"), axis=-1).reshape(-1, grid.dim)
    h2 = grid.spacing**2
    if kind == BALL:
        keep = np.sum(offs**2, axis=1) * h2 <= radius**2 * (1 + 1e-12)
    else:
        keep = np.max(np.abs(offs), axis=1) * grid.spacing <= radius * (1 + 1e-12)
    out = offs[keep]
    out.setflags(write=False)
    return out


def _mask(grid: GridSpec, radius: float, kind: str) -> np.ndarray:
    offs = ball_stencil(grid, radius, kind)
    K = int(np.abs(offs).max(initial=0))
    mask = np.zeros((2 * K + 1,) * grid.dim)
    mask[tuple((offs + K).T)] = 1.0
    return mask / mask.sum()


def discrete_ball_mean(values: np.ndarray, grid: GridSpec, radius: float, kind: str = BALL,
                       method: str = "fft") -> np.ndarray:
    """Mean of ``values`` over the grid points of every periodic ball of ``radius``.

    ``method="direct"`` sums the stencil in real space; ``"fft"`` performs the
    same circular correlation in frequency space.
    """
    values = np.asarray(values)
    if method == "direct":
        mask = _mask(grid, radius, kind)
        if np.iscomplexobj(values):
            return (ndimage.correlate(values.real, mask, mode="wrap")
                    + 1j * ndimage.correlate(values.imag, mask, mode="wrap"))
        return ndimage.correlate(values, mask, mode="wrap")
    offs = ball_stencil(grid, radius, kind)
    kernel = np.zeros(grid.shape)
    kernel[tuple((offs % grid.n_samples).T)] = 1.0 / len(offs)
    out = np.fft.ifftn(np.fft.fftn(values) * np.conj(np.fft.fftn(kernel)))
    return out if np.iscomplexobj(values) else out.real


def ball_average_spatial(f: SampledField, t: float, body: Optional[BodySpec] = None) -> SampledField:
    """Equal-weight mean of the samples within distance ``t`` of each grid point."""
    body = _body(body, f.grid.dim)
    if t < 4 * f.grid.spacing:
        raise ValueError(f"radius {t:.4g} spans fewer than four grid cells")
    if t >= np.pi:
        raise ValueError("radius must stay below pi")
    return SampledField(f.grid, discrete_ball_mean(f.values, f.grid, t, body.kind, method="direct"))


# ---------------------------------------------------------------------------
# central differences


def central_difference(h: Callable[[float], float], spec: CentralDifferenceSpec, at: float) -> float:
    """``sum_j C(r,j) (-1)^j h(at + r*step/2 - j*step)``."""
    r, step = spec.order, spec.step
    return sum(math.comb(r, j) * (-1) ** j * h(at + r * step / 2 - j * step) for j in range(r + 1))


def verify_central_difference_identity(f: SampledField, spec: AverageSpec,
                                       probes: Sequence) -> float:
    """Max over ``probes`` of the gap between ``f - B_{l,t} f`` and
    ``(-1)^l / C(2l,l) * Delta_t^{2l} g(0)``, with ``g(s) = B_{|s|} f(x)``."""
    ell, t = spec.ell, spec.t
    body = _body(spec.body, f.grid.dim)
    lhs = ball_difference(f, spec).values
    cache = {}

    def averaged(radius):
        key = round(radius / t)
        if key not in cache:
            cache[key] = ball_average_spectral(f, abs(radius), body).values
        return cache[key]

    worst = 0.0
    cd = CentralDifferenceSpec(2 * ell, t)
    coef = (-1) ** ell / math.comb(2 * ell, ell)
    for probe in probes:
        idx = tuple(np.atleast_1d(probe))
        rhs = coef * central_difference(lambda s: averaged(s)[idx], cd, 0.0)
        worst = max(worst, abs(lhs[idx] - rhs))
    return float(worst)


# ---------------------------------------------------------------------------
# pointwise evaluation on R^n


@lru_cache(maxsize=64)
def unit_body_rule(kind: str, dim: int, order: int):
    """Points and weights (summing to one) for averages over the unit body."""
    gl = QuadratureRule.gauss_legendre(order)
    if kind == "cube" or dim == 1:
        v = 2 * gl.nodes - 1
        pts = np.array(list(product(v, repeat=dim)))
        wts = np.array([np.prod(w) for w in product(gl.weights, repeat=dim)])
        return pts, wts
    n_angle = 2 * order + 2
    if dim == 2:
        r = gl.nodes
        wr = 2 * r * gl.weights
        a = 2 * np.pi * np.arange(n_angle) / n_angle
        pts = np.array([(ri * np.cos(ai), ri * np.sin(ai)) for ri in r for ai in a])
        wts = np.array([wi / n_angle for wi in wr for _ in a])
        return pts, wts
    r = gl.nodes
    wr = 3 * r**2 * gl.weights
    z = 2 * gl.nodes - 1
    wz = gl.weights
    a = 2 * np.pi * np.arange(n_angle) / n_angle
    pts, wts = [], []
    for ri, wri in zip(r, wr):
        for zi, wzi in zip(z, wz):
            rho = math.sqrt(1 - zi * zi)
            for ai in a:
                pts.append((ri * rho * math.cos(ai), ri * rho * math.sin(ai), ri * zi))
                wts.append(wri * wzi / n_angle)
    return np.array(pts), np.array(wts)


def body_mean_at(payload: Callable, center, radius: float, order: int, kind: str = BALL) -> float:
    """Average of ``payload`` over ``center + radius * K``."""
    center = np.asarray(center, dtype=float)
    pts, wts = unit_body_rule(kind, center.size, order)
    return float(np.dot(wts, payload(center + radius * pts)))


def pointwise_body_average(probe: PointProbe, spec: AverageSpec) -> float:
    """``B_{l,t}`` of the payload at the probe centre, by quadrature over each ball."""
    if probe.order < spec.ell + 4:
        raise ValueError(f"quadrature order {probe.order} below ell + 4 = {spec.ell + 4}")
    degree = getattr(probe.payload, "degree", None)
    if degree is not None and 2 * probe.order - 1 < degree + probe.dim:
        raise ValueError(f"quadrature order {probe.order} too low for degree {degree}")
    kind = _body(spec.body, probe.dim).kind
    return float(sum(w * body_mean_at(probe.payload, probe.center, j * spec.t, probe.order, kind)
                     for j, w in enumerate(average_weights(spec.ell), start=1)))


def _pointwise_difference(payload, center, ell, t, order, body=None) -> float:
    probe = PointProbe(tuple(center), order, payload)
    value = float(payload(np.asarray(center, dtype=float)[None, :])[0])
    return value - pointwise_body_average(probe, AverageSpec(ell, t, body, periodic=False))


def monomials(dim: int, max_degree: int):
    """Exponent tuples of every monomial with total degree <= ``max_degree``."""
    return [e for e in product(range(max_degree + 1), repeat=dim) if sum(e) <= max_degree]


@dataclass(frozen=True)
class ReproductionReport:
    ell: int
    dim: int
    degree: int
    residuals: dict
    max_low_degree_residual: float
    top_slope: Optional[float]

    @property
    def reproduces(self) -> bool:
        return self.max_low_degree_residual <= 1e-9


def polynomial_reproduction_check(degree: int, ell: int, n: int, t_grid: Sequence[float],
                                  center=None, order: Optional[int] = None) -> ReproductionReport:
    """Residuals ``|P - B_{l,t} P|`` at ``center`` for all monomials up to ``degree``.

    Monomials below degree 2l must be reproduced; the slope of the pure power
    ``x_1^(2l)`` residual against ``t`` is returned when ``degree >= 2l``.
    """
    center = np.full(n, 0.3) if center is None else np.asarray(center, dtype=float)
    order = order or max(ell + 4, degree + 2)
    t_grid = np.asarray(t_grid, dtype=float)
    residuals = {}
    for e in monomials(n, degree):
        mono = Monomial(tuple(e))
        residuals[tuple(e)] = np.array([abs(_pointwise_difference(mono, center, ell, t, order))
                                        for t in t_grid])
    low = [r.max() for e, r in residuals.items() if sum(e) <= 2 * ell - 1]
    slope = None
    if degree >= 2 * ell:
        top = residuals[(2 * ell,) + (0,) * (n - 1)]
        slope = float(np.polyfit(np.log2(t_grid), np.log2(top), 1)[0])
    return ReproductionReport(ell, n, degree, residuals, float(max(low, default=0.0)), slope)


def taylor_decay_check(payload: Callable, ell: int, t_grid: Sequence[float], probes,
                       order: Optional[int] = None, body: Optional[BodySpec] = None,
                       noise_floor: float = 1e-13) -> SlopeFit:
    """Fit the log-log slope of ``max_probes |f - B_{l,t} f|`` against ``t``.

    Residuals under ``noise_floor`` are dropped and the fit is flagged
    degenerate rather than failed.
    """
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    order = order or ell + 8
    t_grid = np.asarray(t_grid, dtype=float)
    res = np.array([max(abs(_pointwise_difference(payload, x, ell, t, order, body)) for x in probes)
                    for t in t_grid])
    return fit_slope(np.log2(t_grid), res, noise_floor=noise_floor)
