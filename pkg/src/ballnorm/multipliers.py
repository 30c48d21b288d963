"""Radial symbols of ball averages and ball differences.

The normalised ball indicator has transform

    I_hat(s) = gamma_n * int_0^1 cos(u s) (1 - u^2)^((n-1)/2) du,

and the order-2l average ``B_{l,t}`` acts by ``m_l(t|xi|) = 1 - A_l(t|xi|)`` with

    A_l(s) = gamma_n 4^l / C(2l, l) * int_0^1 (1 - u^2)^((n-1)/2) sin(us/2)^(2l) du.

All radial integrals are evaluated with Gauss-Legendre after the substitution
``u = sin(theta)``, which turns the weight into ``cos(theta)^n`` and removes the
square-root endpoint singularity of the n = 2 weight.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .torus import GridSpec, radial_keys

DEFAULT_NODES = 64
_CHUNK = 2048


class InvariantViolation(ArithmeticError):
    """A numerically observed value contradicts a proven inequality."""


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""

    node_count: int
    nodes: np.ndarray = field(repr=False, compare=False)
    weights: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def gauss_legendre(cls, node_count: int = DEFAULT_NODES) -> "QuadratureRule":
        return _gauss_legendre(int(node_count))

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Apply the rule along the last axis of ``values`` sampled at ``nodes``."""
        return values @ self.weights


@lru_cache(maxsize=64)
def _gauss_legendre(node_count: int) -> QuadratureRule:
    if node_count < 1:
        raise ValueError("node_count must be positive")
    x, w = np.polynomial.legendre.leggauss(node_count)
    nodes, weights = (x + 1.0) / 2.0, w / 2.0
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(node_count, nodes, weights)


def nodes_for_frequency(freq: float) -> int:
    """Node count that resolves ``cos(freq * sin(theta))`` on [0, pi/2] to ~1e-14."""
    return max(DEFAULT_NODES, int(math.ceil(0.6 * freq)) + 16)


def _resolve_rule(rule: Optional[QuadratureRule], s_max: float, freq: float) -> QuadratureRule:
    if rule is None:
        return QuadratureRule.gauss_legendre(nodes_for_frequency(freq))
    need = nodes_for_frequency(s_max)
    if s_max > 50 and rule.node_count < need:
        raise ValueError(f"{rule.node_count} nodes cannot resolve radius {s_max:.3g}; need at least {need}")
    return rule


def _theta_rule(rule: QuadratureRule, n: int):
    theta = 0.5 * np.pi * rule.nodes
    return np.sin(theta), 0.5 * np.pi * rule.weights * np.cos(theta) ** n


def _radial_integral(integrand, n: int, s: np.ndarray, rule: QuadratureRule) -> np.ndarray:
    """``int_0^1 integrand(u, s) (1-u^2)^((n-1)/2) du`` for each entry of ``s``."""
    u, w = _theta_rule(rule, n)
    flat = s.ravel()
    out = np.empty(flat.shape)
    for start in range(0, flat.size, _CHUNK):
        block = flat[start:start + _CHUNK, None]
        out[start:start + _CHUNK] = integrand(u[None, :], block) @ w
    return out.reshape(s.shape)


def _check_dim(n: int):
    if n not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {n}")


def gamma_n(n: int, rule: Optional[QuadratureRule] = None) -> float:
    """Reciprocal of ``int_0^1 (1 - u^2)^((n-1)/2) du`` by quadrature.

    Closed forms: 1, 4/pi and 3/2 for n = 1, 2, 3.
    """
    _check_dim(n)
    rule = rule or QuadratureRule.gauss_legendre()
    _, w = _theta_rule(rule, n)
    return float(1.0 / w.sum())


def _as_radius(s) -> np.ndarray:
    s = np.abs(np.asarray(s, dtype=float))
    return s


def _unwrap(x: np.ndarray, like):
    return float(x) if np.ndim(like) == 0 else x


def ball_hat(n: int, s, rule: Optional[QuadratureRule] = None):
    """Transform of the normalised ball indicator at radius ``s``."""
    _check_dim(n)
    r = _as_radius(s)
    s_max = float(r.max(initial=0.0))
    rule = _resolve_rule(rule, s_max, s_max)
    return _unwrap(_ball_hat(n, r, rule), s)


def _ball_hat(n: int, r: np.ndarray, rule: QuadratureRule) -> np.ndarray:
    return gamma_n(n, rule) * _radial_integral(lambda u, t: np.cos(u * t), n, r, rule)


def A_ell(ell: int, n: int, s, rule: Optional[QuadratureRule] = None):
    """Ball-difference multiplier ``A_l(s)``; nonnegative, zero at the origin."""
    _check_ell(ell)
    _check_dim(n)
    r = _as_radius(s)
    s_max = float(r.max(initial=0.0))
    rule = _resolve_rule(rule, s_max, ell * s_max)
    pref = gamma_n(n, rule) * 4.0**ell / math.comb(2 * ell, ell)
    val = pref * _radial_integral(lambda u, t: np.sin(0.5 * u * t) ** (2 * ell), n, r, rule)
    return _unwrap(val, s)


def average_weights(ell: int) -> np.ndarray:
    """Weights of ``B_{jt}``, j = 1..l, in the order-2l average; they sum to one."""
    _check_ell(ell)
    c = math.comb(2 * ell, ell)
    return np.array([-2.0 / c * (-1) ** j * math.comb(2 * ell, ell - j) for j in range(1, ell + 1)])


def m_ell(ell: int, n: int, s, rule: Optional[QuadratureRule] = None):
    """Symbol of ``B_{l,t}`` as the signed binomial combination of ``I_hat(j s)``."""
    _check_ell(ell)
    r = _as_radius(s)
    s_max = float(r.max(initial=0.0))
    rule = _resolve_rule(rule, s_max, ell * s_max)
    weights = average_weights(ell)
    val = sum(w * _ball_hat(n, (j + 1) * r, rule) for j, w in enumerate(weights))
    return _unwrap(np.asarray(val, dtype=float), s)


def _check_ell(ell):
    if int(ell) != ell or ell < 1:
        raise ValueError(f"average order must be a positive integer, got {ell}")


def ratio_limit_at_zero(ell: int, n: int, rule: Optional[QuadratureRule] = None) -> float:
    """``lim_{s->0} A_l(s) / s^(2l) = gamma_n / C(2l,l) int_0^1 u^(2l) (1-u^2)^((n-1)/2) du``."""
    _check_ell(ell)
    rule = rule or QuadratureRule.gauss_legendre()
    integral = _radial_integral(lambda u, t: u ** (2 * ell) + 0 * t, n, np.zeros(1), rule)[0]
    return float(gamma_n(n, rule) / math.comb(2 * ell, ell) * integral)


def A_ell_ratio(ell: int, n: int, s, rule: Optional[QuadratureRule] = None):
    """``A_l(s) / s^(2l)`` with the analytic limit used at ``s = 0``."""
    r = _as_radius(s)
    out = np.empty(r.shape)
    zero = r == 0
    out[zero] = ratio_limit_at_zero(ell, n, rule)
    if np.any(~zero):
        out[~zero] = np.asarray(A_ell(ell, n, r[~zero], rule)) / r[~zero] ** (2 * ell)
    return _unwrap(out, s)


def trig_identity_residual(ell: int, s):
    """``|4^l sin(s/2)^(2l) - C(2l,l) - 2 sum_j (-1)^j C(2l,l-j) cos(js)|``."""
    _check_ell(ell)
    s = np.asarray(s, dtype=float)
    lhs = 4.0**ell * np.sin(0.5 * s) ** (2 * ell)
    rhs = math.comb(2 * ell, ell) + 2.0 * sum(
        (-1) ** j * math.comb(2 * ell, ell - j) * np.cos(j * s) for j in range(1, ell + 1)
    )
    return _unwrap(np.abs(lhs - rhs), s)


@dataclass(frozen=True)
class BoundEstimate:
    """Empirical bracket ``c1_hat <= A_l(s)/s^(2l) <= c2_hat`` on ``(s_lo, s_hi]``."""

    ell: int
    n: int
    s_lo: float
    s_hi: float
    sample_count: int
    c1_hat: float
    c2_hat: float
    argmin: float
    argmax: float
    limit_at_zero: float


def certify_ratio_bounds(ell: int, n: int, interval=(0.0, 4.0), sample_count: int = 10_000,
                         rule: Optional[QuadratureRule] = None) -> BoundEstimate:
    """Dense-sample ``A_l(s)/s^(2l)`` on ``(s_lo, s_hi]``.

    When ``s_lo`` is zero the analytic limit stands in for the left endpoint.
    A nonpositive ratio raises :class:`InvariantViolation`.
    """
    s_lo, s_hi = map(float, interval)
    if not 0 <= s_lo < s_hi:
        raise ValueError(f"bad interval {interval}")
    s = np.linspace(s_lo, s_hi, sample_count + 1)[1:]
    ratio = np.asarray(A_ell(ell, n, s, rule)) / s ** (2 * ell)
    limit = ratio_limit_at_zero(ell, n, rule)
    if s_lo == 0:
        s = np.concatenate([[0.0], s])
        ratio = np.concatenate([[limit], ratio])
    if ratio.min() <= 0 and s_hi <= 4:
        i = int(np.argmin(ratio))
        raise InvariantViolation(f"A_{ell}(s)/s^{2 * ell} = {ratio[i]:.3e} at s = {s[i]:.4g}")
    return BoundEstimate(ell, n, s_lo, s_hi, sample_count, float(ratio.min()), float(ratio.max()),
                         float(s[np.argmin(ratio)]), float(s[np.argmax(ratio)]), limit)


# ---------------------------------------------------------------------------
# norm bodies


@dataclass(frozen=True)
class BodySpec:
    """Unit ball of a norm on R^n: the Euclidean ball or the cube [-1, 1]^n."""

    kind: str = "ball"
    dim: int = 1

    def __post_init__(self):
        if self.kind not in ("ball", "cube"):
            raise ValueError(f"unknown body {self.kind!r}")
        _check_dim(self.dim)

    @property
    def delta1(self) -> float:
        """Radius of the largest centred Euclidean ball inside the body."""
        return 1.0

    @property
    def delta2(self) -> float:
        """Radius of the smallest centred Euclidean ball containing the body."""
        return 1.0 if self.kind == "ball" else math.sqrt(self.dim)

    def contains(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.kind == "ball":
            return np.sum(y**2, axis=-1) <= 1.0
        return np.max(np.abs(y), axis=-1) <= 1.0


def cube_hat(x: np.ndarray) -> np.ndarray:
    """Transform of the normalised cube indicator, ``prod_i sin(x_i)/x_i``."""
    x = np.asarray(x, dtype=float)
    return np.prod(np.sinc(x / np.pi), axis=-1)


def m_ell_cube(ell: int, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return sum(w * cube_hat((j + 1) * x) for j, w in enumerate(average_weights(ell)))


@lru_cache(maxsize=16)
def _cube_nodes(dim: int, node_count: int):
    rule = QuadratureRule.gauss_legendre(node_count)
    v = 2.0 * rule.nodes - 1.0
    grids = np.meshgrid(*([v] * dim), indexing="ij")
    wgrids = np.meshgrid(*([rule.weights] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    wts = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return pts, wts


def A_ell_body(ell: int, body: BodySpec, x, rule: Optional[QuadratureRule] = None) -> np.ndarray:
    """``4^l / C(2l,l)`` times the normalised body average of ``sin(x.u/2)^(2l)``.

    ``x`` has shape ``(..., n)``. The cube uses a tensor Gauss-Legendre rule;
    the ball delegates to :func:`A_ell` of ``|x|``.
    """
    _check_ell(ell)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != body.dim:
        raise ValueError(f"frequency vectors must have {body.dim} components")
    if body.kind == "ball":
        return np.asarray(A_ell(ell, body.dim, np.linalg.norm(x, axis=-1), rule))
    node_count = rule.node_count if rule else nodes_for_frequency(ell * float(np.abs(x).max(initial=0.0)))
    pts, wts = _cube_nodes(body.dim, node_count)
    flat = x.reshape(-1, body.dim)
    out = np.empty(flat.shape[0])
    pref = 4.0**ell / math.comb(2 * ell, ell)
    step = max(1, _CHUNK * 64 // pts.shape[0])
    for start in range(0, flat.shape[0], step):
        phase = 0.5 * flat[start:start + step] @ pts.T
        out[start:start + step] = pref * (np.sin(phase) ** (2 * ell) @ wts)
    return out.reshape(x.shape[:-1])


def grad_A_ell_body(ell: int, body: BodySpec, x, step: float) -> np.ndarray:
    """Central finite-difference gradient of :func:`A_ell_body`, shape ``(..., n)``."""
    x = np.asarray(x, dtype=float)
    grads = []
    for i in range(body.dim):
        e = np.zeros(body.dim)
        e[i] = step
        grads.append((A_ell_body(ell, body, x + e) - A_ell_body(ell, body, x - e)) / (2 * step))
    return np.stack(grads, axis=-1)


@dataclass(frozen=True)
class BodyCheckReport:
    ell: int
    body: BodySpec
    ratio_min: float
    ratio_max: float
    grad_constants: tuple
    steps: tuple

    @property
    def grad_constant_drift(self) -> float:
        c = self.grad_constants
        return abs(c[-1] / c[0] - 1.0)


def direction_set(dim: int, count: int = 32) -> np.ndarray:
    """Unit directions: ``+-1`` in 1-D, ``count`` equally spaced angles in 2-D,
    and a Fibonacci sphere lattice in 3-D."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        a = 2 * np.pi * np.arange(count) / count
        return np.stack([np.cos(a), np.sin(a)], axis=-1)
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    r = np.sqrt(1 - z**2)
    phi = np.pi * (1 + 5**0.5) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def body_ratio_and_derivative_check(ell: int, body: BodySpec, radius_grid: Sequence[float],
                                    directions: Optional[np.ndarray] = None,
                                    steps=(1e-4, 5e-5)) -> BodyCheckReport:
    """Bracket ``A_{l,K}(x)/|x|^(2l)`` and the first-derivative bound on a sweep.

    The gradient constant is ``max |grad A| / min(|x|^(2l-1), 1)``, recomputed
    for every finite-difference step so its stability can be judged.
    """
    r = np.asarray(radius_grid, dtype=float)
    if r.min() <= 0 or r.max() > 4:
        raise ValueError("radius grid must lie in (0, 4]")
    d = direction_set(body.dim) if directions is None else np.asarray(directions, dtype=float)
    x = r[:, None, None] * d[None, :, :]
    ratio = A_ell_body(ell, body, x) / r[:, None] ** (2 * ell)
    if ratio.min() <= 0:
        raise InvariantViolation(f"A_(l,K)/|x|^(2l) reached {ratio.min():.3e}")
    envelope = np.minimum(r ** (2 * ell - 1), 1.0)[:, None]
    consts = []
    for h in steps:
        g = np.linalg.norm(grad_A_ell_body(ell, body, x, h), axis=-1)
        consts.append(float(np.max(g / envelope)))
    return BodyCheckReport(ell, body, float(ratio.min()), float(ratio.max()), tuple(consts), tuple(steps))


# ---------------------------------------------------------------------------
# tabulation

KINDS = ("ball_hat", "A_ell", "m_ell", "eta", "A_ell_ratio")


@dataclass(frozen=True)
class RadialMultiplierTable:
    """Tabulated radial symbol. When built for a grid, ``squared_keys`` lets
    grid frequencies be looked up by their exact integer ``|m|^2``."""

    kind: str
    ell: int
    n: int
    gamma_n: float
    radii: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    node_count: int
    squared_keys: Optional[np.ndarray] = field(default=None, repr=False)
    scale: float = 1.0

    def lookup_squared(self, keys: np.ndarray) -> np.ndarray:
        if self.squared_keys is None:
            raise ValueError("table is not keyed by grid frequency")
        keys = np.asarray(keys)
        idx = np.searchsorted(self.squared_keys, keys)
        idx = np.clip(idx, 0, self.squared_keys.size - 1)
        if not np.array_equal(self.squared_keys[idx], keys):
            raise ValueError("multiplier table lacks a squared magnitude needed by the grid")
        return self.values[idx]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "value"])
        for r, v in zip(self.radii, self.values):
            w.writerow([repr(float(r)), repr(float(v))])
        return buf.getvalue()


def _evaluate(kind: str, ell: int, n: int, s: np.ndarray, rule, bank=None) -> np.ndarray:
    if kind == "ball_hat":
        return np.asarray(ball_hat(n, s, rule))
    if kind == "A_ell":
        return np.asarray(A_ell(ell, n, s, rule))
    if kind == "m_ell":
        return np.asarray(m_ell(ell, n, s, rule))
    if kind == "A_ell_ratio":
        return np.asarray(A_ell_ratio(ell, n, s, rule))
    if kind == "eta":
        from .filters import build_bank, eta_profile
        return eta_profile(ell, n, s, bank or build_bank())
    raise ValueError(f"unknown multiplier kind {kind!r}; expected one of {KINDS}")


def tabulate(kind: str, ell: int, n: int, radii, rule: Optional[QuadratureRule] = None,
             bank=None) -> RadialMultiplierTable:
    radii = np.asarray(radii, dtype=float)
    s_max = float(radii.max(initial=0.0))
    rule = _resolve_rule(rule, s_max, ell * s_max)
    vals = _evaluate(kind, ell, n, radii, rule, bank)
    return RadialMultiplierTable(kind, ell, n, gamma_n(n, rule), _frozen(radii), _frozen(vals), rule.node_count)


@lru_cache(maxsize=256)
def table_for_grid(kind: str, ell: int, grid: GridSpec, scale: float,
                   rule: Optional[QuadratureRule] = None) -> RadialMultiplierTable:
    """Tabulate ``kind`` at ``scale * |m|`` for every distinct grid magnitude."""
    keys, _ = radial_keys(grid)
    radii = scale * np.sqrt(keys.astype(float))
    tab = tabulate(kind, ell, grid.dim, radii, rule)
    return RadialMultiplierTable(tab.kind, ell, grid.dim, tab.gamma_n, tab.radii, tab.values,
                                 tab.node_count, keys, scale)


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a
