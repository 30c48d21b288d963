"""Besov and Triebel-Lizorkin norms, classical and by ball differences.

The scale-``k`` piece of ``f`` is either the band ``phi_{2^-k} * f``
(``method="classical"``) or the ball difference ``f - B_{l,2^-k} f``
(``method="ball"``). Norms aggregate the pieces over a finite
:class:`ScaleRange`; sums over all integers are truncated to the scales the
grid can represent.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

from .averaging import AverageSpec, ball_difference, discrete_ball_mean
from .filters import FilterBank, band_project, build_bank, low_pass_project
from .multipliers import BodySpec
from .torus import GridSpec, SampledField, lp_norm

BESOV = "besov"
TL = "triebel-lizorkin"
_SPACE_ALIASES = {"besov": BESOV, "b": BESOV, "tl": TL, "f": TL, "triebel-lizorkin": TL,
                  "triebel_lizorkin": TL}


@dataclass(frozen=True)
class ScaleRange:
    k_min: int
    k_max: int

    def __post_init__(self):
        if self.k_min > self.k_max:
            raise ValueError(f"empty scale range [{self.k_min}, {self.k_max}]")

    def __iter__(self):
        return iter(range(self.k_min, self.k_max + 1))

    def extended(self, below: int = 0, above: int = 0) -> "ScaleRange":
        return ScaleRange(self.k_min - below, self.k_max + above)


def smallest_ball_scale(ell: int) -> int:
    """Least ``k`` with ``ell * 2^-k < pi``."""
    k = -8
    while ell * 2.0 ** (-k) >= np.pi:
        k += 1
    return k


def top_scale(grid: GridSpec) -> int:
    """Two octaves below Nyquist."""
    return int(round(math.log2(grid.nyquist))) - 2


def default_scale_range(grid: GridSpec, ell: int = 1, method: str = "classical",
                        homogeneous: bool = True) -> ScaleRange:
    if method == "ball":
        k_min = smallest_ball_scale(ell)
        if not homogeneous:
            k_min = max(k_min, 1)
    else:
        # classical bands below j = 0 vanish on integer frequencies
        k_min = 0
    return ScaleRange(k_min, top_scale(grid))


@dataclass(frozen=True)
class NormParams:
    """A norm request.

    ``q`` may be ``inf``; for Triebel-Lizorkin it must exceed 1, and the ball
    method requires ``0 < alpha < 2*ell``.
    """

    space: str = BESOV
    alpha: float = 1.0
    p: float = 2.0
    q: float = 2.0
    ell: int = 1
    method: str = "classical"
    homogeneous: bool = True
    scale_range: Optional[ScaleRange] = None
    body: Optional[BodySpec] = None
    stride: int = 1
    keep_fields: bool = False

    def __post_init__(self):
        space = _SPACE_ALIASES.get(str(self.space).lower())
        if space is None:
            raise ValueError(f"unknown space {self.space!r}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))
        if self.method not in ("classical", "ball"):
            raise ValueError(f"unknown method {self.method!r}")
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not self.q > 0:
            raise ValueError(f"q must be positive, got {self.q}")
        if space == TL and not self.q > 1:
            raise ValueError(f"Triebel-Lizorkin norms need q > 1, got {self.q}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.method == "ball" and not self.alpha < 2 * self.ell:
            raise ValueError(f"ball method needs alpha < 2*ell = {2 * self.ell}, got {self.alpha}")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ValueError("stride must be a positive integer")

    def resolved_range(self, grid: GridSpec) -> ScaleRange:
        rng = self.scale_range or default_scale_range(grid, self.ell, self.method, self.homogeneous)
        if self.method == "ball":
            if self.ell * 2.0 ** (-rng.k_min) >= np.pi:
                raise ValueError(f"scale {rng.k_min} puts a ball of radius {self.ell * 2.0 ** -rng.k_min:.3g} past pi")
            if not self.homogeneous and rng.k_min < 1:
                rng = ScaleRange(1, rng.k_max)
        return rng

    def with_method(self, method: str) -> "NormParams":
        return replace(self, method=method, scale_range=None)


@dataclass
class NormReport:
    params: NormParams
    scales: list
    per_scale: list
    aggregate: float
    lp_term: Optional[float] = None
    tl_sup_scales: list = field(default_factory=list)
    excluded_scales: list = field(default_factory=list)
    fields: Optional[dict] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        params = asdict(self.params)
        params["p"] = _num(self.params.p)
        params["q"] = _num(self.params.q)
        return {
            "params": params,
            "aggregate": self.aggregate,
            "lp_term": self.lp_term,
            "scales": [{"k": int(k), "summand": float(a)} for k, a in zip(self.scales, self.per_scale)],
            "tl_sup_scales": [int(m) for m in self.tl_sup_scales],
            "excluded_scales": [int(m) for m in self.excluded_scales],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "summand", "space", "method", "alpha", "p", "q", "ell"])
        pr = self.params
        for k, a in zip(self.scales, self.per_scale):
            w.writerow([k, repr(float(a)), pr.space, pr.method, pr.alpha, _num(pr.p), _num(pr.q), pr.ell])
        return buf.getvalue()


def _num(x: float):
    return "inf" if np.isinf(x) else x


def lq_sum(values: Iterable[float], q: float) -> float:
    """``(sum v^q)^(1/q)``, or the max when ``q`` is infinite."""
    v = np.asarray(list(values), dtype=float)
    if v.size == 0:
        return 0.0
    if np.isinf(q):
        return float(v.max())
    return float(np.sum(v**q) ** (1.0 / q))


def scale_piece(f: SampledField, params: NormParams, k: int, bank: FilterBank) -> np.ndarray:
    """The field whose size the norm measures at scale ``k``."""
    if params.method == "classical":
        if not params.homogeneous and k == 0:
            return low_pass_project(f, bank).values
        return band_project(f, k, bank).values
    spec = AverageSpec(params.ell, 2.0 ** (-k), params.body)
    return ball_difference(f, spec).values


def _pieces(f, params, rng, bank):
    return {k: scale_piece(f, params, k, bank) for k in rng}


def _lp_values(values: np.ndarray, grid: GridSpec, p: float) -> float:
    return lp_norm(SampledField(grid, np.abs(values)), p)


def _inhomogeneous_ball(params: NormParams) -> bool:
    return params.method == "ball" and not params.homogeneous


def besov_norm(f: SampledField, params: NormParams, bank: Optional[FilterBank] = None) -> NormReport:
    """``(sum_k 2^(k alpha q) ||piece_k||_p^q)^(1/q)`` over the scale range.

    The inhomogeneous ball form adds ``||f||_p`` to the sum over ``k >= 1``;
    the inhomogeneous classical form uses ``Phi`` at ``k = 0``.
    """
    if params.space != BESOV:
        raise ValueError("besov_norm called with Triebel-Lizorkin parameters")
    bank = bank or build_bank(f.grid)
    rng = params.resolved_range(f.grid)
    pieces = _pieces(f, params, rng, bank)
    scales = list(rng)
    summands = [2.0 ** (k * params.alpha) * _lp_values(pieces[k], f.grid, params.p) for k in scales]
    total = lq_sum(summands, params.q)
    lp_term = None
    if _inhomogeneous_ball(params):
        lp_term = lp_norm(f, params.p)
        total += lp_term
    return NormReport(params, scales, summands, total, lp_term,
                      fields=pieces if params.keep_fields else None)


def _inner_lq(weighted: list, q: float) -> np.ndarray:
    stack = np.stack(weighted)
    if np.isinf(q):
        return stack.max(axis=0)
    return np.sum(stack**q, axis=0) ** (1.0 / q)


def sup_ball_scales(grid: GridSpec, rng: ScaleRange, params: NormParams):
    """Ball scales ``m`` for the ``p = inf`` Triebel-Lizorkin supremum.

    Radii ``2^-m`` must span at least four grid cells and stay below pi;
    inhomogeneous norms start at ``m = 0`` (classical) or ``m = 1`` (ball).
    """
    lo = rng.k_min
    if not params.homogeneous:
        lo = max(lo, 1 if params.method == "ball" else 0)
    usable, excluded = [], []
    for m in range(lo, rng.k_max + 1):
        r = 2.0 ** (-m)
        if r >= np.pi:
            continue
        (usable if r >= 4 * grid.spacing else excluded).append(m)
    return usable, excluded


def tl_norm(f: SampledField, params: NormParams, bank: Optional[FilterBank] = None) -> NormReport:
    """Triebel-Lizorkin norm.

    For finite ``p`` this is the ``L^p`` norm of the pointwise ``l^q`` sum.
    For ``p = inf`` it is the supremum over balls ``B(x, 2^-m)`` of the
    averaged tail ``sum_{k>=m} 2^(k alpha q) |piece_k|^q``, raised to ``1/q``;
    with ``q = inf`` the ball average becomes an essential supremum.
    """
    if params.space != TL:
        raise ValueError("tl_norm called with Besov parameters")
    bank = bank or build_bank(f.grid)
    grid = f.grid
    rng = params.resolved_range(grid)
    pieces = _pieces(f, params, rng, bank)
    scales = list(rng)
    weighted = {k: 2.0 ** (k * params.alpha) * np.abs(pieces[k]) for k in scales}
    summands = [_lp_values(weighted[k], grid, params.p) for k in scales]
    lp_term = lp_norm(f, params.p) if _inhomogeneous_ball(params) else None
    sup_scales, excluded = [], []
    if not np.isinf(params.p):
        total = _lp_values(_inner_lq([weighted[k] for k in scales], params.q), grid, params.p)
    else:
        sup_scales, excluded = sup_ball_scales(grid, rng, params)
        if not sup_scales:
            raise ValueError("no ball scale spans four grid cells inside the torus")
        total = _tl_sup(weighted, sup_scales, rng, params.q, grid, params.stride)
    if lp_term is not None:
        total += lp_term
    return NormReport(params, scales, summands, total, lp_term, sup_scales, excluded,
                      fields=weighted if params.keep_fields else None)


def _tl_sup(weighted: dict, sup_scales, rng: ScaleRange, q: float, grid: GridSpec, stride: int) -> float:
    if np.isinf(q):
        # the q -> inf limit of (mean over a ball of g^q)^(1/q) is the sup of g over the ball
        return float(max(weighted[k].max() for k in range(sup_scales[0], rng.k_max + 1)))
    best = 0.0
    tail = np.zeros(grid.shape)
    for k in range(rng.k_max, sup_scales[0] - 1, -1):
        tail = tail + weighted[k] ** q
        if k in sup_scales:
            means = discrete_ball_mean(tail, grid, 2.0 ** (-k))
            sel = means[(slice(None, None, stride),) * grid.dim]
            best = max(best, float(sel.max()))
    return best ** (1.0 / q)


def norm(f: SampledField, params: NormParams, bank: Optional[FilterBank] = None) -> NormReport:
    """Dispatch on ``params.space``."""
    if params.space == BESOV:
        return besov_norm(f, params, bank)
    return tl_norm(f, params, bank)


# ---------------------------------------------------------------------------
# maximal function diagnostics


def maximal_radii(grid: GridSpec) -> list:
    """Dyadic radii from 2 down to the grid spacing."""
    radii, k = [], -1
    while 2.0 ** (-k) >= grid.spacing:
        radii.append(2.0 ** (-k))
        k += 1
    return radii


def hl_maximal(f: SampledField, radii: Optional[list] = None) -> SampledField:
    """Dyadic discrete Hardy-Littlewood maximal function.

    At each point, the largest mean of ``|f|`` over periodic balls of the
    given radii; the point's own cell is always a candidate, so ``Mf >= |f|``.
    """
    a = np.abs(f.values).astype(float)
    out = a.copy()
    for r in radii or maximal_radii(f.grid):
        out = np.maximum(out, discrete_ball_mean(a, f.grid, r))
    return SampledField(f.grid, out)


@dataclass(frozen=True)
class MaximalControlReport:
    constants: dict
    excluded_sites: dict

    @property
    def max_constant(self) -> float:
        return max(self.constants.values(), default=0.0)


def maximal_control_check(f: SampledField, ell: int, bank: Optional[FilterBank] = None,
                          scales: Iterable[int] = range(2, 7), floor: float = 1e-12) -> MaximalControlReport:
    """Smallest ``C_j`` with ``|phi_{2^-j} * f| <= C_j M(f - B_{l,2^-j} f)`` pointwise.

    Sites where the maximal function is below ``floor`` times its peak are
    skipped and counted.
    """
    bank = bank or build_bank(f.grid)
    consts, skipped = {}, {}
    for j in scales:
        band = np.abs(band_project(f, j, bank).values)
        M = hl_maximal(ball_difference(f, AverageSpec(ell, 2.0 ** (-j)))).values
        peak = M.max()
        live = M > floor * peak if peak > 0 else np.zeros(M.shape, bool)
        skipped[j] = int((~live).sum())
        consts[j] = float((band[live] / M[live]).max()) if live.any() else 0.0
    return MaximalControlReport(consts, skipped)


# ---------------------------------------------------------------------------
# discrete Hardy inequalities


@dataclass(frozen=True)
class HardyReport:
    beta: float
    q: float
    lhs_upper: float
    rhs_upper: float
    lhs_lower: float
    rhs_lower: float
    bound: float

    @property
    def ratio_upper(self) -> float:
        return self.lhs_upper / self.rhs_upper if self.rhs_upper > 0 else 0.0

    @property
    def ratio_lower(self) -> float:
        return self.lhs_lower / self.rhs_lower if self.rhs_lower > 0 else 0.0

    @property
    def holds(self) -> bool:
        tol = 1 + 1e-12
        return (self.lhs_upper <= tol * self.bound * self.rhs_upper
                and self.lhs_lower <= tol * self.bound * self.rhs_lower)


def hardy_constant(beta: float, q: float) -> float:
    """A valid constant: ``1/(1-2^-beta)`` for ``q >= 1``, ``(1-2^(-beta q))^(-1/q)`` below."""
    if np.isinf(q) or q >= 1:
        return 1.0 / (1.0 - 2.0 ** (-beta))
    return (1.0 - 2.0 ** (-beta * q)) ** (-1.0 / q)


def _weighted_lq(weights_log2: np.ndarray, values: np.ndarray, q: float, tail_log2=None,
                 tail_value=0.0, tail_ratio=0.0) -> float:
    # sum_k 2^(w_k q) v_k^q plus an optional geometric tail 2^(tail q) v^q / (1 - 2^(-beta q))
    if np.isinf(q):
        terms = list(2.0**weights_log2 * values)
        if tail_log2 is not None:
            terms.append(2.0**tail_log2 * tail_value)
        return float(max(terms, default=0.0))
    total = float(np.sum((2.0**weights_log2 * values) ** q))
    if tail_log2 is not None:
        total += (2.0**tail_log2 * tail_value) ** q / (1.0 - tail_ratio)
    return total ** (1.0 / q)


def discrete_hardy_check(a, beta: float, q: float, start: int = 0) -> HardyReport:
    """Both sides of both discrete Hardy inequalities for ``a_k``, ``k = start, start+1, ...``.

    Outside the support the partial sums are constant, so the infinite sums
    reduce to closed-form geometric tails.
    """
    a = np.abs(np.asarray(a, dtype=float))
    if not beta > 0:
        raise ValueError("beta must be positive")
    q = float(q)
    k = start + np.arange(a.size)
    total = a.sum()
    upper_tails = np.cumsum(a[::-1])[::-1]
    lower_tails = np.cumsum(a)
    ratio = 2.0 ** (-beta * q) if not np.isinf(q) else 0.0
    lhs_u = _weighted_lq(beta * k, upper_tails, q, beta * (start - 1), total, ratio)
    rhs_u = _weighted_lq(beta * k, a, q)
    end = start + a.size - 1
    lhs_l = _weighted_lq(-beta * k, lower_tails, q, -beta * (end + 1), total, ratio)
    rhs_l = _weighted_lq(-beta * k, a, q)
    return HardyReport(beta, q, lhs_u, rhs_u, lhs_l, rhs_l, hardy_constant(beta, q))


@dataclass(frozen=True)
class HardyBatch:
    beta: float
    q: float
    count: int
    max_ratio_upper: float
    max_ratio_lower: float
    all_hold: bool


def random_sequences(rng: np.random.Generator, count: int, max_width: int = 20):
    """Random finitely supported sequences with log-normal magnitudes."""
    for _ in range(count):
        width = int(rng.integers(1, max_width + 1))
        start = int(rng.integers(-10, 11))
        yield start, np.exp(rng.normal(0.0, 2.0, width))


def hardy_batch(beta: float, q: float, count: int = 1000, seed: int = 0, max_width: int = 20) -> HardyBatch:
    rng = np.random.default_rng(seed)
    up = lo = 0.0
    ok = True
    for start, a in random_sequences(rng, count, max_width):
        rep = discrete_hardy_check(a, beta, q, start)
        up, lo = max(up, rep.ratio_upper), max(lo, rep.ratio_lower)
        ok = ok and rep.holds
    return HardyBatch(beta, float(q), count, float(up), float(lo), bool(ok))
