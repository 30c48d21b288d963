"""Test functions of known smoothness and the studies built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .averaging import AverageSpec, ball_difference
from .filters import build_bank
from .multipliers import BodySpec
from .norms import NormParams, ScaleRange, default_scale_range, norm, smallest_ball_scale, top_scale
from .slopes import SlopeFit, fit_slope
from .torus import GridSpec, SampledField, SpectralField, inverse_transform, lp_norm

FAMILIES = ("weierstrass", "band_bump", "power_spectrum", "smooth_reference")


@dataclass(frozen=True)
class TestFunctionSpec:
    """Recipe for a test field.

    ``top_level`` is the last lacunary level ``J`` of the Weierstrass sum
    (default two octaves below Nyquist); ``cutoff`` caps ``|m|`` for the power
    spectrum family (default ``N/4``). Phases of that family come from white
    noise on a base grid fixed by ``cutoff`` alone, so the field does not
    change when ``N`` grows.
    """

    __test__ = False  # not a pytest class

    family: str
    grid: GridSpec
    alpha: float = 1.0
    top_level: Optional[int] = None
    k0: int = 4
    seed: int = 0
    cutoff: Optional[int] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        nyq = self.grid.nyquist
        if self.family == "weierstrass" and 2**self.levels >= nyq:
            raise ValueError(f"top lacunary frequency 2^{self.levels} reaches Nyquist {nyq}")
        if self.family == "band_bump" and 2 ** (self.k0 + 1) >= nyq:
            raise ValueError(f"band 2^{self.k0 + 1} reaches Nyquist {nyq}")
        if self.family == "power_spectrum" and not 1 <= self.max_frequency < nyq:
            raise ValueError(f"cutoff {self.max_frequency} must lie in [1, {nyq})")

    @property
    def levels(self) -> int:
        if self.top_level is not None:
            return int(self.top_level)
        return int(math.log2(self.grid.n_samples)) - 2

    @property
    def max_frequency(self) -> int:
        return int(self.cutoff) if self.cutoff is not None else self.grid.n_samples // 4

    def on_grid(self, n_samples: int) -> "TestFunctionSpec":
        return replace(self, grid=GridSpec(self.grid.dim, n_samples))

    @property
    def label(self) -> str:
        if self.family == "weierstrass":
            return f"weierstrass(alpha={self.alpha:g},J={self.levels})"
        if self.family == "band_bump":
            return f"band_bump(k0={self.k0})"
        if self.family == "power_spectrum":
            return f"power_spectrum(alpha={self.alpha:g},seed={self.seed},cutoff={self.max_frequency})"
        return "smooth_reference"


def weierstrass(grid: GridSpec, alpha: float, levels: int) -> SampledField:
    x = grid.coordinates()[0]
    vals = sum(2.0 ** (-j * alpha) * np.cos(2.0**j * x) for j in range(levels + 1))
    return SampledField(grid, vals)


def band_bump(grid: GridSpec, k0: int) -> SampledField:
    """Radial bump with spectrum ``phi_hat(2^-k0 |m|)``, scaled to peak 1 at the origin."""
    bank = build_bank(grid)
    r = np.sqrt(grid.squared_magnitude().astype(float))
    coef = bank.phi_hat(2.0 ** (-k0) * r)
    coef = coef / coef.sum()
    return inverse_transform(SpectralField(grid, coef, real=True))


def _phase_source(dim: int, cutoff: int, seed: int) -> np.ndarray:
    base = 4 * 2 ** int(math.ceil(math.log2(cutoff + 1)))
    noise = np.random.default_rng(seed).standard_normal((base,) * dim)
    return np.fft.fftn(noise)


def power_spectrum(grid: GridSpec, alpha: float, cutoff: int, seed: int) -> SampledField:
    """Real field with ``|f_hat(m)| = (1+|m|)^-(alpha+n/2)`` for ``|m| <= cutoff``.

    Phases are those of the transform of real white noise, which makes the
    spectrum conjugate-symmetric.
    """
    src = _phase_source(grid.dim, cutoff, seed)
    base = src.shape[0]
    freqs = grid.frequencies()
    r = np.sqrt(grid.squared_magnitude().astype(float))
    live = r <= cutoff
    idx = tuple(m[live] % base for m in freqs)
    phase = np.exp(1j * np.angle(src[idx]))
    coef = np.zeros(grid.shape, dtype=complex)
    coef[live] = (1.0 + r[live]) ** (-(alpha + grid.dim / 2.0)) * phase
    return inverse_transform(SpectralField(grid, coef, real=True))


def random_band_limited(grid: GridSpec, cutoff: int, rng: np.random.Generator) -> SampledField:
    """Real white noise with every frequency ``|m| > cutoff`` removed."""
    coef = np.fft.fftn(rng.standard_normal(grid.shape)) / grid.size
    coef[grid.squared_magnitude() > cutoff**2] = 0.0
    return inverse_transform(SpectralField(grid, coef, real=True))


def generate(spec: TestFunctionSpec) -> SampledField:
    """Sample the field described by ``spec``; deterministic in its fields."""
    g = spec.grid
    if spec.family == "weierstrass":
        return weierstrass(g, spec.alpha, spec.levels)
    if spec.family == "band_bump":
        return band_bump(g, spec.k0)
    if spec.family == "power_spectrum":
        return power_spectrum(g, spec.alpha, spec.max_frequency, spec.seed)
    return SampledField.from_function(g, lambda *x: np.cos(x[0]))


def default_slope_window(grid: GridSpec) -> tuple:
    """Scales ``[2, log2(N) - 6]``: five scales at N = 4096."""
    return 2, int(math.log2(grid.n_samples)) - 6


def ball_difference_profile(f: SampledField, ell: int, p: float, scales: Sequence[int],
                            body: Optional[BodySpec] = None) -> np.ndarray:
    """``||f - B_{l,2^-k} f||_p`` for each ``k``."""
    return np.array([lp_norm(ball_difference(f, AverageSpec(ell, 2.0 ** (-k), body)), p) for k in scales])


def decay_slope(f: SampledField, ell: int, p: float, window: Optional[tuple] = None,
                body: Optional[BodySpec] = None) -> SlopeFit:
    """Slope of ``log2 ||f - B_{l,2^-k} f||_p`` against ``k`` over ``window``."""
    lo, hi = window or default_slope_window(f.grid)
    lo = max(lo, smallest_ball_scale(ell))
    if hi - lo + 1 < 4:
        raise ValueError(f"slope window [{lo}, {hi}] has fewer than 4 scales")
    ks = np.arange(lo, hi + 1)
    mags = ball_difference_profile(f, ell, p, ks, body)
    floor = 1e-13 * max(lp_norm(f, p), 1e-300)
    return fit_slope(ks, mags, noise_floor=floor, min_points=4)


# ---------------------------------------------------------------------------
# studies


@dataclass
class RatioStudy:
    """Ball-method over classical norm ratios, per function and grid size."""

    description: str
    labels: list
    grid_sizes: list
    ratios: dict = field(default_factory=dict)

    def bracket(self, n_samples: int) -> tuple:
        r = self.ratios.get(n_samples, [])
        if not r:
            return (float("nan"), float("nan"))
        return (float(min(r)), float(max(r)))

    @property
    def drift(self) -> float:
        """Largest relative change of either bracket end between the first and last grid."""
        if not self.labels or len(self.grid_sizes) < 2:
            return 0.0
        a, b = self.bracket(self.grid_sizes[0]), self.bracket(self.grid_sizes[-1])
        return float(max(abs(b[0] - a[0]) / a[0], abs(b[1] - a[1]) / a[1]))

    @property
    def valid(self) -> bool:
        vals = [v for r in self.ratios.values() for v in r]
        return all(np.isfinite(v) and v > 0 for v in vals)

    def rows(self):
        for N in self.grid_sizes:
            for label, r in zip(self.labels, self.ratios[N]):
                yield N, label, r


def standard_family(grid: GridSpec) -> list:
    """Grid-independent functions spanning smooth, lacunary, banded and random spectra."""
    fam = [TestFunctionSpec("weierstrass", grid, alpha=a, top_level=5) for a in (0.5, 1.0, 2.0, 3.0)]
    fam += [TestFunctionSpec("band_bump", grid, k0=k) for k in (2, 3, 4)]
    fam += [TestFunctionSpec("power_spectrum", grid, alpha=a, seed=s, cutoff=32)
            for a, s in ((0.5, 0), (1.5, 1), (2.5, 2))]
    fam.append(TestFunctionSpec("smooth_reference", grid))
    return fam


def equivalence_study(family: Sequence[TestFunctionSpec], params: NormParams,
                      grid_sizes: Sequence[int] = (1024, 2048),
                      k_max: Optional[int] = None) -> RatioStudy:
    """Ratios ``ball norm / classical norm`` with identical ``(alpha, p, q)``.

    Each method keeps its own lowest scale, but both stop at one ``k_max`` on
    every grid (by default that of the coarsest grid), so only the
    discretisation changes with ``N``.
    """
    grid_sizes = sorted(grid_sizes)
    study = RatioStudy(_describe(params), [s.label for s in family], list(grid_sizes))
    if not family:
        for N in grid_sizes:
            study.ratios[N] = []
        return study
    dim = family[0].grid.dim
    coarse = GridSpec(dim, grid_sizes[0])
    if k_max is None:
        k_max = top_scale(coarse)
    ball, classical = (replace(params, method=m, scale_range=ScaleRange(
        default_scale_range(coarse, params.ell, m, params.homogeneous).k_min, k_max)) for m in ("ball", "classical"))
    for N in grid_sizes:
        bank = build_bank(GridSpec(dim, N))
        ratios = []
        for spec in family:
            f = generate(spec.on_grid(N))
            num, den = norm(f, ball, bank).aggregate, norm(f, classical, bank).aggregate
            ratio = num / den if den > 0 else float("nan")
            if not np.isfinite(ratio):
                raise ArithmeticError(f"non-finite norm ratio for {spec.label} at N={N}")
            ratios.append(ratio)
        study.ratios[N] = ratios
    return study


def _describe(params: NormParams) -> str:
    kind = "homogeneous" if params.homogeneous else "inhomogeneous"
    return f"{params.space} {kind} alpha={params.alpha:g} p={params.p:g} q={params.q:g} ell={params.ell}"


@dataclass
class RefinementTable:
    grid_sizes: list
    values: list
    changes: list

    @property
    def growing(self) -> bool:
        """True when some relative change exceeds the one before it."""
        return any(b > a * (1 + 1e-9) + 1e-15 for a, b in zip(self.changes, self.changes[1:]))


def refinement_study(spec: TestFunctionSpec, params: NormParams,
                     grid_sizes: Sequence[int] = (256, 512, 1024)) -> RefinementTable:
    """Recompute one norm as ``N`` grows; tabulate successive relative changes."""
    sizes = list(grid_sizes)
    if sizes != sorted(sizes):
        raise ValueError("grid sizes must be ascending")
    vals = [norm(generate(spec.on_grid(N)), params).aggregate for N in sizes]
    changes = [abs(b - a) / abs(a) if a else abs(b) for a, b in zip(vals, vals[1:])]
    return RefinementTable(sizes, vals, changes)
