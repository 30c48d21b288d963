"""Dyadic Littlewood-Paley bank built by telescoping a smooth step.

``h`` equals 1 on [0, 1], 0 on [2, inf) and is C-infinity in between. Setting
``Phi_hat = h`` and ``phi_hat(s) = h(s) - h(2s)`` gives a band profile
supported in [1/2, 2] whose dyadic dilates sum to one exactly.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .multipliers import A_ell, InvariantViolation
from .torus import GridSpec, SampledField, filter_field

DEFAULT_RAMP = 0.5


def _psi(x: np.ndarray, ramp: float) -> np.ndarray:
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-ramp / x[pos])
    return out


def smooth_step(s, ramp: float = DEFAULT_RAMP):
    """``psi(2-s) / (psi(2-s) + psi(s-1))`` with ``psi(x) = exp(-ramp/x)`` for x > 0."""
    s = np.asarray(s, dtype=float)
    a = _psi(2.0 - s, ramp)
    b = _psi(s - 1.0, ramp)
    return a / (a + b)


@dataclass(frozen=True)
class FilterBank:
    """Radial profiles ``phi_hat`` (band) and ``Phi_hat`` (low pass).

    ``j_min`` and ``j_max`` bound the bands that can be nonzero on a given
    grid; ``c0`` is the achieved lower bound of ``phi_hat`` on [3/5, 5/3].
    """

    ramp: float = DEFAULT_RAMP
    j_min: int = 0
    j_max: int = 64
    c0: float = float("nan")

    def phi_hat(self, s):
        s = np.asarray(s, dtype=float)
        return smooth_step(s, self.ramp) - smooth_step(2.0 * s, self.ramp)

    def Phi_hat(self, s):
        return smooth_step(np.asarray(s, dtype=float), self.ramp)

    def band_profile(self, j: int):
        scale = 2.0 ** (-j)
        return lambda r: self.phi_hat(scale * r)

    @property
    def scales(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def profiles_csv(self, radii) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "phi_hat", "Phi_hat"])
        for r in np.asarray(radii, dtype=float):
            w.writerow([repr(float(r)), repr(float(self.phi_hat(r))), repr(float(self.Phi_hat(r)))])
        return buf.getvalue()


def positivity_floor(ramp: float = DEFAULT_RAMP, samples: int = 10_001) -> float:
    """Minimum of ``phi_hat`` sampled on [3/5, 5/3]."""
    s = np.linspace(3 / 5, 5 / 3, samples)
    return float(np.min(smooth_step(s, ramp) - smooth_step(2 * s, ramp)))


def build_bank(grid: GridSpec | None = None, ramp: float = DEFAULT_RAMP) -> FilterBank:
    """Bank whose band range covers every frequency of ``grid``.

    Bands with ``j < 0`` vanish for integer frequencies ``|m| >= 1``; the
    largest useful band satisfies ``2^(j-1) <= max |m|``.
    """
    j_max = 64
    if grid is not None:
        top = math.sqrt(grid.dim) * grid.nyquist
        j_max = int(math.ceil(math.log2(top))) + 1
    return FilterBank(ramp, 0, j_max, positivity_floor(ramp))


def band_project(f: SampledField, j: int, bank: FilterBank) -> SampledField:
    """``phi_{2^-j} * f``: multiply coefficients by ``phi_hat(2^-j |m|)``."""
    return filter_field(f, bank.band_profile(j))


def low_pass_project(f: SampledField, bank: FilterBank) -> SampledField:
    """``Phi * f``, the k = 0 term of inhomogeneous norms."""
    return filter_field(f, bank.Phi_hat)


def t_kj_apply(f: SampledField, k: int, j: int, ell: int, bank: FilterBank) -> SampledField:
    """Band ``j`` of the ball difference at radius ``2^-k``."""
    n = f.grid.dim
    sj, sk = 2.0 ** (-j), 2.0 ** (-k)

    def symbol(r):
        out = bank.phi_hat(sj * r)
        live = out != 0
        if np.any(live):
            out[live] *= A_ell(ell, n, sk * r[live])
        return out

    return filter_field(f, symbol)


def eta_profile(ell: int, n: int, s, bank: FilterBank, floor: float = 1e-14) -> np.ndarray:
    """``phi_hat(s) / A_l(s)`` on the band support, zero elsewhere."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    phi = bank.phi_hat(s)
    out = np.zeros_like(s)
    live = phi != 0
    if np.any(live):
        a = np.asarray(A_ell(ell, n, s[live]))
        if a.min() < floor:
            raise InvariantViolation(f"A_{ell} = {a.min():.3e} inside the band support")
        out[live] = phi[live] / a
    return out


def eta_project(f: SampledField, j: int, ell: int, bank: FilterBank) -> SampledField:
    """Apply ``eta(2^-j |m|)``; recovers band ``j`` from the ball difference at ``2^-j``."""
    scale = 2.0 ** (-j)
    return filter_field(f, lambda r: eta_profile(ell, f.grid.dim, scale * r, bank))


def partition_residual(bank: FilterBank, s, j_range=(-20, 20)) -> np.ndarray:
    """``|sum_j phi_hat(2^-j s) - 1|`` for the given band range."""
    s = np.asarray(s, dtype=float)
    total = sum(bank.phi_hat(2.0 ** (-j) * s) for j in range(j_range[0], j_range[1] + 1))
    return np.abs(total - 1.0)


def reconstruct(f: SampledField, bank: FilterBank) -> SampledField:
    """Low-pass band plus every band ``j >= 1`` the grid can see."""
    out = low_pass_project(f, bank)
    for j in range(1, bank.j_max + 1):
        out = out + band_project(f, j, bank)
    return out
