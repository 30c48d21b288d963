"""Acceptance criteria, one test and one verdict line each."""
import math

import mpmath
import numpy as np
import pytest

from ballnorm.averaging import AverageSpec, ball_difference, polynomial_reproduction_check, \
    verify_central_difference_identity
from ballnorm.filters import band_project, build_bank, eta_project, partition_residual, reconstruct, t_kj_apply
from ballnorm.harness import TestFunctionSpec, decay_slope, equivalence_study, generate, random_band_limited, \
    standard_family
from ballnorm.multipliers import (A_ell, A_ell_body, BodySpec, QuadratureRule, ball_hat,
                                  body_ratio_and_derivative_check, gamma_n, m_ell, trig_identity_residual)
from ballnorm.norms import NormParams, discrete_hardy_check, hardy_batch, maximal_control_check
from ballnorm.torus import GridSpec, SampledField, lp_norm

GL64 = QuadratureRule.gauss_legendre(64)


def test_c01_multiplier_identity(acceptance):
    s = np.linspace(0, 50, 10_000)
    worst = max(np.max(np.abs(m_ell(ell, n, s, GL64) - 1 + A_ell(ell, n, s, GL64)))
                for ell in (1, 2, 3) for n in (1, 2, 3))
    acceptance("C1", "m_l = 1 - A_l, l,n in {1,2,3}, s in [0,50], 64 nodes", worst <= 1e-10,
               f"max residual {worst:.2e} <= 1e-10")


def test_c02_closed_form_oracles(acceptance):
    s = np.linspace(0, 50, 10_001)[1:]
    e1 = np.max(np.abs(ball_hat(1, s) - np.sin(s) / s))
    with mpmath.workdps(40):
        ref3 = np.array([float(3 * (mpmath.sin(mpmath.mpf(v)) - mpmath.mpf(v) * mpmath.cos(mpmath.mpf(v)))
                               / mpmath.mpf(v) ** 3) for v in s])
    e3 = np.max(np.abs(ball_hat(3, s) - ref3))
    eg = max(abs(gamma_n(1) - 1), abs(gamma_n(2) - 4 / math.pi), abs(gamma_n(3) - 1.5))
    ok = e1 <= 1e-12 and e3 <= 1e-12 and eg <= 1e-13
    acceptance("C2", "ball transform closed forms and normalisers", ok,
               f"n=1 {e1:.2e}, n=3 {e3:.2e} (<= 1e-12); gamma {eg:.2e} (<= 1e-13)")


def test_c03_trig_identity(acceptance):
    s = np.linspace(0, 8 * np.pi, 10_000)
    worst = max(np.max(trig_identity_residual(ell, s)) for ell in range(1, 6))
    acceptance("C3", "power-of-sine identity, l = 1..5", worst <= 1e-10, f"max residual {worst:.2e} <= 1e-10")


def test_c04_central_difference_identity(acceptance):
    rng = np.random.default_rng(4)
    g = GridSpec(1, 64)
    worst = 0.0
    for ell in (1, 2, 3):
        for _ in range(10):
            f = random_band_limited(g, 16, rng)
            probes = [tuple(rng.integers(0, 64, 1)) for _ in range(16)]
            r = verify_central_difference_identity(f, AverageSpec(ell, 0.4), probes)
            worst = max(worst, r / lp_norm(f, np.inf))
    acceptance("C4", "ball difference as a central difference of radial means", worst <= 1e-9,
               f"max residual / sup norm {worst:.2e} <= 1e-9")


def test_c05_polynomial_annihilation(acceptance):
    t = np.array([0.05, 0.1, 0.2, 0.4])
    low, slope_err = 0.0, 0.0
    for ell in (1, 2, 3):
        for n in (1, 2):
            rep = polynomial_reproduction_check(2 * ell, ell, n, t)
            low = max(low, rep.max_low_degree_residual)
            slope_err = max(slope_err, abs(rep.top_slope - 2 * ell))
    quartic = polynomial_reproduction_check(4, 2, 1, t).residuals[(4,)]
    rel = np.max(np.abs(quartic / (0.8 * t**4) - 1))
    ok = low <= 1e-9 and slope_err <= 0.05 and rel <= 1e-9
    acceptance("C5", "polynomial reproduction below degree 2l", ok,
               f"low-degree {low:.2e} (<= 1e-9), slope error {slope_err:.2e} (<= 0.05), "
               f"x^4 vs 4t^4/5 {rel:.2e} (<= 1e-9)")


def test_c06_filter_bank(acceptance):
    bank = build_bank()
    s = 2.0 ** np.linspace(-18, 18, 20_001)
    part = partition_residual(bank, s, (-22, 22)).max()
    rng = np.random.default_rng(6)
    recon = 0.0
    for shape in ((1, 512), (2, 64), (3, 16)):
        g = GridSpec(*shape)
        f = SampledField(g, rng.standard_normal(g.shape))
        recon = max(recon, np.max(np.abs(reconstruct(f, build_bank(g)).values - f.values)))
    ok = part <= 1e-14 and recon <= 1e-12 and bank.c0 >= 0.05
    acceptance("C6", "filter bank partition, reconstruction, positivity", ok,
               f"partition {part:.2e} (<= 1e-14), reconstruction {recon:.2e} (<= 1e-12), c0 {bank.c0:.3f} (>= 0.05)")


def test_c07_band_decomposition(acceptance):
    rng = np.random.default_rng(7)
    g = GridSpec(1, 256)
    bank = build_bank(g)
    dec = rep = 0.0
    for ell in (1, 2, 3):
        for _ in range(3):
            f = random_band_limited(g, 64, rng)
            f = SampledField(g, f.values - f.values.mean())
            for k in range(0, 6):
                diff = ball_difference(f, AverageSpec(ell, 2.0**-k))
                total = sum(t_kj_apply(f, k, j, ell, bank).values for j in bank.scales)
                dec = max(dec, np.max(np.abs(diff.values - total)))
                rec = eta_project(diff, k, ell, bank).values
                rep = max(rep, np.max(np.abs(rec - band_project(f, k, bank).values)))
    ok = dec <= 1e-10 and rep <= 1e-10
    acceptance("C7", "band decomposition and band recovery from ball differences", ok,
               f"decomposition {dec:.2e}, recovery {rep:.2e} (<= 1e-10)")


def test_c08_slope_recovery(acceptance):
    g = GridSpec(1, 4096)
    cases = [(1, a) for a in (0.5, 1.0, 1.5)] + [(2, a) for a in (0.5, 1.5, 2.5, 3.5)]
    worst = 0.0
    for ell, alpha in cases:
        f = generate(TestFunctionSpec("weierstrass", g, alpha=alpha))
        for p in (2.0, np.inf):
            worst = max(worst, abs(decay_slope(f, ell, p).slope + min(alpha, 2 * ell)))
    f3 = generate(TestFunctionSpec("weierstrass", g, alpha=3.0))
    s1, s2 = decay_slope(f3, 1, np.inf).slope, decay_slope(f3, 2, np.inf).slope
    split = abs(s1 + 2) <= 0.1 and abs(s2 + 3) <= 0.1
    ok = worst <= 0.1 and split
    acceptance("C8", "decay slope -min(alpha, 2l) on Weierstrass fields, N=4096", ok,
               f"max slope error {worst:.3f} (<= 0.1); alpha=3: l=1 {s1:.3f}, l=2 {s2:.3f}")


def test_c09_norm_equivalence(acceptance):
    family = standard_family(GridSpec(1, 1024))
    worst, lo, hi, valid = 0.0, np.inf, 0.0, True
    for space in ("besov", "tl"):
        for alpha in (0.7, 1.9, 3.1):
            for p in (2.0, np.inf):
                for q in (2.0, np.inf):
                    for hom in (True, False):
                        study = equivalence_study(family, NormParams(space, alpha, p, q, 2, "ball", hom))
                        valid = valid and study.valid
                        worst = max(worst, study.drift)
                        b = study.bracket(1024)
                        lo, hi = min(lo, b[0]), max(hi, b[1])
    ok = valid and worst < 0.1
    acceptance("C9", "ball / classical ratio bracket, N=1024 vs 2048", ok,
               f"ratios in [{lo:.3g}, {hi:.3g}], max bracket drift {worst:.2e} (< 0.1)")


def test_c10_maximal_control(acceptance):
    ratios = []
    for alpha in (0.5, 1.0, 1.5):
        c = [maximal_control_check(generate(TestFunctionSpec("weierstrass", GridSpec(1, N), alpha, 5)), 1,
                                   scales=range(2, 7)).max_constant for N in (1024, 2048)]
        ratios.append(c[1] / c[0])
    ok = all(0.5 <= r <= 2 for r in ratios)
    acceptance("C10", "band size controlled by maximal function of ball difference", ok,
               f"constant ratio N=2048/N=1024 in [{min(ratios):.4f}, {max(ratios):.4f}] (within [1/2, 2])")


def test_c11_discrete_hardy(acceptance):
    ok, drift = True, 0.0
    for beta in (0.5, 1.0, 2.0):
        for q in (0.5, 1.0, 2.0, np.inf):
            a, b = hardy_batch(beta, q, 1000, 0), hardy_batch(beta, q, 1000, 1)
            ok = ok and a.all_hold and b.all_hold
            for x, y in ((a.max_ratio_upper, b.max_ratio_upper), (a.max_ratio_lower, b.max_ratio_lower)):
                drift = max(drift, abs(x - y) / max(x, y))
    delta = discrete_hardy_check([1.0], 1.0, 1.0).ratio_upper
    ok = ok and drift <= 0.2 and delta == 2.0
    acceptance("C11", "discrete Hardy inequalities", ok,
               f"all batches hold, seed drift {drift:.3f} (<= 0.2), delta ratio {float(delta)!r} (== 2)")


def test_c12_cube_body(acceptance):
    radii = np.linspace(0.05, 4, 40)
    lo, drift = np.inf, 0.0
    for n in (1, 2):
        for ell in (1, 2, 3):
            rep = body_ratio_and_derivative_check(ell, BodySpec("cube", n), radii)
            lo = min(lo, rep.ratio_min)
            drift = max(drift, rep.grad_constant_drift)
    x = np.linspace(-4, 4, 801)
    same = max(np.max(np.abs(A_ell_body(ell, BodySpec("cube", 1), x[:, None]) - A_ell(ell, 1, np.abs(x))))
               for ell in (1, 2, 3))
    ok = lo > 0 and same <= 1e-10 and drift <= 1e-3
    acceptance("C12", "cube body: ratio bracket, 1-D agreement, gradient bound", ok,
               f"min ratio {lo:.3e} (> 0), cube vs ball {same:.2e} (<= 1e-10), "
               f"gradient constant drift under step halving {drift:.1e} (<= 1e-3)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
