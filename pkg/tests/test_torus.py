import numpy as np
import pytest
from hypothesis import given, strategies as st

from ballnorm.torus import (GridSpec, SampledField, SpectralField, filter_field, forward_transform,
                            inverse_transform, lp_norm, radial_keys)


def direct_transform(values):
    """O(N^2) reference for the 1-D forward transform."""
    N = values.size
    x = 2 * np.pi * np.arange(N) / N
    m = np.fft.fftfreq(N, 1.0 / N)
    return np.exp(-1j * np.outer(m, x)) @ values / N


@pytest.mark.parametrize("dim,N", [(0, 8), (4, 8), (1, 12), (1, 4), (2, 6)])
def test_grid_rejects_bad_shapes(dim, N):
    with pytest.raises(ValueError):
        GridSpec(dim, N)


def test_frequencies_are_integers_in_half_open_range():
    g = GridSpec(2, 16)
    for m in g.frequencies():
        assert m.dtype.kind == "i"
        assert m.min() == -8 and m.max() == 7
    assert g.squared_magnitude()[3, 4] == 25


def test_field_length_checked():
    with pytest.raises(ValueError):
        SampledField(GridSpec(1, 8), np.zeros(9))


def test_constant_and_single_mode():
    g = GridSpec(1, 32)
    F = forward_transform(SampledField(g, np.ones(32)))
    expected = np.zeros(32)
    expected[0] = 1
    np.testing.assert_allclose(F.coefficients, expected, atol=1e-15)
    F = forward_transform(SampledField.from_function(g, lambda x: np.cos(3 * x)))
    assert F.coefficient(3) == pytest.approx(0.5, abs=1e-15)
    assert F.coefficient(-3) == pytest.approx(0.5, abs=1e-15)
    assert np.sum(np.abs(F.coefficients) > 1e-14) == 2


def test_inverse_of_simple_spectra():
    g = GridSpec(1, 32)
    coef = np.zeros(32, complex)
    coef[0] = 1
    np.testing.assert_allclose(inverse_transform(SpectralField(g, coef, real=True)).values, 1.0)
    coef = np.zeros(32, complex)
    coef[1] = coef[-1] = 0.5
    x = g.coordinates()[0]
    np.testing.assert_allclose(inverse_transform(SpectralField(g, coef, real=True)).values, np.cos(x),
                               atol=1e-15)


def test_forward_matches_direct_sum(rng):
    g = GridSpec(1, 32)
    v = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    F = forward_transform(SampledField(g, v))
    np.testing.assert_allclose(F.coefficients, direct_transform(v), atol=1e-13)


def test_inverse_matches_direct_sum(rng):
    g = GridSpec(1, 32)
    coef = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    x = 2 * np.pi * np.arange(32) / 32
    m = np.fft.fftfreq(32, 1 / 32)
    ref = np.exp(1j * np.outer(x, m)) @ coef
    out = inverse_transform(SpectralField(g, coef)).values
    assert np.linalg.norm(out - ref) <= 1e-12 * np.linalg.norm(ref)


@given(st.sampled_from([(1, 64), (2, 16), (3, 8)]), st.integers(0, 2**31 - 1))
def test_round_trip_and_parseval(shape, seed):
    g = GridSpec(*shape)
    rng = np.random.default_rng(seed)
    f = SampledField(g, rng.standard_normal(g.shape))
    F = forward_transform(f)
    back = inverse_transform(F)
    assert back.is_real
    assert np.linalg.norm(back.values - f.values) <= 1e-12 * np.linalg.norm(f.values)
    lhs = (2 * np.pi) ** g.dim * np.sum(np.abs(F.coefficients) ** 2)
    rhs = np.sum(f.values**2) * g.cell_volume
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_real_flag_catches_imaginary_leak():
    g = GridSpec(1, 16)
    coef = np.zeros(16, complex)
    coef[1] = 1.0  # not conjugate-symmetric
    with pytest.raises(ArithmeticError):
        inverse_transform(SpectralField(g, coef, real=True))


@pytest.mark.parametrize("p", [1.0, 0.5, -2])
def test_lp_norm_rejects_small_p(p):
    with pytest.raises(ValueError):
        lp_norm(SampledField(GridSpec(1, 8), np.ones(8)), p)


def test_lp_norm_values():
    g = GridSpec(1, 64)
    one = SampledField(g, np.ones(64))
    assert lp_norm(one, 2) == pytest.approx(np.sqrt(2 * np.pi))
    assert lp_norm(one, np.inf) == 1.0
    cos = SampledField.from_function(g, np.cos)
    assert lp_norm(cos, 2) == pytest.approx(np.sqrt(np.pi), rel=1e-14)


def test_radial_keys_cover_grid():
    g = GridSpec(2, 16)
    keys, inv = radial_keys(g)
    np.testing.assert_array_equal(keys[inv], g.squared_magnitude())


def test_filter_rejects_non_finite_symbol():
    g = GridSpec(1, 16)
    f = SampledField(g, np.ones(16))
    with pytest.raises(ValueError), np.errstate(divide="ignore"):
        filter_field(f, lambda r: 1.0 / r)


def test_shift_is_periodic_translation():
    g = GridSpec(1, 16)
    f = SampledField.from_function(g, np.sin)
    np.testing.assert_allclose(f.shifted(4).values, np.sin(g.coordinates()[0] - np.pi / 2), atol=1e-15)
