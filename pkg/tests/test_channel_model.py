import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cogpilot.channel_model import (
    AngularProfile,
    CovarianceMatrix,
    SpreadLaw,
    asymptotic_rank_fraction,
    covariance_sqrt,
    effective_rank_fraction,
    multipath_channel,
    sample_channel,
    spread_covariance,
    steering_vector,
)
from cogpilot.errors import InvalidDimensionError, InvalidParameterError, NumericalDomainError


def test_steering_vector_broadside_is_all_ones():
    np.testing.assert_allclose(steering_vector(0.0, 4), np.ones(4))


def test_steering_vector_phase_progression():
    a = steering_vector(np.pi / 2, 4)
    np.testing.assert_allclose(a, [1, -1j, -1, 1j], atol=1e-15)


def test_steering_vector_rejects_empty_array():
    with pytest.raises(InvalidDimensionError):
        steering_vector(0.1, 0)


def test_zero_spread_gives_rank_one_outer_product():
    p = AngularProfile(0.3, 0.0)
    R = spread_covariance(p, 6).entries
    a = steering_vector(p.omega, 6)
    np.testing.assert_allclose(R, np.outer(a, a.conj()), atol=1e-12)
    assert np.linalg.matrix_rank(R, tol=1e-9) == 1


def test_single_antenna_covariance_is_one():
    R = spread_covariance(AngularProfile(0.2, 0.4), 1).entries
    assert R.shape == (1, 1) and R[0, 0] == 1


def test_uniform_kernel_is_sinc():
    d = 0.3
    R = spread_covariance(AngularProfile(0.0, d), 5).entries
    k = np.arange(1, 5)
    np.testing.assert_allclose(R[k, 0], np.sin(k * d) / (k * d), rtol=1e-12)


def test_gaussian_kernel_decays():
    d = 0.3
    p = AngularProfile(0.0, d, SpreadLaw.GAUSSIAN)
    R = spread_covariance(p, 5).entries
    k = np.arange(5)
    np.testing.assert_allclose(R[k, 0], np.exp(-0.5 * (k * math.sqrt(3) * d) ** 2), rtol=1e-12)
    assert np.all(np.diff(np.abs(R[:, 0])) < 0)


def test_attenuation_scales_drawn_covariance():
    cov = spread_covariance(AngularProfile(0.1, 0.2), 3, attenuation=0.25)
    np.testing.assert_allclose(cov.scaled, 0.25 * cov.entries)


@pytest.mark.parametrize("bad", [dict(theta=2.0, delta_omega=0.1), dict(theta=0.0, delta_omega=-0.1),
                                 dict(theta=0.0, delta_omega=0.1, spacing=0.0)])
def test_profile_validation(bad):
    with pytest.raises(InvalidParameterError):
        AngularProfile(**bad)


def test_from_sector_maps_to_spatial_frequency_interval():
    theta, hw, d = 0.4, 0.2, 0.5
    p = AngularProfile.from_sector(theta, hw, spacing=d)
    lo = 2 * np.pi * d * np.sin(theta - hw)
    hi = 2 * np.pi * d * np.sin(theta + hw)
    assert p.omega == pytest.approx(0.5 * (lo + hi))
    assert p.delta_omega == pytest.approx(0.5 * (hi - lo))


def test_from_sector_rejects_invisible_sector():
    with pytest.raises(InvalidParameterError):
        AngularProfile.from_sector(1.4, 0.3)


def test_covariance_matrix_rejects_non_square():
    with pytest.raises(InvalidDimensionError):
        CovarianceMatrix(np.zeros((2, 3)))


@settings(max_examples=60, deadline=None)
@given(
    theta=st.floats(-1.5, 1.5),
    delta=st.floats(0.0, 3.0),
    M=st.integers(1, 24),
    law=st.sampled_from(list(SpreadLaw)),
    spacing=st.floats(0.1, 2.0),
)
def test_covariance_invariants(theta, delta, M, law, spacing):
    cov = spread_covariance(AngularProfile(theta, delta, law, spacing), M)
    R = cov.entries
    assert cov.is_hermitian()
    assert cov.is_psd()
    np.testing.assert_allclose(np.diag(R), 1.0)
    assert np.real(np.trace(R)) == pytest.approx(M)


def test_covariance_sqrt_reconstructs_rank_deficient(rng):
    R = spread_covariance(AngularProfile(0.5, 0.0), 5)
    L = covariance_sqrt(R)
    np.testing.assert_allclose(L @ L.conj().T, R.entries, atol=1e-12)


def test_covariance_sqrt_rejects_indefinite():
    with pytest.raises(NumericalDomainError):
        covariance_sqrt(np.diag([1.0, -0.5]))


def test_sample_channel_shapes(rng):
    cov = spread_covariance(AngularProfile(0.1, 0.3), 4)
    assert sample_channel(cov, rng).shape == (4,)
    assert sample_channel(cov, rng, 7).shape == (7, 4)
    assert sample_channel(cov, rng, (2, 3)).shape == (2, 3, 4)


def test_sample_channel_empirical_covariance(rng):
    cov = spread_covariance(AngularProfile(-0.3, 0.25), 4, attenuation=2.0)
    h = sample_channel(cov, rng, 200_000)
    emp = h.T @ h.conj() / h.shape[0]
    assert np.max(np.abs(emp - cov.scaled)) < 0.03


def test_multipath_explicit_paths_are_exact():
    g = np.array([1.0, 0.5j])
    w = np.array([0.2, -0.7])
    h = multipath_channel(AngularProfile(0.0, 0.1), 2, None, 3, gains=g, omegas=w)
    expected = g[0] * steering_vector(0.2, 3) + g[1] * steering_vector(-0.7, 3)
    np.testing.assert_allclose(h, expected)


@pytest.mark.parametrize("law", list(SpreadLaw))
def test_multipath_matches_covariance(rng, law):
    p = AngularProfile(0.35, 0.3, law)
    h = multipath_channel(p, 30, rng, 5, size=40_000)
    emp = h.T @ h.conj() / h.shape[0]
    assert np.max(np.abs(emp - spread_covariance(p, 5).entries)) < 0.05


def test_multipath_validation(rng):
    with pytest.raises(InvalidParameterError):
        multipath_channel(AngularProfile(0, 0.1), 0, rng, 4)


def test_effective_rank_fraction_extremes():
    assert effective_rank_fraction(np.eye(8)) == 1.0
    R = spread_covariance(AngularProfile(0.2, 0.0), 8)
    assert effective_rank_fraction(R) == pytest.approx(1 / 8)


def test_effective_rank_fraction_validates_threshold():
    with pytest.raises(InvalidParameterError):
        effective_rank_fraction(np.eye(3), 1.0)


def test_asymptotic_rank_fraction_values():
    assert asymptotic_rank_fraction(0.5, 0.0, np.pi / 6) == pytest.approx(0.5)
    assert asymptotic_rank_fraction(2.0, 0.0, np.pi / 4) == 1.0


def test_rank_fraction_approaches_asymptote_large_array():
    theta, hw, d = 0.2, 0.25, 0.5
    p = AngularProfile.from_sector(theta, hw, spacing=d)
    frac = effective_rank_fraction(spread_covariance(p, 128))
    assert abs(frac - asymptotic_rank_fraction(d, theta, hw)) < 0.08
