import numpy as np
import pytest

from cogpilot.channel_model import AngularProfile, spread_covariance


def random_profile(rng, law="uniform"):
    return AngularProfile(rng.uniform(-1.2, 1.2), rng.uniform(0.02, 0.6), law)


def random_cov(rng, M, law="uniform"):
    return spread_covariance(random_profile(rng, law), M).entries


def random_psd(rng, M, rank=None):
    rank = M if rank is None else rank
    A = rng.standard_normal((M, rank)) + 1j * rng.standard_normal((M, rank))
    return A @ A.conj().T


def random_basis(rng, M, r):
    A = rng.standard_normal((M, r)) + 1j * rng.standard_normal((M, r))
    Q, _ = np.linalg.qr(A)
    return Q


def cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
