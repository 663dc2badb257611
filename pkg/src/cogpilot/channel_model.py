"""Spatially correlated ULA channels.

Steering vectors, angular-spread covariance matrices of the form
``D_a B D_a^H``, correlated Rayleigh draws, a multipath generator that acts
as an independent check of the covariance model, and the effective-rank
measure used to compare against the asymptotic rank law.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, InvalidParameterError, NumericalDomainError

__all__ = [
    "SpreadLaw",
    "AngularProfile",
    "CovarianceMatrix",
    "steering_vector",
    "spread_covariance",
    "sample_channel",
    "multipath_channel",
    "effective_rank_fraction",
    "asymptotic_rank_fraction",
    "covariance_sqrt",
]

# Relative eigenvalue slack below which a matrix still counts as PSD.
PSD_TOL = 1e-10


class SpreadLaw(str, enum.Enum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class AngularProfile:
    """Angular parameters of one user-to-base-station link.

    Parameters
    ----------
    theta : float
        Nominal angle of arrival in radians, in ``[-pi/2, pi/2]``.
    delta_omega : float
        Half-width of the spread in the spatial-frequency (omega) domain.
        Under the Gaussian law the standard deviation is ``sqrt(3)*delta_omega``.
    law : SpreadLaw
    spacing : float
        Element spacing in wavelengths.
    """

    theta: float
    delta_omega: float
    law: SpreadLaw = SpreadLaw.UNIFORM
    spacing: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "law", SpreadLaw(self.law))
        if not -math.pi / 2 - 1e-12 <= self.theta <= math.pi / 2 + 1e-12:
            raise InvalidParameterError(f"theta={self.theta} outside [-pi/2, pi/2]")
        if self.delta_omega < 0:
            raise InvalidParameterError(f"delta_omega must be >= 0, got {self.delta_omega}")
        if self.spacing <= 0:
            raise InvalidParameterError(f"spacing must be > 0, got {self.spacing}")

    @property
    def sigma_omega(self) -> float:
        return math.sqrt(3.0) * self.delta_omega

    @property
    def omega(self) -> float:
        """Nominal spatial frequency ``2*pi*d*sin(theta)``."""
        return 2.0 * math.pi * self.spacing * math.sin(self.theta)

    @classmethod
    def from_sector(cls, theta, half_width, law=SpreadLaw.UNIFORM, spacing=0.5):
        """Profile for paths arriving within ``theta +/- half_width`` (radians).

        The angular sector maps to the spatial-frequency interval
        ``2*pi*d*[sin(theta - hw), sin(theta + hw)]``; the returned profile is
        centred on that interval and its ``delta_omega`` is the interval's
        half-width. This is the parameterisation under which the normalized
        covariance rank approaches ``d*|sin(theta-hw) - sin(theta+hw)|``.
        """
        lo, hi = theta - half_width, theta + half_width
        if lo < -math.pi / 2 or hi > math.pi / 2:
            raise InvalidParameterError(
                f"sector [{lo:.4f}, {hi:.4f}] rad leaves the visible region"
            )
        s_lo, s_hi = math.sin(lo), math.sin(hi)
        center = math.asin(0.5 * (s_lo + s_hi))
        delta = math.pi * spacing * abs(s_hi - s_lo)
        return cls(theta=center, delta_omega=delta, law=law, spacing=spacing)


@dataclass(frozen=True)
class CovarianceMatrix:
    """Spatial covariance ``R`` together with its large-scale attenuation."""

    entries: np.ndarray
    attenuation: float = 1.0

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise InvalidDimensionError(f"covariance must be square, got {entries.shape}")
        if self.attenuation < 0:
            raise InvalidParameterError("attenuation must be nonnegative")
        object.__setattr__(self, "entries", entries)

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    @property
    def scaled(self) -> np.ndarray:
        """``attenuation * entries``, the covariance of the drawn channel."""
        return self.attenuation * self.entries

    def is_hermitian(self, tol=1e-12) -> bool:
        R = self.entries
        return bool(np.max(np.abs(R - R.conj().T), initial=0.0) <= tol)

    def is_psd(self, tol=PSD_TOL) -> bool:
        w = np.linalg.eigvalsh(0.5 * (self.entries + self.entries.conj().T))
        return bool(w.min() >= -tol * max(w.max(), 0.0))


def as_array(R) -> np.ndarray:
    """Plain complex matrix from a CovarianceMatrix (scaled) or array-like."""
    if isinstance(R, CovarianceMatrix):
        return R.scaled
    return np.asarray(R, dtype=complex)


def steering_vector(omega, M):
    """ULA response ``[1, e^{-j omega}, ..., e^{-j (M-1) omega}]``."""
    if M < 1:
        raise InvalidDimensionError(f"antenna count must be >= 1, got {M}")
    return np.exp(-1j * omega * np.arange(M))


def _spread_kernel(profile: AngularProfile, M: int) -> np.ndarray:
    lag = np.subtract.outer(np.arange(M), np.arange(M)).astype(float)
    if profile.law is SpreadLaw.UNIFORM:
        # np.sinc(x) = sin(pi x)/(pi x) with the limit 1 at x = 0
        return np.sinc(lag * profile.delta_omega / np.pi)
    return np.exp(-0.5 * (lag * profile.sigma_omega) ** 2)


def spread_covariance(profile: AngularProfile, M: int, attenuation=1.0) -> CovarianceMatrix:
    """Covariance ``D_a B D_a^H`` with ``D_a = diag(a(omega_bar))``.

    ``B`` is the characteristic function of the angular law evaluated at
    integer lags: a sinc for the uniform law, a Gaussian for the Gaussian
    law. The Gaussian kernel decays, ``exp(-(k*sigma)^2/2)``.
    """
    if M < 1:
        raise InvalidDimensionError(f"antenna count must be >= 1, got {M}")
    a = steering_vector(profile.omega, M)
    B = _spread_kernel(profile, M)
    R = a[:, None] * B * a.conj()[None, :]
    # exact Hermitian symmetry and unit diagonal regardless of rounding
    R = 0.5 * (R + R.conj().T)
    np.fill_diagonal(R, 1.0)
    return CovarianceMatrix(R, attenuation)


def covariance_sqrt(R) -> np.ndarray:
    """Square-root factor ``L`` with ``L L^H = R`` via eigendecomposition.

    Negative eigenvalues within the PSD tolerance are clipped to zero so
    rank-deficient covariances are handled.
    """
    R = as_array(R)
    Rh = 0.5 * (R + R.conj().T)
    w, V = np.linalg.eigh(Rh)
    wmax = max(w.max(initial=0.0), 0.0)
    if w.size and w.min() < -PSD_TOL * wmax - 1e-300:
        raise NumericalDomainError(
            f"covariance is not PSD: min eigenvalue {w.min():.3e}, max {wmax:.3e}"
        )
    return V * np.sqrt(np.clip(w, 0.0, None))


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def sample_channel(cov, rng, size=None):
    """Draw ``h ~ CN(0, attenuation * R)``.

    With ``size=None`` a single ``(M,)`` vector is returned, otherwise an
    array of shape ``(size, M)`` (or ``size + (M,)`` for tuple sizes).
    """
    L = covariance_sqrt(cov)
    M = L.shape[0]
    if size is None:
        return L @ _cn(rng, M)
    shape = (size,) if np.isscalar(size) else tuple(size)
    w = _cn(rng, shape + (M,))
    return w @ L.T


def _draw_omegas(profile: AngularProfile, rng, shape):
    if profile.law is SpreadLaw.UNIFORM:
        off = rng.uniform(-profile.delta_omega, profile.delta_omega, shape)
    else:
        off = profile.sigma_omega * rng.standard_normal(shape)
    return profile.omega + off


def multipath_channel(profile: AngularProfile, Q, rng, M, size=None, gains=None, omegas=None):
    """Sum of ``Q`` plane waves, ``h = sum_i gamma_i a(omega_i)``.

    Gains are i.i.d. ``CN(0, 1/Q)`` and path frequencies follow the profile's
    angular law around its nominal frequency, so ``E[h h^H]`` equals
    :func:`spread_covariance`. Explicit ``gains``/``omegas`` (length ``Q``)
    bypass the random draws.
    """
    if Q < 1:
        raise InvalidParameterError(f"path count must be >= 1, got {Q}")
    if M < 1:
        raise InvalidDimensionError(f"antenna count must be >= 1, got {M}")
    lead = () if size is None else ((size,) if np.isscalar(size) else tuple(size))
    if gains is None:
        gains = _cn(rng, lead + (Q,)) / math.sqrt(Q)
    else:
        gains = np.broadcast_to(np.asarray(gains, dtype=complex), lead + (Q,))
    if omegas is None:
        omegas = _draw_omegas(profile, rng, lead + (Q,))
    else:
        omegas = np.broadcast_to(np.asarray(omegas, dtype=float), lead + (Q,))
    phases = np.exp(-1j * omegas[..., :, None] * np.arange(M))  # (..., Q, M)
    return np.einsum("...q,...qm->...m", gains, phases)


def effective_rank_fraction(cov, energy_threshold=0.95) -> float:
    """Fraction of eigenvalues needed to hold ``energy_threshold`` of the trace."""
    if not 0.0 < energy_threshold < 1.0:
        raise InvalidParameterError("energy_threshold must lie in (0, 1)")
    R = as_array(cov)
    w = np.sort(np.clip(np.linalg.eigvalsh(0.5 * (R + R.conj().T)), 0.0, None))[::-1]
    M = w.size
    total = w.sum()
    if total <= 0:
        return 0.0
    cum = np.cumsum(w)
    k = int(np.searchsorted(cum, energy_threshold * total * (1.0 - 1e-12))) + 1
    return min(k, M) / M


def asymptotic_rank_fraction(spacing, theta, half_width) -> float:
    """Large-array normalized rank ``min{1, d |sin(theta-hw) - sin(theta+hw)|}``."""
    return min(1.0, abs(spacing * math.sin(theta - half_width) - spacing * math.sin(theta + half_width)))
