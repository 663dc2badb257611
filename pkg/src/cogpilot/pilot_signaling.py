"""Uplink training: pilots, the block training matrix, contaminated
observations and their matched-filter compression.

All channel arguments may carry leading batch dimensions, i.e. shape
``(..., M)``; the corresponding received blocks then have shape
``(..., M*tau)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidDimensionError, InvalidParameterError

__all__ = [
    "PilotSequence",
    "TrainingMatrix",
    "ReceivedBlock",
    "make_pilot",
    "training_matrix",
    "received_uplink",
    "matched_filter",
]


@dataclass(frozen=True)
class PilotSequence:
    symbols: np.ndarray
    total_power: float

    @property
    def tau(self) -> int:
        return self.symbols.shape[0]


@dataclass(frozen=True)
class TrainingMatrix:
    """``S = s kron I_M`` of shape ``(M*tau, M)``; ``S^H S = P_t I_M``."""

    block: np.ndarray
    total_power: float

    @property
    def M(self) -> int:
        return self.block.shape[1]

    @property
    def tau(self) -> int:
        return self.block.shape[0] // self.block.shape[1]


@dataclass(frozen=True)
class ReceivedBlock:
    samples: np.ndarray
    noise_var: float


def make_pilot(tau, total_power=None, kind="constant") -> PilotSequence:
    """Pilot of length ``tau`` with every symbol at power ``total_power/tau``.

    ``kind="constant"`` gives equal real symbols; ``kind="zadoff-chu"`` gives
    a unit-modulus chirp ``exp(-j pi k^2 / tau)`` scaled to the same power.
    ``total_power`` defaults to ``tau`` (unit-power symbols).
    """
    if tau < 1:
        raise InvalidParameterError(f"pilot length must be >= 1, got {tau}")
    if total_power is None:
        total_power = float(tau)
    if total_power <= 0:
        raise InvalidParameterError(f"total pilot power must be > 0, got {total_power}")
    amp = math.sqrt(total_power / tau)
    k = np.arange(tau)
    if kind == "constant":
        symbols = np.full(tau, amp, dtype=complex)
    elif kind in ("zadoff-chu", "zc"):
        symbols = amp * np.exp(-1j * np.pi * k * k / tau)
    else:
        raise InvalidParameterError(f"unknown pilot kind {kind!r}")
    return PilotSequence(symbols, float(total_power))


def training_matrix(s: PilotSequence, M) -> TrainingMatrix:
    if M < 1:
        raise InvalidDimensionError(f"antenna count must be >= 1, got {M}")
    block = np.kron(s.symbols.reshape(-1, 1), np.eye(M))
    return TrainingMatrix(block, s.total_power)


def _check_channel(h, M, what):
    h = np.asarray(h, dtype=complex)
    if h.shape[-1:] != (M,):
        raise InvalidDimensionError(f"{what} has trailing dimension {h.shape[-1:]}, expected ({M},)")
    return h


def received_uplink(target, contaminators, S: TrainingMatrix, noise_var, rng) -> ReceivedBlock:
    """``y = S (target + sum(contaminators)) + n`` with ``n ~ CN(0, noise_var I)``."""
    if noise_var < 0:
        raise InvalidParameterError("noise_var must be >= 0")
    M = S.M
    total = _check_channel(target, M, "target").copy()
    for i, h in enumerate(contaminators):
        total = total + _check_channel(h, M, f"contaminator {i}")
    y = total @ S.block.T
    if noise_var > 0:
        n = rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)
        y = y + math.sqrt(noise_var / 2.0) * n
    return ReceivedBlock(y, float(noise_var))


def matched_filter(y, S: TrainingMatrix) -> np.ndarray:
    """Compress ``y`` to ``z = S^H y / P_t``.

    For ``y = S h + n`` this gives ``z = h + n'`` with
    ``n' ~ CN(0, sigma^2/P_t I_M)``, a sufficient statistic for ``h``.
    """
    samples = y.samples if isinstance(y, ReceivedBlock) else np.asarray(y, dtype=complex)
    if samples.shape[-1] != S.block.shape[0]:
        raise InvalidDimensionError(
            f"received block length {samples.shape[-1]} != M*tau = {S.block.shape[0]}"
        )
    return samples @ S.block.conj() / S.total_power
