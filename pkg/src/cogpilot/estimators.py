"""MMSE-family channel estimators in the matched-filter domain.

Every filter here is an ``M x M`` matrix acting on ``z = S^H y / P_t``,
whose noise covariance is ``(sigma^2/P_t) I``. The ``tau`` arguments are the
pilot energy ``P_t``; with unit-power symbols this is the pilot length.

Three estimators are provided:

* NMMSE ignores interference: ``R (R + sigma^2/tau I)^-1``.
* MMSE accounts for the pilot-sharing users: ``R (R + R_sum + sigma^2/tau I)^-1``.
* CMMSE (primary-cognitive) limits the contamination leaking through the
  filter: ``gamma R (R + zeta1 R_sum + zeta2 I)^-1`` with ``zeta1`` found by
  a bracketed bisection and ``gamma`` normalizing the filter power.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .channel_model import as_array
from .errors import ConvergenceError, InvalidDimensionError, InvalidParameterError

__all__ = [
    "EstimatorKind",
    "EstimatorFilter",
    "CmmseConfig",
    "nmmse_filter",
    "mmse_filter",
    "cmmse_family",
    "cmmse_filter",
    "cmmse_at",
    "estimate",
    "analytic_mse_primary",
    "analytic_mse_cognitive",
    "analytic_mse_cmmse",
    "analytic_mse_linear",
    "contamination_level",
    "contamination_level_full",
]


class EstimatorKind(str, enum.Enum):
    NMMSE = "NMMSE"
    MMSE = "MMSE"
    CMMSE = "CMMSE"


@dataclass(frozen=True)
class EstimatorFilter:
    """A linear estimator ``h_hat = G z / gamma``.

    For NMMSE and MMSE ``gamma`` is 1 and the multipliers are unused.
    ``zeta2_clamped`` records that the noise multiplier hit its positive
    floor during the CMMSE search.
    """

    matrix: np.ndarray
    kind: EstimatorKind
    gamma: float = 1.0
    zeta1: float = 0.0
    zeta2: float = 0.0
    zeta2_clamped: bool = False
    iterations: int = 0

    @property
    def direction(self) -> np.ndarray:
        """The filter with the power scaling removed (``G / gamma``)."""
        return self.matrix / self.gamma


@dataclass(frozen=True)
class CmmseConfig:
    """Parameters of the contamination-constrained estimator.

    Parameters
    ----------
    contamination_threshold : float
        Largest tolerated contamination power ``C_th`` at the filter output.
    filter_power_budget : float
        ``P`` in ``tr(G G^H) <= P``; the returned filter meets it with equality.
    multiplier_tolerance : float
        Relative slack allowed between the achieved contamination and
        ``C_th`` when the constraint is active.
    max_bisection_iters : int
    """

    contamination_threshold: float
    filter_power_budget: float
    multiplier_tolerance: float = 1e-6
    max_bisection_iters: int = 200

    def __post_init__(self):
        for name in ("contamination_threshold", "filter_power_budget", "multiplier_tolerance"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")
        if self.max_bisection_iters < 1:
            raise InvalidParameterError("max_bisection_iters must be positive")


def _hermitian(R):
    R = as_array(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got shape {R.shape}")
    return 0.5 * (R + R.conj().T)


def _pair(R_t, R_sum):
    R_t = _hermitian(R_t)
    R_sum = np.zeros_like(R_t) if R_sum is None else _hermitian(R_sum)
    if R_sum.shape != R_t.shape:
        raise InvalidDimensionError(f"shape mismatch {R_t.shape} vs {R_sum.shape}")
    return R_t, R_sum


def _right_solve(R_t, A):
    """``R_t A^{-1}`` for Hermitian ``R_t`` and Hermitian positive definite ``A``."""
    return np.linalg.solve(A, R_t).conj().T


def _check_noise(noise_var, tau):
    if not noise_var > 0:
        raise InvalidParameterError(f"noise_var must be > 0, got {noise_var}")
    if not tau > 0:
        raise InvalidParameterError(f"tau must be > 0, got {tau}")
    return noise_var / tau


def nmmse_filter(R_target, noise_var, tau) -> EstimatorFilter:
    R_t = _hermitian(R_target)
    eps = _check_noise(noise_var, tau)
    G = _right_solve(R_t, R_t + eps * np.eye(R_t.shape[0]))
    return EstimatorFilter(G, EstimatorKind.NMMSE)


def mmse_filter(R_target, R_interference_sum, noise_var, tau) -> EstimatorFilter:
    R_t, R_s = _pair(R_target, R_interference_sum)
    eps = _check_noise(noise_var, tau)
    G = _right_solve(R_t, R_t + R_s + eps * np.eye(R_t.shape[0]))
    return EstimatorFilter(G, EstimatorKind.MMSE)


def cmmse_family(R_target, R_interference_sum, zeta1, zeta2) -> np.ndarray:
    """Unscaled member ``R (R + zeta1 R_sum + zeta2 I)^-1`` of the CMMSE family."""
    R_t, R_s = _pair(R_target, R_interference_sum)
    return _right_solve(R_t, R_t + zeta1 * R_s + zeta2 * np.eye(R_t.shape[0]))


def contamination_level(G, R_interference_sum, tau) -> float:
    """Interference power passed by ``G``: ``tau * tr(G R_sum G^H)``.

    Equal to ``tr(G_y S R_sum S^H G_y^H)`` for the equivalent full-block
    filter ``G_y = G S^H / sqrt(P_t)``, which also has ``tr(G_y G_y^H) =
    tr(G G^H)``.
    """
    G = G.matrix if isinstance(G, EstimatorFilter) else np.asarray(G, dtype=complex)
    R_s = _hermitian(R_interference_sum)
    return float(tau * np.real(np.trace(G @ R_s @ G.conj().T)))


def contamination_level_full(G, R_interference_sum, S) -> float:
    """Contamination evaluated on the full ``M*tau`` block (reference form)."""
    G = G.matrix if isinstance(G, EstimatorFilter) else np.asarray(G, dtype=complex)
    block = S.block
    G_y = G @ block.conj().T / math.sqrt(S.total_power)
    inner = block @ _hermitian(R_interference_sum) @ block.conj().T
    return float(np.real(np.trace(G_y @ inner @ G_y.conj().T)))


def _cmmse_point(R_t, R_s, noise_var, tau, cfg, z1):
    M = R_t.shape[0]
    P = cfg.filter_power_budget
    floor = 1e-8 * float(np.real(np.trace(R_t))) / M
    raw = (M * noise_var - 2.0 * cfg.contamination_threshold * z1) / (noise_var * tau * P)
    z2, clamped = (raw, False) if raw >= floor else (floor, True)
    G0 = cmmse_family(R_t, R_s, z1, z2)
    gamma = math.sqrt(P / float(np.real(np.trace(G0 @ G0.conj().T))))
    G = gamma * G0
    return G, gamma, z2, clamped, contamination_level(G, R_s, tau)


def cmmse_at(R_target, R_interference_sum, noise_var, tau, cfg: CmmseConfig, zeta1) -> EstimatorFilter:
    """Power-normalized CMMSE filter at a given multiplier ``zeta1``.

    ``zeta2`` follows from ``zeta1`` and ``cfg`` exactly as in
    :func:`cmmse_filter`; no feasibility check is made.
    """
    R_t, R_s = _pair(R_target, R_interference_sum)
    _check_noise(noise_var, tau)
    if zeta1 < 0:
        raise InvalidParameterError("zeta1 must be >= 0")
    if float(np.real(np.trace(R_t))) <= 0:
        return EstimatorFilter(np.zeros_like(R_t), EstimatorKind.CMMSE)
    G, gamma, z2, clamped, _ = _cmmse_point(R_t, R_s, noise_var, tau, cfg, zeta1)
    return EstimatorFilter(G, EstimatorKind.CMMSE, gamma, float(zeta1), z2, clamped)


# multipliers 2**(k/4) tried when the unconstrained filter is infeasible
SCAN_EXPONENTS = np.arange(-64 * 4, 64 * 4 + 1) / 4.0


def cmmse_filter(R_target, R_interference_sum, noise_var, tau, cfg: CmmseConfig) -> EstimatorFilter:
    """Contamination-constrained estimator.

    Searches the smallest ``zeta1 >= 0`` such that the power-normalized filter
    ``G = gamma R (R + zeta1 R_sum + zeta2(zeta1) I)^-1`` passes at most
    ``C_th`` of contamination, with
    ``zeta2 = (M sigma^2 - 2 C_th zeta1) / (sigma^2 tau P)`` and
    ``gamma = sqrt(P / tr(G0 G0^H))``. If ``zeta1 = 0`` is already feasible
    the constraint is inactive and that filter is returned.

    Otherwise the contamination is not monotone in ``zeta1`` (it can dip
    once ``zeta2`` reaches its floor), so the multipliers ``2**(k/4)`` for
    ``k/4 = -64..64`` are tried in increasing order. This contains the
    doubling bracket from 1 and also finds feasible windows below it. If no
    scanned point is feasible, the scan minimum is refined by a bounded
    scalar minimization between its neighbours. The first feasible point and
    the infeasible point before it bracket the boundary, and bisection runs
    until the constraint is tight to ``cfg.multiplier_tolerance``.

    Raises
    ------
    ConvergenceError
        When no feasible multiplier is found or the bisection runs out of
        iterations. ``err.bracket`` holds the final ``(lo, hi)``; in the
        infeasible case both ends are the multiplier with the least
        contamination found.
    """
    R_t, R_s = _pair(R_target, R_interference_sum)
    _check_noise(noise_var, tau)
    C = cfg.contamination_threshold
    tol = cfg.multiplier_tolerance
    if float(np.real(np.trace(R_t))) <= 0:
        return EstimatorFilter(np.zeros_like(R_t), EstimatorKind.CMMSE)

    def evaluate(z1):
        return _cmmse_point(R_t, R_s, noise_var, tau, cfg, z1)

    def result(z1, ev, iters):
        G, gamma, z2, clamped, _ = ev
        return EstimatorFilter(G, EstimatorKind.CMMSE, gamma, z1, z2, clamped, iters)

    ev0 = evaluate(0.0)
    if ev0[4] <= C:
        return result(0.0, ev0, 0)

    grid = np.concatenate([[0.0], np.exp2(SCAN_EXPONENTS)])
    lo, hi, ev_hi = 0.0, None, None
    values = [ev0[4]]
    clamped_seen = False
    steps = 0
    for i in range(1, grid.size):
        ev = evaluate(grid[i])
        clamped_seen |= ev[3]
        steps += 1
        if ev[4] <= C:
            hi, ev_hi = float(grid[i]), ev
            break
        values.append(ev[4])
        lo = float(grid[i])
    if hi is None:
        i = int(np.argmin(values))
        z_best, c_best = float(grid[i]), values[i]
        if 0 < i < grid.size - 1:
            # a dip narrower than the scan step: refine in log(zeta1)
            res = minimize_scalar(
                lambda t: evaluate(math.exp(t))[4],
                bounds=(math.log(grid[i - 1]) if i > 1 else math.log(grid[1]) - 1.0, math.log(grid[i + 1])),
                method="bounded",
                options={"xatol": 1e-6},
            )
            steps += int(res.nfev)
            if res.fun < c_best:
                z_best, c_best = math.exp(res.x), float(res.fun)
        if c_best > C:
            raise ConvergenceError(
                f"contamination stays above C_th={C:.6g}; least value {c_best:.6g} at zeta1={z_best:.6g}",
                bracket=(z_best, z_best),
            )
        lo, hi = float(grid[i - 1]), z_best
        ev_hi = evaluate(hi)
        clamped_seen |= ev_hi[3]

    iters = 0
    while ev_hi[4] < C * (1.0 - tol):
        if iters >= cfg.max_bisection_iters or hi - lo <= 4 * np.finfo(float).eps * hi:
            raise ConvergenceError(
                f"multiplier search did not tighten the constraint after {iters} iterations "
                f"(contamination {ev_hi[4]:.9g}, C_th={C:.9g})",
                bracket=(lo, hi),
            )
        mid = 0.5 * (lo + hi)
        ev_mid = evaluate(mid)
        clamped_seen |= ev_mid[3]
        if ev_mid[4] <= C:
            hi, ev_hi = mid, ev_mid
        else:
            lo = mid
        iters += 1
    out = result(hi, ev_hi, steps + iters)
    return replace(out, zeta2_clamped=out.zeta2_clamped or clamped_seen)


def estimate(G: EstimatorFilter, z) -> np.ndarray:
    """``h_hat = G z / gamma`` for ``z`` of shape ``(..., M)``."""
    z = np.asarray(z, dtype=complex)
    if z.shape[-1] != G.matrix.shape[1]:
        raise InvalidDimensionError(f"observation length {z.shape[-1]} != {G.matrix.shape[1]}")
    return (z @ G.matrix.T) / G.gamma


def _mmse_error(R_t, R_s, reg):
    A = R_t + R_s + reg * np.eye(R_t.shape[0])
    X = np.linalg.solve(A, R_t)
    return float(np.real(np.trace(R_t) - np.trace(R_t @ X)))


def analytic_mse_primary(R_target, R_interference_sum, noise_var, tau) -> float:
    """``tr(R - R^2 (R + R_sum + sigma^2/tau I)^-1)``, the MMSE error."""
    R_t, R_s = _pair(R_target, R_interference_sum)
    return _mmse_error(R_t, R_s, _check_noise(noise_var, tau))


def analytic_mse_cognitive(targets, R_PS, noise_var, tau) -> float:
    """Sum of the MMSE errors of all cognitive users sharing the pilot.

    Each user ``j`` sees ``R_PS + sum_{l != j} R_l`` as interference.
    """
    targets = [_hermitian(R) for R in targets]
    if not targets:
        return 0.0
    eps = _check_noise(noise_var, tau)
    R_ps = np.zeros_like(targets[0]) if R_PS is None else _hermitian(R_PS)
    A = R_ps + sum(targets) + eps * np.eye(R_ps.shape[0])
    total = 0.0
    for R_j in targets:
        if R_j.shape != A.shape:
            raise InvalidDimensionError("all covariances must share one dimension")
        total += float(np.real(np.trace(R_j) - np.trace(R_j @ np.linalg.solve(A, R_j))))
    return total


def analytic_mse_cmmse(R_target, R_interference_sum, zeta_star, noise_var, tau) -> float:
    """``tr(R - R^2 (R + zeta* R_sum + sigma^2/tau I)^-1)``."""
    if zeta_star < 0:
        raise InvalidParameterError("zeta_star must be >= 0")
    R_t, R_s = _pair(R_target, R_interference_sum)
    return _mmse_error(R_t, zeta_star * R_s, _check_noise(noise_var, tau))


def analytic_mse_linear(G, R_target, R_interference_sum, noise_var, tau) -> float:
    """Exact MSE of any linear estimator ``h_hat = W z``.

    ``tr((I-W) R (I-W)^H + W (R_sum + sigma^2/tau I) W^H)``, where ``W`` is
    ``G.direction`` for an :class:`EstimatorFilter` or ``G`` itself.
    """
    W = G.direction if isinstance(G, EstimatorFilter) else np.asarray(G, dtype=complex)
    R_t, R_s = _pair(R_target, R_interference_sum)
    eps = _check_noise(noise_var, tau)
    E = np.eye(R_t.shape[0]) - W
    val = E @ R_t @ E.conj().T + W @ (R_s + eps * np.eye(R_t.shape[0])) @ W.conj().T
    return float(np.real(np.trace(val)))
