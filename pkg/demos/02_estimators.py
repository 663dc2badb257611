"""Naive, coordinated and contamination-constrained estimators on one link.

A primary user shares its pilot with two cognitive users. We compare the
filters' analytic errors with Monte Carlo runs through the full training
chain, then sweep the contamination threshold of the constrained filter.

Run:
    python demos/02_estimators.py
"""
import math

import numpy as np

from cogpilot.channel_model import AngularProfile, sample_channel, spread_covariance
from cogpilot.errors import ConvergenceError
from cogpilot.estimators import (
    CmmseConfig,
    analytic_mse_linear,
    analytic_mse_primary,
    cmmse_filter,
    contamination_level,
    estimate,
    mmse_filter,
    nmmse_filter,
)
from cogpilot.pilot_signaling import make_pilot, matched_filter, received_uplink, training_matrix

rng = np.random.default_rng(1)
M, tau = 8, 4
snr_db = 10.0
noise_var = tau / 10 ** (snr_db / 10)

pu = spread_covariance(AngularProfile.from_sector(math.radians(-10), math.radians(15)), M)
cus = [spread_covariance(AngularProfile.from_sector(math.radians(a), math.radians(15)), M) for a in (5, 40)]
R_t = pu.entries
R_sum = sum(c.entries for c in cus)

S = training_matrix(make_pilot(tau), M)
n = 50_000
h = sample_channel(pu, rng, n)
g = [sample_channel(c, rng, n) for c in cus]
z = matched_filter(received_uplink(h, g, S, noise_var, rng), S)

print("filter   analytic   monte carlo")
for name, G in (("NMMSE", nmmse_filter(R_t, noise_var, tau)), ("MMSE", mmse_filter(R_t, R_sum, noise_var, tau))):
    emp = np.mean(np.sum(np.abs(estimate(G, z) - h) ** 2, axis=1))
    print(f"{name:6s}  {analytic_mse_linear(G, R_t, R_sum, noise_var, tau):9.4f}  {emp:12.4f}")
print(f"floor without contamination: {analytic_mse_primary(R_t, None, noise_var, tau):.4f}")

# tighter thresholds push the multiplier up and the error with it
print("\n   C_th    zeta1   contamination   MSE")
for cth in np.logspace(0, 2, 7):
    try:
        G = cmmse_filter(R_t, R_sum, noise_var, tau, CmmseConfig(cth, float(M)))
    except ConvergenceError as err:
        print(f"{cth:7.2f}  infeasible ({err})")
        continue
    mse = analytic_mse_linear(G, R_t, R_sum, noise_var, tau)
    print(f"{cth:7.2f}  {G.zeta1:7.4f}  {contamination_level(G, R_sum, tau):13.4f}  {mse:.4f}")
