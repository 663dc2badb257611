"""Angular spread, covariance structure and the large-array rank law.

Run:
    python demos/01_covariance_and_rank.py
"""
import math

import numpy as np

from cogpilot.channel_model import (
    AngularProfile,
    SpreadLaw,
    asymptotic_rank_fraction,
    effective_rank_fraction,
    multipath_channel,
    spread_covariance,
)

rng = np.random.default_rng(0)

# a user seen inside a 30 degree sector centred at 20 degrees
prof = AngularProfile.from_sector(math.radians(20), math.radians(15))
print(f"nominal spatial frequency {prof.omega:.3f} rad, half-width {prof.delta_omega:.3f} rad")

R = spread_covariance(prof, 8).entries
w = np.linalg.eigvalsh(R)[::-1]
print("eigenvalues at M = 8:", np.round(w, 3))

# the covariance is the second moment of a many-path channel
h = multipath_channel(prof, 50, rng, 8, size=50_000)
emp = h.T @ h.conj() / h.shape[0]
print(f"largest entry error of the multipath estimate: {np.max(np.abs(emp - R)):.4f}")

# Gaussian angular law, same width parameter
Rg = spread_covariance(AngularProfile(prof.theta, prof.delta_omega, SpreadLaw.GAUSSIAN), 8).entries
print("first column magnitude, uniform :", np.round(np.abs(R[:, 0]), 3))
print("first column magnitude, gaussian:", np.round(np.abs(Rg[:, 0]), 3))

# rank fraction of a large array against the asymptotic law
print("\n   d  theta  half-width  rank/M  law")
for d in (0.25, 0.5, 1.0):
    for hw_deg in (5, 15, 30):
        theta, hw = 0.0, math.radians(hw_deg)
        frac = effective_rank_fraction(spread_covariance(AngularProfile.from_sector(theta, hw, spacing=d), 64))
        print(f"{d:5.2f}  {0:5d}  {hw_deg:10d}  {frac:6.3f}  {asymptotic_rank_fraction(d, theta, hw):.3f}")
