"""Subspace grouping behind the group-based allocator.

Run:
    python demos/04_grouping.py
"""
import numpy as np

from cogpilot.allocation import allocate_hpa, allocate_ugpa, build_grouping, chordal_distance, overlap_metric
from cogpilot.experiments import (
    ScenarioConfig,
    ugpa_candidates,
    ugpa_group_count,
    build_scenario,
    stream,
)

cfg = ScenarioConfig(M=10, num_cognitive_users=8, reuse_count=3)
sc = build_scenario(cfg, stream(7, 1, 0))
users = sc.users
print("PBS angles:", np.round(sc.angles_deg["PBS"], 1))
print("CBS angles:", np.round(sc.angles_deg["CBS"], 1))

g = build_grouping(users, ugpa_candidates(cfg), ugpa_group_count(cfg))
Q = g.group_subspaces["SP"]
print(f"\n{len(Q)} groups of rank {Q[0].shape[1]}; pairwise chordal distances:")
print(np.round([[chordal_distance(a, b) for b in Q] for a in Q], 2))
for side in ("SP", "SS"):
    print(side, g.groups[side])

R_pp = users.R(0, "PBS")
print("\noverlap with the primary user at the PBS:")
print({j: round(overlap_metric(R_pp, users.R(j, "PBS")), 3) for j in users.cognitive_users})

print("\nUGPA picks", allocate_ugpa(users, g, cfg.reuse_count).shared_set)
print("HPA picks ", allocate_hpa(users, cfg.reuse_count, cfg.hpa_delta_p).shared_set)
