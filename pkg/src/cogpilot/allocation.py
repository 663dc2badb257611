"""Pilot allocation: which cognitive users reuse the primary user's pilot.

Four allocators share one :class:`UserSet` description:

RPA
    uniformly random subset (baseline).
MPA
    greedy on the analytic MMSE errors, first protecting the primary base
    station, then ordering by the cognitive base station's sum error.
HPA
    thresholding the subspace-overlap metric against the primary user, then
    greedily picking mutually non-overlapping users at the cognitive BS.
UGPA
    user grouping by chordal distance between dominant eigenspaces.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .channel_model import AngularProfile, CovarianceMatrix, as_array, spread_covariance
from .errors import InvalidBasisError, InvalidParameterError, UndefinedMetricError
from .estimators import analytic_mse_cognitive, analytic_mse_primary

__all__ = [
    "PBS",
    "CBS",
    "Allocator",
    "UserSet",
    "Allocation",
    "GroupingResult",
    "overlap_metric",
    "aggregate_overlap",
    "chordal_distance",
    "dominant_eigenbasis",
    "energy_rank",
    "select_group_subspaces",
    "group_users",
    "build_grouping",
    "eta_primary",
    "eta_cognitive",
    "allocate_rpa",
    "allocate_mpa",
    "allocate_hpa",
    "allocate_ugpa",
    "exhaustive_eta_primary",
]

PBS = "PBS"
CBS = "CBS"
SIDE_BS = {"SP": PBS, "SS": CBS}


class Allocator(str, enum.Enum):
    RPA = "RPA"
    MPA = "MPA"
    HPA = "HPA"
    UGPA = "UGPA"


@dataclass
class UserSet:
    """Primary user, cognitive users and every user's covariance to each BS.

    ``covariances[(user, PBS)]`` is the covariance of that user's channel at
    the primary base station; ``(user, CBS)`` likewise at the cognitive one.
    """

    primary_user: int
    cognitive_users: list
    covariances: dict

    def __post_init__(self):
        for u in [self.primary_user, *self.cognitive_users]:
            for bs in (PBS, CBS):
                if (u, bs) not in self.covariances:
                    raise InvalidParameterError(f"user {u} has no covariance at {bs}")
        if len(set(self.cognitive_users)) != len(self.cognitive_users):
            raise InvalidParameterError("duplicate cognitive user ids")

    def R(self, user, bs) -> np.ndarray:
        return as_array(self.covariances[(user, bs)])

    @property
    def M(self) -> int:
        return self.R(self.primary_user, PBS).shape[0]


@dataclass
class Allocation:
    shared_set: list
    algorithm: Allocator
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.algorithm = Allocator(self.algorithm)
        if len(set(self.shared_set)) != len(self.shared_set):
            raise InvalidParameterError("shared_set contains duplicates")


@dataclass
class GroupingResult:
    """User groups per side; ``"SP"`` is the PBS side, ``"SS"`` the CBS side."""

    groups: dict
    group_subspaces: dict

    def group_of(self, user, side="SP") -> int:
        for g, members in self.groups[side].items():
            if user in members:
                return g
        raise KeyError(f"user {user} is not grouped on side {side}")


# -- metrics ---------------------------------------------------------------


def overlap_metric(R_a, R_b) -> float:
    """``tr(R_a R_b) / (tr(R_a) tr(R_b))``, in ``[0, 1]`` for PSD inputs."""
    A, B = as_array(R_a), as_array(R_b)
    ta, tb = np.real(np.trace(A)), np.real(np.trace(B))
    if ta <= 0 or tb <= 0:
        raise UndefinedMetricError("overlap metric needs covariances with positive trace")
    # tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij) for Hermitian B
    num = np.real(np.vdot(B, A))
    return float(min(max(num / (ta * tb), 0.0), 1.0))


def aggregate_overlap(R_p, interferers: Sequence) -> float:
    if len(interferers) == 0:
        return 0.0
    return overlap_metric(R_p, sum(as_array(R) for R in interferers))


def _check_orthonormal(U, tol=1e-8):
    U = np.asarray(U, dtype=complex)
    if U.ndim == 1:
        U = U[:, None]
    gram = U.conj().T @ U
    if np.max(np.abs(gram - np.eye(U.shape[1])), initial=0.0) > tol:
        raise InvalidBasisError("basis columns are not orthonormal")
    return U


def chordal_distance(U, V) -> float:
    """Squared Frobenius distance ``||U U^H - V V^H||_F^2`` between subspaces."""
    U, V = _check_orthonormal(U), _check_orthonormal(V)
    if U.shape != V.shape:
        raise InvalidBasisError(f"bases differ in shape: {U.shape} vs {V.shape}")
    D = U @ U.conj().T - V @ V.conj().T
    return float(np.real(np.vdot(D, D)))


def dominant_eigenbasis(cov, r) -> np.ndarray:
    """Orthonormal ``M x r`` basis of the ``r`` strongest eigenvectors.

    Ties in eigenvalue go to the lower eigen-index; each column's phase is
    fixed so its largest-magnitude entry is real and positive.
    """
    R = as_array(cov)
    M = R.shape[0]
    if not 1 <= r <= M:
        raise InvalidParameterError(f"rank must be in [1, {M}], got {r}")
    w, V = np.linalg.eigh(0.5 * (R + R.conj().T))
    order = np.lexsort((np.arange(M), -w))[:r]
    U = V[:, order]
    pivot = U[np.argmax(np.abs(U), axis=0), np.arange(r)]
    return U * (np.abs(pivot) / pivot)


def energy_rank(cov, energy=0.95) -> int:
    """Smallest number of eigenvalues holding ``energy`` of the trace."""
    R = as_array(cov)
    w = np.sort(np.clip(np.linalg.eigvalsh(0.5 * (R + R.conj().T)), 0, None))[::-1]
    if w.sum() <= 0:
        return 1
    cum = np.cumsum(w)
    return int(min(np.searchsorted(cum, energy * cum[-1] * (1 - 1e-12)) + 1, w.size))


# -- grouping --------------------------------------------------------------


def select_group_subspaces(candidate_profiles: Sequence[AngularProfile], G, r, M) -> list:
    """Greedy max-min chordal-distance choice of ``G`` group subspaces.

    Starts from the first candidate's dominant basis and repeatedly adds the
    candidate whose minimum distance to the chosen set is largest.
    """
    if G < 1:
        raise InvalidParameterError("group count must be >= 1")
    if len(candidate_profiles) < G:
        raise InvalidParameterError(f"{len(candidate_profiles)} candidates for {G} groups")
    bases = [dominant_eigenbasis(spread_covariance(p, M), r) for p in candidate_profiles]
    chosen = [0]
    mind = np.array([chordal_distance(bases[0], b) for b in bases])
    mind[0] = -np.inf
    while len(chosen) < G:
        nxt = int(np.argmax(mind))
        chosen.append(nxt)
        mind = np.minimum(mind, [chordal_distance(bases[nxt], b) for b in bases])
        mind[chosen] = -np.inf
    return [bases[i] for i in chosen]


def _assign(user_bases: Mapping, subspaces: Sequence) -> dict:
    groups = {g: [] for g in range(len(subspaces))}
    for uid, U in user_bases.items():
        d = [chordal_distance(U, Q) for Q in subspaces]
        groups[int(np.argmin(d))].append(uid)
    return groups


def group_users(user_bases: Mapping, group_subspaces) -> GroupingResult:
    """Assign each user to the group with the nearest subspace.

    ``user_bases`` maps user id to basis for a single side (stored as
    ``"SP"``) or maps side names to such dictionaries; ``group_subspaces`` is
    a list of bases or a side-keyed dictionary of lists, correspondingly.
    Distance ties go to the lowest group index.
    """
    if isinstance(group_subspaces, Mapping):
        sides = list(group_subspaces)
        bases_by_side = user_bases
        subspaces_by_side = dict(group_subspaces)
    else:
        sides = ["SP"]
        bases_by_side = {"SP": user_bases}
        subspaces_by_side = {"SP": list(group_subspaces)}
    groups = {s: _assign(bases_by_side[s], subspaces_by_side[s]) for s in sides}
    return GroupingResult(groups, subspaces_by_side)


def build_grouping(users: UserSet, candidate_profiles, G, r=None, r_max=None, energy=0.95) -> GroupingResult:
    """Group all users on both sides with a shared subspace rank.

    ``candidate_profiles`` is either one list used for both base stations or
    a ``{"SP": [...], "SS": [...]}`` mapping. When ``r`` is omitted it is
    the largest per-user rank capturing ``energy`` of the trace, capped at
    ``r_max`` (default ``M // 2``).
    """
    M = users.M
    everyone = [users.primary_user, *users.cognitive_users]
    if r is None:
        cap = max(1, M // 2) if r_max is None else r_max
        r = max(energy_rank(users.R(u, bs), energy) for u in everyone for bs in (PBS, CBS))
        r = max(1, min(r, cap))
    if not isinstance(candidate_profiles, Mapping):
        candidate_profiles = {"SP": candidate_profiles, "SS": candidate_profiles}
    subspaces = {s: select_group_subspaces(candidate_profiles[s], G, r, M) for s in ("SP", "SS")}
    bases = {
        s: {u: dominant_eigenbasis(users.R(u, SIDE_BS[s]), r) for u in everyone}
        for s in ("SP", "SS")
    }
    return group_users(bases, subspaces)


# -- allocation metrics ----------------------------------------------------


def eta_primary(users: UserSet, subset, noise_var, tau) -> float:
    """Primary MMSE error at the PBS when ``subset`` shares the pilot."""
    R_pp = users.R(users.primary_user, PBS)
    R_sum = sum((users.R(j, PBS) for j in subset), np.zeros_like(R_pp))
    return analytic_mse_primary(R_pp, R_sum, noise_var, tau)


def eta_cognitive(users: UserSet, subset, noise_var, tau) -> float:
    """Sum MMSE error of ``subset`` at the CBS, with the PU as interferer."""
    return analytic_mse_cognitive(
        [users.R(j, CBS) for j in subset], users.R(users.primary_user, CBS), noise_var, tau
    )


# -- allocators ------------------------------------------------------------


def _check_k(users, K):
    if K < 0 or K > len(users.cognitive_users):
        raise InvalidParameterError(
            f"reuse count {K} outside [0, {len(users.cognitive_users)}]"
        )


def allocate_rpa(users: UserSet, reuse_count, rng) -> Allocation:
    _check_k(users, reuse_count)
    idx = rng.choice(len(users.cognitive_users), size=reuse_count, replace=False)
    chosen = [users.cognitive_users[i] for i in sorted(idx)]
    return Allocation(chosen, Allocator.RPA, {})


def allocate_mpa(users: UserSet, reuse_count, zeta_th, noise_var, tau, pool_size=None) -> Allocation:
    """Greedy MSE-driven allocation.

    Phase 1 grows a candidate pool by repeatedly adding the cognitive user
    that least increases the primary error ``eta_p``; growth stops before
    ``eta_p`` would reach ``zeta_th``, when ``pool_size`` users are pooled
    (unbounded by default) or when no users remain. Phase 2 then greedily
    picks up to ``reuse_count`` pool members, each time the one whose
    addition least increases the cognitive sum error ``eta_s``.

    Because the MMSE error grows with added interference, every subset of
    the pool, and so the returned set, keeps ``eta_p < zeta_th``.
    """
    if reuse_count < 1:
        raise InvalidParameterError("MPA needs reuse_count >= 1")
    cap = len(users.cognitive_users) if pool_size is None else pool_size
    pool, eta_p_trace = [], []
    remaining = list(users.cognitive_users)
    base = eta_primary(users, [], noise_var, tau)
    while remaining and len(pool) < cap:
        scores = [eta_primary(users, pool + [j], noise_var, tau) for j in remaining]
        best = int(np.argmin(scores))
        if scores[best] >= zeta_th:
            break
        pool.append(remaining.pop(best))
        eta_p_trace.append(scores[best])

    chosen, eta_s_trace = [], []
    candidates = list(pool)
    while candidates and len(chosen) < reuse_count:
        scores = [eta_cognitive(users, chosen + [k], noise_var, tau) for k in candidates]
        best = int(np.argmin(scores))
        chosen.append(candidates.pop(best))
        eta_s_trace.append(scores[best])

    diag = {
        "eta_p_empty": base,
        "pool": pool,
        "eta_p_pool": eta_p_trace,
        "eta_s": eta_s_trace,
        "eta_p_final": eta_primary(users, chosen, noise_var, tau),
        "zeta_th": zeta_th,
    }
    return Allocation(chosen, Allocator.MPA, diag)


def allocate_hpa(users: UserSet, reuse_count, delta_p, noise_var=None, tau=None) -> Allocation:
    """Overlap-threshold allocation.

    The pool holds every cognitive user whose PBS overlap with the primary
    user is at most ``delta_p``. Users are then picked one at a time to
    minimize their aggregate CBS overlap with the primary user and the
    users already picked. ``noise_var`` and ``tau`` are accepted for a
    uniform allocator signature and unused.
    """
    if not 0.0 <= delta_p <= 1.0:
        raise InvalidParameterError("delta_p must lie in [0, 1]")
    R_pp = users.R(users.primary_user, PBS)
    delta = {j: overlap_metric(R_pp, users.R(j, PBS)) for j in users.cognitive_users}
    pool = [j for j in users.cognitive_users if delta[j] <= delta_p]

    R_ps = users.R(users.primary_user, CBS)
    chosen, trace = [], []
    candidates = list(pool)
    while candidates and len(chosen) < reuse_count:
        ref = [R_ps] + [users.R(i, CBS) for i in chosen]
        scores = [aggregate_overlap(users.R(k, CBS), ref) for k in candidates]
        best = int(np.argmin(scores))
        chosen.append(candidates.pop(best))
        trace.append(scores[best])
    diag = {"delta_p_values": delta, "pool": pool, "delta_s": trace}
    return Allocation(chosen, Allocator.HPA, diag)


def allocate_ugpa(users: UserSet, grouping: GroupingResult, reuse_count) -> Allocation:
    """Group-based allocation.

    Users sharing the primary user's PBS-side group are excluded. Among the
    rest, selection prefers (1) a CBS-side group not yet used and different
    from the primary user's CBS-side group, (2) a PBS-side group subspace
    far, in chordal distance, from the primary user's group, (3) the lower
    user id.
    """
    pu = users.primary_user
    g_star = grouping.group_of(pu, "SP")
    Q_sp = grouping.group_subspaces["SP"]
    dist = {g: chordal_distance(Q_sp[g], Q_sp[g_star]) for g in range(len(Q_sp))}
    has_ss = "SS" in grouping.groups
    pu_ss = grouping.group_of(pu, "SS") if has_ss else None

    candidates = [j for j in users.cognitive_users if grouping.group_of(j, "SP") != g_star]
    chosen, used_ss = [], {pu_ss}
    while candidates and len(chosen) < reuse_count:
        def key(j):
            ss = grouping.group_of(j, "SS") if has_ss else None
            return (ss in used_ss, -dist[grouping.group_of(j, "SP")], j)

        best = min(candidates, key=key)
        candidates.remove(best)
        chosen.append(best)
        if has_ss:
            used_ss.add(grouping.group_of(best, "SS"))
    diag = {"g_star": g_star, "group_distance": dist}
    return Allocation(chosen, Allocator.UGPA, diag)


def exhaustive_eta_primary(users: UserSet, K, noise_var, tau) -> dict:
    """``eta_p`` of every ``K``-subset of cognitive users (test oracle)."""
    from itertools import combinations

    return {
        subset: eta_primary(users, list(subset), noise_var, tau)
        for subset in combinations(users.cognitive_users, K)
    }
