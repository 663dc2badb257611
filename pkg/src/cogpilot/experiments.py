"""Monte Carlo pipeline behind the MSE-versus-SNR curves.

A *drop* is one random user geometry. For every SNR point and drop the
configured allocators pick their pilot-sharing sets, every
(allocator, estimator) pair is evaluated on the same channel and noise
draws, and the normalized squared errors

    primary:   ||h_hat_PP - h_PP||^2 / ||h_PP||^2
    cognitive: sum_j ||h_hat_SS,j - h_SS,j||^2 / sum_j ||h_SS,j||^2

are averaged in the linear domain before conversion to dB.

Random streams are keyed by ``(seed, purpose, drop, block)`` through
:class:`numpy.random.SeedSequence`, so results do not depend on how units
of work are spread over worker processes.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np

from . import __version__
from .allocation import (
    CBS,
    PBS,
    Allocation,
    Allocator,
    UserSet,
    allocate_hpa,
    allocate_mpa,
    allocate_rpa,
    allocate_ugpa,
    build_grouping,
    eta_primary,
)
from .channel_model import AngularProfile, SpreadLaw, covariance_sqrt, spread_covariance
from .errors import ConfigurationError, ConvergenceError, InvalidParameterError
from .estimators import (
    CmmseConfig,
    EstimatorKind,
    analytic_mse_cognitive,
    analytic_mse_linear,
    analytic_mse_primary,
    cmmse_at,
    cmmse_filter,
    estimate,
    mmse_filter,
    nmmse_filter,
)
from .pilot_signaling import make_pilot, matched_filter, received_uplink, training_matrix

__all__ = [
    "ScenarioConfig",
    "Scenario",
    "TrialResult",
    "MseRow",
    "MseReport",
    "CSV_COLUMNS",
    "build_scenario",
    "noise_variance",
    "allocate",
    "design_filters",
    "run_trials",
    "run_trial",
    "sweep",
    "write_report",
    "read_report",
    "report_to_csv",
    "oracle_check",
    "validate_scenario",
    "stream",
    "ugpa_candidates",
    "ugpa_group_count",
]

TRIAL_BLOCK = 1000
DEFAULT_CTH = 0.1

# stream purposes
_SCENARIO, _RPA, _TRIALS = 1, 2, 3

CSV_COLUMNS = (
    "snr_db",
    "allocator",
    "estimator",
    "primary_mse_db",
    "cognitive_mse_db",
    "trials",
    "stderr_primary",
    "stderr_cognitive",
)


def stream(seed, *key) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))


@dataclass
class ScenarioConfig:
    """Everything a sweep depends on; JSON config files use these names.

    Geometry: users sit on overlapping angular sectors of
    ``sector_width_deg`` whose consecutive centres are
    ``sector_width_deg - sector_overlap_deg`` apart, wrapped inside a
    ``serving_sector_deg`` sector. ``pbs_angles_deg`` / ``cbs_angles_deg``
    (primary user first) replace the random placement.

    ``mpa_zeta_th_db`` sets the MPA threshold this many dB above the
    interference-free primary MSE. ``trials`` counts trials per drop and
    SNR point.
    """

    M: int = 10
    num_cognitive_users: int = 20
    reuse_count: int = 3
    tau: int = 4
    total_pilot_power: Optional[float] = None
    pilot_kind: str = "constant"
    spread_law: str = "uniform"
    spacing: float = 0.5
    sector_width_deg: float = 30.0
    sector_overlap_deg: float = 6.0
    serving_sector_deg: float = 120.0
    snr_grid_db: list = field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0])
    trials: int = 10_000
    drops: int = 1
    fixed_drop: bool = False
    seed: int = 0
    estimators: list = field(default_factory=lambda: ["MMSE"])
    allocators: list = field(default_factory=lambda: ["RPA", "MPA", "HPA", "UGPA"])
    cmmse: Optional[CmmseConfig] = None
    mpa_zeta_th_db: float = 10.0
    mpa_pool_size: Optional[int] = None
    hpa_delta_p: float = 0.05
    ugpa_groups: Optional[int] = None
    ugpa_rank_max: Optional[int] = None
    pbs_angles_deg: Optional[list] = None
    cbs_angles_deg: Optional[list] = None
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.cmmse, dict):
            self.cmmse = CmmseConfig(**self.cmmse)
        self.snr_grid_db = [float(s) for s in self.snr_grid_db]
        self.estimators = [EstimatorKind(e).value for e in self.estimators]
        self.allocators = [Allocator(a).value for a in self.allocators]
        for name in ("M", "num_cognitive_users", "tau", "trials", "drops", "workers"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be a positive integer")
        if self.reuse_count < 0 or self.reuse_count > self.num_cognitive_users:
            raise ConfigurationError("reuse_count must lie in [0, num_cognitive_users]")
        if not self.snr_grid_db:
            raise ConfigurationError("snr_grid_db must not be empty")
        if not self.estimators or not self.allocators:
            raise ConfigurationError("need at least one estimator and one allocator")
        SpreadLaw(self.spread_law)

    @property
    def pilot_power(self) -> float:
        return float(self.tau if self.total_pilot_power is None else self.total_pilot_power)

    @property
    def cmmse_config(self) -> CmmseConfig:
        if self.cmmse is not None:
            return self.cmmse
        return CmmseConfig(DEFAULT_CTH, float(self.M))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigurationError):
                raise
            raise ConfigurationError(str(exc)) from exc


@dataclass
class Scenario:
    users: UserSet
    config: ScenarioConfig
    angles_deg: dict
    profiles: dict

    def __post_init__(self):
        self.pilot = make_pilot(self.config.tau, self.config.pilot_power, self.config.pilot_kind)
        self.S = training_matrix(self.pilot, self.config.M)
        self._sqrt = {}

    def sqrt_factor(self, user, bs):
        key = (user, bs)
        if key not in self._sqrt:
            self._sqrt[key] = covariance_sqrt(self.users.covariances[key])
        return self._sqrt[key]


def _sector_angles(cfg: ScenarioConfig, n_users, rng):
    width, overlap, serving = cfg.sector_width_deg, cfg.sector_overlap_deg, cfg.serving_sector_deg
    if width <= 0 or overlap < 0 or overlap > width:
        raise ConfigurationError(
            f"need 0 <= sector_overlap_deg <= sector_width_deg and width > 0 (got {overlap}, {width})"
        )
    if width > serving or serving / 2 + width / 2 >= 90:
        raise ConfigurationError(
            f"sectors of {width} deg cannot be packed into a {serving} deg serving sector"
        )
    step = width - overlap
    offset = rng.uniform(0.0, serving)
    slot = rng.permutation(n_users)
    return -serving / 2 + np.mod(offset + step * slot, serving)


def build_scenario(cfg: ScenarioConfig, rng) -> Scenario:
    """Random drop of one primary user (id 0) and ``C`` cognitive users (ids 1..C)."""
    n = cfg.num_cognitive_users + 1
    angles = {}
    for side, explicit in ((PBS, cfg.pbs_angles_deg), (CBS, cfg.cbs_angles_deg)):
        drawn = _sector_angles(cfg, n, rng)
        if explicit is not None:
            if len(explicit) != n:
                raise ConfigurationError(f"{side} angle list needs {n} entries, got {len(explicit)}")
            drawn = np.asarray(explicit, dtype=float)
        angles[side] = drawn
    half = math.radians(cfg.sector_width_deg) / 2
    covs, profiles = {}, {}
    for side in (PBS, CBS):
        for u in range(n):
            theta = math.radians(angles[side][u])
            try:
                prof = AngularProfile.from_sector(theta, half, cfg.spread_law, cfg.spacing)
            except InvalidParameterError as exc:
                raise ConfigurationError(str(exc)) from exc
            profiles[(u, side)] = prof
            covs[(u, side)] = spread_covariance(prof, cfg.M)
    users = UserSet(0, list(range(1, n)), covs)
    return Scenario(users, cfg, angles, profiles)


def noise_variance(cfg: ScenarioConfig, snr_db) -> float:
    """Per-sample noise power for a cell-edge SNR ``P_t / sigma^2`` (unit edge gain)."""
    return cfg.pilot_power / 10.0 ** (snr_db / 10.0)


def ugpa_candidates(cfg: ScenarioConfig):
    """Sector profiles on a fine grid over the serving sector (grouping candidates)."""
    half = math.radians(cfg.sector_width_deg) / 2
    lim = cfg.serving_sector_deg / 2
    centres = np.linspace(-lim, lim, 4 * max(cfg.num_cognitive_users, 8) + 1)
    return [AngularProfile.from_sector(math.radians(c), half, cfg.spread_law, cfg.spacing) for c in centres]


def ugpa_group_count(cfg: ScenarioConfig) -> int:
    """Configured group count, else one group per sector step across the serving sector."""
    if cfg.ugpa_groups is not None:
        return cfg.ugpa_groups
    step = cfg.sector_width_deg - cfg.sector_overlap_deg
    if step <= 0:
        return 1
    return max(1, int(round(cfg.serving_sector_deg / step)))


def allocate(scenario: Scenario, allocator, snr_db, drop=0, grouping=None) -> Allocation:
    """Run one configured allocator on a scenario."""
    cfg = scenario.config
    users = scenario.users
    K = cfg.reuse_count
    sigma2 = noise_variance(cfg, snr_db)
    P_t = cfg.pilot_power
    allocator = Allocator(allocator)
    if allocator is Allocator.RPA:
        return allocate_rpa(users, K, stream(cfg.seed, _RPA, drop))
    if allocator is Allocator.MPA:
        if K == 0:
            return Allocation([], Allocator.MPA, {})
        floor = eta_primary(users, [], sigma2, P_t)
        zeta_th = floor * 10.0 ** (cfg.mpa_zeta_th_db / 10.0)
        return allocate_mpa(users, K, zeta_th, sigma2, P_t, pool_size=cfg.mpa_pool_size)
    if allocator is Allocator.HPA:
        return allocate_hpa(users, K, cfg.hpa_delta_p)
    if grouping is None:
        grouping = build_grouping(
            users, ugpa_candidates(cfg), ugpa_group_count(cfg), r_max=cfg.ugpa_rank_max
        )
    return allocate_ugpa(users, grouping, K)


def design_filters(scenario: Scenario, allocation: Allocation, kind, noise_var, cmmse_cfg=None):
    """Filters for the PU at the PBS and for each sharing CU at the CBS.

    CMMSE applies at the primary base station only; the cognitive base
    station uses the coordinated MMSE filter for that estimator kind. When
    the contamination threshold cannot be met, the CMMSE filter at the upper
    bracket end reported by the search (for an unreachable threshold, the
    least-contaminating multiplier tried) is used and marked
    ``iterations = -1``.
    """
    users = scenario.users
    P_t = scenario.config.pilot_power
    kind = EstimatorKind(kind)
    A = list(allocation.shared_set)
    pu = users.primary_user
    R_pp = users.R(pu, PBS)
    R_sum = sum((users.R(j, PBS) for j in A), np.zeros_like(R_pp))
    if kind is EstimatorKind.NMMSE:
        g_p = nmmse_filter(R_pp, noise_var, P_t)
    elif kind is EstimatorKind.MMSE:
        g_p = mmse_filter(R_pp, R_sum, noise_var, P_t)
    else:
        ccfg = cmmse_cfg or scenario.config.cmmse_config
        try:
            g_p = cmmse_filter(R_pp, R_sum, noise_var, P_t, ccfg)
        except ConvergenceError as exc:
            g_p = dataclasses.replace(
                cmmse_at(R_pp, R_sum, noise_var, P_t, ccfg, exc.bracket[1]), iterations=-1
            )
    g_c = {}
    R_ps = users.R(pu, CBS)
    for j in A:
        R_j = users.R(j, CBS)
        if kind is EstimatorKind.NMMSE:
            g_c[j] = nmmse_filter(R_j, noise_var, P_t)
        else:
            others = R_ps + sum((users.R(l, CBS) for l in A if l != j), np.zeros_like(R_j))
            g_c[j] = mmse_filter(R_j, others, noise_var, P_t)
    return g_p, g_c


@dataclass
class TrialResult:
    """Squared errors and channel energies; leading axis indexes trials."""

    primary_sq_error: np.ndarray
    primary_norm_sq: np.ndarray
    cognitive_sq_errors: np.ndarray
    cognitive_norms_sq: np.ndarray
    users: list

    @property
    def primary_ratio(self):
        return self.primary_sq_error / self.primary_norm_sq

    @property
    def cognitive_ratio(self):
        return self.cognitive_sq_errors.sum(axis=-1) / self.cognitive_norms_sq.sum(axis=-1)


def _draw_block(scenario: Scenario, noise_var, rng, n):
    """Channels for every user at both BSs plus the noise, in a fixed order."""
    users = scenario.users
    M, L = scenario.config.M, scenario.S.block.shape[0]
    everyone = [users.primary_user, *users.cognitive_users]
    h = {}
    for bs in (PBS, CBS):
        for u in everyone:
            w = (rng.standard_normal((n, M)) + 1j * rng.standard_normal((n, M))) / math.sqrt(2)
            h[(u, bs)] = w @ scenario.sqrt_factor(u, bs).T
    scale = math.sqrt(noise_var / 2)
    noise = {
        bs: scale * (rng.standard_normal((n, L)) + 1j * rng.standard_normal((n, L)))
        for bs in (PBS, CBS)
    }
    return h, noise


def _evaluate(scenario: Scenario, allocation: Allocation, filters, h, noise) -> TrialResult:
    users = scenario.users
    S = scenario.S
    pu = users.primary_user
    A = list(allocation.shared_set)
    g_p, g_c = filters

    y_p = received_uplink(h[(pu, PBS)], [h[(j, PBS)] for j in A], S, 0.0, None).samples + noise[PBS]
    e_p = estimate(g_p, matched_filter(y_p, S)) - h[(pu, PBS)]
    p_err = np.sum(np.abs(e_p) ** 2, axis=-1)
    p_norm = np.sum(np.abs(h[(pu, PBS)]) ** 2, axis=-1)

    n = p_err.shape[0]
    c_err = np.zeros((n, len(A)))
    c_norm = np.zeros((n, len(A)))
    if A:
        y_c = received_uplink(h[(pu, CBS)], [h[(j, CBS)] for j in A], S, 0.0, None).samples + noise[CBS]
        z_c = matched_filter(y_c, S)
        for i, j in enumerate(A):
            e = estimate(g_c[j], z_c) - h[(j, CBS)]
            c_err[:, i] = np.sum(np.abs(e) ** 2, axis=-1)
            c_norm[:, i] = np.sum(np.abs(h[(j, CBS)]) ** 2, axis=-1)
    return TrialResult(p_err, p_norm, c_err, c_norm, A)


def run_trials(scenario, allocation, estimator_kind, snr_db, rng, n, cmmse_cfg=None) -> TrialResult:
    """``n`` independent trials of training, estimation and error measurement."""
    noise_var = noise_variance(scenario.config, snr_db)
    filters = design_filters(scenario, allocation, estimator_kind, noise_var, cmmse_cfg)
    h, noise = _draw_block(scenario, noise_var, rng, n)
    return _evaluate(scenario, allocation, filters, h, noise)


def run_trial(scenario, allocation, estimator_kind, snr_db, rng, cmmse_cfg=None) -> TrialResult:
    """Single trial; arrays lose the trial axis."""
    r = run_trials(scenario, allocation, estimator_kind, snr_db, rng, 1, cmmse_cfg)
    return TrialResult(r.primary_sq_error[0], r.primary_norm_sq[0], r.cognitive_sq_errors[0],
                       r.cognitive_norms_sq[0], r.users)


# -- sweep -----------------------------------------------------------------


@dataclass
class MseRow:
    snr_db: float
    allocator: str
    estimator: str
    primary_mse_db: float
    cognitive_mse_db: float
    trials: int
    stderr_primary: float
    stderr_cognitive: float


@dataclass
class MseReport:
    rows: list
    provenance: dict

    def row(self, snr_db, allocator, estimator) -> MseRow:
        for r in self.rows:
            if r.snr_db == snr_db and r.allocator == allocator and r.estimator == estimator:
                return r
        raise KeyError((snr_db, allocator, estimator))


def _pairs(cfg):
    return list(product(cfg.allocators, cfg.estimators))


def _run_unit(args):
    """All blocks of one (snr index, drop): per-pair sums of normalized errors."""
    cfg, s_idx, drop = args
    snr = cfg.snr_grid_db[s_idx]
    scenario = build_scenario(cfg, stream(cfg.seed, _SCENARIO, 0 if cfg.fixed_drop else drop))
    noise_var = noise_variance(cfg, snr)
    grouping = None
    plans = []
    allocs = {}
    for a in cfg.allocators:
        if a == Allocator.UGPA.value and grouping is None:
            grouping = build_grouping(
                scenario.users, ugpa_candidates(cfg), ugpa_group_count(cfg), r_max=cfg.ugpa_rank_max
            )
        allocs[a] = allocate(scenario, a, snr, drop, grouping)
    infeasible = 0
    for a, e in _pairs(cfg):
        filt = design_filters(scenario, allocs[a], e, noise_var)
        infeasible += filt[0].iterations == -1
        plans.append((allocs[a], filt))

    acc = np.zeros((len(plans), 6))
    done = 0
    block = 0
    while done < cfg.trials:
        n = min(TRIAL_BLOCK, cfg.trials - done)
        h, noise = _draw_block(scenario, noise_var, stream(cfg.seed, _TRIALS, drop, block), n)
        for k, (alloc, filt) in enumerate(plans):
            res = _evaluate(scenario, alloc, filt, h, noise)
            rp = res.primary_ratio
            acc[k, 0] += n
            acc[k, 1] += rp.sum()
            acc[k, 2] += (rp * rp).sum()
            if res.users:
                rc = res.cognitive_ratio
                acc[k, 3] += n
                acc[k, 4] += rc.sum()
                acc[k, 5] += (rc * rc).sum()
        done += n
        block += 1
    return acc, infeasible


def _summarize(per_drop):
    """Linear mean, its standard error, and both in dB, from per-drop sums."""
    per_drop = np.asarray(per_drop)
    n, s, ss = per_drop[:, 0], per_drop[:, 1], per_drop[:, 2]
    N = n.sum()
    if N == 0:
        return float("nan"), float("nan"), 0
    mean = s.sum() / N
    used = n > 0
    if used.sum() > 1:
        means = s[used] / n[used]
        se = means.std(ddof=1) / math.sqrt(used.sum())
    elif N > 1:
        var = max(ss.sum() - N * mean * mean, 0.0) / (N - 1)
        se = math.sqrt(var / N)
    else:
        se = 0.0
    if mean <= 0:
        return float("-inf"), float("nan"), int(N)
    return float(10 * math.log10(mean)), float(10 / math.log(10) * se / mean), int(N)


def sweep(cfg: ScenarioConfig, workers=None) -> MseReport:
    """Evaluate every configured (allocator, estimator) pair at every SNR."""
    workers = cfg.workers if workers is None else workers
    units = [(cfg, s, d) for s in range(len(cfg.snr_grid_db)) for d in range(cfg.drops)]
    if workers <= 1 or len(units) == 1:
        results = [_run_unit(u) for u in units]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_run_unit, units))
    infeasible = sum(r[1] for r in results)
    results = [r[0] for r in results]
    pairs = _pairs(cfg)
    rows = []
    for s, snr in enumerate(cfg.snr_grid_db):
        block = np.stack(results[s * cfg.drops:(s + 1) * cfg.drops])  # (drops, pairs, 6)
        for k, (a, e) in enumerate(pairs):
            p_db, p_se, n_p = _summarize(block[:, k, 0:3])
            c_db, c_se, _ = _summarize(block[:, k, 3:6])
            rows.append(MseRow(snr, a, e, p_db, c_db, n_p, p_se, c_se))
    prov = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "version": f"cogpilot {__version__}",
        "cmmse_infeasible_drops": int(infeasible),
    }
    return MseReport(rows, prov)


# -- report I/O ------------------------------------------------------------


def _fmt(x) -> str:
    return f"{x:.9g}" if isinstance(x, float) else str(x)


def _round(x):
    return float(f"{x:.9g}") if isinstance(x, float) else x


def report_to_csv(report: MseReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def _report_to_json(report: MseReport) -> str:
    rows = [{c: _round(getattr(r, c)) for c in CSV_COLUMNS} for r in report.rows]
    return json.dumps({"provenance": report.provenance, "rows": rows}, indent=2) + "\n"


def write_report(report: MseReport, path, format="csv"):
    """Write ``report`` as CSV or JSON; ``path="-"`` writes to standard output."""
    fmt = format.lower()
    if fmt not in ("csv", "json"):
        raise InvalidParameterError(f"unknown report format {format!r}")
    text = report_to_csv(report) if fmt == "csv" else _report_to_json(report)
    if path == "-" or path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc


def read_report(path) -> MseReport:
    """Read a report written by :func:`write_report` (format from content)."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        return MseReport([MseRow(**r) for r in data["rows"]], data["provenance"])
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(MseRow(
            float(rec["snr_db"]), rec["allocator"], rec["estimator"],
            float(rec["primary_mse_db"]), float(rec["cognitive_mse_db"]), int(rec["trials"]),
            float(rec["stderr_primary"]), float(rec["stderr_cognitive"]),
        ))
    return MseReport(rows, {})


# -- checks used by the command line ----------------------------------------


def oracle_check(cfg: ScenarioConfig, trials=None, snr_db=None):
    """Empirical versus analytic MSE on drop 0 for NMMSE and MMSE.

    Returns a list of ``(label, empirical, analytic, relative_error)``.
    """
    trials = cfg.trials if trials is None else trials
    snr = cfg.snr_grid_db[0] if snr_db is None else snr_db
    scenario = build_scenario(cfg, stream(cfg.seed, _SCENARIO, 0))
    alloc = allocate(scenario, cfg.allocators[0], snr)
    users = scenario.users
    sigma2 = noise_variance(cfg, snr)
    P_t = cfg.pilot_power
    pu = users.primary_user
    A = list(alloc.shared_set)
    R_pp = users.R(pu, PBS)
    R_sum = sum((users.R(j, PBS) for j in A), np.zeros_like(R_pp))
    out = []
    for kind in (EstimatorKind.NMMSE, EstimatorKind.MMSE):
        filters = design_filters(scenario, alloc, kind, sigma2)
        sums = np.zeros(2)
        done, block = 0, 0
        while done < trials:
            n = min(TRIAL_BLOCK, trials - done)
            h, noise = _draw_block(scenario, sigma2, stream(cfg.seed, _TRIALS, 0, block), n)
            r = _evaluate(scenario, alloc, filters, h, noise)
            sums += [r.primary_sq_error.sum(), r.cognitive_sq_errors.sum()]
            done += n
            block += 1
        emp = sums / trials
        if kind is EstimatorKind.MMSE:
            ana_p = analytic_mse_primary(R_pp, R_sum, sigma2, P_t)
            ana_c = analytic_mse_cognitive([users.R(j, CBS) for j in A], users.R(pu, CBS), sigma2, P_t)
        else:
            ana_p = analytic_mse_linear(filters[0], R_pp, R_sum, sigma2, P_t)
            ana_c = 0.0
            for j in A:
                others = users.R(pu, CBS) + sum((users.R(l, CBS) for l in A if l != j), np.zeros_like(R_pp))
                ana_c += analytic_mse_linear(filters[1][j], users.R(j, CBS), others, sigma2, P_t)
        out.append((f"{kind.value} primary", emp[0], ana_p, abs(emp[0] - ana_p) / ana_p))
        if A:
            out.append((f"{kind.value} cognitive", emp[1], ana_c, abs(emp[1] - ana_c) / ana_c))
    return out


def validate_scenario(cfg: ScenarioConfig):
    """Structural invariants of the configured scenario.

    Returns a list of ``(check, passed, detail)``.
    """
    scenario = build_scenario(cfg, stream(cfg.seed, _SCENARIO, 0))
    checks = []
    worst_h, worst_psd, worst_diag = 0.0, 0.0, 0.0
    for cov in scenario.users.covariances.values():
        R = cov.entries
        worst_h = max(worst_h, float(np.max(np.abs(R - R.conj().T))))
        w = np.linalg.eigvalsh(R)
        worst_psd = min(worst_psd, float(w.min() / w.max()))
        worst_diag = max(worst_diag, float(np.max(np.abs(np.diag(R) - 1))))
    checks.append(("covariances Hermitian", worst_h <= 1e-12, f"max asymmetry {worst_h:.2e}"))
    checks.append(("covariances PSD", worst_psd >= -1e-10, f"min eig / max eig {worst_psd:.2e}"))
    checks.append(("covariances unit diagonal", worst_diag <= 1e-12, f"max deviation {worst_diag:.2e}"))
    S = scenario.S
    gram = S.block.conj().T @ S.block
    err = float(np.linalg.norm(gram - S.total_power * np.eye(cfg.M)))
    checks.append(("training matrix S^H S = P_t I", err < 1e-10, f"Frobenius error {err:.2e}"))
    rng = stream(cfg.seed, 99)
    h = (rng.standard_normal(cfg.M) + 1j * rng.standard_normal(cfg.M))
    z = matched_filter(received_uplink(h, [], S, 0.0, rng), S)
    rt = float(np.max(np.abs(z - h)))
    checks.append(("matched-filter round trip", rt <= 1e-12, f"max error {rt:.2e}"))
    return checks
