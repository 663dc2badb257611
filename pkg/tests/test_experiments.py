import json
import math

import numpy as np
import pytest

from cogpilot.allocation import CBS, PBS, Allocation, Allocator
from cogpilot.errors import ConfigurationError, InvalidParameterError
from cogpilot.estimators import CmmseConfig, analytic_mse_primary
from cogpilot.experiments import (
    CSV_COLUMNS,
    MseReport,
    MseRow,
    ScenarioConfig,
    allocate,
    build_scenario,
    design_filters,
    noise_variance,
    oracle_check,
    read_report,
    report_to_csv,
    run_trial,
    run_trials,
    stream,
    sweep,
    validate_scenario,
    write_report,
)


def small(**kw):
    base = dict(M=4, num_cognitive_users=5, reuse_count=2, snr_grid_db=[10.0], trials=300, drops=2, seed=7)
    base.update(kw)
    return ScenarioConfig(**base)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        ScenarioConfig(M=0)
    with pytest.raises(ConfigurationError):
        ScenarioConfig(snr_grid_db=[])
    with pytest.raises(ConfigurationError):
        ScenarioConfig(reuse_count=30)
    with pytest.raises(ValueError):
        ScenarioConfig(estimators=["LS"])
    with pytest.raises(ConfigurationError):
        ScenarioConfig.from_dict({"antennas": 4})


def test_config_round_trip():
    cfg = small(cmmse=CmmseConfig(0.3, 4.0), estimators=["CMMSE"])
    back = ScenarioConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back == cfg
    assert back.cmmse_config.contamination_threshold == 0.3


def test_single_cognitive_user_scenario():
    sc = build_scenario(small(num_cognitive_users=1, reuse_count=1), stream(1, 1))
    assert sc.users.cognitive_users == [1]
    assert set(sc.users.covariances) == {(u, bs) for u in (0, 1) for bs in (PBS, CBS)}


def test_full_overlap_puts_everyone_in_one_sector():
    cfg = small(sector_overlap_deg=30.0)
    sc = build_scenario(cfg, stream(0, 1))
    for side in (PBS, CBS):
        assert np.ptp(sc.angles_deg[side]) == 0.0


def test_default_packing_spacing():
    cfg = ScenarioConfig()
    sc = build_scenario(cfg, stream(3, 1))
    for side in (PBS, CBS):
        ang = np.sort(sc.angles_deg[side])
        diffs = np.mod(np.diff(np.sort(np.mod(ang + 60.0, 120.0))), 24.0)
        assert np.all(np.isclose(diffs, 0.0) | np.isclose(diffs, 24.0))
        assert np.all((ang >= -60.0) & (ang < 60.0))
        # 21 users on a 5-slot ring: each slot is used at least four times
        slots = np.unique(np.round(np.mod(ang + 60.0, 24.0), 9))
        assert slots.size == 1


def test_scenario_is_deterministic():
    a = build_scenario(small(), stream(5, 1, 0))
    b = build_scenario(small(), stream(5, 1, 0))
    np.testing.assert_array_equal(a.angles_deg[PBS], b.angles_deg[PBS])


def test_explicit_angles_and_packing_errors():
    cfg = small(num_cognitive_users=2, pbs_angles_deg=[0, 20, -20], cbs_angles_deg=[1, 2, 3])
    sc = build_scenario(cfg, stream(0, 1))
    np.testing.assert_allclose(sc.angles_deg[PBS], [0, 20, -20])
    with pytest.raises(ConfigurationError):
        build_scenario(small(num_cognitive_users=2, pbs_angles_deg=[0, 1]), stream(0, 1))
    with pytest.raises(ConfigurationError):
        build_scenario(small(sector_width_deg=100.0), stream(0, 1))
    with pytest.raises(ConfigurationError):
        build_scenario(small(sector_overlap_deg=40.0), stream(0, 1))


def test_noise_variance_definition():
    cfg = small(tau=4)
    assert noise_variance(cfg, 0.0) == pytest.approx(4.0)
    assert noise_variance(cfg, 10.0) == pytest.approx(0.4)


@pytest.mark.parametrize("name", ["RPA", "MPA", "HPA", "UGPA"])
def test_allocators_respect_reuse_count(name):
    cfg = small()
    sc = build_scenario(cfg, stream(cfg.seed, 1, 0))
    a = allocate(sc, name, 10.0)
    assert a.algorithm is Allocator(name)
    assert len(a.shared_set) <= cfg.reuse_count
    assert set(a.shared_set) <= set(sc.users.cognitive_users)


def test_noiseless_uncontaminated_trial_is_exact():
    # wide sectors keep the 3-antenna covariances well conditioned
    cfg = small(M=3, sector_width_deg=50.0, sector_overlap_deg=0.0, num_cognitive_users=1, reuse_count=1)
    sc = build_scenario(cfg, stream(0, 1))
    r = run_trial(sc, Allocation([], Allocator.RPA), "MMSE", 150.0, stream(1, 2))
    assert r.primary_sq_error / r.primary_norm_sq < 1e-8


def test_run_trial_bit_identical():
    cfg = small()
    sc = build_scenario(cfg, stream(0, 1))
    alloc = allocate(sc, "HPA", 10.0)
    a = run_trial(sc, alloc, "MMSE", 10.0, stream(9, 9))
    b = run_trial(sc, alloc, "MMSE", 10.0, stream(9, 9))
    assert a.primary_sq_error == b.primary_sq_error
    np.testing.assert_array_equal(a.cognitive_sq_errors, b.cognitive_sq_errors)


def test_run_trials_match_analytic():
    cfg = small(M=4, reuse_count=2)
    sc = build_scenario(cfg, stream(2, 1))
    alloc = allocate(sc, "RPA", 5.0)
    r = run_trials(sc, alloc, "MMSE", 5.0, stream(2, 3), 100_000)
    users = sc.users
    R_pp = users.R(0, PBS)
    R_sum = sum(users.R(j, PBS) for j in alloc.shared_set)
    ana = analytic_mse_primary(R_pp, R_sum, noise_variance(cfg, 5.0), cfg.pilot_power)
    assert r.primary_sq_error.mean() == pytest.approx(ana, rel=0.02)


def test_cmmse_filters_flag_infeasible_threshold():
    cfg = small(estimators=["CMMSE"], cmmse=CmmseConfig(1e-9, 4.0))
    sc = build_scenario(cfg, stream(0, 1))
    alloc = allocate(sc, "RPA", 10.0)
    g_p, g_c = design_filters(sc, alloc, "CMMSE", noise_variance(cfg, 10.0))
    assert g_p.iterations == -1
    assert set(g_c) == set(alloc.shared_set)


def test_sweep_one_cell_per_pair():
    cfg = small(trials=1, drops=1, estimators=["NMMSE", "MMSE"])
    rep = sweep(cfg)
    assert len(rep.rows) == len(cfg.allocators) * 2
    assert {(r.allocator, r.estimator) for r in rep.rows} == {
        (a, e) for a in cfg.allocators for e in cfg.estimators
    }
    assert rep.provenance["seed"] == cfg.seed
    assert rep.provenance["config"] == cfg.to_dict()
    assert rep.provenance["version"].startswith("cogpilot ")


def test_sweep_values_finite_and_se_nonnegative():
    rep = sweep(small(snr_grid_db=[0.0, 10.0], estimators=["NMMSE", "MMSE", "CMMSE"]))
    for r in rep.rows:
        assert math.isfinite(r.primary_mse_db) and math.isfinite(r.cognitive_mse_db)
        assert r.stderr_primary >= 0 and r.stderr_cognitive >= 0
        assert r.trials == 600


def test_standard_error_scales_with_sqrt_trials():
    base = dict(drops=1, allocators=["HPA"], estimators=["MMSE"], snr_grid_db=[10.0])
    a = sweep(small(trials=4000, **base)).rows[0]
    b = sweep(small(trials=16000, **base)).rows[0]
    assert b.stderr_primary / a.stderr_primary == pytest.approx(0.5, rel=0.2)


def test_mse_nonincreasing_in_snr():
    cfg = ScenarioConfig(snr_grid_db=[0.0, 10.0, 20.0, 30.0], trials=500, drops=6, seed=11)
    rep = sweep(cfg)
    for a in cfg.allocators:
        rows = [rep.row(s, a, "MMSE") for s in cfg.snr_grid_db]
        for lo, hi in zip(rows, rows[1:]):
            tol_p = 3 * math.hypot(lo.stderr_primary, hi.stderr_primary)
            tol_c = 3 * math.hypot(lo.stderr_cognitive, hi.stderr_cognitive)
            assert hi.primary_mse_db <= lo.primary_mse_db + tol_p
            assert hi.cognitive_mse_db <= lo.cognitive_mse_db + tol_c


def test_worker_count_does_not_change_report():
    cfg = small(snr_grid_db=[0.0, 10.0], drops=3, trials=1500)
    assert report_to_csv(sweep(cfg, workers=1)) == report_to_csv(sweep(cfg, workers=3))


def test_empty_allocation_gives_nan_cognitive_mse():
    cfg = small(reuse_count=0, allocators=["RPA"], drops=1, trials=10)
    row = sweep(cfg).rows[0]
    assert math.isfinite(row.primary_mse_db)
    assert math.isnan(row.cognitive_mse_db)


def test_empty_report_csv_is_header_only(tmp_path):
    p = tmp_path / "r.csv"
    write_report(MseReport([], {}), p, "csv")
    assert p.read_text() == ",".join(CSV_COLUMNS) + "\n"


def test_report_round_trips(tmp_path):
    rep = sweep(small(snr_grid_db=[0.0, 10.0], trials=50, drops=1))
    assert len(rep.rows) == 2 * 4
    pj, pc = tmp_path / "r.json", tmp_path / "r.csv"
    write_report(rep, pj, "json")
    write_report(rep, pc, "csv")
    back = read_report(pj)
    assert back.rows == read_report(pc).rows
    assert back.provenance == json.loads(json.dumps(rep.provenance))
    assert len(pc.read_text().splitlines()) == 1 + len(rep.rows)
    for r, b in zip(rep.rows, back.rows):
        assert b.primary_mse_db == float(f"{r.primary_mse_db:.9g}")


def test_write_report_errors(tmp_path, capsys):
    rep = MseReport([MseRow(0.0, "RPA", "MMSE", -1.0, -2.0, 3, 0.1, 0.2)], {})
    with pytest.raises(InvalidParameterError):
        write_report(rep, tmp_path / "x", "xml")
    with pytest.raises(OSError, match="nodir"):
        write_report(rep, tmp_path / "nodir" / "r.csv", "csv")
    write_report(rep, "-", "csv")
    assert capsys.readouterr().out.splitlines()[1] == "0,RPA,MMSE,-1,-2,3,0.1,0.2"


def test_validate_and_oracle_helpers():
    cfg = small(trials=20_000)
    assert all(ok for _, ok, _ in validate_scenario(cfg))
    rows = oracle_check(cfg)
    assert {r[0] for r in rows} >= {"NMMSE primary", "MMSE primary"}
    assert all(r[3] < 0.05 for r in rows)
