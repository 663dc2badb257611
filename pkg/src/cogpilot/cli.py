"""``cogpilot`` command line.

    cogpilot sweep    --config s.json --out r.csv
    cogpilot allocate --config s.json [--snr 10]
    cogpilot validate --config s.json
    cogpilot oracle   --config s.json --trials 100000

The config file is JSON with :class:`~cogpilot.experiments.ScenarioConfig`
field names. ``--set key=value`` overrides a field (dotted paths reach into
nested objects such as ``cmmse.contamination_threshold``); values are parsed
as JSON and fall back to plain strings.

Exit codes: 0 success, 1 numerical or convergence failure, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigurationError, ConvergenceError, InvalidParameterError, NumericalDomainError
from .experiments import (
    ScenarioConfig,
    allocate,
    build_scenario,
    oracle_check,
    stream,
    sweep,
    validate_scenario,
    write_report,
)

__all__ = ["CliCommand", "parse_args", "run", "main", "load_config"]

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2
VERBS = ("sweep", "allocate", "validate", "oracle")
ORACLE_TOL = 0.02


@dataclass
class CliCommand:
    verb: str
    config_path: str
    output_path: str = "-"
    format: Optional[str] = None
    overrides: list = field(default_factory=list)
    seed: Optional[int] = None
    trials: Optional[int] = None
    workers: Optional[int] = None
    snr_db: Optional[float] = None

    def __post_init__(self):
        if self.verb not in VERBS:
            raise ConfigurationError(f"unknown command {self.verb!r}")

    @property
    def report_format(self) -> str:
        if self.format:
            return self.format
        return "json" if str(self.output_path).lower().endswith(".json") else "csv"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cogpilot", description="Cognitive-network pilot allocation simulator")
    sub = p.add_subparsers(dest="verb", required=True, metavar="{" + ",".join(VERBS) + "}")
    for verb in VERBS:
        s = sub.add_parser(verb)
        s.add_argument("--config", required=True, metavar="PATH", help="JSON scenario config")
        s.add_argument("--out", default="-", metavar="PATH", help="output path, '-' for stdout")
        s.add_argument("--format", choices=("csv", "json"), default=None)
        s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", dest="overrides")
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--trials", type=int, default=None)
        s.add_argument("--workers", type=int, default=None)
        s.add_argument("--snr", type=float, default=None, dest="snr_db",
                       help="SNR point for allocate/oracle (default: first grid point)")
    return p


def parse_args(argv) -> CliCommand:
    """Parse ``argv`` (without the program name).

    Usage errors raise ``SystemExit(2)`` after printing the usage message.
    """
    ns = _parser().parse_args(list(argv))
    return CliCommand(
        verb=ns.verb,
        config_path=ns.config,
        output_path=ns.out,
        format=ns.format,
        overrides=list(ns.overrides),
        seed=ns.seed,
        trials=ns.trials,
        workers=ns.workers,
        snr_db=ns.snr_db,
    )


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(data: dict, item: str) -> None:
    if "=" not in item:
        raise ConfigurationError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    parts = key.strip().split(".")
    node = data
    for p in parts[:-1]:
        nxt = node.get(p)
        if nxt is None:
            nxt = node[p] = {}
        if not isinstance(nxt, dict):
            raise ConfigurationError(f"override path {key!r}: {p!r} is not an object")
        node = nxt
    node[parts[-1]] = _parse_value(raw)


def load_config(cmd: CliCommand) -> ScenarioConfig:
    if not os.path.isfile(cmd.config_path):
        raise ConfigurationError(f"config file not found: {cmd.config_path}")
    try:
        with open(cmd.config_path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{cmd.config_path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"{cmd.config_path}: top level must be an object")
    for item in cmd.overrides:
        apply_override(data, item)
    if cmd.seed is not None:
        data["seed"] = cmd.seed
    if cmd.trials is not None:
        data["trials"] = cmd.trials
    if cmd.workers is not None:
        data["workers"] = cmd.workers
    return ScenarioConfig.from_dict(data)


def _emit(text, path):
    if path in ("-", None):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _run_allocate(cfg: ScenarioConfig, cmd: CliCommand) -> int:
    snr = cfg.snr_grid_db[0] if cmd.snr_db is None else cmd.snr_db
    scenario = build_scenario(cfg, stream(cfg.seed, 1, 0))
    lines = [f"# snr_db {snr:g}, primary user 0 at PBS {scenario.angles_deg['PBS'][0]:.3f} deg"]
    for name in cfg.allocators:
        alloc = allocate(scenario, name, snr)
        lines.append(f"{name}: {' '.join(str(u) for u in alloc.shared_set) or '(none)'}")
        for key, val in alloc.diagnostics.items():
            lines.append(f"  {key}: {_diag(val)}")
    _emit("\n".join(lines) + "\n", cmd.output_path)
    return EXIT_OK


def _diag(val):
    if isinstance(val, float):
        return f"{val:.6g}"
    if isinstance(val, dict):
        return "{" + ", ".join(f"{k}: {_diag(v)}" for k, v in val.items()) + "}"
    if isinstance(val, (list, tuple)):
        return "[" + ", ".join(_diag(v) for v in val) + "]"
    return str(val)


def _run_validate(cfg: ScenarioConfig, cmd: CliCommand) -> int:
    checks = validate_scenario(cfg)
    lines = [f"{'PASS' if ok else 'FAIL'}  {name}  ({detail})" for name, ok, detail in checks]
    ok = all(c[1] for c in checks)
    lines.append("all invariants hold" if ok else "some invariants FAILED")
    _emit("\n".join(lines) + "\n", cmd.output_path)
    return EXIT_OK if ok else EXIT_NUMERIC


def _run_oracle(cfg: ScenarioConfig, cmd: CliCommand) -> int:
    rows = oracle_check(cfg, snr_db=cmd.snr_db)
    lines = [f"# {cfg.trials} trials, relative tolerance {ORACLE_TOL}"]
    for label, emp, ana, rel in rows:
        lines.append(f"{label:20s} empirical {emp:.6g}  analytic {ana:.6g}  rel_err {rel:.4f}")
    _emit("\n".join(lines) + "\n", cmd.output_path)
    return EXIT_OK if all(r[3] < ORACLE_TOL for r in rows) else EXIT_NUMERIC


def run(cmd: CliCommand) -> int:
    """Execute ``cmd`` and return the exit code."""
    try:
        cfg = load_config(cmd)
        if cmd.verb == "sweep":
            write_report(sweep(cfg), cmd.output_path, cmd.report_format)
            return EXIT_OK
        if cmd.verb == "allocate":
            return _run_allocate(cfg, cmd)
        if cmd.verb == "validate":
            return _run_validate(cfg, cmd)
        return _run_oracle(cfg, cmd)
    except (ConvergenceError, NumericalDomainError) as exc:
        print(f"cogpilot {cmd.verb}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigurationError, InvalidParameterError, ValueError, TypeError) as exc:
        print(f"cogpilot {cmd.verb}: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"cogpilot {cmd.verb}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> int:
    try:
        cmd = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigurationError as exc:
        print(f"cogpilot: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return run(cmd)
