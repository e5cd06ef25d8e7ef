"""Command-line driver: simulate paths, estimate drifts, run experiments.

Commands
--------
simulate   write one path CSV per replicate of the configured experiment
estimate   read a path CSV, print the drift estimates and Itô diagnostic
mc         run the full replicate experiment and write the report directory
report     rebuild tables/figures from a stored report directory

Configuration is a flat ``key = value`` text file with ``#`` comments and
the keys a, b, alpha, beta, sigma1, sigma2, rho, y0, x0, T, N, scheme,
replicates, seed.  Values resolve in the order preset < config file <
``--set key=value`` overrides.  Exit status is 0 exactly when no error
occurred; every error prints its structured cause to stderr.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from .errors import ConfigParseError, HestonLabError
from .estimate import estimate_record, ito_cross_check, lse_from_functionals, path_functionals
from .model import ModelParams
from .montecarlo import ExperimentConfig, PARAM_NAMES, preset_config, run_replicates
from .reports import config_to_mapping, regenerate_report, write_report
from .simulate import Scheme, SeedLineage, TimeGrid, read_path_csv, simulate_xy, write_path_csv

__all__ = ["main", "parse_config", "cmd_simulate", "cmd_estimate", "cmd_mc", "cmd_report"]

_FLOAT_KEYS = ("a", "b", "alpha", "beta", "sigma1", "sigma2", "rho", "y0", "x0", "T")
_INT_KEYS = ("N", "replicates", "seed")
_ALL_KEYS = _FLOAT_KEYS + _INT_KEYS + ("scheme",)

_PATH_NAME = re.compile(r"path_(?P<scheme>[A-Za-z]+)_s(?P<seed>\d+)_r(?P<rep>\d+)\.csv$")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


# ---------------------------------------------------------------------------
# configuration resolution


def read_config_file(path) -> dict[str, str]:
    """Parse a flat key-value config file into a string mapping.

    Raises:
        ConfigParseError: malformed line or unknown key, with line number.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigParseError(f"cannot read config file {path}: {exc}") from exc
    mapping: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"{path}: line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _ALL_KEYS:
            raise ConfigParseError(f"{path}: line {lineno}: unknown key {key!r}")
        if not value:
            raise ConfigParseError(f"{path}: line {lineno}: empty value for {key!r}")
        mapping[key] = value
    return mapping


def build_config(mapping: dict[str, str]) -> ExperimentConfig:
    """Validate a complete string mapping into an ExperimentConfig.

    Raises:
        ConfigParseError: missing key or uncastable value (names the key).
        InvalidParams / FellerViolated: delegated coefficient validation.
    """
    missing = [key for key in _ALL_KEYS if key not in mapping]
    if missing:
        raise ConfigParseError(f"missing config key(s): {', '.join(missing)}")
    values: dict[str, object] = {}
    for key in _FLOAT_KEYS:
        try:
            values[key] = float(mapping[key])
        except ValueError:
            raise ConfigParseError(
                f"config key {key!r}: not a number: {mapping[key]!r}"
            ) from None
    for key in _INT_KEYS:
        try:
            values[key] = int(mapping[key])
        except ValueError:
            raise ConfigParseError(
                f"config key {key!r}: not an integer: {mapping[key]!r}"
            ) from None
    try:
        scheme = Scheme.parse(mapping["scheme"])
    except ValueError as exc:
        raise ConfigParseError(f"config key 'scheme': {exc}") from None
    params = ModelParams(
        a=values["a"], b=values["b"], alpha=values["alpha"], beta=values["beta"],
        sigma1=values["sigma1"], sigma2=values["sigma2"], rho=values["rho"],
        y0=values["y0"], x0=values["x0"],
    )
    return ExperimentConfig(
        params=params,
        grid=TimeGrid(horizon=values["T"], steps=values["N"]),
        scheme=scheme,
        replicates=values["replicates"],
        master_seed=values["seed"],
    )


def _parse_override(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise ConfigParseError(f"--set expects key=value, got {text!r}")
    key, value = (part.strip() for part in text.split("=", 1))
    if key not in _ALL_KEYS:
        raise ConfigParseError(f"--set: unknown key {key!r}")
    if not value:
        raise ConfigParseError(f"--set: empty value for {key!r}")
    return key, value


def _resolve_mapping(config_path, overrides, preset) -> dict[str, str]:
    mapping: dict[str, str] = {}
    if preset:
        base = config_to_mapping(preset_config(preset))
        mapping.update({key: _fmt(base[key]) for key in _ALL_KEYS})
    if config_path:
        mapping.update(read_config_file(config_path))
    for item in overrides or ():
        key, value = _parse_override(item)
        mapping[key] = value
    return mapping


def parse_config(path, overrides=(), preset: str | None = None) -> ExperimentConfig:
    """Resolve preset, file, and overrides into a validated ExperimentConfig."""
    return build_config(_resolve_mapping(path, overrides, preset))


# ---------------------------------------------------------------------------
# commands


def _path_filename(scheme: Scheme, seed: int, replicate: int) -> str:
    return f"path_{scheme.value}_s{seed}_r{replicate:04d}.csv"


def cmd_simulate(config: ExperimentConfig, out_dir) -> list[Path]:
    """Simulate every replicate of the config and write one CSV per path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for r in range(config.replicates):
        path_obj = simulate_xy(
            config.params, config.grid, config.scheme,
            SeedLineage(config.master_seed, r),
        )
        dest = out / _path_filename(config.scheme, config.master_seed, r)
        write_path_csv(path_obj, dest)
        written.append(dest)
    return written


def cmd_estimate(path_csv, sigma1: float | None = None) -> dict:
    """Estimate the four drift coefficients from a path CSV.

    Emits the flat estimate record; when ``sigma1`` is known (from a config,
    preset, or --set), the Itô cross-check diagnostic is appended.
    """
    path_obj = read_path_csv(path_csv)
    f = path_functionals(path_obj)
    est = lse_from_functionals(f)
    match = _PATH_NAME.search(str(path_csv))
    scheme = match.group("scheme") if match else None
    seed = int(match.group("seed")) if match else None
    record = estimate_record(est, scheme=scheme, seed=seed)
    if sigma1 is not None:
        diag = ito_cross_check(f, sigma1)
        record["i3_direct"] = diag.i3_direct
        record["i3_ito"] = diag.i3_ito
        record["qv_ratio"] = diag.qv_ratio
    return record


def cmd_mc(config: ExperimentConfig, out_dir, threads: int = 1):
    """Run the replicate experiment and write the full report directory."""
    run = run_replicates(config, threads=threads)
    summary, deviations = write_report(out_dir, run)
    return run, summary, deviations


def cmd_report(out_dir):
    """Rebuild tables and figures from a stored report directory."""
    return regenerate_report(out_dir)


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heston-lab",
        description="Simulation and drift-estimation experiments for a "
        "square-root stochastic volatility model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", metavar="PATH", help="key-value config file")
        p.add_argument(
            "--set", dest="overrides", action="append", default=[],
            metavar="KEY=VALUE", help="override one config key (repeatable)",
        )
        p.add_argument("--out", metavar="DIR", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1, metavar="K",
                       help="worker thread cap (never affects results)")
        p.add_argument("--preset", choices=("table1", "paper", "desk"),
                       help="named base config")

    p_sim = sub.add_parser("simulate", help="write simulated path CSVs")
    add_common(p_sim)
    p_est = sub.add_parser("estimate", help="estimate drift coefficients from a path CSV")
    p_est.add_argument("path_csv", help="path CSV file (header t,y,x)")
    add_common(p_est)
    p_mc = sub.add_parser("mc", help="run a replicate experiment and write reports")
    add_common(p_mc)
    p_rep = sub.add_parser("report", help="regenerate tables from a report directory")
    add_common(p_rep)
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "simulate":
        config = parse_config(args.config, args.overrides, args.preset)
        for dest in cmd_simulate(config, args.out):
            print(dest)
        return 0
    if args.command == "estimate":
        mapping = _resolve_mapping(args.config, args.overrides, args.preset)
        sigma1 = float(mapping["sigma1"]) if "sigma1" in mapping else None
        record = cmd_estimate(args.path_csv, sigma1=sigma1)
        for key, value in record.items():
            print(f"{key}={_fmt(value)}")
        return 0
    if args.command == "mc":
        config = parse_config(args.config, args.overrides, args.preset)
        run, summary, deviations = cmd_mc(config, args.out, threads=args.threads)
        print(f"replicates: {summary.n_results} ok, {len(run.failures)} failed")
        for name in PARAM_NAMES:
            s = summary.per_param[name]
            print(
                f"{name}: bias={s.expected_bias:.6g} l1={s.l1_error:.6g} "
                f"l2={s.l2_error:.6g}"
            )
        if deviations is not None and deviations.low_confidence:
            print("covariance check: low confidence (fewer than 100 replicates)")
        print(f"report written to {args.out}")
        return 0
    if args.command == "report":
        cmd_report(args.out)
        print(f"report regenerated in {args.out}")
        return 0
    raise ConfigParseError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (HestonLabError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
