"""Command-line front end.

Subcommands:

* ``capacity``  -- print the perfect-CSI capacity for given n and SNR.
* ``estimate``  -- empirical error-covariance statistics for one estimator
                   setting, printed as a JSON record.
* ``error-cov`` -- the error-covariance sweep, written as CSV.
* ``sweep``     -- a named figure experiment (fig2, fig3a, fig3b, fig4),
                   written as CSV.

Exit codes: 0 success, 2 bad flags, 3 configuration violations,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .air import capacity_perfect
from .channel import ChannelParams
from .estimators import EstimatorSpec, empirical_error_covariance, error_stats_to_json
from .experiments import (
    CSV_SCHEMA_VERSION,
    EXPERIMENTS,
    ConfigError,
    config_from_text,
    default_config,
    run_experiment,
)

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_NUMERICAL = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polair",
        description="Capacity and achievable information rates of unitary MIMO-AWGN channels.",
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"polair {__version__} (csv-schema {CSV_SCHEMA_VERSION})",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_cap = sub.add_parser("capacity", help="perfect-CSI capacity in bits/symbol")
    p_cap.add_argument("--n", type=int, default=2, help="channel dimension (default 2)")
    p_cap.add_argument("--eta-db", type=float, required=True, help="per-channel SNR in dB")

    p_est = sub.add_parser("estimate", help="empirical error covariance for one setting")
    p_est.add_argument("--estimator", choices=("ls", "kabsch"), required=True)
    p_est.add_argument("--n", type=int, default=2)
    p_est.add_argument("--eta-db", type=float, required=True)
    p_est.add_argument("--L", type=int, default=8, help="pilot length (default 8)")
    p_est.add_argument("--trials", type=int, default=10_000)
    p_est.add_argument("--seed", type=int, default=0)
    p_est.add_argument("--out", default="-", help="output path, or - for stdout (default)")

    for name, help_text in (
        ("error-cov", "error-covariance sweep (CSV)"),
        ("sweep", "run a named experiment sweep (CSV)"),
    ):
        p = sub.add_parser(name, help=help_text)
        if name == "sweep":
            p.add_argument("--experiment", choices=[e for e in EXPERIMENTS if e != "error_cov"])
        p.add_argument("--config", help="key=value config file; flags override its entries")
        p.add_argument("--eta-db", help="comma-separated SNR grid in dB")
        p.add_argument("--L", help="comma-separated pilot-length grid")
        p.add_argument("--E2", help="comma-separated per-DOF error grid (fig2)")
        p.add_argument("--input", choices=("gaussian", "dp_qpsk", "dp_16qam"))
        p.add_argument("--estimator", help="comma-separated subset of ls,kabsch")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output path, - for stdout (default ./out/<experiment>-<seed>.csv)")
        p.add_argument("--threads", type=int, default=0, help="worker threads, 0 = auto (results are thread-count independent)")
    return parser


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _write_text(out: str | None, default_path: Path, text: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        return
    path = Path(out) if out else default_path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    print(f"wrote {path}")


def _build_sweep_config(args: argparse.Namespace, experiment: str):
    if args.config:
        config = config_from_text(Path(args.config).read_text())
        if experiment and config.experiment != experiment:
            raise ConfigError(
                f"config file experiment {config.experiment!r} does not match {experiment!r}"
            )
    else:
        config = default_config(experiment, master_seed=args.seed or 0)
    overrides = {}
    if args.eta_db is not None:
        overrides["eta_db_grid"] = tuple(float(v) for v in args.eta_db.split(","))
    if args.L is not None:
        overrides["L_grid"] = tuple(int(v) for v in args.L.split(","))
    if args.E2 is not None:
        overrides["E2_grid"] = tuple(float(v) for v in args.E2.split(","))
    if args.input is not None:
        overrides["input"] = args.input
    if args.estimator is not None:
        overrides["estimators"] = tuple(args.estimator.split(","))
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if overrides:
        config = replace(config, **overrides)
    config.validate()
    return config


def _cmd_capacity(args: argparse.Namespace) -> int:
    if args.n < 1:
        raise ConfigError(f"--n must be >= 1, got {args.n}")
    eta = 10.0 ** (args.eta_db / 10.0)
    est = capacity_perfect(args.n, eta)
    print(f"{est.value:.4f} bits/symbol")
    return EXIT_OK


def _cmd_estimate(args: argparse.Namespace) -> int:
    try:
        params = ChannelParams.from_eta_db(args.n, args.eta_db)
        spec = EstimatorSpec(args.estimator)
        rng = np.random.default_rng(np.random.SeedSequence(args.seed))
        stats = empirical_error_covariance(spec, params, args.L, args.trials, rng)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    record = error_stats_to_json(stats, params, args.L)
    if args.out == "-":
        print(record)
    else:
        Path(args.out).write_text(record + "\n")
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace, experiment: str) -> int:
    if experiment == "" and args.experiment is None and not args.config:
        raise ConfigError("sweep requires --experiment or --config")
    config = _build_sweep_config(args, experiment or args.experiment or "")
    result = run_experiment(config)
    default_path = Path("out") / f"{config.experiment}-{config.master_seed}.csv"
    _write_text(args.out, default_path, result.to_csv_string())
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.subcommand == "capacity":
            return _cmd_capacity(args)
        if args.subcommand == "estimate":
            return _cmd_estimate(args)
        if args.subcommand == "error-cov":
            return _cmd_sweep(args, "error_cov")
        if args.subcommand == "sweep":
            if args.experiment is None and not args.config:
                raise ConfigError("sweep requires --experiment or --config")
            return _cmd_sweep(args, args.experiment or "")
        raise ConfigError(f"unknown subcommand {args.subcommand!r}")
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail(f"numerical failure: {exc}", EXIT_NUMERICAL)
    except OSError as exc:
        return _fail(str(exc), EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())
