"""Command-line entry point.

Subcommands map one-to-one onto the experiment drivers.  Settings resolve
with flags taking precedence over a JSON config file, which takes
precedence over built-in defaults.  Exit codes: 0 on success, 1 when a
verification or invariant check fails, 2 for invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import (
    ExperimentConfig,
    run_experiment,
    write_config_echo,
    write_rows,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BAD_CONFIG = 2

# JSON config keys and the ExperimentConfig fields they set.
_CONFIG_KEYS = {
    "seed": "seed",
    "trials": "trials",
    "samples": "samples",
    "npop": "npop",
    "dweight": "dweight",
    "cr": "cr",
    "iters": "iters",
    "eta": "eta",
    "period": "period",
    "out": "out",
    "format": "fmt",
    "stride": "stride",
    "tol_scale": "tol_scale",
    "eta_grid": "eta_grid",
    "alpha_grid": "alpha_grid",
}

_FLAG_FIELDS = (
    "seed",
    "trials",
    "samples",
    "out",
    "fmt",
    "npop",
    "dweight",
    "cr",
    "iters",
    "eta",
    "period",
    "stride",
    "tol_scale",
)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=None, help="master RNG seed")
    sub.add_argument("--trials", type=int, default=None, help="number of repetitions")
    sub.add_argument(
        "--samples", type=int, default=None, help="Monte Carlo samples per estimate"
    )
    sub.add_argument("--out", default=None, help="output file path")
    sub.add_argument(
        "--format",
        dest="fmt",
        choices=("csv", "jsonl"),
        default=None,
        help="output format",
    )
    sub.add_argument("--config", default=None, help="JSON config file")


def _add_de_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--npop", type=int, default=None, help="population size")
    sub.add_argument(
        "--dweight", type=float, default=None, help="differential weight"
    )
    sub.add_argument("--cr", type=float, default=None, help="crossover rate")
    sub.add_argument("--iters", type=int, default=None, help="iteration count")
    sub.add_argument(
        "--stride", type=int, default=None, help="iterations between output rows"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unot",
        description="Fidelity statistics and noise experiments for "
        "approximate universal spin-flip operations.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("verify", help="check closed forms against oracles")
    _add_common(sub)
    sub.add_argument(
        "--tol-scale",
        type=float,
        default=None,
        help="multiply every verification budget by this factor",
    )

    sub = subs.add_parser("tradeoff", help="sample circuits across the F-Delta region")
    _add_common(sub)

    sub = subs.add_parser(
        "noise-sweep", help="response of the optimal controls to control noise"
    )
    _add_common(sub)
    sub.add_argument("--eta", type=float, default=None, help="single noise degree")

    sub = subs.add_parser("optimize", help="differential-evolution search runs")
    _add_common(sub)
    _add_de_flags(sub)

    sub = subs.add_parser(
        "recover", help="search under periodically injected control noise"
    )
    _add_common(sub)
    _add_de_flags(sub)
    sub.add_argument("--eta", type=float, default=None, help="noise degree")
    sub.add_argument(
        "--period", type=int, default=None, help="iterations between injections"
    )

    sub = subs.add_parser("compensate", help="deviation of tilted-axis mixtures")
    _add_common(sub)

    return parser


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    merged: dict = {}
    if getattr(args, "config", None):
        data = json.loads(Path(args.config).read_text())
        if not isinstance(data, dict):
            raise ValueError("config file must hold a JSON object")
        for key, value in data.items():
            target = _CONFIG_KEYS.get(key)
            if target is None:
                raise ValueError(f"unknown config key {key!r}")
            if target in ("eta_grid", "alpha_grid") and value is not None:
                value = tuple(value)
            merged[target] = value
    for name in _FLAG_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    return ExperimentConfig(name=args.command, **merged)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _build_config(args)
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    try:
        result = run_experiment(config)
    except RuntimeError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    write_rows(config.output_path(), result.fieldnames, result.rows, config.fmt)
    echo_path = write_config_echo(config)
    for line in result.report:
        print(line)
    print(f"wrote {config.output_path()} ({len(result.rows)} rows), {echo_path}")
    return EXIT_OK if result.ok else EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
