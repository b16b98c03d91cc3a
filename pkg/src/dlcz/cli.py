"""Command-line entry point: ``dlcz run <config>`` and ``dlcz verify <config>``.

Exit status is 0 on success, 1 when an oracle or Monte-Carlo residual exceeds
its tolerance, and 2 for configuration or output errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .errors import ConfigError
from .sweep import SweepResult, load_config, run_scenario, write_outputs

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dlcz", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "evaluate a scenario and write its CSV dataset"),
        ("verify", "evaluate with oracle cross-checks and report residuals"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="scenario JSON file")
        p.add_argument("--out", help="output CSV path (overrides the config)")
        p.add_argument("--seed", type=int, help="seed for Monte-Carlo checks (unsigned 64-bit)")
        p.add_argument("--oracle", action="store_true", help="enable Fock-space cross-checks")
        p.add_argument("--nmax", type=int, help="Fock truncation depth")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
    return parser


def _print_summary(result: SweepResult, verbose: bool, stream) -> None:
    print(f"{result.kind}: {len(result.rows)} rows", file=stream)
    if verbose or result.oracle:
        for metric, stats in sorted(result.residual_summary().items()):
            print(
                f"  {metric}: max residual {stats['max']:.3e}, mean {stats['mean']:.3e} over {stats['count']}",
                file=stream,
            )
    for index, check in result.breaches:
        print(
            f"  BREACH row {index}: {check.metric} residual {check.residual:.3e} > tolerance {check.tolerance:.3e}",
            file=stream,
        )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        if args.nmax is not None and args.nmax < 1:
            raise ConfigError("--nmax must be >= 1")
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg = load_config(args.config)
        oracle = True if (args.oracle or args.command == "verify") else None
        result = run_scenario(cfg, oracle=oracle, n_max=args.nmax, seed=args.seed, jobs=args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = args.out or cfg.output
    if out:
        try:
            write_outputs(result, out)
        except OSError as exc:
            print(f"output error: {out}: {exc.strerror}", file=sys.stderr)
            return EXIT_CONFIG

    _print_summary(result, args.command == "verify", sys.stdout)
    if args.command == "verify":
        print(json.dumps(result.residual_summary(), sort_keys=True))
    return EXIT_TOLERANCE if result.breaches else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
